mod common;

use common::{random_bc, random_network, rng, BoundaryKind};
use plap::error::{Error, Invariant};
use plap::network::{load_network, load_problem, GraphDocument};
use proptest::prelude::*;

proptest! {
    #[test]
    fn document_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_network(&mut r, 1 + (seed % 6) as usize, 1 + (seed % 4) as usize, seed % 2 == 0);
        let bc = random_bc(&mut r, &net, BoundaryKind::Mixed);
        let text = net.to_document(&bc).to_json();
        let (again, bc2) = load_problem(&text).unwrap();
        prop_assert_eq!(again.len(), net.len());
        prop_assert_eq!(again.edges(), net.edges());
        prop_assert_eq!(bc2, bc);
    }

    #[test]
    fn weights_are_symmetric_and_degrees_consistent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_network(&mut r, 4, 3, true);
        let mut total = 0.0;
        for x in net.vertices() {
            for &(y, w) in net.neighbors(x) {
                prop_assert_eq!(net.weight(y, x), w);
            }
            total += net.degree(x).unwrap();
        }
        let edge_sum: f64 = net.edges().iter().map(|e| e.weight).sum();
        prop_assert!((total - 2.0 * edge_sum).abs() < 1e-12 * total);
    }
}

fn invariant_of(text: &str) -> Option<Invariant> {
    match load_network(text) {
        Err(Error::Validation { invariant, .. }) => Some(invariant),
        _ => None,
    }
}

#[test]
fn validation_failures_name_the_invariant() {
    let disconnected = r#"{"vertices":[
        {"name":"x","role":"interior"},{"name":"z","role":"boundary","mu":0,"sigma":1},
        {"name":"y","role":"interior"},{"name":"w","role":"boundary","mu":0,"sigma":1}],
      "edges":[{"a":"x","b":"z","w":1},{"a":"y","b":"w","w":1}]}"#;
    assert_eq!(invariant_of(disconnected), Some(Invariant::Connected));

    let orphan = r#"{"vertices":[
        {"name":"x","role":"interior"},{"name":"z","role":"boundary","mu":0,"sigma":1},
        {"name":"w","role":"boundary","mu":0,"sigma":1}],
      "edges":[{"a":"x","b":"z","w":1},{"a":"z","b":"w","w":1}]}"#;
    assert_eq!(invariant_of(orphan), Some(Invariant::BoundaryNeighbor));

    let negative = r#"{"vertices":[
        {"name":"x","role":"interior"},{"name":"z","role":"boundary","mu":0,"sigma":1}],
      "edges":[{"a":"x","b":"z","w":-1}]}"#;
    assert_eq!(invariant_of(negative), Some(Invariant::Weight));
}

#[test]
fn schema_errors() {
    assert!(matches!(load_network("{"), Err(Error::Schema(_))));
    let missing_sigma = r#"{"vertices":[
        {"name":"x","role":"interior"},{"name":"z","role":"boundary","mu":1}],
      "edges":[{"a":"x","b":"z","w":1}]}"#;
    assert!(matches!(GraphDocument::from_json(missing_sigma), Err(Error::Schema(_))));
}
