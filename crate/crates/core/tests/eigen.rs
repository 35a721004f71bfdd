mod common;

use common::{dirichlet_min_eigenvalue, min_interior_degree, random_bc, random_network, rng, BoundaryKind};
use plap::boundary::BoundaryCondition;
use plap::eigen::{first_eigenpair, rayleigh_quotient, RayleighConfig};
use plap::error::Error;
use plap::operators::{Exponent, State};
use rand::Rng;

const TOL: f64 = 1e-8;

#[test]
fn minimality_against_random_admissible_states() {
    let mut r = rng(11);
    for _ in 0..12 {
        let (ni, nb) = (r.gen_range(1..=5), r.gen_range(1..=3));
        let net = random_network(&mut r, ni, nb, false);
        let bc = random_bc(&mut r, &net, BoundaryKind::Mixed);
        let p = Exponent::new([1.5, 2.0, 3.0][r.gen_range(0..3)]).unwrap();
        let pair = first_eigenpair(&net, &bc, p, &RayleighConfig::default()).unwrap();
        assert!((pair.rayleigh - pair.lambda).abs() <= TOL * (1.0 + pair.lambda));
        for _ in 0..100 {
            let v = State::from_fn(&net, |x| {
                if net.is_interior(x) || bc.in_gamma(x) {
                    r.gen_range(-1.0..1.0)
                } else {
                    0.0
                }
            })
            .unwrap();
            if let Ok(q) = rayleigh_quotient(&net, &bc, &v, p) {
                assert!(pair.lambda <= q + TOL, "{} > {q}", pair.lambda);
            }
        }
    }
}

#[test]
fn eigenfunction_sign_pattern() {
    let mut r = rng(12);
    for _ in 0..12 {
        let (ni, nb) = (r.gen_range(1..=5), r.gen_range(1..=3));
        let net = random_network(&mut r, ni, nb, false);
        let bc = random_bc(&mut r, &net, BoundaryKind::Mixed);
        let p = Exponent::new([1.5, 2.0, 3.0][r.gen_range(0..3)]).unwrap();
        let pair = first_eigenpair(&net, &bc, p, &RayleighConfig::default()).unwrap();
        for x in net.vertices() {
            if net.is_interior(x) || bc.in_gamma(x) {
                assert!(pair.phi[x] > 0.0);
            } else {
                assert_eq!(pair.phi[x], 0.0);
            }
        }
        assert!(pair.lambda <= min_interior_degree(&net) + TOL);
        let mass: f64 = net.interior().iter().map(|&x| pair.phi[x].abs().powf(p.get())).sum();
        assert!((mass - 1.0).abs() < 1e-9);
    }
}

#[test]
fn two_vertex_path_oracle() {
    let net = common::path(2);
    let bc = BoundaryCondition::dirichlet(&net);
    let pair = first_eigenpair(&net, &bc, Exponent::new(2.0).unwrap(), &RayleighConfig::default()).unwrap();
    assert!((pair.lambda - 1.0).abs() < TOL);
    assert!((dirichlet_min_eigenvalue(&net) - 1.0).abs() < 1e-12);
}

#[test]
fn deterministic_for_a_seed() {
    let mut r = rng(13);
    let net = random_network(&mut r, 5, 3, false);
    let bc = random_bc(&mut r, &net, BoundaryKind::Mixed);
    let p = Exponent::new(1.5).unwrap();
    let cfg = RayleighConfig { seed: 42, ..Default::default() };
    let a = first_eigenpair(&net, &bc, p, &cfg).unwrap();
    let b = first_eigenpair(&net, &bc, p, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn inadmissible_rayleigh_arguments() {
    let net = common::path(1);
    let bc = BoundaryCondition::dirichlet(&net);
    let p = Exponent::new(2.0).unwrap();
    assert!(matches!(
        rayleigh_quotient(&net, &bc, &State::zeros(&net), p),
        Err(Error::NotAdmissible(_))
    ));
    let bad = State::new(&net, vec![1.0, 1.0, 0.0]).unwrap();
    assert!(matches!(rayleigh_quotient(&net, &bc, &bad, p), Err(Error::NotAdmissible(_))));
}
