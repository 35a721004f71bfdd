#![allow(dead_code)]

use nalgebra::DMatrix;
use plap::boundary::BoundaryCondition;
use plap::network::{Network, Role, VertexId};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn path(interior: usize) -> Network {
    let mut names = vec![("z0".to_string(), Role::Boundary)];
    names.extend((1..=interior).map(|i| (format!("x{i}"), Role::Interior)));
    names.push((format!("z{}", interior + 1), Role::Boundary));
    let edges: Vec<(String, String, f64)> = names
        .windows(2)
        .map(|w| (w[0].0.clone(), w[1].0.clone(), 1.0))
        .collect();
    Network::new(names, edges).unwrap()
}

/// Random connected network: a random tree on the interior plus extra
/// interior edges, every boundary vertex hanging off one or two interior
/// vertices, and optionally a few boundary–boundary edges.
pub fn random_network(
    rng: &mut ChaCha8Rng,
    interior: usize,
    boundary: usize,
    boundary_edges: bool,
) -> Network {
    let mut vertices: Vec<(String, Role)> = (0..interior)
        .map(|i| (format!("x{i}"), Role::Interior))
        .collect();
    vertices.extend((0..boundary).map(|i| (format!("z{i}"), Role::Boundary)));
    let mut pairs = std::collections::BTreeSet::new();
    for i in 1..interior {
        let j = rng.gen_range(0..i);
        pairs.insert((format!("x{j}"), format!("x{i}")));
    }
    for _ in 0..rng.gen_range(0..=interior) {
        let i = rng.gen_range(0..interior);
        let j = rng.gen_range(0..interior);
        if i < j {
            pairs.insert((format!("x{i}"), format!("x{j}")));
        }
    }
    for z in 0..boundary {
        for _ in 0..rng.gen_range(1..=2) {
            let x = rng.gen_range(0..interior);
            pairs.insert((format!("x{x}"), format!("z{z}")));
        }
    }
    if boundary_edges && boundary > 1 {
        for _ in 0..rng.gen_range(0..boundary) {
            let a = rng.gen_range(0..boundary);
            let b = rng.gen_range(0..boundary);
            if a < b {
                pairs.insert((format!("z{a}"), format!("z{b}")));
            }
        }
    }
    let edges: Vec<(String, String, f64)> = pairs
        .into_iter()
        .map(|(a, b)| (a, b, rng.gen_range(0.5..2.0)))
        .collect();
    Network::new(vertices, edges).unwrap()
}

/// Random tree on the interior with Dirichlet leaves attached; every
/// boundary vertex has exactly one interior neighbour.
pub fn random_tree(rng: &mut ChaCha8Rng, interior: usize) -> Network {
    let boundary = rng.gen_range(1..=interior + 1);
    random_network_tree_only(rng, interior, boundary)
}

fn random_network_tree_only(rng: &mut ChaCha8Rng, interior: usize, boundary: usize) -> Network {
    let mut vertices: Vec<(String, Role)> = (0..interior)
        .map(|i| (format!("x{i}"), Role::Interior))
        .collect();
    vertices.extend((0..boundary).map(|i| (format!("z{i}"), Role::Boundary)));
    let mut edges = Vec::new();
    for i in 1..interior {
        let j = rng.gen_range(0..i);
        edges.push((format!("x{j}"), format!("x{i}"), rng.gen_range(0.5..2.0)));
    }
    for z in 0..boundary {
        let x = rng.gen_range(0..interior);
        edges.push((format!("x{x}"), format!("z{z}"), rng.gen_range(0.5..2.0)));
    }
    Network::new(vertices, edges).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
    Mixed,
}

/// Random coefficients; `Mixed` draws Dirichlet, Neumann and Robin vertices.
pub fn random_bc(rng: &mut ChaCha8Rng, net: &Network, kind: BoundaryKind) -> BoundaryCondition {
    let entries: Vec<(VertexId, f64, f64)> = net
        .boundary()
        .iter()
        .map(|&z| match kind {
            BoundaryKind::Dirichlet => (z, 0.0, 1.0),
            BoundaryKind::Neumann => (z, rng.gen_range(0.5..2.0), 0.0),
            BoundaryKind::Mixed => match rng.gen_range(0..3) {
                0 => (z, 0.0, 1.0),
                1 => (z, 1.0, 0.0),
                _ => (z, rng.gen_range(0.5..2.0), rng.gen_range(0.1..1.0)),
            },
        })
        .collect();
    BoundaryCondition::new(net, entries).unwrap()
}

pub fn choose<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    *items.choose(rng).unwrap()
}

/// Smallest eigenvalue of the Dirichlet Laplacian restricted to `S`,
/// computed by a dense symmetric eigensolver.
pub fn dirichlet_min_eigenvalue(net: &Network) -> f64 {
    let interior = net.interior();
    let n = interior.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, &x) in interior.iter().enumerate() {
        for &(y, w) in net.neighbors(x) {
            m[(i, i)] += w;
            if let Some(j) = interior.iter().position(|&v| v == y) {
                m[(i, j)] -= w;
            }
        }
    }
    m.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn min_interior_degree(net: &Network) -> f64 {
    net.interior()
        .iter()
        .map(|&x| net.degree(x).unwrap())
        .fold(f64::INFINITY, f64::min)
}
