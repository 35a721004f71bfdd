//! The mixed boundary condition `μ ∂u/∂_p n + σ |u|^{p−2} u = 0` on `∂S`.
//!
//! Given interior values, each boundary value is the unique zero of the
//! strictly increasing function
//!
//! ```text
//! ψ(γ) = Σ_{x ∈ S} |γ − u(x)|^{p−2} (γ − u(x)) a(x) + b |γ|^{p−2} γ
//! ```
//!
//! with `a(x) = μ(z) ω(x, z)` and `b = σ(z)`. Dirichlet vertices (`μ = 0`)
//! are set to exactly zero. Only interior neighbours enter `ψ`, following
//! the definition of the normal derivative; edges between two boundary
//! vertices play no part in the closure.

use crate::error::{Error, Invariant, Result};
use crate::network::{Network, VertexId};
use crate::operators::{normal_derivative_at, Exponent, State};
use crate::roots::{increasing_root, Tolerance};

/// Default relative tolerance of the boundary closure.
pub const DEFAULT_CLOSURE_TOL: f64 = 1e-12;

const MAX_BISECTIONS: usize = 100;

/// Boundary coefficients `μ, σ ≥ 0` with `μ + σ > 0` on every boundary vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition {
    mu: Vec<f64>,
    sigma: Vec<f64>,
    gamma: Vec<VertexId>,
}

impl BoundaryCondition {
    /// Builds the condition from `(z, μ(z), σ(z))` triples, one per boundary
    /// vertex of `net`.
    pub fn new<I>(net: &Network, entries: I) -> Result<BoundaryCondition>
    where
        I: IntoIterator<Item = (VertexId, f64, f64)>,
    {
        let n = net.len();
        let mut mu = vec![0.0; n];
        let mut sigma = vec![0.0; n];
        let mut seen = vec![false; n];
        for (z, m, s) in entries {
            net.check(z)?;
            let name = net.name(z);
            if !net.is_boundary(z) {
                return Err(Error::validation(
                    Invariant::BoundaryCoefficients,
                    format!("'{name}' is interior and cannot carry mu/sigma"),
                ));
            }
            if seen[z.0] {
                return Err(Error::validation(
                    Invariant::BoundaryCoefficients,
                    format!("coefficients for '{name}' given twice"),
                ));
            }
            if !(m.is_finite() && s.is_finite() && m >= 0.0 && s >= 0.0 && m + s > 0.0) {
                return Err(Error::validation(
                    Invariant::BoundaryCoefficients,
                    format!("'{name}': need mu, sigma >= 0 with mu + sigma > 0, got ({m}, {s})"),
                ));
            }
            seen[z.0] = true;
            mu[z.0] = m;
            sigma[z.0] = s;
        }
        if let Some(z) = net.boundary().iter().find(|z| !seen[z.0]) {
            return Err(Error::validation(
                Invariant::BoundaryCoefficients,
                format!("no coefficients for boundary vertex '{}'", net.name(*z)),
            ));
        }
        let gamma = net
            .boundary()
            .iter()
            .copied()
            .filter(|z| mu[z.0] > 0.0)
            .collect();
        Ok(BoundaryCondition { mu, sigma, gamma })
    }

    /// The same `(μ, σ)` on every boundary vertex.
    pub fn uniform(net: &Network, mu: f64, sigma: f64) -> Result<BoundaryCondition> {
        BoundaryCondition::new(net, net.boundary().iter().map(|&z| (z, mu, sigma)))
    }

    pub fn dirichlet(net: &Network) -> BoundaryCondition {
        BoundaryCondition::uniform(net, 0.0, 1.0).expect("valid Dirichlet coefficients")
    }

    pub fn neumann(net: &Network) -> BoundaryCondition {
        BoundaryCondition::uniform(net, 1.0, 0.0).expect("valid Neumann coefficients")
    }

    /// `μ(z)`; zero on interior vertices.
    pub fn mu(&self, z: VertexId) -> f64 {
        self.mu[z.0]
    }

    /// `σ(z)`; zero on interior vertices.
    pub fn sigma(&self, z: VertexId) -> f64 {
        self.sigma[z.0]
    }

    /// `Γ = {z ∈ ∂S : μ(z) > 0}`.
    pub fn gamma_set(&self) -> &[VertexId] {
        &self.gamma
    }

    pub fn in_gamma(&self, z: VertexId) -> bool {
        self.mu[z.0] > 0.0
    }

    /// True when `σ ≡ 0`, the pure Neumann case.
    pub fn sigma_vanishes(&self) -> bool {
        self.sigma.iter().all(|&s| s == 0.0)
    }

    /// `σ(z)/μ(z)` for `z ∈ Γ`.
    pub(crate) fn robin_ratio(&self, z: VertexId) -> f64 {
        self.sigma[z.0] / self.mu[z.0]
    }
}

/// `ψ(γ)` for interior data `(u(x), a(x))` and boundary weight `b`.
pub fn psi(gamma: f64, data: &[(f64, f64)], b: f64, p: Exponent) -> Result<f64> {
    if b == 0.0 && data.iter().all(|&(_, a)| a == 0.0) {
        return Err(Error::DegenerateCoefficients);
    }
    Ok(psi_unchecked(gamma, data, b, p))
}

#[inline]
fn psi_unchecked(gamma: f64, data: &[(f64, f64)], b: f64, p: Exponent) -> f64 {
    data.iter()
        .map(|&(u, a)| p.phi(gamma - u) * a)
        .sum::<f64>()
        + b * p.phi(gamma)
}

/// `1 + Σ a(x) max(1, |u(x)|)^{p−1} + b`, the magnitude `ψ` is measured against.
fn psi_scale(data: &[(f64, f64)], b: f64, p: Exponent) -> f64 {
    1.0 + data
        .iter()
        .map(|&(u, a)| a * u.abs().max(1.0).powf(p.get() - 1.0))
        .sum::<f64>()
        + b
}

/// Unique zero of `ψ`.
pub fn solve_psi(data: &[(f64, f64)], b: f64, p: Exponent, tol: f64) -> Result<f64> {
    if b == 0.0 && data.iter().all(|&(_, a)| a == 0.0) {
        return Err(Error::DegenerateCoefficients);
    }
    let (mut lo, mut hi) = data
        .iter()
        .filter(|(_, a)| *a > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(u, _)| {
            (lo.min(u), hi.max(u))
        });
    if b > 0.0 || !lo.is_finite() {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    let tol = Tolerance {
        x: 0.5 * tol,
        f: tol * psi_scale(data, b, p),
    };
    let root = increasing_root(|g| psi_unchecked(g, data, b, p), lo, hi, tol, MAX_BISECTIONS)?;
    Ok(root.x)
}

fn closure_data(net: &Network, bc: &BoundaryCondition, u: &[f64], z: VertexId) -> Vec<(f64, f64)> {
    let mu = bc.mu(z);
    net.neighbors(z)
        .iter()
        .filter(|(x, _)| net.is_interior(*x))
        .map(|&(x, w)| (u[x.0], mu * w))
        .collect()
}

/// Value at `z` consistent with `B[u](z) = 0` given the interior values in `u`.
pub(crate) fn closed_value(
    net: &Network,
    bc: &BoundaryCondition,
    u: &[f64],
    p: Exponent,
    z: VertexId,
    tol: f64,
) -> Result<f64> {
    if bc.mu(z) == 0.0 {
        return Ok(0.0);
    }
    let data = closure_data(net, bc, u, z);
    solve_psi(&data, bc.sigma(z), p, tol)
}

/// Overwrites the boundary entries of `u` in place.
pub(crate) fn close_in_place(
    net: &Network,
    bc: &BoundaryCondition,
    u: &mut [f64],
    p: Exponent,
    tol: f64,
) -> Result<()> {
    for &z in net.boundary() {
        u[z.0] = closed_value(net, bc, u, p, z, tol)?;
    }
    Ok(())
}

/// Extends interior values to the whole closure so that `B[u] = 0`.
///
/// Boundary entries of `u_interior` are ignored. Since boundary values only
/// depend on interior neighbours, the closure is a pure function of the
/// interior data.
pub fn close_boundary(
    net: &Network,
    bc: &BoundaryCondition,
    u_interior: &State,
    p: Exponent,
    tol: f64,
) -> Result<State> {
    u_interior.compatible(net)?;
    if !(tol > 0.0) {
        return Err(Error::Config(format!("closure tolerance must be positive, got {tol}")));
    }
    for &x in net.interior() {
        if !u_interior[x].is_finite() {
            return Err(Error::InvalidState(format!(
                "interior value at '{}' is not finite",
                net.name(x)
            )));
        }
    }
    let mut out = u_interior.clone();
    close_in_place(net, bc, out.values_mut(), p, tol)?;
    Ok(out)
}

/// `B[u](z) = μ(z) ∂u/∂_p n (z) + σ(z) |u(z)|^{p−2} u(z)` for every `z ∈ ∂S`.
pub fn residual_b(
    net: &Network,
    bc: &BoundaryCondition,
    u: &State,
    p: Exponent,
) -> Vec<(VertexId, f64)> {
    net.boundary()
        .iter()
        .map(|&z| (z, boundary_operator(net, bc, u.values(), p, z)))
        .collect()
}

#[inline]
pub(crate) fn boundary_operator(
    net: &Network,
    bc: &BoundaryCondition,
    u: &[f64],
    p: Exponent,
    z: VertexId,
) -> f64 {
    let mu = bc.mu(z);
    let normal = if mu > 0.0 {
        mu * normal_derivative_at(net, u, p, z)
    } else {
        0.0
    };
    normal + bc.sigma(z) * p.phi(u[z.0])
}

/// Scale against which `|B[u](z)|` is compared after closure.
pub fn closure_scale(net: &Network, bc: &BoundaryCondition, u: &State, p: Exponent, z: VertexId) -> f64 {
    let data = closure_data(net, bc, u.values(), z);
    psi_scale(&data, bc.sigma(z), p)
}
