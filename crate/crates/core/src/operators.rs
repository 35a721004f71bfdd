//! The discrete p-Laplacian, the p-normal derivative and the
//! summation-by-parts identity that ties them together.
//!
//! No operator matrix is ever formed: for `p ≠ 2` the operator is nonlinear,
//! so everything is evaluated vertex by vertex over adjacency lists.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::network::{Network, VertexId};

/// The exponent `p > 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Exponent> {
        if p.is_finite() && p > 1.0 {
            Ok(Exponent(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `|t|^{p-2} t`, written as `sign(t) |t|^{p-1}` and zero at `t = 0`.
    #[inline]
    pub fn phi(self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else if self.0 == 2.0 {
            t
        } else {
            t.signum() * t.abs().powf(self.0 - 1.0)
        }
    }

    /// `|t|^p`.
    #[inline]
    pub fn abs_pow(self, t: f64) -> f64 {
        if self.0 == 2.0 {
            t * t
        } else {
            t.abs().powf(self.0)
        }
    }
}

impl TryFrom<f64> for Exponent {
    type Error = Error;

    fn try_from(p: f64) -> Result<Exponent> {
        Exponent::new(p)
    }
}

/// Real values on every vertex of a network, optionally tagged with a time.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    values: Vec<f64>,
    pub time: Option<f64>,
}

impl State {
    /// Wraps `values` (indexed by vertex id); all entries must be finite.
    pub fn new(net: &Network, values: Vec<f64>) -> Result<State> {
        if values.len() != net.len() {
            return Err(Error::InvalidState(format!(
                "expected {} values, got {}",
                net.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidState(format!(
                "value at '{}' is not finite",
                net.name(VertexId(i))
            )));
        }
        Ok(State { values, time: None })
    }

    pub fn zeros(net: &Network) -> State {
        State {
            values: vec![0.0; net.len()],
            time: None,
        }
    }

    pub fn from_fn(net: &Network, f: impl FnMut(VertexId) -> f64) -> Result<State> {
        State::new(net, net.vertices().map(f).collect())
    }

    /// Constant `c` on the interior and zero on the boundary.
    pub fn interior_constant(net: &Network, c: f64) -> Result<State> {
        State::from_fn(net, |x| if net.is_interior(x) { c } else { 0.0 })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_time(mut self, t: f64) -> State {
        self.time = Some(t);
        self
    }

    pub fn scaled(&self, c: f64) -> State {
        State {
            values: self.values.iter().map(|v| c * v).collect(),
            time: self.time,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `max_{x ∈ S} |u(x)|`.
    pub fn interior_sup(&self, net: &Network) -> f64 {
        net.interior()
            .iter()
            .map(|x| self.values[x.0].abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn compatible(&self, net: &Network) -> Result<()> {
        if self.values.len() == net.len() {
            Ok(())
        } else {
            Err(Error::InvalidState(format!(
                "state has {} values but the network has {} vertices",
                self.values.len(),
                net.len()
            )))
        }
    }
}

impl Index<VertexId> for State {
    type Output = f64;

    fn index(&self, x: VertexId) -> &f64 {
        &self.values[x.0]
    }
}

impl IndexMut<VertexId> for State {
    fn index_mut(&mut self, x: VertexId) -> &mut f64 {
        &mut self.values[x.0]
    }
}

/// `Δ_{p,ω} u(x) = Σ_{y ∈ S̄} |u(y) − u(x)|^{p−2} (u(y) − u(x)) ω(x, y)`.
///
/// Defined at every vertex of the closure, not only on `S`.
pub fn p_laplacian(net: &Network, u: &State, p: Exponent, x: VertexId) -> Result<f64> {
    net.check(x)?;
    u.compatible(net)?;
    Ok(p_laplacian_at(net, u.values(), p, x))
}

#[inline]
pub(crate) fn p_laplacian_at(net: &Network, u: &[f64], p: Exponent, x: VertexId) -> f64 {
    let ux = u[x.0];
    net.neighbors(x)
        .iter()
        .map(|&(y, w)| p.phi(u[y.0] - ux) * w)
        .sum()
}

/// `∂u/∂_p n (z) = Σ_{x ∈ S} |u(z) − u(x)|^{p−2} (u(z) − u(x)) ω(x, z)`.
///
/// Only interior neighbours of `z` contribute.
pub fn p_normal_derivative(net: &Network, u: &State, p: Exponent, z: VertexId) -> Result<f64> {
    net.check(z)?;
    if !net.is_boundary(z) {
        return Err(Error::NotBoundaryVertex(z));
    }
    u.compatible(net)?;
    Ok(normal_derivative_at(net, u.values(), p, z))
}

#[inline]
pub(crate) fn normal_derivative_at(net: &Network, u: &[f64], p: Exponent, z: VertexId) -> f64 {
    let uz = u[z.0];
    net.neighbors(z)
        .iter()
        .filter(|(x, _)| net.is_interior(*x))
        .map(|&(x, w)| p.phi(uz - u[x.0]) * w)
        .sum()
}

/// `Σ_{x,y ∈ S̄} |u(x) − u(y)|^p ω(x, y)` over ordered pairs, i.e. twice the
/// sum over edges.
pub fn gradient_energy(net: &Network, u: &State, p: Exponent) -> f64 {
    2.0 * net
        .edges()
        .iter()
        .map(|e| p.abs_pow(u[e.a] - u[e.b]) * e.weight)
        .sum::<f64>()
}

/// Both sides of the summation-by-parts identity
/// `2 Σ_x g(x)(−Δ_p f(x)) = Σ_{x,y} |f(y)−f(x)|^{p−2}(f(y)−f(x))(g(y)−g(x)) ω(x,y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenIdentity {
    pub lhs: f64,
    pub rhs: f64,
    /// Sum of absolute values of all terms on both sides.
    pub scale: f64,
}

impl GreenIdentity {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

pub fn green_identity(net: &Network, f: &State, g: &State, p: Exponent) -> GreenIdentity {
    let mut lhs = 0.0;
    let mut scale = 0.0;
    for x in net.vertices() {
        let term = 2.0 * g[x] * -p_laplacian_at(net, f.values(), p, x);
        lhs += term;
        scale += term.abs();
    }
    let mut rhs = 0.0;
    for x in net.vertices() {
        for &(y, w) in net.neighbors(x) {
            let term = p.phi(f[y] - f[x]) * (g[y] - g[x]) * w;
            rhs += term;
            scale += term.abs();
        }
    }
    GreenIdentity { lhs, rhs, scale }
}

/// `|lhs − rhs|` of [`green_identity`]; zero up to rounding.
pub fn green_identity_residual(net: &Network, f: &State, g: &State, p: Exponent) -> f64 {
    green_identity(net, f, g, p).residual()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Role;

    fn path() -> Network {
        Network::new(
            [
                ("z1".to_string(), Role::Boundary),
                ("x".to_string(), Role::Interior),
                ("z2".to_string(), Role::Boundary),
            ],
            [
                ("z1".to_string(), "x".to_string(), 1.0),
                ("x".to_string(), "z2".to_string(), 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn exponent_must_exceed_one() {
        assert!(Exponent::new(1.0).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert!(Exponent::new(1.0001).is_ok());
    }

    #[test]
    fn phi_is_zero_at_zero_for_small_p() {
        let p = Exponent::new(1.2).unwrap();
        assert_eq!(p.phi(0.0), 0.0);
        assert_eq!(p.phi(-1.0), -1.0);
        assert!((p.phi(4.0) - 4f64.powf(0.2)).abs() < 1e-15);
    }

    #[test]
    fn hand_evaluated_laplacians() {
        let net = path();
        let p3 = Exponent::new(3.0).unwrap();
        let x = net.id("x").unwrap();
        let u = State::new(&net, vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(p_laplacian(&net, &u, p3, x).unwrap(), 0.0);
        let u = State::new(&net, vec![1.0, 0.0, 2.0]).unwrap();
        assert_eq!(p_laplacian(&net, &u, p3, x).unwrap(), 5.0);
        let c = State::new(&net, vec![4.0; 3]).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let p = Exponent::new(p).unwrap();
            for v in net.vertices() {
                assert_eq!(p_laplacian(&net, &c, p, v).unwrap(), 0.0);
            }
        }
        assert!(p_laplacian(&net, &c, p3, VertexId(3)).is_err());
    }

    #[test]
    fn hand_evaluated_normal_derivatives() {
        let net = path();
        let z1 = net.id("z1").unwrap();
        let x = net.id("x").unwrap();
        let u = State::new(&net, vec![2.0, 1.0, 0.0]).unwrap();
        assert_eq!(
            p_normal_derivative(&net, &u, Exponent::new(3.0).unwrap(), z1).unwrap(),
            1.0
        );
        let u = State::new(&net, vec![3.0, 3.0, 0.0]).unwrap();
        assert_eq!(
            p_normal_derivative(&net, &u, Exponent::new(1.7).unwrap(), z1).unwrap(),
            0.0
        );
        assert!(matches!(
            p_normal_derivative(&net, &u, Exponent::new(2.0).unwrap(), x),
            Err(Error::NotBoundaryVertex(_))
        ));

        let weighted = Network::new(
            [
                ("z".to_string(), Role::Boundary),
                ("x".to_string(), Role::Interior),
            ],
            [("z".to_string(), "x".to_string(), 2.0)],
        )
        .unwrap();
        let u = State::new(&weighted, vec![0.0, 3.0]).unwrap();
        assert_eq!(
            p_normal_derivative(&weighted, &u, Exponent::new(2.0).unwrap(), VertexId(0)).unwrap(),
            -6.0
        );
    }

    #[test]
    fn green_identity_with_zero_test_function() {
        let net = path();
        let f = State::new(&net, vec![0.3, -1.0, 2.5]).unwrap();
        let g = State::zeros(&net);
        assert_eq!(
            green_identity_residual(&net, &f, &g, Exponent::new(2.7).unwrap()),
            0.0
        );
    }

    #[test]
    fn green_identity_with_g_equal_f() {
        let net = path();
        let f = State::new(&net, vec![0.3, -1.0, 2.5]).unwrap();
        let p = Exponent::new(2.5).unwrap();
        let id = green_identity(&net, &f, &f, p);
        assert!(id.residual() <= 1e-10 * id.scale);
        // rhs equals the p-energy when g = f
        assert!((id.rhs - gradient_energy(&net, &f, p)).abs() <= 1e-12 * id.scale);
    }
}
