//! First eigenpair of the p-Laplacian under the mixed boundary condition.
//!
//! `λ_{p,0}` is the minimum of the Rayleigh quotient
//!
//! ```text
//!        ½ Σ_{x,y ∈ S̄} |u(x) − u(y)|^p ω(x,y) + Σ_{z ∈ Γ} (σ/μ)(z) |u(z)|^p
//! R(u) = ───────────────────────────────────────────────────────────────────
//!                              Σ_{x ∈ S} |u(x)|^p
//! ```
//!
//! over functions that vanish on the Dirichlet part `∂S ∖ Γ`. The first
//! eigenfunction is positive on `S ∪ Γ`, so the search runs on the positive
//! cone. Each restart performs nonlinear inverse iteration: given a positive
//! iterate `u`, solve the convex problem
//!
//! ```text
//! minimize  (1/p) E(v) − Σ_{x ∈ S} u(x)^{p−1} v(x)
//! ```
//!
//! (whose minimiser satisfies `−Δ_p v = u^{p−1}` on `S`), then renormalise.
//! The Rayleigh quotient decreases monotonically along the iteration. The
//! best candidate over all restarts is polished by Newton's method on the
//! full eigen-system and accepted when the residual meets the tolerance.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boundary::{boundary_operator, BoundaryCondition};
use crate::error::{Error, Result};
use crate::network::{Network, VertexId};
use crate::operators::{p_laplacian_at, Exponent, State};

#[derive(Debug, Clone, PartialEq)]
pub struct RayleighConfig {
    pub restarts: usize,
    /// Outer (inverse iteration) steps per restart.
    pub max_iters: usize,
    /// Backtracking factor of the inner line search.
    pub shrink: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for RayleighConfig {
    fn default() -> Self {
        RayleighConfig {
            restarts: 8,
            max_iters: 5000,
            shrink: 0.5,
            tolerance: 1e-9,
            seed: 0,
        }
    }
}

impl RayleighConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::Config("restarts and max_iters must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Config(format!("shrink factor {} not in (0,1)", self.shrink)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance {} must be positive", self.tolerance)));
        }
        Ok(())
    }
}

/// `(λ_{p,0}, φ_0)` with `Σ_{x ∈ S} φ_0(x)^p = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    /// Positive on `S ∪ Γ`, zero on `∂S ∖ Γ`.
    pub phi: State,
    /// Max of the eigen-equation residual on `S` and `|B[φ]|` on `Γ`.
    pub residual: f64,
    /// Rayleigh quotient of `phi`; equal to `lambda`.
    pub rayleigh: f64,
    pub restarts_used: usize,
}

/// Numerator of the Rayleigh quotient.
fn energy(net: &Network, bc: &BoundaryCondition, u: &[f64], p: Exponent) -> f64 {
    let edges: f64 = net
        .edges()
        .iter()
        .map(|e| p.abs_pow(u[e.a.0] - u[e.b.0]) * e.weight)
        .sum();
    let robin: f64 = bc
        .gamma_set()
        .iter()
        .map(|&z| bc.robin_ratio(z) * p.abs_pow(u[z.0]))
        .sum();
    edges + robin
}

fn interior_mass(net: &Network, u: &[f64], p: Exponent) -> f64 {
    net.interior().iter().map(|x| p.abs_pow(u[x.0])).sum()
}

/// The Rayleigh quotient `R(u)`.
pub fn rayleigh_quotient(
    net: &Network,
    bc: &BoundaryCondition,
    u: &State,
    p: Exponent,
) -> Result<f64> {
    u.compatible(net)?;
    if let Some(z) = net
        .boundary()
        .iter()
        .find(|z| !bc.in_gamma(**z) && u[**z] != 0.0)
    {
        return Err(Error::NotAdmissible(format!(
            "u must vanish on the Dirichlet vertex '{}'",
            net.name(*z)
        )));
    }
    let denom = interior_mass(net, u.values(), p);
    if denom == 0.0 {
        return Err(Error::NotAdmissible("u vanishes identically on S".into()));
    }
    Ok(energy(net, bc, u.values(), p) / denom)
}

/// Max of `|−Δ_p φ(x) − λ|φ(x)|^{p−2}φ(x)|` over `S` and `|B[φ](z)|` over `Γ`.
pub fn eigen_residual(
    net: &Network,
    bc: &BoundaryCondition,
    phi: &State,
    lambda: f64,
    p: Exponent,
) -> f64 {
    let u = phi.values();
    let interior = net
        .interior()
        .iter()
        .map(|&x| (-p_laplacian_at(net, u, p, x) - lambda * p.phi(u[x.0])).abs());
    let boundary = net
        .boundary()
        .iter()
        .map(|&z| boundary_operator(net, bc, u, p, z).abs());
    interior.chain(boundary).fold(0.0, f64::max)
}

/// Indexing of the unknowns `S ∪ Γ`.
struct Unknowns<'a> {
    net: &'a Network,
    bc: &'a BoundaryCondition,
    p: Exponent,
    free: Vec<VertexId>,
    slot: Vec<Option<usize>>,
}

impl<'a> Unknowns<'a> {
    fn new(net: &'a Network, bc: &'a BoundaryCondition, p: Exponent) -> Self {
        let free: Vec<VertexId> = net
            .vertices()
            .filter(|&x| net.is_interior(x) || bc.in_gamma(x))
            .collect();
        let mut slot = vec![None; net.len()];
        for (i, x) in free.iter().enumerate() {
            slot[x.0] = Some(i);
        }
        Unknowns { net, bc, p, free, slot }
    }

    fn dim(&self) -> usize {
        self.free.len()
    }

    fn expand(&self, v: &DVector<f64>) -> Vec<f64> {
        let mut u = vec![0.0; self.net.len()];
        for (i, x) in self.free.iter().enumerate() {
            u[x.0] = v[i];
        }
        u
    }

    /// Gradient of `(1/p) E` at every unknown.
    fn energy_gradient(&self, u: &[f64]) -> DVector<f64> {
        let p = self.p;
        DVector::from_iterator(
            self.dim(),
            self.free.iter().map(|&x| {
                let mut g = -p_laplacian_at(self.net, u, p, x);
                if self.bc.in_gamma(x) {
                    g += self.bc.robin_ratio(x) * p.phi(u[x.0]);
                }
                g
            }),
        )
    }

    /// Hessian of `(1/p) E`, with `|t|^{p−2}` evaluated at `max(|t|, floor)`
    /// when `p < 2`.
    fn energy_hessian(&self, u: &[f64], floor: f64) -> DMatrix<f64> {
        let p = self.p.get();
        let curvature = |t: f64| {
            let t = t.abs();
            if p == 2.0 {
                1.0
            } else if p < 2.0 {
                (p - 1.0) * t.max(floor).powf(p - 2.0)
            } else {
                (p - 1.0) * t.powf(p - 2.0)
            }
        };
        let m = self.dim();
        let mut h = DMatrix::zeros(m, m);
        for (i, &x) in self.free.iter().enumerate() {
            for &(y, w) in self.net.neighbors(x) {
                let c = curvature(u[x.0] - u[y.0]) * w;
                h[(i, i)] += c;
                if let Some(j) = self.slot[y.0] {
                    h[(i, j)] -= c;
                }
            }
            if self.bc.in_gamma(x) {
                h[(i, i)] += self.bc.robin_ratio(x) * curvature(u[x.0]);
            }
        }
        h
    }

    fn normalize(&self, v: &mut DVector<f64>) {
        let u = self.expand(v);
        let mass = interior_mass(self.net, &u, self.p);
        *v /= mass.powf(1.0 / self.p.get());
    }

    fn rayleigh(&self, v: &DVector<f64>) -> f64 {
        let u = self.expand(v);
        energy(self.net, self.bc, &u, self.p) / interior_mass(self.net, &u, self.p)
    }

    /// Residual of the variational eigen-system at `(v, λ)`.
    fn system_residual(&self, v: &DVector<f64>, lambda: f64) -> DVector<f64> {
        let u = self.expand(v);
        let mut r = self.energy_gradient(&u);
        for (i, &x) in self.free.iter().enumerate() {
            if self.net.is_interior(x) {
                r[i] -= lambda * self.p.phi(u[x.0]);
            }
        }
        r
    }

    fn max_residual(&self, v: &DVector<f64>) -> (f64, f64) {
        let lambda = self.rayleigh(v);
        let u = self.expand(v);
        let state = State::new(self.net, u).expect("finite iterate");
        (lambda, eigen_residual(self.net, self.bc, &state, lambda, self.p))
    }
}

fn solve_spd(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let m = h.nrows();
    let diag_max = (0..m).map(|i| h[(i, i)].abs()).fold(0.0, f64::max);
    let mut shifted = h.clone();
    let shift = 1e-13 * diag_max + f64::MIN_POSITIVE;
    for i in 0..m {
        shifted[(i, i)] += shift;
    }
    if let Some(chol) = shifted.clone().cholesky() {
        return Some(chol.solve(rhs));
    }
    shifted.lu().solve(rhs)
}

/// Minimises `(1/p) E(v) − c·v` by damped Newton, warm-started at `v`.
fn inverse_step(
    unk: &Unknowns<'_>,
    c: &DVector<f64>,
    v: &mut DVector<f64>,
    shrink: f64,
) {
    let p = unk.p.get();
    let objective = |v: &DVector<f64>| {
        let u = unk.expand(v);
        energy(unk.net, unk.bc, &u, unk.p) / p - c.dot(v)
    };
    let c_scale = c.amax().max(f64::MIN_POSITIVE);
    let mut j = objective(v);
    for _ in 0..200 {
        let u = unk.expand(v);
        let grad = unk.energy_gradient(&u) - c;
        if grad.amax() <= 1e-14 * c_scale {
            break;
        }
        let floor = 1e-9 * v.amax().max(f64::MIN_POSITIVE);
        let h = unk.energy_hessian(&u, floor);
        let mut dir = match solve_spd(&h, &(-&grad)) {
            Some(d) if d.dot(&grad) < 0.0 => d,
            _ => -&grad,
        };
        let slope = dir.dot(&grad);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &*v + &dir * t;
            let jt = objective(&trial);
            if jt <= j + 1e-4 * t * slope {
                *v = trial;
                j = jt;
                accepted = true;
                break;
            }
            t *= shrink;
        }
        if !accepted {
            // Newton direction stalled; fall back to a tiny gradient step
            dir = -&grad;
            let trial = &*v + &dir * (1e-3 * t);
            let jt = objective(&trial);
            if jt < j {
                *v = trial;
                j = jt;
            } else {
                break;
            }
        }
    }
}

/// Newton's method on `(v, λ)` for the eigen-system plus normalisation.
/// Returns `None` when it fails to improve on the starting residual.
fn newton_polish(unk: &Unknowns<'_>, v0: &DVector<f64>) -> Option<DVector<f64>> {
    let m = unk.dim();
    let p = unk.p;
    let mut v = v0.clone();
    let mut lambda = unk.rayleigh(&v);
    let (_, mut best) = unk.max_residual(&v);
    let start = best;
    let mut best_v = v.clone();
    for _ in 0..30 {
        let u = unk.expand(&v);
        let mut r = DVector::zeros(m + 1);
        r.rows_mut(0, m).copy_from(&unk.system_residual(&v, lambda));
        r[m] = interior_mass(unk.net, &u, p) - 1.0;

        let floor = 1e-12 * v.amax();
        let mut jac = DMatrix::zeros(m + 1, m + 1);
        jac.view_mut((0, 0), (m, m))
            .copy_from(&unk.energy_hessian(&u, floor));
        for (i, &x) in unk.free.iter().enumerate() {
            if unk.net.is_interior(x) {
                let t = u[x.0].abs();
                let curv = if p.get() == 2.0 {
                    1.0
                } else {
                    (p.get() - 1.0) * t.max(floor).powf(p.get() - 2.0)
                };
                jac[(i, i)] -= lambda * curv;
                jac[(i, m)] = -p.phi(u[x.0]);
                jac[(m, i)] = p.get() * p.phi(u[x.0]);
            }
        }
        let step = jac.lu().solve(&(-&r))?;
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let trial_v = &v + step.rows(0, m) * t;
            if trial_v.iter().any(|&a| !(a > 0.0)) {
                t *= 0.5;
                continue;
            }
            let (_, res) = unk.max_residual(&trial_v);
            if res < best {
                v = trial_v;
                lambda += step[m] * t;
                best = res;
                best_v = v.clone();
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (best < start).then(|| {
        let mut out = best_v;
        unk.normalize(&mut out);
        out
    })
}

/// For `p < 2`, neighbouring values that differ only by rounding are made
/// equal: `|t|^{p−1}` magnifies an ulp-sized gap far above the tolerance.
fn merge_rounding_gaps(unk: &Unknowns<'_>, v: &mut DVector<f64>) {
    if unk.p.get() >= 2.0 {
        return;
    }
    let m = unk.dim();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut k = i;
        while parent[k] != r {
            let next = parent[k];
            parent[k] = r;
            k = next;
        }
        r
    }
    for e in unk.net.edges() {
        if let (Some(i), Some(j)) = (unk.slot[e.a.0], unk.slot[e.b.0]) {
            let scale = v[i].abs().max(v[j].abs());
            if (v[i] - v[j]).abs() <= 64.0 * f64::EPSILON * scale {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut sums = vec![(0.0, 0usize); m];
    for i in 0..m {
        let r = find(&mut parent, i);
        sums[r].0 += v[i];
        sums[r].1 += 1;
    }
    for i in 0..m {
        let r = find(&mut parent, i);
        v[i] = sums[r].0 / sums[r].1 as f64;
    }
}

struct Candidate {
    v: DVector<f64>,
    rayleigh: f64,
    restart: usize,
}

fn run_restart(
    unk: &Unknowns<'_>,
    cfg: &RayleighConfig,
    restart: usize,
) -> Candidate {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let mut v = DVector::from_fn(unk.dim(), |_, _| rng.gen_range(0.5..1.5));
    unk.normalize(&mut v);
    let target = 0.1 * cfg.tolerance;
    let mut w = v.clone();
    for _ in 0..cfg.max_iters {
        let u = unk.expand(&v);
        let c = DVector::from_iterator(
            unk.dim(),
            unk.free.iter().map(|&x| {
                if unk.net.is_interior(x) {
                    unk.p.phi(u[x.0])
                } else {
                    0.0
                }
            }),
        );
        inverse_step(unk, &c, &mut w, cfg.shrink);
        let mut next = w.clone();
        unk.normalize(&mut next);
        let change = (&next - &v).amax();
        v = next;
        if change <= 1e-14 {
            break;
        }
        let (lambda, res) = unk.max_residual(&v);
        if res <= target * (1.0 + lambda) {
            break;
        }
    }
    let rayleigh = unk.rayleigh(&v);
    Candidate { v, rayleigh, restart }
}

/// Computes `(λ_{p,0}, φ_0)`.
///
/// When `σ ≡ 0` constants are admissible with zero energy, so the pair
/// `(0, |S|^{−1/p})` is returned without iterating. Otherwise all restarts
/// run and the candidate with the smallest Rayleigh quotient wins (ties go
/// to the lower restart index). A candidate that misses the residual
/// tolerance is returned inside [`Error::EigenConvergence`].
pub fn first_eigenpair(
    net: &Network,
    bc: &BoundaryCondition,
    p: Exponent,
    cfg: &RayleighConfig,
) -> Result<EigenPair> {
    cfg.validate()?;
    if bc.sigma_vanishes() {
        let c = (net.interior().len() as f64).powf(-1.0 / p.get());
        let phi = State::from_fn(net, |x| {
            if net.is_interior(x) || bc.in_gamma(x) {
                c
            } else {
                0.0
            }
        })?;
        return Ok(EigenPair {
            lambda: 0.0,
            phi,
            residual: 0.0,
            rayleigh: 0.0,
            restarts_used: 0,
        });
    }

    let unk = Unknowns::new(net, bc, p);
    let mut best: Option<Candidate> = None;
    for restart in 0..cfg.restarts {
        let cand = run_restart(&unk, cfg, restart);
        let better = match &best {
            None => true,
            Some(b) => cand.rayleigh < b.rayleigh,
        };
        if better {
            best = Some(cand);
        }
    }
    let best = best.expect("at least one restart");
    debug_assert!(best.restart < cfg.restarts);

    let mut v = best.v;
    let (_, before) = unk.max_residual(&v);
    if let Some(polished) = newton_polish(&unk, &v) {
        let (_, after) = unk.max_residual(&polished);
        if after < before {
            v = polished;
        }
    }
    let mut merged = v.clone();
    merge_rounding_gaps(&unk, &mut merged);
    unk.normalize(&mut merged);
    if unk.max_residual(&merged).1 <= unk.max_residual(&v).1 {
        v = merged;
    }

    let phi = State::new(net, unk.expand(&v))?;
    let rayleigh = rayleigh_quotient(net, bc, &phi, p)?;
    let residual = eigen_residual(net, bc, &phi, rayleigh, p);
    let pair = EigenPair {
        lambda: rayleigh,
        phi,
        residual,
        rayleigh,
        restarts_used: cfg.restarts,
    };
    let positive = unk.free.iter().all(|&x| pair.phi[x] > 0.0);
    if positive && residual <= cfg.tolerance * (1.0 + rayleigh) {
        Ok(pair)
    } else {
        Err(Error::EigenConvergence(Box::new(pair)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Role;

    fn dirichlet_path(interior: usize) -> (Network, BoundaryCondition) {
        let mut vertices = vec![("z0".to_string(), Role::Boundary)];
        for i in 0..interior {
            vertices.push((format!("x{i}"), Role::Interior));
        }
        vertices.push(("z1".to_string(), Role::Boundary));
        let names: Vec<String> = vertices.iter().map(|v| v.0.clone()).collect();
        let edges: Vec<_> = names
            .windows(2)
            .map(|w| (w[0].clone(), w[1].clone(), 1.0))
            .collect();
        let net = Network::new(vertices, edges).unwrap();
        let bc = BoundaryCondition::dirichlet(&net);
        (net, bc)
    }

    #[test]
    fn rayleigh_hand_value() {
        let (net, bc) = dirichlet_path(1);
        let p = Exponent::new(2.0).unwrap();
        let u = State::new(&net, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(rayleigh_quotient(&net, &bc, &u, p).unwrap(), 2.0);
        let bad = State::new(&net, vec![0.1, 1.0, 0.0]).unwrap();
        assert!(matches!(
            rayleigh_quotient(&net, &bc, &bad, p),
            Err(Error::NotAdmissible(_))
        ));
        let zero = State::zeros(&net);
        assert!(matches!(
            rayleigh_quotient(&net, &bc, &zero, p),
            Err(Error::NotAdmissible(_))
        ));
    }

    #[test]
    fn neumann_constant_has_zero_quotient() {
        let (net, _) = dirichlet_path(3);
        let bc = BoundaryCondition::neumann(&net);
        let u = State::new(&net, vec![2.0; net.len()]).unwrap();
        let p = Exponent::new(3.0).unwrap();
        assert_eq!(rayleigh_quotient(&net, &bc, &u, p).unwrap(), 0.0);
    }

    #[test]
    fn single_vertex_dirichlet_eigenvalue_is_its_degree() {
        let (net, bc) = dirichlet_path(1);
        for p in [1.5, 2.0, 3.0] {
            let p = Exponent::new(p).unwrap();
            let pair = first_eigenpair(&net, &bc, p, &RayleighConfig::default()).unwrap();
            assert!((pair.lambda - 2.0).abs() <= 1e-8, "{pair:?}");
            assert_eq!(pair.phi[VertexId(0)], 0.0);
            assert!((pair.phi[VertexId(1)] - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn two_vertex_dirichlet_p2() {
        let (net, bc) = dirichlet_path(2);
        let p = Exponent::new(2.0).unwrap();
        let pair = first_eigenpair(&net, &bc, p, &RayleighConfig::default()).unwrap();
        assert!((pair.lambda - 1.0).abs() <= 1e-8);
        assert!(pair.residual <= 1e-9 * 2.0);
    }

    #[test]
    fn symmetric_path_with_small_p() {
        // φ is constant on the interior and λ = 1 for every p
        let (net, bc) = dirichlet_path(2);
        let p = Exponent::new(1.5).unwrap();
        let pair = first_eigenpair(&net, &bc, p, &RayleighConfig::default()).unwrap();
        assert!((pair.lambda - 1.0).abs() <= 1e-8, "{pair:?}");
    }

    #[test]
    fn pure_neumann_short_circuits() {
        let (net, _) = dirichlet_path(4);
        let bc = BoundaryCondition::neumann(&net);
        let p = Exponent::new(2.5).unwrap();
        let pair = first_eigenpair(&net, &bc, p, &RayleighConfig::default()).unwrap();
        assert_eq!(pair.lambda, 0.0);
        let c = pair.phi[VertexId(1)];
        assert!(pair.phi.values().iter().all(|&v| v == c && v > 0.0));
    }

    #[test]
    fn robin_three_vertex_path() {
        let (net, _) = dirichlet_path(3);
        let bc = BoundaryCondition::uniform(&net, 1.0, 0.5).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let p = Exponent::new(p).unwrap();
            let pair = first_eigenpair(&net, &bc, p, &RayleighConfig::default()).unwrap();
            assert!(pair.lambda > 0.0);
            assert!(pair.lambda <= 2.0 + 1e-8);
            assert!(pair.phi.values().iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn bad_config_rejected() {
        let (net, bc) = dirichlet_path(1);
        let p = Exponent::new(2.0).unwrap();
        let cfg = RayleighConfig {
            shrink: 1.5,
            ..RayleighConfig::default()
        };
        assert!(matches!(first_eigenpair(&net, &bc, p, &cfg), Err(Error::Config(_))));
    }
}
