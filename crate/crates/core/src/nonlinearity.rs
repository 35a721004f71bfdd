//! Reaction terms `f`, their primitives `F(u) = ∫_0^u f`, and the growth
//! conditions that drive the concavity argument.
//!
//! With `α > 2`, `β ≥ 0`, `γ > 0` the three conditions are
//!
//! ```text
//! (A_p)  α F(u) ≤ u f(u)
//! (B_p)  α F(u) ≤ u f(u) + γ
//! (C_p)  α F(u) ≤ u f(u) + β u^p + γ,     0 ≤ β ≤ (α − p) λ_{p,0} / p
//! ```
//!
//! Each one quantifies over all `u > 0`; here they are checked on a finite
//! grid, so a positive report means "holds on the grid" and nothing more.

use crate::boundary::{close_boundary, BoundaryCondition, DEFAULT_CLOSURE_TOL};
use crate::error::{Error, Result};
use crate::functionals::functional_b;
use crate::network::Network;
use crate::operators::{Exponent, State};
use crate::roots::{increasing_root, Tolerance};

/// Relative accuracy of the table-family quadrature.
pub const QUADRATURE_RTOL: f64 = 1e-10;

/// Piecewise-linear samples `(u_i, f_i)` with `u_0 = 0`, `f_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    u: Vec<f64>,
    f: Vec<f64>,
}

impl Table {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Table> {
        if points.len() < 2 {
            return Err(Error::InvalidNonlinearity(
                "a table needs at least two samples".into(),
            ));
        }
        if points[0] != (0.0, 0.0) {
            return Err(Error::InvalidNonlinearity(format!(
                "table must start at (0, 0), got {:?}",
                points[0]
            )));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidNonlinearity(format!(
                    "table abscissae must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(u, f)) = points
            .iter()
            .skip(1)
            .find(|(u, f)| !(u.is_finite() && f.is_finite() && *f > 0.0))
        {
            return Err(Error::InvalidNonlinearity(format!(
                "table value f({u}) = {f} must be finite and positive"
            )));
        }
        let (u, f) = points.into_iter().unzip();
        Ok(Table { u, f })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.u.iter().copied().zip(self.f.iter().copied())
    }

    /// Slope used beyond the last sample; never negative.
    fn tail_slope(&self) -> f64 {
        let n = self.u.len();
        ((self.f[n - 1] - self.f[n - 2]) / (self.u[n - 1] - self.u[n - 2])).max(0.0)
    }

    fn eval_nonneg(&self, u: f64) -> f64 {
        let n = self.u.len();
        if u >= self.u[n - 1] {
            return self.f[n - 1] + self.tail_slope() * (u - self.u[n - 1]);
        }
        let k = self.u.partition_point(|&s| s <= u) - 1;
        let t = (u - self.u[k]) / (self.u[k + 1] - self.u[k]);
        self.f[k] + t * (self.f[k + 1] - self.f[k])
    }

    /// `∫_0^u f` by adaptive Simpson on each linear piece.
    fn integral(&self, u: f64) -> Result<f64> {
        let mut total = 0.0;
        let mut start = 0.0;
        let f = |s: f64| self.eval_nonneg(s);
        for &node in self.u.iter().skip(1).chain(std::iter::once(&f64::INFINITY)) {
            let end = node.min(u);
            if end > start {
                total += adaptive_simpson(&f, start, end, QUADRATURE_RTOL)
                    .ok_or(Error::QuadratureFailure { upper: u })?;
            }
            if node >= u {
                break;
            }
            start = node;
        }
        Ok(total)
    }

    /// Log-log slope fitted to the upper quarter of the samples.
    fn fitted_power(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points()
            .skip(1)
            .map(|(u, f)| (u.ln(), f.ln()))
            .collect();
        let take = (pts.len() / 4).max(3).min(pts.len());
        if take < 2 {
            return None;
        }
        let tail = &pts[pts.len() - take..];
        let n = tail.len() as f64;
        let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
        let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

/// Adaptive Simpson rule on `[a, b]` to relative tolerance `rtol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rtol: f64) -> Option<f64> {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Option<f64> {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || (b - a) <= f64::EPSILON * a.abs().max(b.abs()) {
            return Some(left + right + delta / 15.0);
        }
        if depth == 0 {
            return None;
        }
        Some(
            recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)?
                + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)?,
        )
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    let tol = rtol * whole.abs().max(f64::MIN_POSITIVE);
    let value = recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)?;
    value.is_finite().then_some(value)
}

/// The reaction term `f`.
///
/// Every family is extended to negative arguments as an odd function, so
/// `F` is even; solutions of interest stay nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    /// `f(u) = λ u^q`
    Power { lambda: f64, q: f64 },
    /// `f(u) = λ u^q + c 1_{u > 0}`
    PowerPlusConst { lambda: f64, q: f64, c: f64 },
    Table(Table),
}

impl Nonlinearity {
    /// `λ u^q` with `λ > 0` and `q ≥ 1` (smaller `q` is not Lipschitz at 0).
    pub fn power(lambda: f64, q: f64) -> Result<Nonlinearity> {
        check_power(lambda, q)?;
        Ok(Nonlinearity::Power { lambda, q })
    }

    pub fn power_plus_const(lambda: f64, q: f64, c: f64) -> Result<Nonlinearity> {
        check_power(lambda, q)?;
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidNonlinearity(format!(
                "constant c = {c} must be finite and nonnegative"
            )));
        }
        Ok(Nonlinearity::PowerPlusConst { lambda, q, c })
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Nonlinearity> {
        Ok(Nonlinearity::Table(Table::new(points)?))
    }

    /// `f(u)`.
    pub fn f(&self, u: f64) -> f64 {
        let s = u.signum();
        let a = u.abs();
        let value = match self {
            Nonlinearity::Power { lambda, q } => lambda * a.powf(*q),
            Nonlinearity::PowerPlusConst { lambda, q, c } => {
                lambda * a.powf(*q) + if a > 0.0 { *c } else { 0.0 }
            }
            Nonlinearity::Table(t) => t.eval_nonneg(a),
        };
        if u == 0.0 {
            0.0
        } else {
            s * value
        }
    }

    /// `F(u) = ∫_0^u f(s) ds`; closed form for the power families,
    /// quadrature for tables.
    #[allow(non_snake_case)]
    pub fn F(&self, u: f64) -> Result<f64> {
        let a = u.abs();
        match self {
            Nonlinearity::Power { lambda, q } => Ok(lambda * a.powf(q + 1.0) / (q + 1.0)),
            Nonlinearity::PowerPlusConst { lambda, q, c } => {
                let jump = if u > 0.0 { c * u } else { 0.0 };
                Ok(lambda * a.powf(q + 1.0) / (q + 1.0) + jump)
            }
            Nonlinearity::Table(t) => t.integral(a),
        }
    }

    /// `u f(u) − α F(u)` for `u ≥ 0`, with the magnitude of the terms that
    /// could not be combined exactly.
    ///
    /// For the power families the two terms are merged before evaluation, so
    /// `α = q + 1` gives exactly zero at every `u`.
    pub fn excess(&self, u: f64, alpha: f64) -> Result<(f64, f64)> {
        match self {
            Nonlinearity::Power { lambda, q } => {
                let v = lambda * u.powf(q + 1.0) * (1.0 - alpha / (q + 1.0));
                Ok((v, v.abs()))
            }
            Nonlinearity::PowerPlusConst { lambda, q, c } => {
                let power = lambda * u.powf(q + 1.0) * (1.0 - alpha / (q + 1.0));
                let jump = c * u * (1.0 - alpha);
                Ok((power + jump, power.abs() + jump.abs()))
            }
            Nonlinearity::Table(_) => {
                let uf = u * self.f(u);
                let big_f = alpha * self.F(u)?;
                Ok((uf - big_f, uf.abs() + big_f.abs()))
            }
        }
    }

    /// Leading growth power `q > 1`, when known or fittable.
    pub fn leading_power(&self) -> Option<f64> {
        let q = match self {
            Nonlinearity::Power { q, .. } | Nonlinearity::PowerPlusConst { q, .. } => Some(*q),
            Nonlinearity::Table(t) => t.fitted_power(),
        }?;
        (q > 1.0 + 1e-9).then_some(q)
    }

    /// Lipschitz estimate on `[−m, m]`: the largest sampled slope, doubled.
    pub fn lipschitz(&self, m: f64) -> f64 {
        let m = m.abs().max(f64::MIN_POSITIVE);
        let n = 2000;
        let xs: Vec<f64> = (0..=n)
            .map(|i| -m + 2.0 * m * i as f64 / n as f64)
            .collect();
        let slope = xs
            .windows(2)
            .map(|w| ((self.f(w[1]) - self.f(w[0])) / (w[1] - w[0])).abs())
            .fold(0.0, f64::max);
        2.0 * slope
    }
}

fn check_power(lambda: f64, q: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidNonlinearity(format!(
            "lambda = {lambda} must be finite and positive"
        )));
    }
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::InvalidNonlinearity(format!(
            "exponent q = {q} must be >= 1 for f to be Lipschitz at 0"
        )));
    }
    Ok(())
}

/// Strictly increasing positive sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Default for Grid {
    /// 2000 log-spaced points on `[1e-6, 1e6]`.
    fn default() -> Self {
        Grid::log_spaced(1e-6, 1e6, 2000).expect("valid default grid")
    }
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Grid> {
        if points.is_empty() {
            return Err(Error::InvalidParams("grid is empty".into()));
        }
        if !points.iter().all(|u| u.is_finite() && *u > 0.0) {
            return Err(Error::InvalidParams("grid points must be finite and positive".into()));
        }
        if !points.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidParams("grid must be strictly increasing".into()));
        }
        Ok(Grid { points })
    }

    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Grid> {
        if !(lo > 0.0 && hi > lo && n >= 2) {
            return Err(Error::InvalidParams(format!(
                "log grid needs 0 < lo < hi and n >= 2 (got {lo}, {hi}, {n})"
            )));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let mut points: Vec<f64> = (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect();
        points[0] = lo;
        points[n - 1] = hi;
        Grid::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Constants of the growth conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub p: Exponent,
    /// First eigenvalue `λ_{p,0}` of the domain.
    pub lambda0: f64,
    /// Constant `λ > λ_{p,0}` in the hypothesis `f(u) ≥ λ u^{p−1}`.
    pub growth_lambda: Option<f64>,
}

impl ConditionParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, p: Exponent, lambda0: f64) -> ConditionParams {
        ConditionParams {
            alpha,
            beta,
            gamma,
            p,
            lambda0,
            growth_lambda: None,
        }
    }

    /// Upper end `(α − p) λ_{p,0} / p` of the admissible `β` range.
    pub fn beta_limit(&self) -> f64 {
        (self.alpha - self.p.get()) * self.lambda0 / self.p.get()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p.get();
        if !(self.alpha.is_finite() && self.alpha > 2.0) {
            return Err(Error::InvalidParams(format!("alpha = {} must exceed 2", self.alpha)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidParams(format!("gamma = {} must be positive", self.gamma)));
        }
        if !(self.lambda0.is_finite() && self.lambda0 >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda0 = {} must be nonnegative",
                self.lambda0
            )));
        }
        if p > 2.0 && self.lambda0 > 0.0 && self.alpha < p {
            return Err(Error::InvalidParams(format!(
                "alpha = {} must be at least p = {p} when p > 2 and sigma is not identically 0",
                self.alpha
            )));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParams(format!("beta = {} must be nonnegative", self.beta)));
        }
        if self.beta > self.beta_limit() {
            return Err(Error::InvalidParams(format!(
                "beta = {} exceeds (alpha - p) lambda0 / p = {}",
                self.beta,
                self.beta_limit()
            )));
        }
        Ok(())
    }

    /// `ε = α − max(p, 2)`, the excess over the critical exponent.
    pub fn epsilon(&self) -> f64 {
        self.alpha - self.p.get().max(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `α F ≤ u f`
    A,
    /// `α F ≤ u f + γ`
    B,
    /// `α F ≤ u f + β u^p + γ`
    C,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::A => "A_p",
            Condition::B => "B_p",
            Condition::C => "C_p",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub condition: Condition,
    /// `worst_margin ≥ 0`: the inequality holds at every grid point.
    pub holds: bool,
    pub worst_u: f64,
    /// Minimum over the grid of `u f(u) + β u^p + γ − α F(u)`.
    pub worst_margin: f64,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_points: usize,
}

/// Margin of a condition at one point. Values within a few ulps of the
/// magnitude of the terms are rounding noise and reported as zero.
fn margin(f: &Nonlinearity, u: f64, alpha: f64, beta: f64, gamma: f64, p: Exponent) -> Result<f64> {
    let (excess, excess_scale) = f.excess(u, alpha)?;
    let bu = beta * p.abs_pow(u);
    let m = excess + bu + gamma;
    let scale = excess_scale + bu + gamma;
    Ok(if m.abs() <= 16.0 * f64::EPSILON * scale {
        0.0
    } else {
        m
    })
}

/// Checks one of `(A_p)`, `(B_p)`, `(C_p)` on `grid`.
///
/// `(A_p)` is checked with `β = γ = 0` and `(B_p)` with `β = 0`; the
/// parameters themselves, including the `β` range, are validated in every case.
pub fn check_condition(
    f: &Nonlinearity,
    params: &ConditionParams,
    condition: Condition,
    grid: &Grid,
) -> Result<ConditionReport> {
    let (beta, gamma) = match condition {
        Condition::A => (0.0, 0.0),
        Condition::B => (0.0, params.gamma),
        Condition::C => (params.beta, params.gamma),
    };
    params.validate()?;
    let mut worst_u = grid.lo();
    let mut worst_margin = f64::INFINITY;
    for &u in grid.points() {
        let m = margin(f, u, params.alpha, beta, gamma, params.p)?;
        if m < worst_margin {
            worst_margin = m;
            worst_u = u;
        }
    }
    Ok(ConditionReport {
        condition,
        holds: worst_margin >= 0.0,
        worst_u,
        worst_margin,
        grid_lo: grid.lo(),
        grid_hi: grid.hi(),
        grid_points: grid.len(),
    })
}

/// Constants in `F(u) = u^{α} h_3(u) + a u^p + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H3Coefficients {
    pub a: f64,
    pub b: f64,
}

impl H3Coefficients {
    /// `a = β/(α − p)`, `b = γ/α`: with these, `h_3' ≥ 0` at `u` exactly when
    /// the `(C_p)` margin at `u` is nonnegative, since
    /// `d/du [(F − a u^p − b) u^{−α}] = (u f + β u^p + γ − α F) u^{−α−1}`.
    pub fn from_condition(params: &ConditionParams) -> H3Coefficients {
        let gap = params.alpha - params.p.get();
        let a = if params.beta == 0.0 { 0.0 } else { params.beta / gap };
        H3Coefficients {
            a,
            b: params.gamma / params.alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct H3Report {
    /// `max(p, 2) + ε`, which equals `α`.
    pub exponent: f64,
    pub coefficients: H3Coefficients,
    /// `(u, h_3(u))` on the grid.
    pub samples: Vec<(f64, f64)>,
    pub nondecreasing: bool,
    /// Most negative successive difference (0 when monotone).
    pub worst_drop: f64,
}

fn h3_exponent(params: &ConditionParams) -> Result<f64> {
    let eps = params.epsilon();
    let p = params.p.get();
    if eps < 0.0 {
        return Err(Error::InvalidParams(format!(
            "alpha = {} is below max(p, 2) = {}",
            params.alpha,
            p.max(2.0)
        )));
    }
    if eps == 0.0 && p <= 2.0 {
        return Err(Error::InvalidParams(
            "epsilon must be positive when p <= 2".into(),
        ));
    }
    Ok(p.max(2.0) + eps)
}

fn h3_value(f: &Nonlinearity, c: H3Coefficients, exponent: f64, p: Exponent, u: f64) -> Result<f64> {
    Ok((f.F(u)? - c.a * p.abs_pow(u) - c.b) / u.powf(exponent))
}

/// Samples `h_3(u) = (F(u) − a u^p − b) / u^{max(p,2)+ε}` and tests whether
/// it is nondecreasing on the grid.
pub fn characterize_h3(
    f: &Nonlinearity,
    params: &ConditionParams,
    coefficients: H3Coefficients,
    grid: &Grid,
) -> Result<H3Report> {
    params.validate()?;
    let exponent = h3_exponent(params)?;
    let samples = grid
        .points()
        .iter()
        .map(|&u| Ok((u, h3_value(f, coefficients, exponent, params.p, u)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut worst_drop: f64 = 0.0;
    let mut nondecreasing = true;
    for w in samples.windows(2) {
        let diff = w[1].1 - w[0].1;
        let scale = w[0].1.abs().max(w[1].1.abs()).max(f64::MIN_POSITIVE);
        if diff < -1e-12 * scale {
            nondecreasing = false;
        }
        worst_drop = worst_drop.min(diff);
    }
    Ok(H3Report {
        exponent,
        coefficients,
        samples,
        nondecreasing,
        worst_drop,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthWitness {
    /// Smallest grid point from which `h_3` stays positive.
    pub m: f64,
    /// `min_{u ≥ m} f(u) / u^{max(p−1,1)+ε}` over the grid.
    pub zeta: f64,
}

/// Finds `m` with `h_3 > 0` on `[m, ∞) ∩ grid` and the matching power-law
/// lower bound `f(u) ≥ ζ u^{max(p−1,1)+ε}`, after checking the hypothesis
/// `f(u) ≥ λ u^{p−1}` on the grid.
pub fn growth_witness(
    f: &Nonlinearity,
    params: &ConditionParams,
    coefficients: H3Coefficients,
    grid: &Grid,
) -> Result<GrowthWitness> {
    params.validate()?;
    let growth = params.growth_lambda.ok_or_else(|| {
        Error::InvalidParams("growth_lambda is required for the growth witness".into())
    })?;
    if !(growth > params.lambda0) {
        return Err(Error::InvalidParams(format!(
            "growth_lambda = {growth} must exceed lambda0 = {}",
            params.lambda0
        )));
    }
    let p = params.p.get();
    for &u in grid.points() {
        let bound = growth * u.powf(p - 1.0);
        let fu = f.f(u);
        if fu < bound {
            return Err(Error::HypothesisFailed { u, f: fu, bound });
        }
    }
    let exponent = h3_exponent(params)?;
    let h: Vec<f64> = grid
        .points()
        .iter()
        .map(|&u| h3_value(f, coefficients, exponent, params.p, u))
        .collect::<Result<_>>()?;
    let start = match h.iter().rposition(|&v| v <= 0.0) {
        None => 0,
        Some(i) if i + 1 < h.len() => i + 1,
        Some(_) => {
            return Err(Error::NotFound(format!(
                "h_3 is not positive at the top of the grid (u = {}); extend the grid",
                grid.hi()
            )))
        }
    };
    let power = (p - 1.0).max(1.0) + params.epsilon();
    let zeta = grid.points()[start..]
        .iter()
        .map(|&u| f.f(u) / u.powf(power))
        .fold(f64::INFINITY, f64::min);
    Ok(GrowthWitness {
        m: grid.points()[start],
        zeta,
    })
}

/// Initial data built on an interval where `F(v) > (ω₀/p) v^p + γ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: State,
    /// Interior value `v` used on `S`.
    pub level: f64,
    /// `(a, b)` containing `level` on which the inequality holds.
    pub interval: (f64, f64),
    /// `B(0)` evaluated on `u0`.
    pub b0: f64,
}

/// Builds nonnegative initial data with `B(0) > 0`.
///
/// Scans `grid` for the first run of `v` with
/// `F(v) − (ω₀/p) v^p − γ₁ > 0`, puts `u0 = v` on `S`, closes the boundary
/// (zero on `∂S ∖ Γ`, values in `(0, v]` on `Γ`), and only returns data whose
/// `B(0)` evaluates positive.
pub fn find_initial(
    net: &Network,
    bc: &BoundaryCondition,
    f: &Nonlinearity,
    p: Exponent,
    gamma: f64,
    gamma1: f64,
    grid: &Grid,
) -> Result<InitialData> {
    if !(gamma >= 0.0 && gamma1 >= gamma && gamma1.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "need 0 <= gamma <= gamma1, got gamma = {gamma}, gamma1 = {gamma1}"
        )));
    }
    let omega0 = net.degrees().omega0;
    let excess = |v: f64| -> Result<f64> {
        Ok(f.F(v)? - omega0 / p.get() * p.abs_pow(v) - gamma1)
    };
    let values: Vec<f64> = grid
        .points()
        .iter()
        .map(|&v| excess(v))
        .collect::<Result<_>>()?;
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let Some(first) = values.iter().position(|&g| g > 0.0) else {
        return Err(Error::NotFound(format!(
            "F(v) - (w0/p) v^p - gamma1 <= 0 on the grid [{}, {}] (max {best:.6e})",
            grid.lo(),
            grid.hi()
        )));
    };
    let last = values[first..]
        .iter()
        .position(|&g| g <= 0.0)
        .map_or(values.len(), |k| first + k);
    let pts = grid.points();

    let edge = |lo: f64, hi: f64, rising: bool| -> f64 {
        // excess changes sign once on [lo, hi]; orient it to be increasing
        let sign = if rising { 1.0 } else { -1.0 };
        increasing_root(
            |v| sign * excess(v).unwrap_or(f64::NAN),
            lo,
            hi,
            Tolerance { x: 1e-12, f: 0.0 },
            200,
        )
        .map(|r| r.x)
        .unwrap_or(if rising { lo } else { hi })
    };
    let a = if first == 0 { 0.0 } else { edge(pts[first - 1], pts[first], true) };
    let b = if last == values.len() {
        f64::INFINITY
    } else {
        edge(pts[last - 1], pts[last], false)
    };

    for &level in &pts[first..last] {
        let interior = State::interior_constant(net, level)?;
        let u0 = close_boundary(net, bc, &interior, p, DEFAULT_CLOSURE_TOL)?;
        let b0 = functional_b(net, bc, f, gamma, &u0, p)?;
        if b0 > 0.0 {
            return Ok(InitialData {
                u0,
                level,
                interval: (a, b),
                b0,
            });
        }
    }
    Err(Error::NotFound(format!(
        "no level in ({a}, {b}) gave B(0) > 0"
    )))
}
