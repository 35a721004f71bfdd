//! The functionals of the concavity argument,
//!
//! ```text
//! A(t) = Σ_{x∈S} u(x,t)²
//! B(t) = −1/(2p) Σ_{x,y∈S̄} |u(x)−u(y)|^p ω(x,y) − 1/p Σ_{z∈Γ} σ(z)/μ(z) |u(z)|^p
//!        + Σ_{x∈S} [F(u(x)) − γ]
//! ```
//!
//! together with the blow-up time bound `A(0) / ((α−2) α B(0))` and checks of
//! the differential inequalities along sampled trajectories.

use serde::Serialize;

use crate::boundary::BoundaryCondition;
use crate::error::{Error, Result};
use crate::network::Network;
use crate::nonlinearity::Nonlinearity;
use crate::operators::{Exponent, State};

/// One row of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySample {
    pub t: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub u_min: f64,
    pub u_max: f64,
    /// Time elapsed since the previous sample (0 for the first row).
    ///
    /// Kept separately because near blow-up the gaps can fall below the
    /// resolution of `t` itself.
    pub dt: f64,
}

/// `Σ_{x∈S} u(x)²`.
pub fn functional_a(net: &Network, u: &State) -> f64 {
    net.interior().iter().map(|&x| u[x] * u[x]).sum()
}

/// `B` evaluated on `u`, which should already be closed with respect to `bc`.
pub fn functional_b(
    net: &Network,
    bc: &BoundaryCondition,
    f: &Nonlinearity,
    gamma: f64,
    u: &State,
    p: Exponent,
) -> Result<f64> {
    u.compatible(net)?;
    let pv = p.get();
    let gradient: f64 = net
        .edges()
        .iter()
        .map(|e| p.abs_pow(u[e.a] - u[e.b]) * e.weight)
        .sum();
    let robin: f64 = bc
        .gamma_set()
        .iter()
        .map(|&z| bc.robin_ratio(z) * p.abs_pow(u[z]))
        .sum();
    let mut reaction = 0.0;
    for &x in net.interior() {
        reaction += f.F(u[x])? - gamma;
    }
    Ok(-gradient / pv - robin / pv + reaction)
}

/// Energy sample of `u` at time `t`.
#[allow(clippy::too_many_arguments)]
pub fn energy_sample(
    net: &Network,
    bc: &BoundaryCondition,
    f: &Nonlinearity,
    gamma: f64,
    u: &State,
    p: Exponent,
    t: f64,
    dt: f64,
) -> Result<EnergySample> {
    let (u_min, u_max) = net
        .interior()
        .iter()
        .map(|&x| u[x])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    Ok(EnergySample {
        t,
        a: functional_a(net, u),
        b: functional_b(net, bc, f, gamma, u, p)?,
        u_min,
        u_max,
        dt,
    })
}

/// Upper bound `A0 / ((α−2) α B0)` on the blow-up time.
pub fn blowup_time_bound(a0: f64, b0: f64, alpha: f64) -> Result<f64> {
    if !(b0 > 0.0) {
        return Err(Error::NonpositiveB0(b0));
    }
    if !(alpha > 2.0) {
        return Err(Error::InvalidParams(format!("alpha = {alpha} must exceed 2")));
    }
    Ok(a0 / ((alpha - 2.0) * alpha * b0))
}

/// Lower envelope
/// `A(t) ≥ [A0^{(2−α)/2} − (α−2) α A0^{−α/2} B0 t]^{−2/(α−2)}`,
/// which equals `A0` at `t = 0` and diverges at [`blowup_time_bound`].
pub fn lower_envelope_a(t: f64, a0: f64, b0: f64, alpha: f64) -> Result<f64> {
    let bound = blowup_time_bound(a0, b0, alpha)?;
    if !(t >= 0.0 && t < bound) {
        return Err(Error::OutOfRange { t, bound });
    }
    if t == 0.0 {
        return Ok(a0);
    }
    let base = a0.powf((2.0 - alpha) / 2.0) - (alpha - 2.0) * alpha * a0.powf(-alpha / 2.0) * b0 * t;
    Ok(base.powf(-2.0 / (alpha - 2.0)))
}

/// Outcome of one inequality checked at every admissible sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub holds: bool,
    pub checked: usize,
    /// Smallest `lhs − rhs` seen; negative values within tolerance are allowed.
    pub worst_slack: f64,
    pub worst_t: Option<f64>,
}

impl InequalityCheck {
    fn new() -> Self {
        InequalityCheck {
            holds: true,
            checked: 0,
            worst_slack: f64::INFINITY,
            worst_t: None,
        }
    }

    fn record(&mut self, t: f64, slack: f64, tol: f64) {
        self.checked += 1;
        if slack < self.worst_slack {
            self.worst_slack = slack;
            self.worst_t = Some(t);
        }
        if !(slack >= -tol) {
            self.holds = false;
        }
    }
}

/// The four inequalities of the concavity argument along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryDiagnostics {
    /// `B(t_{k+1}) ≥ B(t_k)`
    pub b_nondecreasing: InequalityCheck,
    /// `A′(t) ≥ 2α B(t)`, with `A′` from centred differences
    pub a_prime_bound: InequalityCheck,
    /// `A(t) ≥` [`lower_envelope_a`]; only checked when `B(0) > 0`
    pub envelope: InequalityCheck,
    /// `A^{−α/2} B` nondecreasing
    pub concavity: InequalityCheck,
}

impl TrajectoryDiagnostics {
    pub fn all_hold(&self) -> bool {
        self.b_nondecreasing.holds
            && self.a_prime_bound.holds
            && self.envelope.holds
            && self.concavity.holds
    }
}

/// Second-order derivative estimate at sample `k` from samples `k − h` and
/// `k + h` on a possibly nonuniform mesh with gaps `gap[i] = t_i − t_{i−1}`.
fn centred_derivative(gap: &[f64], a: &[f64], k: usize, h: usize) -> f64 {
    let h1: f64 = gap[k + 1 - h..=k].iter().sum();
    let h2: f64 = gap[k + 1..=k + h].iter().sum();
    (h1 * h1 * a[k + h] - h2 * h2 * a[k - h] + (h2 * h2 - h1 * h1) * a[k]) / (h1 * h2 * (h1 + h2))
}

/// Checks the concavity inequalities with tolerance `rel_tol·(1 + |quantity|)`.
///
/// The `A′` check additionally allows the truncation error of the centred
/// difference, estimated by comparing stencils of width one and two; it is
/// therefore evaluated only where two samples exist on either side.
pub fn check_trajectory(samples: &[EnergySample], alpha: f64, rel_tol: f64) -> TrajectoryDiagnostics {
    let mut diag = TrajectoryDiagnostics {
        b_nondecreasing: InequalityCheck::new(),
        a_prime_bound: InequalityCheck::new(),
        envelope: InequalityCheck::new(),
        concavity: InequalityCheck::new(),
    };
    let n = samples.len();
    if n == 0 {
        return diag;
    }
    for w in samples.windows(2) {
        let tol = rel_tol * (1.0 + w[0].b.abs());
        diag.b_nondecreasing.record(w[1].t, w[1].b - w[0].b, tol);
        let q0 = w[0].a.powf(-alpha / 2.0) * w[0].b;
        let q1 = w[1].a.powf(-alpha / 2.0) * w[1].b;
        if q0.is_finite() && q1.is_finite() {
            diag.concavity
                .record(w[1].t, q1 - q0, rel_tol * (1.0 + q0.abs()));
        }
    }

    let gap: Vec<f64> = samples.iter().map(|s| s.dt).collect();
    let a: Vec<f64> = samples.iter().map(|s| s.a).collect();
    for k in 2..n.saturating_sub(2) {
        let narrow = centred_derivative(&gap, &a, k, 1);
        let wide = centred_derivative(&gap, &a, k, 2);
        let rhs = 2.0 * alpha * samples[k].b;
        let tol = rel_tol * (1.0 + rhs.abs()) + (wide - narrow).abs();
        diag.a_prime_bound.record(samples[k].t, narrow - rhs, tol);
    }

    let (a0, b0) = (samples[0].a, samples[0].b);
    if let Ok(bound) = blowup_time_bound(a0, b0, alpha) {
        for s in samples {
            if s.t >= bound {
                break;
            }
            if let Ok(env) = lower_envelope_a(s.t - samples[0].t, a0, b0, alpha) {
                diag.envelope
                    .record(s.t, s.a - env, rel_tol * (1.0 + env.abs()));
            }
        }
    }
    diag
}
