//! Method-of-lines integration of
//!
//! ```text
//! u_t(x, t) = Δ_{p,ω} u(x, t) + f(u(x, t)),   x ∈ S
//! B[u](z, t) = 0,                              z ∈ ∂S
//! ```
//!
//! The boundary is re-closed after every stage, so the boundary condition
//! holds at every stored state. Blow-up is declared once `max_S |u|` reaches
//! the threshold `M`.

use serde::Serialize;

use crate::boundary::{close_in_place, BoundaryCondition, DEFAULT_CLOSURE_TOL};
use crate::error::{Error, Result};
use crate::functionals::{
    blowup_time_bound, check_trajectory, energy_sample, EnergySample, TrajectoryDiagnostics,
};
use crate::network::{Network, VertexId};
use crate::nonlinearity::{ConditionParams, Nonlinearity};
use crate::operators::{p_laplacian_at, Exponent, State};

/// Accepted steps whose relative change exceeds this are retried with `dt/2`.
pub const SHRINK_ABOVE: f64 = 0.10;
/// Accepted steps whose relative change stays below this double `dt`.
pub const GROW_BELOW: f64 = 0.01;
/// Steps used by the blow-up time fit.
pub const FIT_WINDOW: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    Rk4,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s {
            "euler" => Ok(Method::Euler),
            "rk4" => Ok(Method::Rk4),
            _ => Err(Error::Config(format!("unknown method '{s}' (expected euler or rk4)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// First step; `None` uses the local-existence time scale.
    pub dt_init: Option<f64>,
    pub dt_min: f64,
    pub t_max: f64,
    /// Blow-up threshold `M` on `max_S |u|`.
    pub blow_threshold: f64,
    /// Fraction of the explicit stability limit that a step may use.
    pub safety: f64,
    /// Record every `stride`-th accepted step.
    pub stride: usize,
    pub method: Method,
    /// Differences below `floor·(1 + ‖u‖)` count as this size when
    /// estimating the stiffness of `Δ_p` for `p < 2`.
    pub stiffness_floor: f64,
    pub max_steps: usize,
    /// Multiplies both step-control thresholds.
    pub change_scale: f64,
    /// On blow-up, repeat the run with half the first step and half the
    /// step-control thresholds, and add the change of `T*` to the error bar.
    pub refine_estimate: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt_init: None,
            dt_min: 1e-30,
            t_max: 10.0,
            blow_threshold: 1e8,
            safety: 0.5,
            stride: 1,
            method: Method::Rk4,
            stiffness_floor: 1e-9,
            max_steps: 20_000_000,
            change_scale: 1.0,
            refine_estimate: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {v} must be finite and positive")))
            }
        };
        positive("dt_min", self.dt_min)?;
        positive("t_max", self.t_max)?;
        positive("blow_threshold", self.blow_threshold)?;
        positive("stiffness_floor", self.stiffness_floor)?;
        if let Some(dt) = self.dt_init {
            positive("dt_init", dt)?;
            if dt <= self.dt_min {
                return Err(Error::Config(format!(
                    "dt_init = {dt} must exceed dt_min = {}",
                    self.dt_min
                )));
            }
        }
        if !(self.change_scale > 0.0 && self.change_scale <= 1.0) {
            return Err(Error::Config(format!(
                "change_scale = {} must lie in (0, 1]",
                self.change_scale
            )));
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return Err(Error::Config(format!("safety = {} must lie in (0, 1)", self.safety)));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// The semi-discrete system on a fixed network.
struct System<'a> {
    net: &'a Network,
    bc: &'a BoundaryCondition,
    f: &'a Nonlinearity,
    p: Exponent,
}

/// Scratch space for one explicit step.
struct Workspace {
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
    /// `Σ_S f` at each stage, weighted like the update.
    reaction_rate: f64,
}

impl Workspace {
    fn new(n: usize) -> Workspace {
        Workspace {
            k: std::array::from_fn(|_| vec![0.0; n]),
            stage: vec![0.0; n],
            reaction_rate: 0.0,
        }
    }
}

impl System<'_> {
    /// Right-hand side on `S`; returns `Σ_S f(u)`.
    fn rhs(&self, u: &[f64], out: &mut [f64]) -> f64 {
        let mut reaction = 0.0;
        for &x in self.net.interior() {
            let fx = self.f.f(u[x.0]);
            reaction += fx;
            out[x.0] = p_laplacian_at(self.net, u, self.p, x) + fx;
        }
        reaction
    }

    fn close(&self, u: &mut [f64]) -> Result<()> {
        close_in_place(self.net, self.bc, u, self.p, DEFAULT_CLOSURE_TOL)
    }

    /// `out = base + h·k` on `S`, then closed on `∂S`.
    fn advance(&self, base: &[f64], k: &[f64], h: f64, out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(base);
        for &x in self.net.interior() {
            out[x.0] += h * k[x.0];
        }
        self.close(out)
    }

    fn step_into(
        &self,
        method: Method,
        u: &[f64],
        dt: f64,
        ws: &mut Workspace,
        out: &mut [f64],
    ) -> Result<()> {
        match method {
            Method::Euler => {
                ws.reaction_rate = self.rhs(u, &mut ws.k[0]);
                self.advance(u, &ws.k[0], dt, out)
            }
            Method::Rk4 => {
                let [k1, k2, k3, k4] = &mut ws.k;
                let r1 = self.rhs(u, k1);
                self.advance(u, k1, 0.5 * dt, &mut ws.stage)?;
                let r2 = self.rhs(&ws.stage, k2);
                self.advance(u, k2, 0.5 * dt, &mut ws.stage)?;
                let r3 = self.rhs(&ws.stage, k3);
                self.advance(u, k3, dt, &mut ws.stage)?;
                let r4 = self.rhs(&ws.stage, k4);
                ws.reaction_rate = (r1 + 2.0 * r2 + 2.0 * r3 + r4) / 6.0;
                out.copy_from_slice(u);
                for &x in self.net.interior() {
                    let i = x.0;
                    out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                self.close(out)
            }
        }
    }

    /// Explicit stability limit `2 / max_x Σ_y φ_p'(u(y) − u(x)) ω(x, y)`,
    /// infinite when diffusion is locally inactive.
    fn stability_limit(&self, u: &[f64], floor: f64) -> f64 {
        let pv = self.p.get();
        let delta = floor * (1.0 + sup_norm(u));
        let mut stiffness: f64 = 0.0;
        for &x in self.net.interior() {
            let mut s = 0.0;
            for &(y, w) in self.net.neighbors(x) {
                let d = (u[y.0] - u[x.0]).abs();
                s += if pv == 2.0 {
                    w
                } else if pv < 2.0 {
                    (pv - 1.0) * d.max(delta).powf(pv - 2.0) * w
                } else {
                    (pv - 1.0) * d.powf(pv - 2.0) * w
                };
            }
            stiffness = stiffness.max(s);
        }
        if stiffness > 0.0 {
            2.0 / stiffness
        } else {
            f64::INFINITY
        }
    }
}

fn sup_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn interior_sup(net: &Network, u: &[f64]) -> f64 {
    net.interior().iter().fold(0.0, |m, x| m.max(u[x.0].abs()))
}

/// `max_x |new − old| / max_x |old|` over `S`.
fn relative_change(net: &Network, old: &[f64], new: &[f64]) -> f64 {
    let mut diff: f64 = 0.0;
    for &x in net.interior() {
        diff = diff.max((new[x.0] - old[x.0]).abs());
    }
    if diff == 0.0 {
        return 0.0;
    }
    diff / interior_sup(net, old).max(f64::MIN_POSITIVE)
}

/// One step of size `dt` from a closed state; the result is closed again.
pub fn step(
    net: &Network,
    bc: &BoundaryCondition,
    f: &Nonlinearity,
    u: &State,
    p: Exponent,
    dt: f64,
    method: Method,
) -> Result<State> {
    u.compatible(net)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("dt = {dt} must be finite and positive")));
    }
    let sys = System { net, bc, f, p };
    let mut ws = Workspace::new(net.len());
    let mut out = vec![0.0; net.len()];
    sys.step_into(method, u.values(), dt, &mut ws, &mut out)?;
    let t = u.time.map(|t| t + dt);
    if let Some(i) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            vertex: VertexId(i),
            t: t.unwrap_or(dt),
        });
    }
    let mut next = State::new(net, out)?;
    next.time = t;
    Ok(next)
}

/// Local-existence time scale `‖u0‖ / (ω₀ (4‖u0‖)^{p−1} + 4 L ‖u0‖)`, with
/// `ω₀` the largest degree on `S̄` and `L` a Lipschitz bound of `f` on
/// `[−4‖u0‖, 4‖u0‖]`.
pub fn initial_step(net: &Network, f: &Nonlinearity, u0: &State, p: Exponent) -> Option<f64> {
    let m = sup_norm(u0.values());
    if m == 0.0 {
        return None;
    }
    let omega0 = net.max_degree();
    let lip = f.lipschitz(4.0 * m);
    let dt = m / (omega0 * (4.0 * m).powf(p.get() - 1.0) + 4.0 * lip * m);
    (dt.is_finite() && dt > 0.0).then_some(dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Completed,
    BlowUp,
    DtUnderflow,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Completed => "completed",
            Verdict::BlowUp => "blow-up",
            Verdict::DtUnderflow => "dt-underflow",
        }
    }
}

/// How the blow-up time was extrapolated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extrapolation {
    /// Linear fit of `(max u)^{1−q}` over the last steps.
    PowerFit,
    /// Aitken acceleration of the times at which `M/100`, `M/10`, `M` were reached.
    ThresholdSequence,
    /// Too few steps for either; the detection time itself.
    Detection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupEstimate {
    pub t_star: f64,
    pub error: f64,
    pub method: Extrapolation,
}

/// Nonnegativity of all recorded states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignCheck {
    pub holds: bool,
    /// Smallest value over `S̄` and all recorded times.
    pub min_value: f64,
}

/// `d/dt Σ_S u = Σ_S f(u)` between consecutive samples, for pure Neumann data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassCheck {
    pub holds: bool,
    pub checked: usize,
    /// Largest `|Δ(Σu)/Δt − ∫Σf/Δt| / (1 + |Δ(Σu)/Δt| + |∫Σf/Δt|)`.
    pub worst_residual: f64,
}

/// Relative tolerance of the mass balance.
pub const MASS_TOL: f64 = 1e-4;
/// Relative tolerance of the trajectory inequalities.
pub const TRAJECTORY_TOL: f64 = 1e-6;
/// Absolute tolerance of the sign and ordering checks.
pub const SIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub nonnegative: SignCheck,
    pub mass: Option<MassCheck>,
    pub trajectory: Option<TrajectoryDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub verdict: Verdict,
    pub samples: Vec<EnergySample>,
    pub steps: usize,
    pub rejected_steps: usize,
    pub t_end: f64,
    /// First time `max_S |u| ≥ M`.
    pub t_detect: Option<f64>,
    pub t_star: Option<BlowupEstimate>,
    /// `A(0) / ((α−2) α B(0))` when condition parameters were given and `B(0) > 0`.
    pub bound_t: Option<f64>,
    pub b0: Option<f64>,
    pub diagnostics: Diagnostics,
    #[serde(skip)]
    pub final_state: State,
}

impl SimulationReport {
    /// Time-series CSV with columns `t,A,B,u_min,u_max,dt`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,A,B,u_min,u_max,dt\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                s.t, s.a, s.b, s.u_min, s.u_max, s.dt
            ));
        }
        out
    }
}

/// Least-squares root of the line through `(t_i, w_i)`.
fn line_root(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mw = points.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = points.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let stw: f64 = points.iter().map(|p| (p.0 - mt) * (p.1 - mw)).sum();
    if stt == 0.0 || stw == 0.0 {
        return None;
    }
    let slope = stw / stt;
    let root = mt - mw / slope;
    root.is_finite().then_some(root)
}

fn estimate_blowup(
    history: &[(Clock, f64)],
    q: Option<f64>,
    crossings: [Option<Clock>; 3],
    detect: Clock,
) -> BlowupEstimate {
    if let Some(q) = q {
        let w: Vec<(f64, f64)> = history
            .iter()
            .map(|&(t, m)| (t.since(detect), m.powf(1.0 - q)))
            .collect();
        let long = &w[w.len().saturating_sub(FIT_WINDOW)..];
        let short = &w[w.len().saturating_sub(FIT_WINDOW / 2)..];
        if long.len() >= 3 {
            if let (Some(a), Some(b)) = (line_root(long), line_root(short)) {
                let ahead = a.max(0.0);
                return BlowupEstimate {
                    t_star: detect.offset(ahead),
                    error: (a - b).abs() + ahead,
                    method: Extrapolation::PowerFit,
                };
            }
        }
    }
    if let [Some(c0), Some(c1), Some(c2)] = crossings {
        let d1 = c1.since(c0);
        let d2 = c2.since(c1);
        let denom = d2 - d1;
        let ahead = if denom < 0.0 && d2 > 0.0 {
            (c2.since(detect) - d2 * d2 / denom).max(0.0)
        } else {
            c2.since(detect)
        };
        return BlowupEstimate {
            t_star: detect.offset(ahead),
            error: ahead.abs().max(d2),
            method: Extrapolation::ThresholdSequence,
        };
    }
    BlowupEstimate {
        t_star: detect.value(),
        error: 0.0,
        method: Extrapolation::Detection,
    }
}

/// Time kept as an unevaluated sum `hi + lo`, so that steps far below the
/// resolution of `t` still accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Clock {
    hi: f64,
    lo: f64,
}

impl Clock {
    fn add(&mut self, h: f64) {
        let s = self.hi + h;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (h - bb) + self.lo;
        self.hi = s + err;
        self.lo = err - (self.hi - s);
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }

    /// `self − earlier`, accurate when the two are close.
    fn since(self, earlier: Clock) -> f64 {
        (self.hi - earlier.hi) + (self.lo - earlier.lo)
    }

    /// `self + offset` rounded to `f64`.
    fn offset(self, offset: f64) -> f64 {
        self.hi + (self.lo + offset)
    }
}

/// Whether the Neumann mass balance applies: `σ ≡ 0` and no boundary–boundary edges.
pub fn mass_balance_applies(net: &Network, bc: &BoundaryCondition) -> bool {
    bc.sigma_vanishes() && net.boundary_boundary_edges().is_empty()
}

/// Adaptive step-size state shared by [`simulate`] and [`compare`].
struct Stepper {
    dt: f64,
    t: Clock,
    steps: usize,
    rejected: usize,
}

enum StepOutcome {
    Accepted { dt: f64 },
    Underflow,
    Finished,
}

impl Stepper {
    /// Advances every trajectory by the same accepted step.
    fn advance(
        &mut self,
        sys: &System,
        cfg: &IntegratorConfig,
        states: &mut [Vec<f64>],
        next: &mut [Vec<f64>],
        ws: &mut [Workspace],
    ) -> Result<StepOutcome> {
        if self.t.value() >= cfg.t_max {
            return Ok(StepOutcome::Finished);
        }
        if self.steps >= cfg.max_steps {
            return Err(Error::ConvergenceFailure(format!(
                "step limit {} reached at t = {}",
                cfg.max_steps,
                self.t.value()
            )));
        }
        let cap = states
            .iter()
            .map(|u| cfg.safety * sys.stability_limit(u, cfg.stiffness_floor))
            .fold(f64::INFINITY, f64::min);
        let mut dt = self.dt.min(cap);
        loop {
            let remaining = (cfg.t_max - self.t.hi) - self.t.lo;
            let last = dt >= remaining;
            let h = if last { remaining } else { dt };
            if h < cfg.dt_min && !last {
                return Ok(StepOutcome::Underflow);
            }
            let mut change: f64 = 0.0;
            let mut finite = true;
            for ((u, out), w) in states.iter().zip(next.iter_mut()).zip(ws.iter_mut()) {
                sys.step_into(cfg.method, u, h, w, out)?;
                finite &= out.iter().all(|v| v.is_finite());
                change = change.max(relative_change(sys.net, u, out));
            }
            if !finite || change > SHRINK_ABOVE * cfg.change_scale {
                self.rejected += 1;
                dt = 0.5 * h;
                continue;
            }
            for (u, out) in states.iter_mut().zip(next.iter_mut()) {
                std::mem::swap(u, out);
            }
            if last {
                self.t = Clock { hi: cfg.t_max, lo: 0.0 };
            } else {
                self.t.add(h);
            }
            self.steps += 1;
            self.dt = if change < GROW_BELOW * cfg.change_scale { 2.0 * dt } else { dt };
            return Ok(StepOutcome::Accepted { dt: h });
        }
    }
}

fn check_initial(net: &Network, u0: &State, cfg: &IntegratorConfig) -> Result<()> {
    u0.compatible(net)?;
    if !u0.is_finite() {
        return Err(Error::Config("initial data must be finite".into()));
    }
    if let Some(x) = net.vertices().find(|&x| u0[x] < 0.0) {
        return Err(Error::Config(format!(
            "initial data must be nonnegative (u0({}) = {})",
            net.name(x),
            u0[x]
        )));
    }
    if net.interior().iter().all(|&x| u0[x] == 0.0) {
        return Err(Error::Config("initial data must be nontrivial on S".into()));
    }
    let sup = u0.interior_sup(net);
    if !(cfg.blow_threshold > sup) {
        return Err(Error::Config(format!(
            "blow-up threshold {} must exceed max |u0| = {sup}",
            cfg.blow_threshold
        )));
    }
    Ok(())
}

fn first_step(net: &Network, f: &Nonlinearity, u0: &State, p: Exponent, cfg: &IntegratorConfig) -> f64 {
    cfg.dt_init
        .or_else(|| initial_step(net, f, u0, p))
        .unwrap_or(1e-3)
        .min(cfg.t_max)
        .max(2.0 * cfg.dt_min)
}

/// Integrates from `u0` (nonnegative, nontrivial, closed) until `t_max`,
/// blow-up, or step-size underflow.
///
/// With `params`, `B` uses `params.gamma`, and the report carries the time
/// bound and the concavity diagnostics; otherwise `B` is computed with
/// `γ = 0` and those fields are empty.
pub fn simulate(
    net: &Network,
    bc: &BoundaryCondition,
    f: &Nonlinearity,
    u0: &State,
    p: Exponent,
    cfg: &IntegratorConfig,
    params: Option<&ConditionParams>,
) -> Result<SimulationReport> {
    cfg.validate()?;
    check_initial(net, u0, cfg)?;
    let sys = System { net, bc, f, p };
    let gamma = params.map_or(0.0, |c| c.gamma);
    let mass_applies = mass_balance_applies(net, bc);
    let q = f.leading_power();
    let m = cfg.blow_threshold;
    let levels = [m / 100.0, m / 10.0, m];

    let mut states = vec![u0.values().to_vec()];
    let mut next = vec![vec![0.0; net.len()]];
    let mut ws = vec![Workspace::new(net.len())];
    let dt0 = first_step(net, f, u0, p, cfg);
    let mut stepper = Stepper {
        dt: dt0,
        t: Clock::default(),
        steps: 0,
        rejected: 0,
    };

    let mut samples = vec![energy_sample(net, bc, f, gamma, u0, p, 0.0, 0.0)?];
    let mut min_value = u0.values().iter().copied().fold(f64::INFINITY, f64::min);
    let mut history: Vec<(Clock, f64)> = vec![(Clock::default(), u0.interior_sup(net))];
    let mut crossings: [Option<Clock>; 3] = [None; 3];
    for (c, &level) in crossings.iter_mut().zip(&levels) {
        if u0.interior_sup(net) >= level {
            *c = Some(Clock::default());
        }
    }
    let interior_sum = |u: &[f64]| net.interior().iter().map(|x| u[x.0]).sum::<f64>();
    let mut mass = MassCheck {
        holds: true,
        checked: 0,
        worst_residual: 0.0,
    };
    let mut mass_anchor = (Clock::default(), interior_sum(u0.values()));
    let mut reaction_integral = 0.0;
    let mut t_detect = None;
    let mut sampled_at = Clock::default();

    let verdict = loop {
        match stepper.advance(&sys, cfg, &mut states, &mut next, &mut ws)? {
            StepOutcome::Finished => break Verdict::Completed,
            StepOutcome::Underflow => break Verdict::DtUnderflow,
            StepOutcome::Accepted { dt } => {
                let u = &states[0];
                let now = stepper.t;
                reaction_integral += dt * ws[0].reaction_rate;
                min_value = min_value.min(u.iter().copied().fold(f64::INFINITY, f64::min));
                let sup = interior_sup(net, u);
                history.push((now, sup));
                if history.len() > FIT_WINDOW {
                    history.remove(0);
                }
                for (c, &level) in crossings.iter_mut().zip(&levels) {
                    if c.is_none() && sup >= level {
                        *c = Some(now);
                    }
                }
                let blown = sup >= m;
                if blown || stepper.steps % cfg.stride == 0 || now.value() >= cfg.t_max {
                    let state = State::new(net, u.clone())?;
                    let span = now.since(sampled_at);
                    let mut sample = energy_sample(net, bc, f, gamma, &state, p, now.value(), span)?;
                    if samples.len() > 1 && samples.last().is_some_and(|s| s.t == sample.t) {
                        // indistinguishable in f64: keep only the later state
                        sample.dt += samples.pop().map_or(0.0, |s| s.dt);
                    }
                    samples.push(sample);
                    sampled_at = now;
                    if mass_applies {
                        let (t0, s0) = mass_anchor;
                        let s1 = interior_sum(u);
                        let span = now.since(t0);
                        let lhs = (s1 - s0) / span;
                        let rhs = reaction_integral / span;
                        let r = (lhs - rhs).abs() / (1.0 + lhs.abs() + rhs.abs());
                        mass.checked += 1;
                        mass.worst_residual = mass.worst_residual.max(r);
                        mass.holds &= r <= MASS_TOL;
                        mass_anchor = (now, s1);
                        reaction_integral = 0.0;
                    }
                }
                if blown {
                    t_detect = Some(now);
                    break Verdict::BlowUp;
                }
            }
        }
    };

    let mut t_star = t_detect.map(|td| estimate_blowup(&history, q, crossings, td));
    if let Some(est) = t_star.as_mut().filter(|_| cfg.refine_estimate && dt0 / 2.0 > cfg.dt_min) {
        let half = IntegratorConfig {
            dt_init: Some(dt0 / 2.0),
            stride: usize::MAX,
            change_scale: 0.5 * cfg.change_scale,
            refine_estimate: false,
            ..*cfg
        };
        if let Some(other) = simulate(net, bc, f, u0, p, &half, None)?.t_star {
            est.error += (other.t_star - est.t_star).abs();
        }
    }
    let t_detect = t_detect.map(Clock::value);
    let b0 = params.map(|_| samples[0].b);
    let bound_t = params.and_then(|c| blowup_time_bound(samples[0].a, samples[0].b, c.alpha).ok());
    let trajectory = params.map(|c| check_trajectory(&samples, c.alpha, TRAJECTORY_TOL));
    let scale_tol = SIGN_TOL * (1.0 + u0.interior_sup(net));
    let final_state = State::new(net, states.pop().expect("one trajectory"))?.with_time(stepper.t.value());
    Ok(SimulationReport {
        verdict,
        samples,
        steps: stepper.steps,
        rejected_steps: stepper.rejected,
        t_end: stepper.t.value(),
        t_detect,
        t_star,
        bound_t,
        b0,
        diagnostics: Diagnostics {
            nonnegative: SignCheck {
                holds: min_value >= -scale_tol,
                min_value,
            },
            mass: mass_applies.then_some(mass),
            trajectory,
        },
        final_state,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub verdict: Verdict,
    pub steps: usize,
    pub t_end: f64,
    /// Minimum of `u_high − u_low` over `S̄` and all accepted steps.
    pub min_difference: f64,
    pub min_at_t: f64,
    pub min_at_vertex: String,
    /// `min_difference ≥ −1e−9`.
    pub ordered: bool,
    /// Minimum over `S ∪ Γ` and steps with `t ≥ strict_from`.
    pub min_difference_after: Option<f64>,
}

/// Integrates two ordered initial states with one shared step sequence and
/// records how far the ordering `u_high ≥ u_low` is from being violated.
///
/// The integration stops at `t_max`, or as soon as either trajectory reaches
/// the blow-up threshold.
#[allow(clippy::too_many_arguments)]
pub fn compare(
    net: &Network,
    bc: &BoundaryCondition,
    f: &Nonlinearity,
    u0_high: &State,
    u0_low: &State,
    p: Exponent,
    cfg: &IntegratorConfig,
    strict_from: f64,
) -> Result<ComparisonReport> {
    cfg.validate()?;
    check_initial(net, u0_high, cfg)?;
    u0_low.compatible(net)?;
    if !u0_low.is_finite() {
        return Err(Error::Config("initial data must be finite".into()));
    }
    if let Some(x) = net.vertices().find(|&x| u0_high[x] < u0_low[x]) {
        return Err(Error::Config(format!(
            "initial data are not ordered at '{}' ({} < {})",
            net.name(x),
            u0_high[x],
            u0_low[x]
        )));
    }
    let sys = System { net, bc, f, p };
    let mut states = vec![u0_high.values().to_vec(), u0_low.values().to_vec()];
    let mut next = vec![vec![0.0; net.len()]; 2];
    let mut ws = vec![Workspace::new(net.len()), Workspace::new(net.len())];
    let dt0 = first_step(net, f, u0_high, p, cfg).min(first_step(net, f, u0_low, p, cfg));
    let mut stepper = Stepper {
        dt: dt0,
        t: Clock::default(),
        steps: 0,
        rejected: 0,
    };
    let watched: Vec<VertexId> = net
        .interior()
        .iter()
        .chain(bc.gamma_set())
        .copied()
        .collect();

    let mut report = ComparisonReport {
        verdict: Verdict::Completed,
        steps: 0,
        t_end: 0.0,
        min_difference: f64::INFINITY,
        min_at_t: 0.0,
        min_at_vertex: String::new(),
        ordered: true,
        min_difference_after: None,
    };
    let observe = |states: &[Vec<f64>], t: f64, report: &mut ComparisonReport| {
        for x in net.vertices() {
            let d = states[0][x.0] - states[1][x.0];
            if d < report.min_difference {
                report.min_difference = d;
                report.min_at_t = t;
                report.min_at_vertex = net.name(x).to_string();
            }
        }
        if t >= strict_from && t > 0.0 {
            let m = watched
                .iter()
                .map(|x| states[0][x.0] - states[1][x.0])
                .fold(f64::INFINITY, f64::min);
            report.min_difference_after = Some(report.min_difference_after.map_or(m, |v| v.min(m)));
        }
    };
    observe(&states, 0.0, &mut report);

    report.verdict = loop {
        match stepper.advance(&sys, cfg, &mut states, &mut next, &mut ws)? {
            StepOutcome::Finished => break Verdict::Completed,
            StepOutcome::Underflow => break Verdict::DtUnderflow,
            StepOutcome::Accepted { .. } => {
                observe(&states, stepper.t.value(), &mut report);
                if states.iter().any(|u| interior_sup(net, u) >= cfg.blow_threshold) {
                    break Verdict::BlowUp;
                }
            }
        }
    };
    report.steps = stepper.steps;
    report.t_end = stepper.t.value();
    report.ordered = report.min_difference >= -SIGN_TOL;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Role;

    fn path(interior: usize) -> Network {
        let mut names = vec![("z0".to_string(), Role::Boundary)];
        names.extend((1..=interior).map(|i| (format!("x{i}"), Role::Interior)));
        names.push((format!("z{}", interior + 1), Role::Boundary));
        let edges: Vec<(String, String, f64)> = names
            .windows(2)
            .map(|w| (w[0].0.clone(), w[1].0.clone(), 1.0))
            .collect();
        Network::new(names, edges).unwrap()
    }

    fn p2() -> Exponent {
        Exponent::new(2.0).unwrap()
    }

    #[test]
    fn euler_step_by_hand() {
        let net = path(1);
        let bc = BoundaryCondition::dirichlet(&net);
        let f = Nonlinearity::power(1.0, 3.0).unwrap();
        let u = State::new(&net, vec![0.0, 1.0, 0.0]).unwrap();
        let next = step(&net, &bc, &f, &u, p2(), 0.01, Method::Euler).unwrap();
        assert!((next.values()[1] - 0.99).abs() < 1e-15);
        assert_eq!(next.values()[0], 0.0);
    }

    #[test]
    fn zero_is_an_equilibrium() {
        let net = path(2);
        let bc = BoundaryCondition::uniform(&net, 1.0, 1.0).unwrap();
        let f = Nonlinearity::power(1.0, 2.0).unwrap();
        let u = State::zeros(&net);
        for method in [Method::Euler, Method::Rk4] {
            let next = step(&net, &bc, &f, &u, p2(), 0.1, method).unwrap();
            assert!(next.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn neumann_constant_euler_step() {
        let net = path(2);
        let bc = BoundaryCondition::neumann(&net);
        let f = Nonlinearity::power(1.0, 3.0).unwrap();
        let c = 0.7;
        let u = State::new(&net, vec![c; 4]).unwrap();
        let next = step(&net, &bc, &f, &u, Exponent::new(1.5).unwrap(), 0.01, Method::Euler).unwrap();
        for &v in next.values() {
            assert!((v - (c + 0.01 * c * c * c)).abs() < 1e-14);
        }
    }

    #[test]
    fn scalar_blowup_time() {
        let net = path(1);
        let bc = BoundaryCondition::neumann(&net);
        for (q, exact) in [(2.0, 1.0), (3.0, 0.5)] {
            let f = Nonlinearity::power(1.0, q).unwrap();
            let u0 = State::new(&net, vec![1.0; 3]).unwrap();
            let cfg = IntegratorConfig::default();
            let r = simulate(&net, &bc, &f, &u0, p2(), &cfg, None).unwrap();
            assert_eq!(r.verdict, Verdict::BlowUp);
            let est = r.t_star.unwrap();
            assert_eq!(est.method, Extrapolation::PowerFit);
            assert!((est.t_star - exact).abs() < 1e-3 * exact, "{est:?}");
            assert!(r.t_detect.unwrap() <= est.t_star);
            assert!(r.diagnostics.mass.unwrap().holds);
        }
    }

    #[test]
    fn linear_growth_completes() {
        let net = path(2);
        let bc = BoundaryCondition::neumann(&net);
        let f = Nonlinearity::power(1.0, 1.0).unwrap();
        let u0 = State::new(&net, vec![0.5; 4]).unwrap();
        let cfg = IntegratorConfig {
            t_max: 3.0,
            ..Default::default()
        };
        let r = simulate(&net, &bc, &f, &u0, p2(), &cfg, None).unwrap();
        assert_eq!(r.verdict, Verdict::Completed);
        assert_eq!(r.t_end, 3.0);
        let u_max = r.samples.last().unwrap().u_max;
        let exact = 0.5 * 3f64.exp();
        assert!((u_max - exact).abs() < 0.01 * exact);
        assert!(r.t_star.is_none());
    }

    #[test]
    fn rejects_bad_initial_data() {
        let net = path(1);
        let bc = BoundaryCondition::dirichlet(&net);
        let f = Nonlinearity::power(1.0, 2.0).unwrap();
        let cfg = IntegratorConfig::default();
        let zero = State::zeros(&net);
        assert!(matches!(
            simulate(&net, &bc, &f, &zero, p2(), &cfg, None),
            Err(Error::Config(_))
        ));
        let negative = State::new(&net, vec![0.0, -1.0, 0.0]).unwrap();
        assert!(simulate(&net, &bc, &f, &negative, p2(), &cfg, None).is_err());
        let big = State::new(&net, vec![0.0, 1e9, 0.0]).unwrap();
        assert!(simulate(&net, &bc, &f, &big, p2(), &cfg, None).is_err());
    }

    #[test]
    fn identical_data_compare_exactly() {
        let net = path(3);
        let bc = BoundaryCondition::uniform(&net, 1.0, 0.5).unwrap();
        let f = Nonlinearity::power(1.0, 2.0).unwrap();
        let u = crate::boundary::close_boundary(
            &net,
            &bc,
            &State::new(&net, vec![0.0, 0.2, 0.4, 0.1, 0.0]).unwrap(),
            p2(),
            DEFAULT_CLOSURE_TOL,
        )
        .unwrap();
        let cfg = IntegratorConfig {
            t_max: 1.0,
            ..Default::default()
        };
        let r = compare(&net, &bc, &f, &u, &u, p2(), &cfg, 0.5).unwrap();
        assert_eq!(r.min_difference, 0.0);
        assert!(r.ordered);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("rk4".parse::<Method>().unwrap(), Method::Rk4);
        assert!("heun".parse::<Method>().is_err());
    }
}
