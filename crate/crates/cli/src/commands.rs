use plap::eigen::{first_eigenpair, EigenPair, RayleighConfig};
use plap::error::Error;
use plap::functionals::{blowup_time_bound, functional_a, functional_b};
use plap::integrate::{compare, simulate, IntegratorConfig, Verdict};
use plap::network::Network;
use plap::boundary::BoundaryCondition;
use plap::nonlinearity::{check_condition, find_initial, Condition, ConditionParams, Grid};
use plap::operators::Exponent;
use serde_json::Value;

use crate::args::{self, B0Args, CheckArgs, CompareArgs, EigenArgs, FindInitialArgs, SimulateArgs};
use crate::input::{parse_nonlinearity, read_problem, read_state};
use crate::output::{check, emit, num, opt, vertex_csv, Summary};
use crate::Failure;

fn exponent(p: f64) -> Result<Exponent, Failure> {
    Ok(Exponent::new(p)?)
}

fn rayleigh_config(seed: u64, restarts: Option<usize>) -> RayleighConfig {
    let mut cfg = RayleighConfig { seed, ..Default::default() };
    if let Some(r) = restarts {
        cfg.restarts = r;
    }
    cfg
}

fn integrator_config(a: &args::Integrator) -> IntegratorConfig {
    let mut cfg = IntegratorConfig {
        dt_init: a.dt0,
        method: a.method,
        stride: a.stride,
        ..Default::default()
    };
    if let Some(v) = a.dtmin {
        cfg.dt_min = v;
    }
    if let Some(v) = a.tmax {
        cfg.t_max = v;
    }
    if let Some(v) = a.blow_threshold {
        cfg.blow_threshold = v;
    }
    cfg
}

/// `λ_{p,0}` from the flag, else from the graph, else 0.
fn lambda0(
    c: &args::Condition,
    problem: Option<(&Network, &BoundaryCondition)>,
    p: Exponent,
    seed: u64,
) -> Result<f64, Failure> {
    if let Some(l) = c.lambda0 {
        return Ok(l);
    }
    match problem {
        Some((net, bc)) => Ok(first_eigenpair(net, bc, p, &rayleigh_config(seed, c.restarts))?.lambda),
        None => Ok(0.0),
    }
}

fn condition_params(c: &args::Condition, p: Exponent, lambda0: f64) -> Result<ConditionParams, Failure> {
    let alpha = c.alpha.ok_or_else(|| Failure::input("--alpha is required"))?;
    let gamma = c.gamma.ok_or_else(|| Failure::input("--gamma is required"))?;
    let params = ConditionParams::new(alpha, c.beta.unwrap_or(0.0), gamma, p, lambda0);
    params.validate()?;
    Ok(params)
}

fn put_params(s: &mut Summary, c: &ConditionParams) {
    s.real("alpha", c.alpha)
        .real("beta", c.beta)
        .real("gamma", c.gamma)
        .real("lambda0", c.lambda0);
}

pub fn simulate_cmd(a: SimulateArgs) -> Result<(), Failure> {
    let p = exponent(a.common.p)?;
    let (net, bc) = read_problem(&a.common.graph)?;
    let f = parse_nonlinearity(&a.reaction.f)?;
    let u0 = read_state(&net, &bc, p, &a.u0)?;
    let cfg = integrator_config(&a.integrator);
    cfg.validate()?;
    let params = match a.condition.alpha {
        Some(_) => {
            let l0 = lambda0(&a.condition, Some((&net, &bc)), p, a.common.seed)?;
            Some(condition_params(&a.condition, p, l0)?)
        }
        None => None,
    };
    let report = simulate(&net, &bc, &f, &u0, p, &cfg, params.as_ref())?;

    let mut s = Summary::new("simulate", a.common.seed);
    s.real("p", p.get())
        .put("f", a.reaction.f.as_str())
        .put("method", a.integrator.method.label())
        .put("verdict", report.verdict.label())
        .put("steps", report.steps)
        .put("rejected_steps", report.rejected_steps)
        .real("t_end", report.t_end)
        .put("T_detect", opt(report.t_detect))
        .put("T_star_estimate", opt(report.t_star.map(|e| e.t_star)))
        .put("T_star_error", opt(report.t_star.map(|e| e.error)))
        .put(
            "T_star_method",
            report
                .t_star
                .map_or(Value::Null, |e| serde_json::to_value(e.method).expect("enum serializes")),
        )
        .put("bound_T", opt(report.bound_t))
        .put("B0", opt(report.b0));
    if let Some(c) = &params {
        put_params(&mut s, c);
    }

    let d = &report.diagnostics;
    let mut flags = Summary::default();
    flags
        .put("nonnegative", d.nonnegative.holds)
        .put("mass_balance", d.mass.map_or(Value::Null, |m| m.holds.into()));
    let mut details = Summary::default();
    details.real("min_value", d.nonnegative.min_value);
    if let Some(m) = d.mass {
        details.real("mass_worst_residual", m.worst_residual);
    }
    if let Some(t) = &d.trajectory {
        flags
            .put("b_nondecreasing", t.b_nondecreasing.holds)
            .put("a_prime_bound", t.a_prime_bound.holds)
            .put("envelope", t.envelope.holds)
            .put("concavity", t.concavity.holds);
        details
            .put("b_nondecreasing", check(&t.b_nondecreasing))
            .put("a_prime_bound", check(&t.a_prime_bound))
            .put("envelope", check(&t.envelope))
            .put("concavity", check(&t.concavity));
    }
    s.put("diagnostics", flags.into_value()).put("checks", details.into_value());

    let files = [
        ("timeseries.csv", report.to_csv()),
        ("final_state.csv", vertex_csv(&net, &report.final_state)),
    ];
    emit(&s, a.common.out.as_deref(), &files)?;
    if report.verdict == Verdict::DtUnderflow {
        return Err(Failure::underflow(report.t_end));
    }
    Ok(())
}

fn eigen_summary(s: &mut Summary, pair: &EigenPair, converged: bool) {
    s.real("lambda", pair.lambda)
        .real("residual", pair.residual)
        .real("rayleigh", pair.rayleigh)
        .put("restarts_used", pair.restarts_used)
        .put("converged", converged);
}

pub fn eigen_cmd(a: EigenArgs) -> Result<(), Failure> {
    let p = exponent(a.common.p)?;
    let (net, bc) = read_problem(&a.common.graph)?;
    let cfg = rayleigh_config(a.common.seed, a.restarts);
    let (pair, failure) = match first_eigenpair(&net, &bc, p, &cfg) {
        Ok(pair) => (pair, None),
        Err(Error::EigenConvergence(best)) => {
            let msg = format!("no eigenpair within tolerance; best residual {:.3e}", best.residual);
            (*best, Some(Failure::eigen(msg)))
        }
        Err(e) => return Err(e.into()),
    };
    let mut s = Summary::new("eigen", a.common.seed);
    s.real("p", p.get());
    eigen_summary(&mut s, &pair, failure.is_none());
    emit(&s, a.common.out.as_deref(), &[("phi.csv", vertex_csv(&net, &pair.phi))])?;
    failure.map_or(Ok(()), Err)
}

fn grid(a: &CheckArgs) -> Result<Grid, Failure> {
    let d = Grid::default();
    if a.grid_lo.is_none() && a.grid_hi.is_none() && a.grid_points.is_none() {
        return Ok(d);
    }
    Ok(Grid::log_spaced(
        a.grid_lo.unwrap_or(d.lo()),
        a.grid_hi.unwrap_or(d.hi()),
        a.grid_points.unwrap_or(d.len()),
    )?)
}

pub fn check_condition_cmd(a: CheckArgs) -> Result<(), Failure> {
    let p = exponent(a.p)?;
    let f = parse_nonlinearity(&a.reaction.f)?;
    let which = match a.which.as_str() {
        "A" | "a" => Condition::A,
        "B" | "b" => Condition::B,
        "C" | "c" => Condition::C,
        other => return Err(Failure::input(format!("unknown condition {other:?}; use A, B or C"))),
    };
    let problem = a.graph.as_deref().map(read_problem).transpose()?;
    let l0 = lambda0(&a.condition, problem.as_ref().map(|(n, b)| (n, b)), p, a.seed)?;
    let params = condition_params(&a.condition, p, l0)?;
    let grid = grid(&a)?;
    let report = check_condition(&f, &params, which, &grid)?;

    let mut s = Summary::new("check-condition", a.seed);
    s.real("p", p.get()).put("f", a.reaction.f.as_str());
    put_params(&mut s, &params);
    s.put("condition", which.label())
        .put("holds", report.holds)
        .real("worst_margin", report.worst_margin)
        .real("worst_u", report.worst_u)
        .real("grid_lo", report.grid_lo)
        .real("grid_hi", report.grid_hi)
        .put("grid_points", report.grid_points);
    let mut all = Summary::default();
    for c in [Condition::A, Condition::B, Condition::C] {
        all.put(c.label(), check_condition(&f, &params, c, &grid)?.holds);
    }
    s.put("all", all.into_value());
    emit(&s, a.out.as_deref(), &[])
}

pub fn b0_cmd(a: B0Args) -> Result<(), Failure> {
    let p = exponent(a.common.p)?;
    let (net, bc) = read_problem(&a.common.graph)?;
    let f = parse_nonlinearity(&a.reaction.f)?;
    let u0 = read_state(&net, &bc, p, &a.u0)?;
    if !(a.gamma >= 0.0 && a.gamma.is_finite()) {
        return Err(Failure::input(format!("gamma = {} must be finite and nonnegative", a.gamma)));
    }
    let a0 = functional_a(&net, &u0);
    let b0 = functional_b(&net, &bc, &f, a.gamma, &u0, p)?;
    let bound = match a.alpha {
        Some(alpha) if b0 > 0.0 => Some(blowup_time_bound(a0, b0, alpha)?),
        _ => None,
    };
    let mut s = Summary::new("b0", a.common.seed);
    s.real("p", p.get())
        .put("f", a.reaction.f.as_str())
        .real("gamma", a.gamma)
        .real("A0", a0)
        .real("b0", b0)
        .put("b0_positive", b0 > 0.0)
        .put("bound_T", opt(bound));
    emit(&s, a.common.out.as_deref(), &[])
}

pub fn find_initial_cmd(a: FindInitialArgs) -> Result<(), Failure> {
    let p = exponent(a.common.p)?;
    let (net, bc) = read_problem(&a.common.graph)?;
    let f = parse_nonlinearity(&a.reaction.f)?;
    let init = find_initial(&net, &bc, &f, p, a.gamma, a.gamma1, &Grid::default())?;
    let mut s = Summary::new("find-initial", a.common.seed);
    s.real("p", p.get())
        .put("f", a.reaction.f.as_str())
        .real("gamma", a.gamma)
        .real("gamma1", a.gamma1)
        .real("level", init.level)
        .put("interval", vec![num(init.interval.0), num(init.interval.1)])
        .real("A0", functional_a(&net, &init.u0))
        .real("b0", init.b0)
        .put("b0_positive", init.b0 > 0.0);
    emit(&s, a.common.out.as_deref(), &[("u0.csv", vertex_csv(&net, &init.u0))])
}

pub fn compare_cmd(a: CompareArgs) -> Result<(), Failure> {
    let p = exponent(a.common.p)?;
    let (net, bc) = read_problem(&a.common.graph)?;
    let f = parse_nonlinearity(&a.reaction.f)?;
    let high = read_state(&net, &bc, p, &a.u0)?;
    let low = read_state(&net, &bc, p, &a.u0_low)?;
    let cfg = integrator_config(&a.integrator);
    let r = compare(&net, &bc, &f, &high, &low, p, &cfg, a.strict_from)?;
    let mut s = Summary::new("compare", a.common.seed);
    s.real("p", p.get())
        .put("f", a.reaction.f.as_str())
        .put("verdict", r.verdict.label())
        .put("steps", r.steps)
        .real("t_end", r.t_end)
        .put("ordered", r.ordered)
        .real("min_difference", r.min_difference)
        .real("min_at_t", r.min_at_t)
        .put("min_at_vertex", r.min_at_vertex.as_str())
        .real("strict_from", a.strict_from)
        .put("min_difference_after", opt(r.min_difference_after));
    emit(&s, a.common.out.as_deref(), &[])?;
    if r.verdict == Verdict::DtUnderflow {
        return Err(Failure::underflow(r.t_end));
    }
    Ok(())
}
