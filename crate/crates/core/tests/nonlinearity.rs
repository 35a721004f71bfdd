mod common;

use plap::boundary::BoundaryCondition;
use plap::functionals::functional_b;
use plap::nonlinearity::{
    characterize_h3, check_condition, find_initial, growth_witness, Condition, ConditionParams,
    Grid, H3Coefficients, Nonlinearity,
};
use plap::operators::Exponent;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Nonlinearity> {
    prop_oneof![
        (0.1f64..3.0, 1.0f64..5.0).prop_map(|(l, q)| Nonlinearity::power(l, q).unwrap()),
        (0.1f64..3.0, 1.0f64..5.0, 0.0f64..1.0)
            .prop_map(|(l, q, c)| Nonlinearity::power_plus_const(l, q, c).unwrap()),
        (0.5f64..4.0, proptest::collection::vec(0.8f64..1.2, 12)).prop_map(|(s, noise)| {
            let pts = std::iter::once((0.0, 0.0))
                .chain(noise.iter().enumerate().map(|(i, n)| {
                    let u = (i + 1) as f64 * 0.5;
                    (u, u.powf(s) * n)
                }))
                .collect();
            Nonlinearity::table(pts).unwrap()
        }),
    ]
}

fn params() -> impl Strategy<Value = ConditionParams> {
    (1.2f64..3.5, 2.05f64..6.0, 0.0f64..3.0, 0.01f64..2.0, 0.0f64..=1.0)
        .prop_filter_map("valid parameters", |(p, alpha, lambda0, gamma, t)| {
            let p = Exponent::new(p).ok()?;
            let mut c = ConditionParams::new(alpha, 0.0, gamma, p, lambda0);
            let limit = c.beta_limit();
            if limit < 0.0 {
                return None;
            }
            c.beta = t * limit;
            c.validate().ok()?;
            Some(c)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn implication_chain(f in family(), c in params()) {
        let grid = Grid::log_spaced(1e-3, 1e3, 200).unwrap();
        let a = check_condition(&f, &c, Condition::A, &grid).unwrap();
        let b = check_condition(&f, &c, Condition::B, &grid).unwrap();
        let cc = check_condition(&f, &c, Condition::C, &grid).unwrap();
        prop_assert!(!a.holds || b.holds);
        prop_assert!(!b.holds || cc.holds);
        prop_assert_eq!(cc.holds, cc.worst_margin >= 0.0);
    }

    #[test]
    fn primitive_is_nondecreasing_from_zero(f in family(), us in proptest::collection::vec(0.0f64..20.0, 2..20)) {
        prop_assert_eq!(f.F(0.0).unwrap(), 0.0);
        let mut us = us;
        us.sort_by(f64::total_cmp);
        let values: Vec<f64> = us.iter().map(|&u| f.F(u).unwrap()).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12 * w[0].abs());
        }
    }

    #[test]
    fn pure_power_margin_is_zero(lambda in 0.1f64..5.0, q in 1.0f64..6.0) {
        let f = Nonlinearity::power(lambda, q).unwrap();
        let c = ConditionParams::new(q + 1.0, 0.0, 1.0, Exponent::new(2.0).unwrap(), 0.0);
        let r = check_condition(&f, &c, Condition::A, &Grid::default()).unwrap();
        prop_assert_eq!(r.worst_margin, 0.0);
    }

    #[test]
    fn h3_monotonicity_matches_condition(f in family(), c in params()) {
        prop_assume!(c.epsilon() > 0.0);
        let grid = Grid::log_spaced(1e-2, 1e2, 300).unwrap();
        let coeffs = H3Coefficients::from_condition(&c);
        let h = characterize_h3(&f, &c, coeffs, &grid).unwrap();
        let cond = check_condition(&f, &c, Condition::C, &grid).unwrap();
        // a clear violation of the condition shows up as a clear drop of h_3
        if cond.worst_margin < -1e-6 * (1.0 + c.gamma) {
            prop_assert!(h.worst_drop < 0.0);
        }
        if cond.worst_margin > 0.0 {
            prop_assert!(h.nondecreasing);
        }
    }
}

#[test]
fn growth_witness_for_linear_f() {
    let f = Nonlinearity::power(3.0, 1.0).unwrap();
    let mut c = ConditionParams::new(2.5, 0.0, 0.1, Exponent::new(2.0).unwrap(), 2.0);
    c.growth_lambda = Some(2.5);
    let grid = Grid::log_spaced(1.0, 100.0, 200).unwrap();
    let coeffs = H3Coefficients { a: 0.0, b: 0.1 };
    let w = growth_witness(&f, &c, coeffs, &grid).unwrap();
    // h_3 = (1.5u² − 0.1)/u^{2.5} is positive on the whole grid
    assert_eq!(w.m, 1.0);
    // f(u)/u^{1.5} = 3/√u is smallest at the top of the grid
    assert!((w.zeta - 0.3).abs() < 1e-12);
}

#[test]
fn growth_witness_zeta_for_pure_power() {
    // f = u^{p−1+δ} with δ > ε: ratio u^{δ−ε} is smallest at the grid bottom
    let f = Nonlinearity::power(1.0, 2.0).unwrap();
    let mut c = ConditionParams::new(2.5, 0.0, 0.1, Exponent::new(2.0).unwrap(), 0.5);
    c.growth_lambda = Some(1.0);
    let grid = Grid::log_spaced(1.0, 50.0, 100).unwrap();
    let w = growth_witness(&f, &c, H3Coefficients { a: 0.0, b: 0.0 }, &grid).unwrap();
    assert!(w.zeta > 0.0);
    assert!((w.zeta - w.m.powf(0.5)).abs() < 1e-12);
}

#[test]
fn find_initial_returns_verified_data() {
    let net = common::path(3);
    let bc = BoundaryCondition::uniform(&net, 1.0, 0.5).unwrap();
    let p = Exponent::new(3.0).unwrap();
    let f = Nonlinearity::power(1.0, 4.0).unwrap();
    let init = find_initial(&net, &bc, &f, p, 0.2, 0.5, &Grid::default()).unwrap();
    let b0 = functional_b(&net, &bc, &f, 0.2, &init.u0, p).unwrap();
    assert_eq!(b0, init.b0);
    assert!(b0 > 0.0);
    for &z in net.boundary() {
        assert!(init.u0[z] > 0.0 && init.u0[z] <= init.level);
    }
}

#[test]
fn superlinear_finder_succeeds_for_any_scale() {
    // F(v) dominates ω₀ v^p + γ₁ for large v, so every grid start succeeds
    let net = common::path(2);
    let bc = BoundaryCondition::dirichlet(&net);
    let f = Nonlinearity::power(1.0, 3.0).unwrap();
    for lo in [1e-3, 0.1, 1.0, 10.0] {
        let grid = Grid::log_spaced(lo, lo * 1e4, 500).unwrap();
        assert!(find_initial(&net, &bc, &f, Exponent::new(2.0).unwrap(), 0.1, 0.1, &grid).is_ok());
    }
}
