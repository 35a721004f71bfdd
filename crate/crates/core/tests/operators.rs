mod common;

use common::{random_network, rng};
use plap::operators::{
    green_identity, p_laplacian, p_normal_derivative, Exponent, State,
};
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.5), Just(2.0), Just(2.7), Just(3.0), 1.1f64..4.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn green_identity_holds(seed in any::<u64>(), p in exponent()) {
        let mut r = rng(seed);
        let net = random_network(&mut r, 1 + (seed % 7) as usize, 1 + (seed % 3) as usize, true);
        let f = State::from_fn(&net, |x| ((x.index() as f64) * 1.7 + seed as f64 * 1e-3).sin() * 3.0).unwrap();
        let g = State::from_fn(&net, |x| ((x.index() as f64) * 0.3 - 1.0).cos()).unwrap();
        let id = green_identity(&net, &f, &g, Exponent::new(p).unwrap());
        prop_assert!(id.residual() <= 1e-10 * id.scale);
    }

    #[test]
    fn constants_are_harmonic(seed in any::<u64>(), c in -10.0f64..10.0, p in exponent()) {
        let mut r = rng(seed);
        let net = random_network(&mut r, 4, 2, true);
        let u = State::from_fn(&net, |_| c).unwrap();
        let p = Exponent::new(p).unwrap();
        for x in net.vertices() {
            prop_assert_eq!(p_laplacian(&net, &u, p, x).unwrap(), 0.0);
        }
        for &z in net.boundary() {
            prop_assert_eq!(p_normal_derivative(&net, &u, p, z).unwrap(), 0.0);
        }
    }

    #[test]
    fn odd_and_homogeneous(seed in any::<u64>(), scale in 0.1f64..10.0, p in exponent()) {
        let mut r = rng(seed);
        let net = random_network(&mut r, 5, 2, false);
        let u = State::from_fn(&net, |x| (x.index() as f64 * 2.3 + 0.5).sin()).unwrap();
        let neg = u.scaled(-1.0);
        let big = u.scaled(scale);
        let p = Exponent::new(p).unwrap();
        for x in net.vertices() {
            let base = p_laplacian(&net, &u, p, x).unwrap();
            let tol = 1e-12 * (1.0 + base.abs()) * scale.powf(p.get() - 1.0).max(1.0);
            prop_assert!((p_laplacian(&net, &neg, p, x).unwrap() + base).abs() <= tol);
            let expected = scale.powf(p.get() - 1.0) * base;
            prop_assert!((p_laplacian(&net, &big, p, x).unwrap() - expected).abs() <= 1e-10 * (1.0 + expected.abs()));
        }
    }
}

#[test]
fn state_rejects_wrong_length_and_non_finite() {
    let mut r = rng(0);
    let net = random_network(&mut r, 2, 1, false);
    assert!(State::new(&net, vec![0.0; net.len() + 1]).is_err());
    let mut values = vec![0.0; net.len()];
    values[0] = f64::NAN;
    assert!(State::new(&net, values).is_err());
}
