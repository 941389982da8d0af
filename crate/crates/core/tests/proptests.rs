//! Randomized invariants.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use x1jacobi::paths::{arcsine_q_moment, brute_force_sum, c_closed, s_closed, PathModel};
use x1jacobi::quadrature::gauss_rule;
use x1jacobi::JacobiParams;

fn rational() -> impl Strategy<Value = BigRational> {
    (-9i64..=9, 1i64..=9).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn three_step_closed_form(a in rational(), b in rational(), k in 0usize..=7, j in -8i64..=8) {
        let brute = brute_force_sum(&PathModel::three_step(&a, &b, k, j)).unwrap();
        prop_assert_eq!(s_closed(k as u64, j, &a, &b), brute);
    }

    #[test]
    fn five_step_closed_form(d0 in rational(), d1 in rational(), k in 0usize..=6) {
        let u0 = &d1 / BigRational::from_integer(4.into());
        let u1 = &d0 / BigRational::from_integer(2.into());
        let u2 = &d1 / BigRational::from_integer(8.into());
        let brute = brute_force_sum(&PathModel::five_step([&u0, &u1, &u2], k, 0)).unwrap();
        prop_assert_eq!(c_closed(k as u64, &d0, &d1), brute.clone());
        prop_assert_eq!(arcsine_q_moment(k as u64, &d0, &d1), brute);
    }

    #[test]
    fn gauss_rule_is_exact(a in -0.9f64..4.0, b in -0.9f64..4.0, m in 1usize..20) {
        // degree 2m-1 monomial against the rule with twice the nodes
        let p = JacobiParams::new(a, b).unwrap();
        let small = gauss_rule(&p, m).unwrap();
        let big = gauss_rule(&p, 2 * m + 4).unwrap();
        let deg = 2 * m as i32 - 1;
        let f = |x: f64| x.powi(deg) + x.powi(deg / 2);
        let (u, v) = (small.integrate(f), big.integrate(f));
        prop_assert!((u - v).abs() <= 1e-12 * v.abs().max(p.zeroth_moment()));
    }

    #[test]
    fn symmetric_weight_has_parity(a in -0.9f64..4.0, n in 0usize..40, x in -1.0f64..=1.0) {
        let p = JacobiParams::new(a, a).unwrap();
        let (u, v) = (p.orthonormal_eval(n, x).unwrap(), p.orthonormal_eval(n, -x).unwrap());
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((u - sign * v).abs() <= 1e-9 * u.abs().max(1.0));
    }

    #[test]
    fn gauss_weights_sum_to_mass(a in -0.9f64..4.0, b in -0.9f64..4.0, m in 1usize..64) {
        let p = JacobiParams::new(a, b).unwrap();
        let rule = gauss_rule(&p, m).unwrap();
        let s: f64 = rule.weights().iter().sum();
        prop_assert!((s - p.zeroth_moment()).abs() <= 1e-12 * p.zeroth_moment());
    }
}
