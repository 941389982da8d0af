//! Classical orthonormal Jacobi family against independent oracles.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;
use x1jacobi::darboux::jacobi_exact;
use x1jacobi::poly::{ratio, RatPoly};
use x1jacobi::quadrature::gauss_rule;
use x1jacobi::JacobiParams;

fn params(a: f64, b: f64) -> JacobiParams {
    JacobiParams::new(a, b).unwrap()
}

/// Standard `P_n^{(a,b)}(x)` from the explicit finite sum, no recurrence.
fn explicit_jacobi(n: usize, a: f64, b: f64, x: f64) -> f64 {
    let binom = |top: f64, k: usize| -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (top - i as f64) / (i + 1) as f64)
    };
    (0..=n)
        .map(|s| {
            binom(n as f64 + a, n - s)
                * binom(n as f64 + b, s)
                * ((x - 1.0) / 2.0).powi(s as i32)
                * ((x + 1.0) / 2.0).powi((n - s) as i32)
        })
        .sum()
}

fn standard_norm(n: usize, a: f64, b: f64) -> f64 {
    let nf = n as f64;
    ((a + b + 1.0) * std::f64::consts::LN_2 - (2.0 * nf + a + b + 1.0).ln()
        + ln_gamma(nf + a + 1.0)
        + ln_gamma(nf + b + 1.0)
        - ln_gamma(nf + a + b + 1.0)
        - ln_gamma(nf + 1.0))
    .exp()
    .sqrt()
}

/// Exact `int_{-1}^{1} x^m (1-x)^2 (1+x) dx`.
fn moment_21(m: usize) -> BigRational {
    let w = RatPoly::from_i64(&[1, -1, -1, 1]);
    let mut total = BigRational::zero();
    for (k, c) in w.coeffs().iter().enumerate() {
        let e = m + k;
        if e % 2 == 0 {
            total += c * ratio(2, e as i64 + 1);
        }
    }
    total
}

#[test]
fn eigenvalue_examples() {
    let p = params(2.0, 1.0);
    assert_eq!(p.eigenvalue(0), 0.0);
    assert_eq!(p.eigenvalue(1), 5.0);
    assert_eq!(p.eigenvalue(10), 140.0);
}

#[test]
fn legendre_low_degrees() {
    let p = params(0.0, 0.0);
    for x in [-1.0, -0.3, 0.0, 0.8, 1.0] {
        assert!((p.orthonormal_eval(0, x).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }
    assert!(p.orthonormal_eval(1, 0.0).unwrap().abs() < 1e-15);
}

#[test]
fn evaluation_outside_interval_is_rejected() {
    assert!(params(2.0, 1.0).orthonormal_eval(3, 1.5).is_err());
}

#[test]
fn parameters_at_or_below_minus_one_are_rejected() {
    assert!(JacobiParams::new(-1.0, 0.5).is_err());
    assert!(JacobiParams::new(0.5, -1.5).is_err());
    assert!(JacobiParams::new(f64::NAN, 0.5).is_err());
    assert!(JacobiParams::new(-0.5, -0.5).is_ok());
}

#[test]
fn gram_schmidt_oracle() {
    // modified Gram-Schmidt on the coefficient vectors of 1, x, .., x^5,
    // with moments from a 60-point Gauss-Legendre rule times the weight
    let legendre = gauss_rule(&params(0.0, 0.0), 60).unwrap();
    let moment =
        |k: usize| legendre.integrate(|x| x.powi(k as i32) * (1.0 - x).powi(2) * (1.0 + x));
    let mom: Vec<f64> = (0..=10).map(moment).collect();
    let dot = |f: &[f64], g: &[f64]| -> f64 {
        let mut s = 0.0;
        for (i, a) in f.iter().enumerate() {
            for (j, b) in g.iter().enumerate() {
                s += a * b * mom[i + j];
            }
        }
        s
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..=5 {
        let mut v = vec![0.0; 6];
        v[k] = 1.0;
        for e in &basis {
            let c = dot(&v, e);
            v.iter_mut().zip(e).for_each(|(a, b)| *a -= c * b);
        }
        let nrm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|a| *a /= nrm);
        basis.push(v);
    }
    let oracle: f64 = basis[5]
        .iter()
        .enumerate()
        .map(|(k, c)| c * 0.3f64.powi(k as i32))
        .sum();
    let value = params(2.0, 1.0).orthonormal_eval(5, 0.3).unwrap();
    assert!((value - oracle).abs() < 1e-10, "{value} vs {oracle}");
}

#[test]
fn explicit_sum_agrees_with_recurrence() {
    for &(a, b) in &[(2.0, 1.0), (0.5, 1.5), (-0.5, 0.5), (3.0, 3.0)] {
        let p = params(a, b);
        for n in [0, 1, 4, 9, 15] {
            for x in [-0.95, -0.2, 0.35, 0.9] {
                let oracle = explicit_jacobi(n, a, b, x) / standard_norm(n, a, b);
                let v = p.orthonormal_eval(n, x).unwrap();
                assert!(
                    (v - oracle).abs() < 1e-10 * oracle.abs().max(1.0),
                    "({a},{b}) n={n} x={x}"
                );
            }
        }
    }
}

#[test]
fn symmetric_weight_has_zero_diagonal() {
    let p = params(0.0, 0.0);
    for n in 0..50 {
        assert_eq!(p.recurrence_coeffs(n).1, 0.0);
    }
}

#[test]
fn coefficients_approach_chebyshev_limits() {
    let (a, b) = params(2.0, 1.0).recurrence_coeffs(200);
    assert!((a - 0.5).abs() < 0.01 && b.abs() < 0.01);
}

#[test]
fn coefficients_match_quadrature_inner_products() {
    let p = params(2.0, 1.0);
    let rule = gauss_rule(&p, 40).unwrap();
    let val = |n: usize, x: f64| p.orthonormal_eval(n, x).unwrap();
    let a3 = rule.integrate(|x| x * val(3, x) * val(2, x));
    let b3 = rule.integrate(|x| x * val(3, x) * val(3, x));
    let (a, b) = p.recurrence_coeffs(3);
    assert!((a - a3).abs() < 1e-13 && (b - b3).abs() < 1e-13);
}

#[test]
fn structure_relation_parity() {
    let s = params(0.0, 0.0).structure_coeffs(1).unwrap();
    assert!(s.b.abs() < 1e-15);
    assert!(params(0.0, 0.0).structure_coeffs(0).is_err());
}

#[test]
fn structure_leading_ratio() {
    let s = params(2.0, 1.0).structure_coeffs(100).unwrap();
    assert!((0.45..0.55).contains(&(s.a / 100.0)));
}

#[test]
fn structure_coefficients_match_exact_expansion() {
    // (x^2-1) P_4' expanded in P_3, P_4, P_5 with exact rational algebra on
    // standard polynomials, then rescaled to the orthonormal family
    let (a, b) = (ratio(2, 1), ratio(1, 1));
    let ps = jacobi_exact(5, &a, &b);
    let lhs = &RatPoly::from_i64(&[-1, 0, 1]) * &ps[4].derivative();
    let mut rest = lhs;
    let mut coef = [
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
    ];
    for (slot, k) in [(0usize, 5usize), (1, 4), (2, 3)] {
        let c = rest.coeff(k) / ps[k].leading();
        rest = &rest - &ps[k].scale(&c);
        coef[slot] = c;
    }
    assert!(rest.is_zero());
    let h = |n: usize| standard_norm(n, 2.0, 1.0);
    let f = |q: &BigRational| q.to_f64().unwrap();
    // orthonormal: p_n = P_n / h_n, so (x^2-1) p_4' = sum c_k h_k / h_4 p_k
    let oracle = [
        f(&coef[0]) * h(5) / h(4),
        f(&coef[1]),
        f(&coef[2]) * h(3) / h(4),
    ];
    let s = params(2.0, 1.0).structure_coeffs(4).unwrap();
    for (got, want) in [s.a, s.b, s.c].into_iter().zip(oracle) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn structure_relation_residual() {
    let p = params(2.0, 1.0);
    for n in [1, 7, 40] {
        let s = p.structure_coeffs(n).unwrap();
        let rec = p.recurrence(n + 1);
        for x in [-0.9, -0.1, 0.6] {
            let rows = rec.eval_with_derivatives(n + 1, x, 1);
            let lhs = (x * x - 1.0) * rows[1][n];
            let rhs = s.a * rows[0][n + 1] + s.b * rows[0][n] + s.c * rows[0][n - 1];
            assert!(
                (lhs - rhs).abs() < 1e-10 * (n as f64).max(1.0),
                "n={n} x={x}"
            );
        }
    }
}

#[test]
fn structure_trend_is_monotone() {
    for &(a, b) in &[(2.0, 1.0), (0.5, 1.5), (3.0, 1.0)] {
        let p = params(a, b);
        let (la, lb, lc) = p.structure_limits();
        let mut prev = [f64::INFINITY; 3];
        for n in [25, 50, 100, 200] {
            let s = p.structure_coeffs(n).unwrap();
            let nf = n as f64;
            let d = [
                (s.a / nf - la).abs(),
                (s.b - lb).abs(),
                (s.c / nf - lc).abs(),
            ];
            for k in 0..3 {
                assert!(d[k] <= prev[k], "({a},{b}) component {k} at n={n}");
            }
            prev = d;
        }
    }
}

#[test]
fn gauss_rule_examples() {
    let one = gauss_rule(&params(0.0, 0.0), 1).unwrap();
    assert!(one.nodes()[0].abs() < 1e-15 && (one.weights()[0] - 2.0).abs() < 1e-14);
    let two = gauss_rule(&params(0.0, 0.0), 2).unwrap();
    let r = 1.0 / 3f64.sqrt();
    assert!((two.nodes()[0] + r).abs() < 1e-15 && (two.nodes()[1] - r).abs() < 1e-15);
    assert!(gauss_rule(&params(0.0, 0.0), 0).is_err());
}

#[test]
fn gauss_rule_matches_exact_moments() {
    let rule = gauss_rule(&params(2.0, 1.0), 5).unwrap();
    for m in 0..=9 {
        let exact = moment_21(m).to_f64().unwrap();
        let got = rule.integrate(|x| x.powi(m as i32));
        assert!((got - exact).abs() < 1e-12 * exact.abs().max(1e-3), "x^{m}");
    }
}

#[test]
fn gauss_nodes_increase_and_weights_are_positive() {
    let rule = gauss_rule(&params(0.5, 1.5), 64).unwrap();
    assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
    assert!(rule.weights().iter().all(|&w| w > 0.0));
    assert!(rule.nodes().iter().all(|x| (-1.0..1.0).contains(x)));
}

#[test]
fn gram_matrix_is_identity_over_grid() {
    for &(a, b) in &[(0.0, 0.0), (2.0, 1.0), (0.5, 1.5), (-0.5, 2.0), (4.0, 0.25)] {
        let p = params(a, b);
        let rule = gauss_rule(&p, 64).unwrap();
        let rec = p.recurrence(29);
        let vals: Vec<Vec<f64>> = rule.nodes().iter().map(|&x| rec.eval_all(29, x)).collect();
        for i in 0..30 {
            for j in 0..30 {
                let g: f64 = vals
                    .iter()
                    .zip(rule.weights())
                    .map(|(v, w)| w * v[i] * v[j])
                    .sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g - e).abs() < 1e-10, "({a},{b}) [{i},{j}] = {g}");
            }
        }
    }
}

#[test]
fn three_term_residual_on_nodes() {
    let p = params(2.0, 1.0);
    let rule = gauss_rule(&p, 128).unwrap();
    let rec = p.recurrence(201);
    for &x in rule.nodes() {
        let v = rec.eval_all(201, x);
        for n in 0..=200 {
            let lower = if n == 0 { 0.0 } else { rec.a(n) * v[n - 1] };
            let r = x * v[n] - rec.a(n + 1) * v[n + 1] - rec.b(n) * v[n] - lower;
            assert!(r.abs() < 1e-10, "n={n} x={x} r={r}");
        }
    }
}
