//! Truncated multiplication operator: eigenvalues, traces, arcsine fit.

use nalgebra::DMatrix;
use x1jacobi::paths::level_path_sum;
use x1jacobi::recurrence::RecurrenceTable;
use x1jacobi::spectrum::{
    arcsine_cdf, arcsine_quantiles, cdf_compare, cdf_table, eigenvalues, moment_gap, pull_back,
    trace_moment_full, trace_moment_proj, trace_moment_proj_direct, BandMatrix, SpectralReport,
};
use x1jacobi::{ExceptionalBasis, JacobiParams};

fn setup(n_end: usize) -> (ExceptionalBasis, RecurrenceTable) {
    let bs = ExceptionalBasis::new(JacobiParams::new(2.0, 1.0).unwrap()).unwrap();
    let table = RecurrenceTable::build(&bs, n_end).unwrap();
    (bs, table)
}

#[test]
fn one_by_one() {
    let (_, t) = setup(4);
    let j = BandMatrix::from_table(&t, 1).unwrap();
    let z = eigenvalues(&j).unwrap();
    assert_eq!(z, vec![t.u(0, 0).unwrap()]);
    assert!(BandMatrix::from_table(&t, 0).is_err());
    assert!(BandMatrix::from_table(&t, 10).is_err());
}

#[test]
fn two_by_two_matches_quadratic() {
    let (_, t) = setup(4);
    let j = BandMatrix::from_table(&t, 2).unwrap();
    let (a, b, d) = (j.entry(0, 0), j.entry(0, 1), j.entry(1, 0));
    let mid = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let z = eigenvalues(&j).unwrap();
    assert!((z[0] - (mid - r)).abs() < 1e-12 && (z[1] - (mid + r)).abs() < 1e-12);
}

#[test]
fn eigenvalues_stay_in_bounds() {
    let (bs, t) = setup(60);
    let j = BandMatrix::from_table(&t, 50).unwrap();
    let z = eigenvalues(&j).unwrap();
    let (lo, hi) = j.gershgorin();
    assert!(z.iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
    let d = bs.darboux();
    let (q1, qm1) = (d.q_eval(1.0), d.q_eval(-1.0));
    let (qlo, qhi) = (q1.min(qm1), q1.max(qm1));
    assert!(z.iter().all(|&v| v >= qlo - 0.5 && v <= qhi + 0.5));
    assert!(z.windows(2).all(|w| w[0] <= w[1]));
    assert!((z.iter().sum::<f64>() - j.trace()).abs() < 1e-10);
    assert!(j.asymmetry < 1e-8);
}

#[test]
fn agrees_with_dense_solver() {
    let (_, t) = setup(90);
    let j = BandMatrix::from_table(&t, 80).unwrap();
    let dense = DMatrix::from_row_slice(80, 80, &j.to_dense());
    let mut reference: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
    reference.sort_by(f64::total_cmp);
    for (a, b) in eigenvalues(&j).unwrap().iter().zip(&reference) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn low_order_traces() {
    let (_, t) = setup(40);
    let n = 20;
    let j = BandMatrix::from_table(&t, n).unwrap();
    let z = eigenvalues(&j).unwrap();
    assert!((trace_moment_full(&t, n, 0).unwrap() - 1.0).abs() < 1e-15);
    assert!((trace_moment_proj(&z, 0) - 1.0).abs() < 1e-15);
    let diag: f64 = (0..n).map(|k| t.u(k, 0).unwrap()).sum::<f64>() / n as f64;
    assert!((trace_moment_full(&t, n, 1).unwrap() - diag).abs() < 1e-14);
    assert!((trace_moment_proj(&z, 1) - diag).abs() < 1e-12);
    assert!(moment_gap(&t, &z, 1).unwrap().gap < 1e-12);
    assert_eq!(moment_gap(&t, &z, 0).unwrap().gap, 0.0);
}

#[test]
fn traces_match_level_dependent_paths() {
    let (_, t) = setup(20);
    let n = 10;
    let w = |level: usize, step: i64| t.u(level, step).unwrap();
    let j = BandMatrix::from_table(&t, n).unwrap();
    let z = eigenvalues(&j).unwrap();
    for l in 0..=4 {
        let free: f64 = (0..n)
            .map(|k| level_path_sum(k, l, 2, 0, None, w))
            .sum::<f64>()
            / n as f64;
        let confined: f64 = (0..n)
            .map(|k| level_path_sum(k, l, 2, 0, Some(n as i64 - 1), w))
            .sum::<f64>()
            / n as f64;
        assert!(
            (trace_moment_full(&t, n, l).unwrap() - free).abs() < 1e-10,
            "l={l}"
        );
        assert!((trace_moment_proj(&z, l) - confined).abs() < 1e-10, "l={l}");
        assert!((trace_moment_proj_direct(&j, l) - trace_moment_proj(&z, l)).abs() < 1e-8);
    }
}

#[test]
fn gaps_respect_the_bound() {
    let (bs, t) = setup(411);
    let mut prev = f64::INFINITY;
    for n in [100, 200, 400] {
        let s = SpectralReport::build(&t, bs.darboux(), n, 5).unwrap();
        for g in &s.moments {
            assert!(g.gap <= g.bound, "N={n} l={}", g.l);
            let direct = trace_moment_proj_direct(&BandMatrix::from_table(&t, n).unwrap(), g.l);
            assert!((direct - g.trace_proj).abs() < 1e-8 * direct.abs().max(1.0));
        }
        let g3 = s.moments[3].gap;
        assert!(g3 <= prev, "N={n}");
        prev = g3;
    }
}

#[test]
fn pull_back_round_trips() {
    let (bs, _) = setup(4);
    let d = bs.darboux();
    assert!((pull_back(d.q_eval(1.0), d).unwrap() - 1.0).abs() < 1e-12);
    assert!((pull_back(d.q_eval(-1.0), d).unwrap() + 1.0).abs() < 1e-12);
    assert!(pull_back(-d.c * d.c, d).is_none());
}

#[test]
fn cdf_examples() {
    let single = cdf_compare(&[Some(0.0)]).unwrap();
    assert!((single.distance - 0.5).abs() < 1e-15);
    let n = 200;
    let q: Vec<Option<f64>> = arcsine_quantiles(n).into_iter().map(Some).collect();
    let c = cdf_compare(&q).unwrap();
    assert!(c.distance <= 1.0 / (n + 1) as f64 + 1e-12);
    assert_eq!(c.retained_fraction, 1.0);
    assert!(cdf_compare(&[None, Some(3.0)]).is_err());
    assert_eq!(arcsine_cdf(0.0), 0.5);
    let rows = cdf_table(&[Some(0.5), None, Some(-0.5), Some(2.0)]);
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].x, rows[0].empirical), (-0.5, 0.25));
}

#[test]
fn pulled_back_spectrum_approaches_arcsine() {
    let (bs, t) = setup(411);
    let dist: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&n| SpectralReport::build(&t, bs.darboux(), n, 2).unwrap())
        .map(|s| {
            assert!(s.cdf.retained_fraction >= 0.9);
            s.cdf.distance
        })
        .collect();
    assert!(dist.windows(2).all(|w| w[1] <= w[0]), "{dist:?}");
}
