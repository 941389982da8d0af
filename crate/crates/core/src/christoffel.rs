//! The measures `d mu_N = K_N(x,x) W(x) dx / N` and their `Q`-moments.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_rational::BigRational;
use serde::Serialize;

use crate::darboux::ExceptionalBasis;
use crate::error::{Error, Result};
use crate::jacobi::check_interval;
use crate::paths::{arcsine_q_moment, c_closed};
use crate::poly::{rational_from_f64, rational_to_f64};

/// `K_N(x, x) = sum_{k<N} P_k^{[1]}(x)^2`
pub fn kernel_diag(basis: &ExceptionalBasis, n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("kernel needs N >= 1".into()));
    }
    check_interval(x)?;
    Ok(basis.eval_all(n - 1, x).iter().map(|v| v * v).sum())
}

/// Arcsine density `1 / (pi sqrt(1 - x^2))`.
pub fn arcsine_density(x: f64) -> f64 {
    1.0 / (PI * (1.0 - x * x).sqrt())
}

/// `<Q^k P_n, P_n>_W` for all `n < n_end`, `k <= k_max`; `out[n][k]`.
pub fn diag_inner_table(
    basis: &ExceptionalBasis,
    n_end: usize,
    k_max: usize,
) -> Result<Vec<Vec<f64>>> {
    if n_end == 0 {
        return Ok(Vec::new());
    }
    let n_max = n_end - 1;
    let d = basis.darboux();
    let kk = k_max + 1;
    let res = basis.integrate_w_batch(2 * n_max + 2 + 2 * k_max, |nodes, w| {
        let t = basis.tabulate(n_max, nodes);
        let mut out = vec![0.0; n_end * kk];
        for (i, &x) in nodes.iter().enumerate() {
            let q = d.q_eval(x);
            let mut qp = vec![w[i]; kk];
            for k in 1..kk {
                qp[k] = qp[k - 1] * q;
            }
            for (n, row) in t.iter().enumerate() {
                let v = row[i] * row[i];
                for k in 0..kk {
                    out[n * kk + k] += qp[k] * v;
                }
            }
        }
        Ok(out)
    })?;
    Ok(res.values.chunks(kk).map(<[f64]>::to_vec).collect())
}

/// `<Q^k P_n, P_n>_W`
pub fn diag_inner(basis: &ExceptionalBasis, n: usize, k: usize) -> Result<f64> {
    let t = diag_inner_table(basis, n + 1, k)?;
    Ok(t[n][k])
}

/// `int Q^k d mu_N` as the mean of the diagonal inner products.
pub fn mu_moment(basis: &ExceptionalBasis, n: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("mu_N needs N >= 1".into()));
    }
    let t = diag_inner_table(basis, n, k)?;
    Ok(t.iter().map(|r| r[k]).sum::<f64>() / n as f64)
}

/// Exact `int Q^k d omega`, computed by both the path count and the
/// binomial/Wallis formula; disagreement is an error.
pub fn q_moment_target(k: u64, d0: f64, d1: f64) -> Result<BigRational> {
    let (d0, d1) = (rational_from_f64(d0)?, rational_from_f64(d1)?);
    let a = c_closed(k, &d0, &d1);
    let b = arcsine_q_moment(k, &d0, &d1);
    if a != b {
        return Err(Error::Validation(format!(
            "Q-moment target {k}: path count {a} differs from Wallis form {b}"
        )));
    }
    Ok(a)
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub n: usize,
    pub k: usize,
    pub moment: f64,
    pub target: f64,
    pub abs_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChristoffelReport {
    pub n_values: Vec<usize>,
    pub k_max: usize,
    pub moments: Vec<MomentRow>,
    pub targets: BTreeMap<usize, f64>,
    /// `<Q^k P_n, P_n>` for `n` in `n_values`
    pub diag_inner: Vec<DiagRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagRow {
    pub n: usize,
    pub k: usize,
    pub value: f64,
}

impl ChristoffelReport {
    pub fn build(basis: &ExceptionalBasis, n_values: &[usize], k_max: usize) -> Result<Self> {
        if n_values.is_empty() || n_values.contains(&0) {
            return Err(Error::Validation(
                "N values must be non-empty and positive".into(),
            ));
        }
        if n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "N values must be strictly increasing".into(),
            ));
        }
        let d = basis.darboux();
        let mut targets = BTreeMap::new();
        for k in 0..=k_max {
            targets.insert(k, rational_to_f64(&q_moment_target(k as u64, d.d0, d.d1)?));
        }
        let top = *n_values.last().unwrap();
        let table = diag_inner_table(basis, top + 1, k_max)?;
        let mut moments = Vec::new();
        let mut diag = Vec::new();
        for &n in n_values {
            for k in 0..=k_max {
                let moment = table[..n].iter().map(|r| r[k]).sum::<f64>() / n as f64;
                let target = targets[&k];
                moments.push(MomentRow {
                    n,
                    k,
                    moment,
                    target,
                    abs_dev: (moment - target).abs(),
                });
                diag.push(DiagRow {
                    n,
                    k,
                    value: table[n][k],
                });
            }
        }
        Ok(ChristoffelReport {
            n_values: n_values.to_vec(),
            k_max,
            moments,
            targets,
            diag_inner: diag,
        })
    }

    pub fn moment(&self, n: usize, k: usize) -> Option<&MomentRow> {
        self.moments.iter().find(|r| r.n == n && r.k == k)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityRow {
    pub x: f64,
    pub mu_n_density: f64,
    pub arcsine_density: f64,
}

/// `(x, K_N(x,x) W(x) / N, omega(x))` on `grid`, which must lie in `(-1, 1)`.
pub fn density_samples(
    basis: &ExceptionalBasis,
    n: usize,
    grid: &[f64],
) -> Result<Vec<DensityRow>> {
    if n == 0 {
        return Err(Error::Precondition("density needs N >= 1".into()));
    }
    grid.iter()
        .map(|&x| {
            if !(x > -1.0 && x < 1.0) {
                return Err(Error::Precondition(format!(
                    "grid point {x} outside (-1, 1)"
                )));
            }
            Ok(DensityRow {
                x,
                mu_n_density: kernel_diag(basis, n, x)? * basis.weight(x) / n as f64,
                arcsine_density: arcsine_density(x),
            })
        })
        .collect()
}

/// `int x^l d mu_N` for `l <= l_max` (plotting only).
pub fn raw_moments(basis: &ExceptionalBasis, n: usize, l_max: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Precondition("mu_N needs N >= 1".into()));
    }
    let ll = l_max + 1;
    let res = basis.integrate_w(2 * n + l_max, 1.0, |nodes, w| {
        let t = basis.tabulate(n - 1, nodes);
        let mut out = vec![0.0; ll];
        for (i, &x) in nodes.iter().enumerate() {
            let k: f64 = t.iter().map(|r| r[i] * r[i]).sum();
            let mut xp = w[i] * k / n as f64;
            for o in out.iter_mut() {
                *o += xp;
                xp *= x;
            }
        }
        Ok(out)
    })?;
    Ok(res.values)
}
