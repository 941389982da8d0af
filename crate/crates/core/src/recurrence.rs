//! Five-term recurrence of multiplication by `Q` in the X1 basis.
//!
//! `Q P_n = sum_j u_{n,j} P_{n+j}` with `u_{n,j} = <Q P_n, P_{n+j}>_W`.
//! The table keeps `|j| <= J_MAX` so that vanishing beyond the band is
//! measured, not assumed.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::darboux::{dot3, DarbouxData, ExceptionalBasis};
use crate::error::{Error, Result};
use crate::poly::{horner, RatPoly};
use crate::quadrature::{self, cached_rule};

pub const J_MAX: usize = 4;
const WIDTH: usize = 2 * J_MAX + 1;

/// `s' mod btilde == 0`, decided exactly.
pub fn is_in_stabilizer(s: &RatPoly, darboux: &DarbouxData) -> bool {
    let (_, r) = s.derivative().div_rem(darboux.btilde_exact());
    r.is_zero()
}

/// Coefficients `u_{n,-J_MAX} .. u_{n,J_MAX}` of one row.
#[derive(Debug, Clone, Serialize)]
pub struct URow {
    pub n: usize,
    pub u: [f64; WIDTH],
    /// `|| Q P_n - sum_{|j|<=2} u_{n,j} P_{n+j} ||_W`
    pub expansion_residual: f64,
}

impl URow {
    /// `u_{n,j}`, zero when `n + j < 0` or `|j| > J_MAX`.
    pub fn get(&self, j: i64) -> f64 {
        if j.unsigned_abs() as usize > J_MAX {
            return 0.0;
        }
        self.u[(j + J_MAX as i64) as usize]
    }
}

fn shifted(n: usize, j: i64) -> Option<usize> {
    let m = n as i64 + j;
    (m >= 0).then_some(m as usize)
}

/// One row by adaptive quadrature.
pub fn compute_u(basis: &ExceptionalBasis, n: usize) -> Result<URow> {
    Ok(compute_u_rows(basis, &[n])?.remove(0))
}

/// Rows for every `n` in `ns`, sharing one tabulation per refinement level.
pub fn compute_u_rows(basis: &ExceptionalBasis, ns: &[usize]) -> Result<Vec<URow>> {
    u_rows(basis, ns, None)
}

/// Rows on a fixed `m`-node rule, without refinement. Used to measure
/// symmetry between two independent quadratures.
pub fn compute_u_rows_fixed(basis: &ExceptionalBasis, ns: &[usize], m: usize) -> Result<Vec<URow>> {
    u_rows(basis, ns, Some(m))
}

fn u_rows(basis: &ExceptionalBasis, ns: &[usize], fixed: Option<usize>) -> Result<Vec<URow>> {
    let Some(&top) = ns.iter().max() else {
        return Ok(Vec::new());
    };
    let n_max = top + J_MAX;
    let d = basis.darboux();
    let inner = |nodes: &[f64], w: &[f64]| -> Vec<f64> {
        let t = basis.tabulate(n_max, nodes);
        let qw: Vec<f64> = nodes
            .iter()
            .zip(w)
            .map(|(&x, &wi)| d.q_eval(x) * wi)
            .collect();
        let mut out = Vec::with_capacity(ns.len() * WIDTH);
        for &n in ns {
            for j in -(J_MAX as i64)..=J_MAX as i64 {
                out.push(match shifted(n, j) {
                    Some(m) => dot3(&t[n], &t[m], &qw),
                    None => 0.0,
                });
            }
        }
        out
    };
    let (values, nodes) = match fixed {
        Some(m) => {
            let rule = cached_rule(basis.params(), m)?;
            let w = basis.effective_weights(&rule);
            (inner(rule.nodes(), &w), m)
        }
        None => {
            let res = basis.integrate_w(2 * n_max + 2, 1.0, |nodes, w| Ok(inner(nodes, w)))?;
            (res.values, res.nodes)
        }
    };

    // expansion residual on the accepted rule
    let rule = cached_rule(basis.params(), nodes)?;
    let w = basis.effective_weights(&rule);
    let t = basis.tabulate(n_max, rule.nodes());
    let mut rows = Vec::with_capacity(ns.len());
    for (idx, &n) in ns.iter().enumerate() {
        let mut u = [0.0; WIDTH];
        u.copy_from_slice(&values[idx * WIDTH..(idx + 1) * WIDTH]);
        let mut sq = 0.0;
        for (i, &x) in rule.nodes().iter().enumerate() {
            let mut r = d.q_eval(x) * t[n][i];
            for j in -2..=2_i64 {
                if let Some(m) = shifted(n, j) {
                    r -= u[(j + J_MAX as i64) as usize] * t[m][i];
                }
            }
            sq += w[i] * r * r;
        }
        rows.push(URow {
            n,
            u,
            expansion_residual: sq.sqrt(),
        });
    }
    Ok(rows)
}

/// Per-row data of the cross identity `u = a / (lambda - lambda~)`. `a` is
/// in the orthonormal gauge of both families; `gap` compares `u` with `a / (lambda_{n+k} - lambda~)` after
/// passing to the gauge `P_n^{[1]} = A p_n` in which that identity holds.
#[derive(Debug, Clone, Serialize)]
pub struct CrossIdentity {
    pub n: usize,
    /// `a_{n,k}`, `k = -2..2`
    pub a: [f64; 5],
    pub gap: f64,
}

/// `<B(Q A p_n), p_{n+k}>` in the classical inner product, `k = -2..2`, for
/// every `n` in `ns` (gauge `P_n^{[1]} = A p_n`).
pub fn bqp_by_quadrature(basis: &ExceptionalBasis, ns: &[usize]) -> Result<Vec<[f64; 5]>> {
    let Some(&top) = ns.iter().max() else {
        return Ok(Vec::new());
    };
    let n_max = top + 2;
    let classical = *basis.classical();
    let d = basis.darboux();
    let db = [d.b_coeffs[1], 2.0 * d.b_coeffs[2]];
    let res = quadrature::adaptive_batch_relative(
        &classical,
        quadrature::starting_nodes(2 * n_max + 2),
        |rule| {
            let rec = classical.recurrence(n_max);
            let mut out = vec![0.0; ns.len() * 5];
            for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                let rows = rec.eval_with_derivatives(n_max, x, 2);
                let (b, g, q) = (d.b_eval(x), d.g_eval(x), d.q_eval(x));
                let dbx = horner(&db, x);
                let bt = d.btilde_eval(x);
                for (idx, &n) in ns.iter().enumerate() {
                    let (p, dp, ddp) = (rows[0][n], rows[1][n], rows[2][n]);
                    let ap = b * dp - g * p;
                    let dap = dbx * dp + b * ddp - d.g1 * p - g * dp;
                    let f = (q * ap, bt * ap + q * dap);
                    let bf = basis.apply_b_unchecked(f, x);
                    for k in -2..=2_i64 {
                        if let Some(m) = shifted(n, k) {
                            out[idx * 5 + (k + 2) as usize] += w * bf * rows[0][m];
                        }
                    }
                }
            }
            Ok(out)
        },
    )?;
    Ok(res
        .values
        .chunks(5)
        .map(|c| [c[0], c[1], c[2], c[3], c[4]])
        .collect())
}

/// The same coefficients from the structure relation:
/// `btilde (A_n p_{n+1} + B_n p_n + C_n p_{n-1}) - ptilde g p_n + (lambda_n - lambda~) Q p_n`,
/// expanded with the three-term recurrence. No quadrature involved.
pub fn bqp_structural(basis: &ExceptionalBasis, n: usize) -> Result<[f64; 5]> {
    let classical = basis.classical();
    let d = basis.darboux();
    let dim = n + 6;
    let rec = classical.recurrence(dim);
    let times_x = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (k, &c) in v.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if k + 1 < dim {
                out[k + 1] += c * rec.a(k + 1);
            }
            out[k] += c * rec.b(k);
            if k >= 1 {
                out[k - 1] += c * rec.a(k);
            }
        }
        out
    };
    // apply sum_k coeffs[k] x^k to v
    let apply = |coeffs: &[f64], v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        let mut power = v.to_vec();
        for (k, &c) in coeffs.iter().enumerate() {
            if k > 0 {
                power = times_x(&power);
            }
            for (o, p) in out.iter_mut().zip(&power) {
                *o += c * p;
            }
        }
        out
    };
    let mut structure = vec![0.0; dim];
    if n >= 1 {
        let s = classical.structure_coeffs(n)?;
        structure[n + 1] = s.a;
        structure[n] = s.b;
        structure[n - 1] = s.c;
    }
    let mut pn = vec![0.0; dim];
    pn[n] = 1.0;
    let t1 = apply(&[d.d0, d.d1], &structure);
    let t2 = apply(&d.ptilde_g_coeffs, &pn);
    let t3 = apply(&[0.0, d.q_coeffs[0], d.q_coeffs[1]], &pn);
    let nn = basis.norm(n);
    let mut out = [0.0; 5];
    for k in -2..=2_i64 {
        if let Some(m) = shifted(n, k) {
            out[(k + 2) as usize] = t1[m] - t2[m] + nn * t3[m];
        }
    }
    Ok(out)
}

/// The cross identity for every `n` in `ns`, given the matching `u` rows.
pub fn cross_identity(basis: &ExceptionalBasis, rows: &[URow]) -> Result<Vec<CrossIdentity>> {
    let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    let raw = bqp_by_quadrature(basis, &ns)?;
    let lt = basis.darboux().lambda_tilde;
    let lambda = |m: usize| basis.classical().eigenvalue(m);
    Ok(rows
        .iter()
        .zip(raw)
        .map(|(row, a_raw)| {
            let n = row.n;
            let nn = basis.norm(n);
            let mut a = [0.0; 5];
            let mut gap = 0.0_f64;
            for k in -2..=2_i64 {
                let Some(m) = shifted(n, k) else { continue };
                let idx = (k + 2) as usize;
                a[idx] = a_raw[idx] / nn.sqrt();
                let nm = lambda(m) - lt;
                let u_unnormalized = row.get(k) * (nn / nm).sqrt();
                gap = gap.max((u_unnormalized - a_raw[idx] / nm).abs());
            }
            CrossIdentity { n, a, gap }
        })
        .collect())
}

/// `max_k |u_{n,k} - a_{n,k} / (lambda_{n+k} - lambda~)|` at one `n`.
pub fn cross_identity_check(basis: &ExceptionalBasis, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition(format!(
            "the cross identity check needs n >= 2, got {n}"
        )));
    }
    let row = compute_u(basis, n)?;
    Ok(cross_identity(basis, &[row])?[0].gap)
}

/// Limit `U_{|j|}` for `btilde = sum_k d_k x^k` (`d.len() = m + 1`).
pub fn asymptotic_u_general(j: i64, d: &[f64]) -> f64 {
    let m = d.len().saturating_sub(1);
    let l = j.unsigned_abs() as usize / 2;
    let binom = |n: usize, k: usize| -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    if j.unsigned_abs() % 2 == 0 {
        (l.max(1)..=(m + 1) / 2)
            .map(|p| d[2 * p - 1] / (2 * p) as f64 * binom(2 * p, p - l) / 2f64.powi(2 * p as i32))
            .sum()
    } else {
        (l..=m / 2)
            .map(|p| {
                d[2 * p] / (2 * p + 1) as f64 * binom(2 * p + 1, p - l)
                    / 2f64.powi(2 * p as i32 + 1)
            })
            .sum()
    }
}

/// Codimension-1 limits: `d1/4`, `d0/2`, `d1/8`, then zero.
pub fn asymptotic_u(j: i64, d0: f64, d1: f64) -> f64 {
    asymptotic_u_general(j, &[d0, d1])
}

/// Built table over a contiguous range `0..n_end`.
#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceTable {
    pub rows: BTreeMap<usize, URow>,
    /// `a_{n,k}`, `k = -2..2`, keyed by `n` where the cross identity was evaluated.
    pub a_cross: BTreeMap<usize, [f64; 5]>,
    pub cross_identity_gaps: BTreeMap<usize, f64>,
    pub u_limits: [f64; 3],
    pub j_max: usize,
}

impl RecurrenceTable {
    pub fn build(basis: &ExceptionalBasis, n_end: usize) -> Result<Self> {
        let ns: Vec<usize> = (0..n_end).collect();
        Self::from_rows(basis, compute_u_rows(basis, &ns)?)
    }

    pub fn from_rows(basis: &ExceptionalBasis, rows: Vec<URow>) -> Result<Self> {
        let d = basis.darboux();
        Ok(RecurrenceTable {
            rows: rows.into_iter().map(|r| (r.n, r)).collect(),
            a_cross: BTreeMap::new(),
            cross_identity_gaps: BTreeMap::new(),
            u_limits: [0, 1, 2].map(|j| asymptotic_u(j, d.d0, d.d1)),
            j_max: J_MAX,
        })
    }

    /// Evaluate the cross identity on every row with `n >= 2`.
    pub fn attach_cross_identity(&mut self, basis: &ExceptionalBasis) -> Result<()> {
        let rows: Vec<URow> = self.rows.values().filter(|r| r.n >= 2).cloned().collect();
        for cb in cross_identity(basis, &rows)? {
            self.a_cross.insert(cb.n, cb.a);
            self.cross_identity_gaps.insert(cb.n, cb.gap);
        }
        Ok(())
    }

    /// Rows `0..n_end` all present.
    pub fn covers(&self, n_end: usize) -> bool {
        (0..n_end).all(|n| self.rows.contains_key(&n))
    }

    pub fn u(&self, n: usize, j: i64) -> Option<f64> {
        if shifted(n, j).is_none() {
            return Some(0.0);
        }
        self.rows.get(&n).map(|r| r.get(j))
    }

    /// `max |u_{n,j} - u_{n+j,-j}|` over rows whose partner is present.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (&n, row) in &self.rows {
            for j in -2..=2_i64 {
                let Some(m) = shifted(n, j) else { continue };
                if let Some(other) = self.rows.get(&m) {
                    worst = worst.max((row.get(j) - other.get(-j)).abs());
                }
            }
        }
        worst
    }

    /// `max |u_{n,j} - v_{n+j,-j}|` with `v` taken from `other`, for rows
    /// present in both.
    pub fn symmetry_defect_against(&self, other: &RecurrenceTable) -> f64 {
        let mut worst = 0.0_f64;
        for (&n, row) in &self.rows {
            for j in -2..=2_i64 {
                let Some(m) = shifted(n, j) else { continue };
                if let Some(o) = other.rows.get(&m) {
                    worst = worst.max((row.get(j) - o.get(-j)).abs());
                }
            }
        }
        worst
    }

    /// `max |u_{n,j}|` over `2 < |j| <= J_MAX`.
    pub fn truncation_max(&self) -> f64 {
        self.rows
            .values()
            .flat_map(|r| (3..=J_MAX as i64).flat_map(move |j| [r.get(j), r.get(-j)]))
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_expansion_residual(&self) -> f64 {
        self.rows
            .values()
            .fold(0.0, |m, r| m.max(r.expansion_residual))
    }
}

/// One line of the convergence report.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `u_{n,j}`, `j = -2..2`
    pub u: [f64; 5],
    /// `max_{+-} |u_{n,+-j} - U_j|`, `j = 0, 1, 2`
    pub dev: [f64; 3],
    pub cross_identity_gap: f64,
}

pub fn convergence_table(
    basis: &ExceptionalBasis,
    n_values: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(
            "n values must be strictly increasing".into(),
        ));
    }
    let rows = compute_u_rows(basis, n_values)?;
    let cb_rows: Vec<URow> = rows.iter().filter(|r| r.n >= 2).cloned().collect();
    let gaps: BTreeMap<usize, f64> = cross_identity(basis, &cb_rows)?
        .into_iter()
        .map(|c| (c.n, c.gap))
        .collect();
    let d = basis.darboux();
    let limits = [0, 1, 2].map(|j| asymptotic_u(j, d.d0, d.d1));
    Ok(rows
        .iter()
        .map(|r| {
            let u = [-2, -1, 0, 1, 2].map(|j| r.get(j));
            let dev = [0usize, 1, 2].map(|j| {
                let (lo, hi) = (2 - j, 2 + j);
                (u[lo] - limits[j]).abs().max((u[hi] - limits[j]).abs())
            });
            ConvergenceRow {
                n: r.n,
                u,
                dev,
                cross_identity_gap: gaps.get(&r.n).copied().unwrap_or(0.0),
            }
        })
        .collect())
}
