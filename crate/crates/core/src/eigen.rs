//! Symmetric eigenvalue kernels: implicit QL on tridiagonal matrices and a
//! Givens bulge-chasing reduction from band to tridiagonal form.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Implicit QL with Wilkinson shifts on the tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off[i]` couples `i` and `i+1`).
///
/// If `first_row` is given it must start as `e_1`; on return it holds the
/// first components of the normalized eigenvectors, in the same order as the
/// returned eigenvalues. Eigenvalues are returned unsorted.
pub fn tridiagonal_ql(
    diag: &[f64],
    off: &[f64],
    mut first_row: Option<&mut [f64]>,
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    assert_eq!(off.len() + 1, n, "off-diagonal length must be n - 1");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::NonConvergence(format!(
                    "tridiagonal QL did not converge for eigenvalue {l} of {n}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0_f64, 1.0_f64, 0.0_f64);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = first_row.as_deref_mut() {
                    let f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// Reduce the dense symmetric matrix `a` (row-major, `n x n`) whose nonzeros
/// lie within `bandwidth` of the diagonal to tridiagonal form, by Givens
/// rotations that chase the fill-in bulge down the band. Returns
/// `(diagonal, off_diagonal)`.
pub fn band_to_tridiagonal(a: &mut [f64], n: usize, bandwidth: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut bw = bandwidth.min(n.saturating_sub(1));
    while bw >= 2 {
        for j in 0..n.saturating_sub(bw) {
            // zero a[j+bw][j] against a[j+bw-1][j]
            let r = j + bw;
            rotate_to_zero(a, n, r - 1, r, j, bw);
            // bulge at (k+bw, k-1)
            let mut k = r;
            while k + bw < n {
                rotate_to_zero(a, n, k + bw - 1, k + bw, k - 1, bw);
                k += bw;
            }
        }
        bw -= 1;
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    let off = (0..n.saturating_sub(1)).map(|i| a[i * n + i + 1]).collect();
    (diag, off)
}

/// Similarity rotation in the plane `(p, q)` chosen so that `a[q][col]`
/// becomes zero. Only the window that can hold nonzeros is touched.
fn rotate_to_zero(a: &mut [f64], n: usize, p: usize, q: usize, col: usize, bw: usize) {
    let x = a[p * n + col];
    let y = a[q * n + col];
    if y == 0.0 {
        return;
    }
    let r = x.hypot(y);
    let (c, s) = (x / r, y / r);
    let lo = p.saturating_sub(2 * bw + 1);
    let hi = (q + 2 * bw + 2).min(n);
    // rows
    for k in lo..hi {
        let ap = a[p * n + k];
        let aq = a[q * n + k];
        a[p * n + k] = c * ap + s * aq;
        a[q * n + k] = -s * ap + c * aq;
    }
    // columns
    for k in lo..hi {
        let ap = a[k * n + p];
        let aq = a[k * n + q];
        a[k * n + p] = c * ap + s * aq;
        a[k * n + q] = -s * ap + c * aq;
    }
    a[q * n + col] = 0.0;
    a[col * n + q] = 0.0;
}

/// Eigenvalues (ascending) of a dense symmetric band matrix.
pub fn symmetric_band_eigenvalues(a: &[f64], n: usize, bandwidth: usize) -> Result<Vec<f64>> {
    let mut work = a.to_vec();
    let (d, e) = band_to_tridiagonal(&mut work, n, bandwidth);
    let mut ev = tridiagonal_ql(&d, &e, None)?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form() {
        let ev = tridiagonal_ql(&[1.0, 3.0], &[2.0], None).unwrap();
        let mut ev = ev;
        ev.sort_by(f64::total_cmp);
        let disc = (1.0_f64 + 4.0).sqrt() * 2.0;
        assert!((ev[0] - (2.0 - disc / 2.0)).abs() < 1e-14);
        assert!((ev[1] - (2.0 + disc / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn first_row_components_are_normalized() {
        let n = 30;
        let d = vec![0.0; n];
        let e: Vec<f64> = (1..n)
            .map(|k| 0.5 * (k as f64 / (k as f64 + 1.0)).sqrt())
            .collect();
        let mut z = vec![0.0; n];
        z[0] = 1.0;
        tridiagonal_ql(&d, &e, Some(&mut z)).unwrap();
        let total: f64 = z.iter().map(|v| v * v).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn pentadiagonal_reduction_preserves_trace_and_frobenius() {
        let n = 12;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) <= 2 {
                    a[i * n + j] =
                        1.0 / (1.0 + (i + j) as f64) + if i == j { i as f64 } else { 0.0 };
                }
            }
        }
        let fro: f64 = a.iter().map(|v| v * v).sum();
        let mut work = a.clone();
        let (d, e) = band_to_tridiagonal(&mut work, n, 2);
        let fro_t: f64 =
            d.iter().map(|v| v * v).sum::<f64>() + 2.0 * e.iter().map(|v| v * v).sum::<f64>();
        assert!((fro - fro_t).abs() < 1e-12 * fro);
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 1 {
                    assert!(work[i * n + j].abs() < 1e-13);
                }
            }
        }
    }
}
