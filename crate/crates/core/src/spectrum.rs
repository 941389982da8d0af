//! The truncation `pi_N M pi_N` of multiplication by `Q`, its eigenvalues
//! and trace moments, and the comparison of the pulled-back spectrum with
//! the arcsine law.

use std::f64::consts::PI;

use serde::Serialize;

use crate::darboux::DarbouxData;
use crate::eigen::symmetric_band_eigenvalues;
use crate::error::{Error, Result};
use crate::recurrence::RecurrenceTable;

pub const BANDWIDTH: usize = 2;

/// Symmetric band matrix stored by rows: `entries[n][j + L]` is the entry
/// at `(n, n + j)`.
#[derive(Debug, Clone, Serialize)]
pub struct BandMatrix {
    n: usize,
    entries: Vec<[f64; 2 * BANDWIDTH + 1]>,
    /// `max |u_{n,j} - u_{n+j,-j}|` seen while symmetrizing.
    pub asymmetry: f64,
}

impl BandMatrix {
    /// Dimension `n`, from the `u` table; entries are `(u_{n,j} + u_{n+j,-j}) / 2`.
    pub fn from_table(table: &RecurrenceTable, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("matrix dimension must be >= 1".into()));
        }
        let l = BANDWIDTH as i64;
        let mut entries = vec![[0.0; 2 * BANDWIDTH + 1]; n];
        let mut asymmetry = 0.0_f64;
        for (row, slot) in entries.iter_mut().enumerate() {
            for j in -l..=l {
                let col = row as i64 + j;
                if col < 0 || col >= n as i64 {
                    continue;
                }
                let missing = || Error::Validation(format!("u table lacks row {row} or {col}"));
                let a = table.u(row, j).ok_or_else(missing)?;
                let b = table.u(col as usize, -j).ok_or_else(missing)?;
                asymmetry = asymmetry.max((a - b).abs());
                slot[(j + l) as usize] = 0.5 * (a + b);
            }
        }
        Ok(BandMatrix {
            n,
            entries,
            asymmetry,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry `(row, row + j)`, zero outside the band or the matrix.
    pub fn entry(&self, row: usize, j: i64) -> f64 {
        let col = row as i64 + j;
        if j.unsigned_abs() as usize > BANDWIDTH || col < 0 || col >= self.n as i64 || row >= self.n
        {
            return 0.0;
        }
        self.entries[row][(j + BANDWIDTH as i64) as usize]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.entry(i, 0)).sum()
    }

    /// Gershgorin interval.
    pub fn gershgorin(&self) -> (f64, f64) {
        (0..self.n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let r: f64 = (-(BANDWIDTH as i64)..=BANDWIDTH as i64)
                .filter(|&j| j != 0)
                .map(|j| self.entry(i, j).abs())
                .sum();
            let d = self.entry(i, 0);
            (lo.min(d - r), hi.max(d + r))
        })
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in -(BANDWIDTH as i64)..=BANDWIDTH as i64 {
                let c = i as i64 + j;
                if c >= 0 && c < n as i64 {
                    a[i * n + c as usize] = self.entry(i, j);
                }
            }
        }
        a
    }

    /// `y = J x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (-(BANDWIDTH as i64)..=BANDWIDTH as i64)
                    .filter_map(|j| {
                        let c = i as i64 + j;
                        (c >= 0 && c < self.n as i64).then(|| self.entry(i, j) * x[c as usize])
                    })
                    .sum()
            })
            .collect()
    }

    /// `sum_{k < rows} (J^l)_{kk}` by repeated band products.
    pub fn partial_power_trace(&self, l: usize, rows: usize) -> f64 {
        let mut total = 0.0;
        for k in 0..rows.min(self.n) {
            let mut v = vec![0.0; self.n];
            v[k] = 1.0;
            for _ in 0..l {
                v = self.apply(&v);
            }
            total += v[k];
        }
        total
    }
}

/// Eigenvalues of `J`, ascending.
pub fn eigenvalues(j: &BandMatrix) -> Result<Vec<f64>> {
    symmetric_band_eigenvalues(&j.to_dense(), j.dim(), BANDWIDTH)
}

/// `(1/N) sum_{k<N} (M^l)_{kk}` with `M` truncated at `N + l L`, where no
/// path of length `l` from below `N` can feel the cut.
pub fn trace_moment_full(table: &RecurrenceTable, n: usize, l: usize) -> Result<f64> {
    let dim = n + l * BANDWIDTH;
    if !table.covers(dim) {
        return Err(Error::Validation(format!(
            "u table must cover n < {dim} for N = {n}, l = {l}"
        )));
    }
    let m = BandMatrix::from_table(table, dim)?;
    Ok(m.partial_power_trace(l, n) / n as f64)
}

/// `(1/N) sum_i z_i^l`
pub fn trace_moment_proj(z: &[f64], l: usize) -> f64 {
    z.iter().map(|v| v.powi(l as i32)).sum::<f64>() / z.len() as f64
}

/// `(1/N) Tr(J^l)` by direct band products.
pub fn trace_moment_proj_direct(j: &BandMatrix, l: usize) -> f64 {
    j.partial_power_trace(l, j.dim()) / j.dim() as f64
}

/// `max |u_{n,j}|` over `n < n_end`, `|j| <= 2`.
pub fn band_bound(table: &RecurrenceTable, n_end: usize) -> f64 {
    (0..n_end)
        .flat_map(|n| (-2..=2_i64).filter_map(move |j| table.u(n, j)))
        .fold(0.0, |m, v| m.max(v.abs()))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentGap {
    pub l: usize,
    pub trace_full: f64,
    pub trace_proj: f64,
    pub gap: f64,
    pub bound: f64,
}

/// `|full - proj|` against `(2 l B)^l / N`.
pub fn moment_gap(table: &RecurrenceTable, z: &[f64], l: usize) -> Result<MomentGap> {
    let n = z.len();
    let full = trace_moment_full(table, n, l)?;
    let proj = trace_moment_proj(z, l);
    let b = band_bound(table, n + l * BANDWIDTH);
    Ok(MomentGap {
        l,
        trace_full: full,
        trace_proj: proj,
        gap: (full - proj).abs(),
        bound: (2.0 * l as f64 * b).powi(l as i32) / n as f64,
    })
}

/// Real `y` with `Q(y) = z` on the branch through `[-1, 1]`, for monic
/// `btilde = x - c`: `y = c - sign(c) sqrt(c^2 + 2z)`.
pub fn pull_back(z: f64, darboux: &DarbouxData) -> Option<f64> {
    let c = darboux.c;
    let disc = c * c + 2.0 * z;
    (disc >= 0.0).then(|| c - c.signum() * disc.sqrt())
}

/// `F(x) = 1/2 + arcsin(x)/pi`
pub fn arcsine_cdf(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        0.5 + x.asin() / PI
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CdfComparison {
    pub distance: f64,
    pub retained: usize,
    pub total: usize,
    pub retained_fraction: f64,
}

/// Kolmogorov distance between the empirical CDF of the points in
/// `[-1, 1]` (each of mass `1/N`, `N = points.len()`) and the arcsine CDF.
pub fn cdf_compare(points: &[Option<f64>]) -> Result<CdfComparison> {
    let total = points.len();
    let mut kept: Vec<f64> = points
        .iter()
        .flatten()
        .copied()
        .filter(|y| (-1.0..=1.0).contains(y))
        .collect();
    if kept.is_empty() {
        return Err(Error::Validation(
            "no pulled-back point lies in [-1, 1]".into(),
        ));
    }
    kept.sort_by(f64::total_cmp);
    let mass = 1.0 / total as f64;
    let mut distance = 0.0_f64;
    for (i, &y) in kept.iter().enumerate() {
        let f = arcsine_cdf(y);
        distance = distance.max((f - i as f64 * mass).abs());
        distance = distance.max((f - (i + 1) as f64 * mass).abs());
    }
    // mass missing at the right end counts against the fit
    distance = distance.max((1.0 - kept.len() as f64 * mass).abs());
    Ok(CdfComparison {
        distance,
        retained: kept.len(),
        total,
        retained_fraction: kept.len() as f64 / total as f64,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CdfRow {
    pub x: f64,
    pub empirical: f64,
    pub arcsine: f64,
}

/// Empirical CDF at each retained point (mass `1/N` per point, `N` the
/// full count) next to the arcsine CDF.
pub fn cdf_table(points: &[Option<f64>]) -> Vec<CdfRow> {
    let mass = 1.0 / points.len() as f64;
    let mut kept: Vec<f64> = points
        .iter()
        .flatten()
        .copied()
        .filter(|y| (-1.0..=1.0).contains(y))
        .collect();
    kept.sort_by(f64::total_cmp);
    kept.iter()
        .enumerate()
        .map(|(i, &x)| CdfRow {
            x,
            empirical: (i + 1) as f64 * mass,
            arcsine: arcsine_cdf(x),
        })
        .collect()
}

/// Points of the arcsine law at probabilities `i/(N+1)`.
pub fn arcsine_quantiles(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| (PI * (i as f64 / (n + 1) as f64 - 0.5)).sin())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub i: usize,
    pub z: f64,
    pub y: Option<f64>,
    pub in_range: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    pub z: Vec<f64>,
    pub y: Vec<Option<f64>>,
    pub asymmetry: f64,
    pub b_bound: f64,
    pub moments: Vec<MomentGap>,
    pub cdf: CdfComparison,
}

impl SpectralReport {
    pub fn build(
        table: &RecurrenceTable,
        darboux: &DarbouxData,
        n: usize,
        l_max: usize,
    ) -> Result<Self> {
        let j = BandMatrix::from_table(table, n)?;
        let z = eigenvalues(&j)?;
        let y: Vec<Option<f64>> = z.iter().map(|&v| pull_back(v, darboux)).collect();
        let moments = (0..=l_max)
            .map(|l| moment_gap(table, &z, l))
            .collect::<Result<Vec<_>>>()?;
        let cdf = cdf_compare(&y)?;
        Ok(SpectralReport {
            n,
            b_bound: band_bound(table, n + l_max * BANDWIDTH),
            asymmetry: j.asymmetry,
            z,
            y,
            moments,
            cdf,
        })
    }

    pub fn rows(&self) -> Vec<SpectrumRow> {
        self.z
            .iter()
            .zip(&self.y)
            .enumerate()
            .map(|(i, (&z, &y))| SpectrumRow {
                i,
                z,
                y,
                in_range: y.is_some_and(|v| (-1.0..=1.0).contains(&v)),
            })
            .collect()
    }
}
