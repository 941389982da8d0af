//! Orthonormal classical Jacobi polynomials on [-1, 1].
//!
//! The family `p_n` is orthonormal against `(1-x)^alpha (1+x)^beta` and is
//! evaluated by the symmetric three-term recurrence
//! `x p_n = a_{n+1} p_{n+1} + b_n p_n + a_n p_{n-1}`.
//!
//! Sign convention: the differential operator is taken as
//! `T[y] = (x^2 - 1) y'' + ((alpha+beta+2) x - (beta-alpha)) y'`, whose
//! eigenvalues `lambda_n = n (n + alpha + beta + 1)` are non-negative. The
//! structure relation uses the same leading coefficient `x^2 - 1`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

/// Coefficients of `(x^2-1) p_n' = A_n p_{n+1} + B_n p_n + C_n p_{n-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParams(format!(
                "alpha = {alpha}, beta = {beta} must be finite"
            )));
        }
        if alpha <= -1.0 || beta <= -1.0 {
            return Err(Error::InvalidParams(format!(
                "alpha = {alpha}, beta = {beta}: both must exceed -1"
            )));
        }
        Ok(JacobiParams { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `lambda_n = n (n + alpha + beta + 1)`.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        let n = n as f64;
        n * (n + self.alpha + self.beta + 1.0)
    }

    /// Total mass of the weight, `2^{a+b+1} B(a+1, b+1)`.
    pub fn zeroth_moment(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(a + b + 2.0))
        .exp()
    }

    /// The weight `(1-x)^alpha (1+x)^beta`.
    pub fn weight(&self, x: f64) -> f64 {
        (1.0 - x).powf(self.alpha) * (1.0 + x).powf(self.beta)
    }

    /// `(a_n, b_n)` of the orthonormal recurrence; `a_0 = 0`.
    pub fn recurrence_coeffs(&self, n: usize) -> (f64, f64) {
        let (a, b) = (self.alpha, self.beta);
        let s = a + b;
        let nf = n as f64;
        let bn = if n == 0 {
            (b - a) / (s + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * nf + s) * (2.0 * nf + s + 2.0))
        };
        let an = match n {
            0 => 0.0,
            1 => 2.0 / (s + 2.0) * ((a + 1.0) * (b + 1.0) / (s + 3.0)).sqrt(),
            _ => {
                let t = 2.0 * nf + s;
                2.0 / t * (nf * (nf + a) * (nf + b) * (nf + s) / ((t - 1.0) * (t + 1.0))).sqrt()
            }
        };
        (an, bn)
    }

    /// Recurrence data for `p_0 .. p_{n_max}`.
    pub fn recurrence(&self, n_max: usize) -> Recurrence {
        let mut a = Vec::with_capacity(n_max + 2);
        let mut b = Vec::with_capacity(n_max + 2);
        for n in 0..=n_max + 1 {
            let (an, bn) = self.recurrence_coeffs(n);
            a.push(an);
            b.push(bn);
        }
        Recurrence {
            a,
            b,
            p0: self.zeroth_moment().sqrt().recip(),
        }
    }

    /// Value of the orthonormal `p_n(x)` for `x` in [-1, 1].
    pub fn orthonormal_eval(&self, n: usize, x: f64) -> Result<f64> {
        check_interval(x)?;
        Ok(self.recurrence(n).eval_all(n, x)[n])
    }

    /// Structure relation coefficients for `n >= 1`.
    ///
    /// Closed forms follow from integrating by parts against the weight:
    /// `A_n = n a_{n+1}`, `B_n = ((beta-alpha) - (alpha+beta+2) b_n) / 2`,
    /// `C_n = -(n+alpha+beta+1) a_n`.
    pub fn structure_coeffs(&self, n: usize) -> Result<StructureCoeffs> {
        if n == 0 {
            return Err(Error::Precondition(
                "structure coefficients are defined for n >= 1".into(),
            ));
        }
        let s = self.alpha + self.beta;
        let nf = n as f64;
        let (an, bn) = self.recurrence_coeffs(n);
        let (an1, _) = self.recurrence_coeffs(n + 1);
        Ok(StructureCoeffs {
            a: nf * an1,
            b: 0.5 * ((self.beta - self.alpha) - (s + 2.0) * bn),
            c: -(nf + s + 1.0) * an,
        })
    }

    /// Limits of `A_n / n`, `B_n`, `C_n / n`.
    pub fn structure_limits(&self) -> (f64, f64, f64) {
        (0.5, 0.5 * (self.beta - self.alpha), -0.5)
    }
}

pub(crate) fn check_interval(x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Precondition(format!("x = {x} is outside [-1, 1]")));
    }
    Ok(())
}

/// Precomputed three-term recurrence data.
#[derive(Debug, Clone)]
pub struct Recurrence {
    a: Vec<f64>,
    b: Vec<f64>,
    p0: f64,
}

impl Recurrence {
    pub fn n_max(&self) -> usize {
        self.a.len() - 2
    }

    pub fn a(&self, n: usize) -> f64 {
        self.a[n]
    }

    pub fn b(&self, n: usize) -> f64 {
        self.b[n]
    }

    /// `p_0(x), ..., p_n(x)`.
    pub fn eval_all(&self, n: usize, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; n + 1];
        self.fill(x, &mut out);
        out
    }

    fn fill(&self, x: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = self.p0;
        if out.len() > 1 {
            out[1] = (x - self.b[0]) * self.p0 / self.a[1];
        }
        for k in 1..out.len().saturating_sub(1) {
            out[k + 1] = ((x - self.b[k]) * out[k] - self.a[k] * out[k - 1]) / self.a[k + 1];
        }
    }

    /// Rows `d = 0..=order` holding `p_k^{(d)}(x)` for `k = 0..=n`, from the
    /// differentiated recurrence
    /// `a_{k+1} p^{(d)}_{k+1} = (x-b_k) p^{(d)}_k + d p^{(d-1)}_k - a_k p^{(d)}_{k-1}`.
    pub fn eval_with_derivatives(&self, n: usize, x: f64, order: usize) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![0.0; n + 1]; order + 1];
        self.fill(x, &mut rows[0]);
        for d in 1..=order {
            let (lower, upper) = rows.split_at_mut(d);
            let prev = &lower[d - 1];
            let cur = &mut upper[0];
            let df = d as f64;
            // p_0^{(d)} = 0
            if n >= 1 {
                cur[1] = ((x - self.b[0]) * cur[0] + df * prev[0]) / self.a[1];
            }
            for k in 1..n {
                cur[k + 1] = ((x - self.b[k]) * cur[k] + df * prev[k] - self.a[k] * cur[k - 1])
                    / self.a[k + 1];
            }
        }
        rows
    }
}
