//! One-step Darboux transform of the Jacobi operator and the X1-Jacobi
//! family it produces.
//!
//! Parameters `(alpha, beta)` are the exponents of the exceptional weight
//! `W = (1-x)^alpha (1+x)^beta / (x-c)^2`. The superpotential is sought as
//! `w = r_+/(x-1) + r_-/(x+1) + 1/(x-c)` over a classical partner family;
//! each endpoint residue is fixed by its indicial equation, `c` by regularity
//! at the extra pole and `lambda~` by the behaviour at infinity. Every branch
//! is then checked exactly against the Riccati equation
//! `p (w' + w^2) + q w = lambda~` with `p = x^2 - 1`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::jacobi::{check_interval, JacobiParams};
use crate::poly::{horner, int, rational_from_f64, rational_to_f64, RatPoly};
use crate::quadrature::{self, Adaptive, QuadratureRule};

/// One candidate factorization. `e_plus`/`e_minus` say whether `b` carries
/// the factor `1-x` / `1+x`.
#[derive(Debug, Clone, Serialize)]
pub struct Branch {
    pub e_plus: bool,
    pub e_minus: bool,
    pub classical_alpha: f64,
    pub classical_beta: f64,
    pub c: Option<f64>,
    pub lambda_tilde: Option<f64>,
    pub admissible: bool,
    pub reason: String,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[b has (1-x): {}, (1+x): {}; partner ({}, {}); c = {:?}; lambda~ = {:?}; {}]",
            self.e_plus,
            self.e_minus,
            self.classical_alpha,
            self.classical_beta,
            self.c,
            self.lambda_tilde,
            self.reason
        )
    }
}

/// Exact polynomial data of a factorization.
#[derive(Debug, Clone)]
struct Exact {
    classical: (BigRational, BigRational),
    c: BigRational,
    lambda_tilde: BigRational,
    p: RatPoly,
    q: RatPoly,
    b: RatPoly,
    g: RatPoly,
    btilde: RatPoly,
    ptilde: RatPoly,
    /// `B f = (ptilde f' - bhat_r f) / btilde`
    bhat_r: RatPoly,
    qpoly: RatPoly,
    residual: RatPoly,
}

/// Everything defining the transform. The JSON dump carries the fields
/// needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct DarbouxData {
    pub alpha: f64,
    pub beta: f64,
    pub classical_alpha: f64,
    pub classical_beta: f64,
    pub c: f64,
    pub g0: f64,
    pub g1: f64,
    pub lambda_tilde: f64,
    pub d0: f64,
    pub d1: f64,
    /// ascending coefficients of `b`
    pub b_coeffs: Vec<f64>,
    /// ascending coefficients of `ptilde * g`
    pub ptilde_g_coeffs: Vec<f64>,
    /// coefficients of `x` and `x^2` in `Q`
    pub q_coeffs: [f64; 2],
    pub riccati_residual: f64,
    pub branch: String,
    #[serde(skip)]
    exact: Exact,
}

fn exact_div(num: &RatPoly, den: &RatPoly) -> Option<RatPoly> {
    let (q, r) = num.div_rem(den);
    r.is_zero().then_some(q)
}

fn build_branch(
    alpha: &BigRational,
    beta: &BigRational,
    e_plus: bool,
    e_minus: bool,
) -> (Branch, Option<Exact>) {
    let one = BigRational::one();
    let two = int(2);
    let shift = |v: &BigRational, e: bool| if e { v + &one } else { v - &one };
    let ac = shift(alpha, e_plus);
    let bc = shift(beta, e_minus);
    let mut branch = Branch {
        e_plus,
        e_minus,
        classical_alpha: rational_to_f64(&ac),
        classical_beta: rational_to_f64(&bc),
        c: None,
        lambda_tilde: None,
        admissible: false,
        reason: String::new(),
    };
    if ac <= -one.clone() || bc <= -one.clone() {
        branch.reason = "classical partner has an exponent <= -1".into();
        return (branch, None);
    }
    let s = &ac + &bc;
    let p = RatPoly::new(vec![-one.clone(), BigRational::zero(), one.clone()]);
    let q = RatPoly::new(vec![&ac - &bc, &s + &two]);
    // indicial roots r = 1 - q(e)/p'(e) at e = +-1
    let dp = p.derivative();
    let indicial = |e: &BigRational| &one - q.eval(e) / dp.eval(e);
    let r_plus = if e_plus {
        indicial(&one)
    } else {
        BigRational::zero()
    };
    let r_minus = if e_minus {
        indicial(&-one.clone())
    } else {
        BigRational::zero()
    };
    if (e_plus && r_plus.is_zero()) || (e_minus && r_minus.is_zero()) {
        branch.reason = "endpoint residue vanishes, factor is spurious".into();
        return (branch, None);
    }
    // residue at c must cancel: 2 p(c) h(c) + q(c) = 0, linear in c
    let den = &s + &two + &two * (&r_plus + &r_minus);
    if den.is_zero() {
        branch.reason = "pole escapes to infinity".into();
        return (branch, None);
    }
    let c = (&bc - &ac + &two * (&r_minus - &r_plus)) / &den;
    let big_r = &one + &r_plus + &r_minus;
    let lambda_tilde = &big_r * (&big_r + &s + &one);
    branch.c = Some(rational_to_f64(&c));
    branch.lambda_tilde = Some(rational_to_f64(&lambda_tilde));

    let xm1 = RatPoly::linear_root(&one);
    let xp1 = RatPoly::linear_root(&-one.clone());
    let btilde = RatPoly::linear_root(&c);
    let mut b = btilde.clone();
    if e_plus {
        b = &b * &(-&xm1);
    }
    if e_minus {
        b = &b * &xp1;
    }
    let mut g = RatPoly::zero();
    if e_plus {
        g = &g + &exact_div(&b, &xm1).unwrap().scale(&r_plus);
    }
    if e_minus {
        g = &g + &exact_div(&b, &xp1).unwrap().scale(&r_minus);
    }
    g = &g + &exact_div(&b, &btilde).unwrap();

    let db = b.derivative();
    let lt = RatPoly::constant(lambda_tilde.clone());
    let residual = &(&(&(&p * &(&(&g.derivative() * &b) - &(&g * &db))) + &(&p * &(&g * &g)))
        + &(&q * &(&g * &b)))
        - &(&lt * &(&b * &b));

    let ptilde = match exact_div(&(&p * &btilde), &b) {
        Some(v) => v,
        None => {
            branch.reason = "p / b does not reduce to ptilde / btilde".into();
            return (branch, None);
        }
    };
    let h = &(&(&db * &p) - &(&g * &p)) - &(&q * &b);
    let bhat_r = match exact_div(&(&h * &btilde), &(&b * &b)) {
        Some(v) => v,
        None => {
            branch.reason = "the B operator is not regular at the endpoints".into();
            return (branch, None);
        }
    };
    let qpoly = RatPoly::new(vec![BigRational::zero(), -c.clone(), &one / &two]);

    let mut reasons = Vec::new();
    if !residual.is_zero() {
        reasons.push("Riccati residual is not zero");
    }
    if c.abs() <= one {
        reasons.push("|c| <= 1");
    }
    if !lambda_tilde.is_negative() {
        reasons.push("lambda~ >= 0 leaves a non-positive norm");
    }
    if b.degree() != Some(2) {
        reasons.push("codimension is not 1");
    }
    branch.admissible = reasons.is_empty();
    branch.reason = if reasons.is_empty() {
        "admissible".into()
    } else {
        reasons.join("; ")
    };
    let exact = Exact {
        classical: (ac, bc),
        c,
        lambda_tilde,
        p,
        q,
        b,
        g,
        btilde,
        ptilde,
        bhat_r,
        qpoly,
        residual,
    };
    (branch, Some(exact))
}

fn to_rationals(params: &JacobiParams) -> Result<(BigRational, BigRational)> {
    Ok((
        rational_from_f64(params.alpha())?,
        rational_from_f64(params.beta())?,
    ))
}

/// All four residue patterns with their verdicts.
pub fn enumerate_branches(params: &JacobiParams) -> Result<Vec<Branch>> {
    let (a, b) = to_rationals(params)?;
    Ok([(false, false), (true, false), (false, true), (true, true)]
        .into_iter()
        .map(|(ep, em)| build_branch(&a, &b, ep, em).0)
        .collect())
}

/// Solve the Riccati equation for the exceptional weight exponents `params`.
///
/// Both `alpha != beta` and `alpha * beta > 0` are required. When two
/// branches survive they describe the same weight (same `c`); the one with
/// `b` vanishing at `x = 1` is taken. Branches that disagree on `c` are an
/// error.
pub fn solve_riccati(params: &JacobiParams) -> Result<DarbouxData> {
    let (alpha, beta) = (params.alpha(), params.beta());
    if alpha == beta || alpha * beta <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "X1 admissibility needs alpha != beta and alpha * beta > 0, got ({alpha}, {beta})"
        )));
    }
    let (a, b) = to_rationals(params)?;
    let mut branches = Vec::new();
    let mut admissible = Vec::new();
    for (ep, em) in [(true, false), (false, true), (false, false), (true, true)] {
        let (br, exact) = build_branch(&a, &b, ep, em);
        if br.admissible {
            admissible.push((br.clone(), exact.expect("admissible branch has data")));
        }
        branches.push(br);
    }
    let listing = || {
        branches
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(", ")
    };
    let Some((first, exact)) = admissible.first().cloned() else {
        return Err(Error::NoAdmissibleBranch(listing()));
    };
    if admissible.iter().any(|(_, e)| e.c != exact.c) {
        return Err(Error::AmbiguousBranch(listing()));
    }
    let name = format!(
        "b = {}(x - c), partner Jacobi({}, {})",
        if first.e_plus { "(1-x)" } else { "(1+x)" },
        first.classical_alpha,
        first.classical_beta
    );
    Ok(DarbouxData::from_exact(alpha, beta, exact, name))
}

impl DarbouxData {
    fn from_exact(alpha: f64, beta: f64, exact: Exact, branch: String) -> Self {
        let ptilde_g = &exact.ptilde * &exact.g;
        let btilde = exact.btilde.to_f64();
        let q = exact.qpoly.to_f64();
        DarbouxData {
            alpha,
            beta,
            classical_alpha: rational_to_f64(&exact.classical.0),
            classical_beta: rational_to_f64(&exact.classical.1),
            c: rational_to_f64(&exact.c),
            g0: rational_to_f64(&exact.g.coeff(0)),
            g1: rational_to_f64(&exact.g.coeff(1)),
            lambda_tilde: rational_to_f64(&exact.lambda_tilde),
            d0: btilde[0],
            d1: btilde[1],
            b_coeffs: exact.b.to_f64(),
            ptilde_g_coeffs: ptilde_g.to_f64(),
            q_coeffs: [q[1], q[2]],
            riccati_residual: exact.residual.max_abs_coeff(),
            branch,
            exact,
        }
    }

    pub fn classical(&self) -> JacobiParams {
        JacobiParams::new(self.classical_alpha, self.classical_beta)
            .expect("classical partner validated during construction")
    }

    /// Largest coefficient of `b^2 [p(w'+w^2) + q w] - lambda~ b^2`.
    pub fn riccati_residual_exact(&self) -> f64 {
        self.exact.residual.max_abs_coeff()
    }

    /// The same residual recomputed in floating point from the rounded
    /// coefficients of `b` and `g`.
    pub fn riccati_residual_f64(&self) -> f64 {
        let b = &self.b_coeffs;
        let g = [self.g0, self.g1];
        let (ac, bc) = (self.classical_alpha, self.classical_beta);
        let p = [-1.0, 0.0, 1.0];
        let q = [ac - bc, ac + bc + 2.0];
        let db = [b[1], 2.0 * b[2]];
        let mul = |x: &[f64], y: &[f64]| {
            let mut out = vec![0.0; x.len() + y.len() - 1];
            for (i, a) in x.iter().enumerate() {
                for (j, c) in y.iter().enumerate() {
                    out[i + j] += a * c;
                }
            }
            out
        };
        let gpb_minus = {
            let t1 = mul(&[g[1]], b);
            let t2 = mul(&g, &db);
            (0..3)
                .map(|k| t1.get(k).copied().unwrap_or(0.0) - t2.get(k).copied().unwrap_or(0.0))
                .collect::<Vec<_>>()
        };
        let terms = [
            mul(&p, &gpb_minus),
            mul(&p, &mul(&g, &g)),
            mul(&q, &mul(&g, b)),
            mul(&[-self.lambda_tilde], &mul(b, b)),
        ];
        let mut total = [0.0; 5];
        for t in &terms {
            for (k, v) in t.iter().enumerate() {
                total[k] += v;
            }
        }
        total.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Q(x) = (d1/2) x^2 + d0 x`
    pub fn q_eval(&self, x: f64) -> f64 {
        self.q_coeffs[1] * x * x + self.q_coeffs[0] * x
    }

    pub fn b_eval(&self, x: f64) -> f64 {
        horner(&self.b_coeffs, x)
    }

    pub fn g_eval(&self, x: f64) -> f64 {
        self.g1 * x + self.g0
    }

    /// `btilde(x) = d1 x + d0`
    pub fn btilde_eval(&self, x: f64) -> f64 {
        self.d1 * x + self.d0
    }

    /// Exact `btilde`.
    pub fn btilde_exact(&self) -> &RatPoly {
        &self.exact.btilde
    }

    /// Exact `Q`.
    pub fn q_exact(&self) -> &RatPoly {
        &self.exact.qpoly
    }

    pub fn ptilde_exact(&self) -> &RatPoly {
        &self.exact.ptilde
    }

    /// Write as pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Standard-normalized Jacobi polynomials `P_0 .. P_n` with exact coefficients.
pub fn jacobi_exact(n: usize, a: &BigRational, b: &BigRational) -> Vec<RatPoly> {
    let one = BigRational::one();
    let two = int(2);
    let s = a + b;
    let mut out = vec![RatPoly::constant(one.clone())];
    if n == 0 {
        return out;
    }
    // P_1 = (a+1) + (s+2)(x-1)/2
    let half_s2 = (&s + &two) / &two;
    out.push(RatPoly::new(vec![a + &one - &half_s2, half_s2]));
    for k in 2..=n {
        let kk = int(k as i64);
        let t = &two * &kk + &s;
        let lead = &two * &kk * (&kk + &s) * (&t - &two);
        let c1 = &t - &one;
        let lin = RatPoly::new(vec![&c1 * (a * a - b * b), &c1 * &t * (&t - &two)]);
        let c2 = &two * (&kk + a - &one) * (&kk + b - &one) * &t;
        let next = &(&lin * &out[k - 1]) - &out[k - 2].scale(&c2);
        out.push(next.scale(&(&one / &lead)));
    }
    out
}

/// Squared norm of the standard `P_n^{(a,b)}`.
fn standard_norm_sq(params: &JacobiParams, n: usize) -> f64 {
    if n == 0 {
        return params.zeroth_moment();
    }
    let (a, b) = (params.alpha(), params.beta());
    let s = a + b;
    let nf = n as f64;
    ((s + 1.0) * std::f64::consts::LN_2 - (2.0 * nf + s + 1.0).ln()
        + ln_gamma(nf + a + 1.0)
        + ln_gamma(nf + b + 1.0)
        - ln_gamma(nf + s + 1.0)
        - ln_gamma(nf + 1.0))
    .exp()
}

/// Value of the `bhat` ODE check at one point.
#[derive(Debug, Clone, Copy)]
pub struct OdeResidual {
    pub residual: f64,
    /// Largest absolute term entering the residual.
    pub scale: f64,
}

impl OdeResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual.abs()
        } else {
            self.residual.abs() / self.scale
        }
    }
}

/// The X1-Jacobi family `P_n^{[1]} = A p_n / sqrt(lambda_n - lambda~)`.
#[derive(Debug, Clone)]
pub struct ExceptionalBasis {
    params: JacobiParams,
    classical: JacobiParams,
    darboux: DarbouxData,
    ptilde: Vec<f64>,
    bhat_r: Vec<f64>,
}

impl ExceptionalBasis {
    pub fn new(params: JacobiParams) -> Result<Self> {
        let darboux = solve_riccati(&params)?;
        Self::from_darboux(params, darboux)
    }

    pub fn from_darboux(params: JacobiParams, darboux: DarbouxData) -> Result<Self> {
        let classical = darboux.classical();
        let basis = ExceptionalBasis {
            params,
            classical,
            ptilde: darboux.exact.ptilde.to_f64(),
            bhat_r: darboux.exact.bhat_r.to_f64(),
            darboux,
        };
        if basis.norm(0) <= 0.0 {
            return Err(Error::Validation(format!(
                "sign convention failure: lambda_0 - lambda~ = {}",
                basis.norm(0)
            )));
        }
        Ok(basis)
    }

    pub fn params(&self) -> &JacobiParams {
        &self.params
    }

    pub fn classical(&self) -> &JacobiParams {
        &self.classical
    }

    pub fn darboux(&self) -> &DarbouxData {
        &self.darboux
    }

    /// `lambda_n - lambda~`
    pub fn norm(&self, n: usize) -> f64 {
        self.classical.eigenvalue(n) - self.darboux.lambda_tilde
    }

    /// `W(x) = (1-x)^alpha (1+x)^beta / btilde(x)^2`
    pub fn weight(&self, x: f64) -> f64 {
        let bt = self.darboux.btilde_eval(x);
        self.params.weight(x) / (bt * bt)
    }

    /// `(A p_n)(x) = b p_n' - g p_n` for the orthonormal classical `p_n`.
    pub fn apply_a(&self, n: usize, x: f64) -> Result<f64> {
        check_interval(x)?;
        let rows = self.classical.recurrence(n).eval_with_derivatives(n, x, 1);
        Ok(self.darboux.b_eval(x) * rows[1][n] - self.darboux.g_eval(x) * rows[0][n])
    }

    /// Orthonormal `P_n^{[1]}(x)`.
    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        Ok(self.apply_a(n, x)? / self.norm(n).sqrt())
    }

    /// `P_0^{[1]}(x) .. P_{n_max}^{[1]}(x)` without interval checks.
    pub fn eval_all(&self, n_max: usize, x: f64) -> Vec<f64> {
        let rec = self.classical.recurrence(n_max);
        self.eval_all_with(&rec, n_max, x)
    }

    fn eval_all_with(&self, rec: &crate::jacobi::Recurrence, n_max: usize, x: f64) -> Vec<f64> {
        let rows = rec.eval_with_derivatives(n_max, x, 1);
        let (b, g) = (self.darboux.b_eval(x), self.darboux.g_eval(x));
        (0..=n_max)
            .map(|k| (b * rows[1][k] - g * rows[0][k]) / self.norm(k).sqrt())
            .collect()
    }

    /// `table[k][i] = P_k^{[1]}(nodes[i])`.
    pub fn tabulate(&self, n_max: usize, nodes: &[f64]) -> Vec<Vec<f64>> {
        let rec = self.classical.recurrence(n_max);
        let mut table = vec![vec![0.0; nodes.len()]; n_max + 1];
        for (i, &x) in nodes.iter().enumerate() {
            for (k, v) in self.eval_all_with(&rec, n_max, x).into_iter().enumerate() {
                table[k][i] = v;
            }
        }
        table
    }

    /// `B f = (p/b)(f' - what f)`, with `f` supplied as `x -> (f(x), f'(x))`.
    /// Evaluated in the cancelled form `(ptilde f' - r f) / btilde`.
    pub fn apply_b(&self, f: impl Fn(f64) -> (f64, f64), x: f64) -> Result<f64> {
        check_interval(x)?;
        Ok(self.apply_b_unchecked(f(x), x))
    }

    pub(crate) fn apply_b_unchecked(&self, (fv, fd): (f64, f64), x: f64) -> f64 {
        (horner(&self.ptilde, x) * fd - horner(&self.bhat_r, x) * fv) / self.darboux.btilde_eval(x)
    }

    /// Adaptive integration against `W`: `eval` receives nodes and effective
    /// weights `w_i / btilde(x_i)^2` of the Gauss rule for `(alpha, beta)`.
    pub fn integrate_w<F>(&self, degree: usize, scale: f64, eval: F) -> Result<Adaptive>
    where
        F: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
    {
        quadrature::adaptive(
            &self.params,
            quadrature::starting_nodes(degree),
            scale,
            |rule| {
                let w = self.effective_weights(rule);
                eval(rule.nodes(), &w)
            },
        )
    }

    /// [`Self::integrate_w`] with the tolerance floor taken from the batch maximum.
    pub fn integrate_w_batch<F>(&self, degree: usize, eval: F) -> Result<Adaptive>
    where
        F: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
    {
        quadrature::adaptive_batch_relative(
            &self.params,
            quadrature::starting_nodes(degree),
            |rule| {
                let w = self.effective_weights(rule);
                eval(rule.nodes(), &w)
            },
        )
    }

    pub(crate) fn effective_weights(&self, rule: &QuadratureRule) -> Vec<f64> {
        rule.nodes()
            .iter()
            .zip(rule.weights())
            .map(|(&x, &w)| {
                let bt = self.darboux.btilde_eval(x);
                w / (bt * bt)
            })
            .collect()
    }

    /// Gram matrix of `P_0^{[1]} .. P_{n_max}^{[1]}` under `W`.
    pub fn gram(&self, n_max: usize) -> Result<Vec<Vec<f64>>> {
        let dim = n_max + 1;
        let out = self.integrate_w(2 * n_max + 2, 1.0, |nodes, w| {
            let t = self.tabulate(n_max, nodes);
            let mut vals = Vec::with_capacity(dim * dim);
            for a in 0..dim {
                for b in 0..dim {
                    vals.push(dot3(&t[a], &t[b], w));
                }
            }
            Ok(vals)
        })?;
        Ok(out.values.chunks(dim).map(<[f64]>::to_vec).collect())
    }

    /// Exact coefficients of `A P_n` for the standard-normalized classical
    /// `P_n`, together with the factor `kappa` such that
    /// `P_n^{[1]} = kappa * (A P_n)`.
    pub fn exact_form(&self, n: usize) -> (RatPoly, f64) {
        let (a, b) = &self.darboux.exact.classical;
        let p = jacobi_exact(n, a, b).pop().unwrap();
        (self.apply_a_exact(&p), self.kappa(n))
    }

    /// Same as [`exact_form`](Self::exact_form) for every degree up to `n_max`.
    pub fn exact_forms(&self, n_max: usize) -> Vec<(RatPoly, f64)> {
        let (a, b) = &self.darboux.exact.classical;
        jacobi_exact(n_max, a, b)
            .into_iter()
            .enumerate()
            .map(|(k, p)| (self.apply_a_exact(&p), self.kappa(k)))
            .collect()
    }

    fn kappa(&self, n: usize) -> f64 {
        1.0 / (standard_norm_sq(&self.classical, n) * self.norm(n)).sqrt()
    }

    fn apply_a_exact(&self, p: &RatPoly) -> RatPoly {
        let e = &self.darboux.exact;
        &(&e.b * &p.derivative()) - &(&e.g * p)
    }

    /// Residual of the differential equation satisfied by `y = A P_n`:
    /// `b p y'' + (b(q+p') - 2b'p) y'
    ///  + (b q' + g p' - b'(q+p') - p b'' + 2p (b'/b)(b'-g) + 2p g') y - b lambda~ y`
    /// minus `b (lambda_n - lambda~) y`, evaluated in exact arithmetic at
    /// the rational value of `x` and reported for the orthonormal
    /// normalization.
    pub fn ode_residual(&self, n: usize, x: f64) -> Result<OdeResidual> {
        if !(x > -1.0 && x < 1.0) {
            return Err(Error::Precondition(format!("x = {x} must lie in (-1, 1)")));
        }
        let (y, kappa) = self.exact_form(n);
        let xr = rational_from_f64(x)?;
        let lambda_n = {
            let (a, b) = &self.darboux.exact.classical;
            let nn = int(n as i64);
            &nn * (&nn + a + b + BigRational::one())
        };
        let (res, scale) = self.ode_terms(&y, &xr, &lambda_n);
        Ok(OdeResidual {
            residual: rational_to_f64(&res) * kappa,
            scale: rational_to_f64(&scale) * kappa,
        })
    }

    fn ode_terms(
        &self,
        y: &RatPoly,
        x: &BigRational,
        lambda_n: &BigRational,
    ) -> (BigRational, BigRational) {
        let e = &self.darboux.exact;
        let ev = |p: &RatPoly| p.eval(x);
        let (p, dp) = (ev(&e.p), ev(&e.p.derivative()));
        let (q, dq) = (ev(&e.q), ev(&e.q.derivative()));
        let db_poly = e.b.derivative();
        let (b, db, ddb) = (ev(&e.b), ev(&db_poly), ev(&db_poly.derivative()));
        let (g, dg) = (ev(&e.g), ev(&e.g.derivative()));
        let dy_poly = y.derivative();
        let (yv, dy, ddy) = (ev(y), ev(&dy_poly), ev(&dy_poly.derivative()));
        let two = int(2);
        let t1 = &b * &p * &ddy;
        let t2 = (&b * (&q + &dp) - &two * &db * &p) * &dy;
        let t3 = (&b * &dq + &g * &dp - &db * (&q + &dp) - &p * &ddb
            + &two * &p * (&db / &b) * (&db - &g)
            + &two * &p * &dg
            - &b * &e.lambda_tilde)
            * &yv;
        let rhs = &b * (lambda_n - &e.lambda_tilde) * &yv;
        let res = &t1 + &t2 + &t3 - &rhs;
        let scale = [&t1, &t2, &t3, &rhs]
            .into_iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(BigRational::zero);
        (res, scale)
    }
}

pub(crate) fn dot3(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), z)| x * y * z).sum()
}
