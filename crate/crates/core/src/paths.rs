//! Weighted lattice paths in exact rational arithmetic.
//!
//! Closed forms for the iterated recurrence coefficients and the
//! arcsine moments of `Q`, each paired with an explicit enumeration.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest number of step sequences [`brute_force_sum`] will visit.
pub const ENUMERATION_GUARD: u128 = 100_000_000;

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn binom_q(n: u64, k: u64) -> BigRational {
    BigRational::from_integer(binomial(n, k))
}

fn pow2(e: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << e)
}

fn qpow(x: &BigRational, e: u64) -> BigRational {
    Pow::pow(x, e as u32)
}

/// A step set with exact weights and the target of the enumeration.
#[derive(Debug, Clone)]
pub struct PathModel {
    steps: Vec<i64>,
    weights: Vec<BigRational>,
    length: usize,
    displacement: i64,
    unit_moves: Option<usize>,
    floor: Option<i64>,
}

impl PathModel {
    /// Steps are sorted so enumeration is lexicographic in step values.
    pub fn new(
        mut steps: Vec<(i64, BigRational)>,
        length: usize,
        displacement: i64,
    ) -> Result<Self> {
        steps.sort_by_key(|s| s.0);
        if steps.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParams("duplicate step in step set".into()));
        }
        if steps.is_empty() {
            return Err(Error::InvalidParams("empty step set".into()));
        }
        let (steps, weights) = steps.into_iter().unzip();
        Ok(PathModel {
            steps,
            weights,
            length,
            displacement,
            unit_moves: None,
            floor: None,
        })
    }

    /// Steps `{-1, 0, 1}` with weights `(a, b, a)`.
    pub fn three_step(a: &BigRational, b: &BigRational, length: usize, displacement: i64) -> Self {
        Self::new(
            vec![(-1, a.clone()), (0, b.clone()), (1, a.clone())],
            length,
            displacement,
        )
        .expect("fixed step set is valid")
    }

    /// Steps `{-2..2}` with weights `(u2, u1, u0, u1, u2)`.
    pub fn five_step(u: [&BigRational; 3], length: usize, displacement: i64) -> Self {
        Self::new(
            vec![
                (-2, u[2].clone()),
                (-1, u[1].clone()),
                (0, u[0].clone()),
                (1, u[1].clone()),
                (2, u[2].clone()),
            ],
            length,
            displacement,
        )
        .expect("fixed step set is valid")
    }

    /// Keep only paths with exactly `count` steps of size one.
    pub fn with_unit_moves(mut self, count: usize) -> Self {
        self.unit_moves = Some(count);
        self
    }

    /// Keep only paths whose running level (starting at 0) stays `>= floor`.
    pub fn with_floor(mut self, floor: i64) -> Self {
        self.floor = Some(floor);
        self
    }

    pub fn steps(&self) -> &[i64] {
        &self.steps
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Replace the weight of `step` (used to inject faults in tests).
    pub fn set_weight(&mut self, step: i64, weight: BigRational) -> Result<()> {
        let idx = self
            .steps
            .iter()
            .position(|&s| s == step)
            .ok_or_else(|| Error::InvalidParams(format!("step {step} not in the step set")))?;
        self.weights[idx] = weight;
        Ok(())
    }

    /// Fails with [`Error::GuardExceeded`] when enumeration would visit
    /// more than [`ENUMERATION_GUARD`] step sequences.
    pub fn check_guard(&self) -> Result<()> {
        self.sequences().map(|_| ())
    }

    fn sequences(&self) -> Result<u128> {
        (self.steps.len() as u128)
            .checked_pow(self.length as u32)
            .filter(|&n| n <= ENUMERATION_GUARD)
            .ok_or_else(|| {
                Error::GuardExceeded(format!(
                    "{}^{} step sequences exceed the limit of {ENUMERATION_GUARD}",
                    self.steps.len(),
                    self.length
                ))
            })
    }

    fn admits(&self, idx: &[usize]) -> bool {
        let mut level = 0;
        let mut units = 0;
        for &i in idx {
            let s = self.steps[i];
            level += s;
            if s.abs() == 1 {
                units += 1;
            }
            if self.floor.is_some_and(|f| level < f) {
                return false;
            }
        }
        level == self.displacement && self.unit_moves.is_none_or(|u| u == units)
    }

    fn weight_of(&self, idx: &[usize]) -> BigRational {
        idx.iter()
            .fold(BigRational::one(), |acc, &i| acc * &self.weights[i])
    }

    /// Visit every admitted step-index sequence in lexicographic order.
    fn for_each_path(&self, mut visit: impl FnMut(&[usize]) -> bool) -> Result<()> {
        self.sequences()?;
        let k = self.length;
        let base = self.steps.len();
        let mut idx = vec![0usize; k];
        loop {
            if self.admits(&idx) && !visit(&idx) {
                return Ok(());
            }
            // odometer, last position fastest
            let mut pos = k;
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < base {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

/// Exact sum of path weights by explicit enumeration. Paths are grouped by
/// how often each step occurs, and each group is weighed once.
pub fn brute_force_sum(model: &PathModel) -> Result<BigRational> {
    let mut histogram: std::collections::HashMap<Vec<u32>, u64> = Default::default();
    model.for_each_path(|idx| {
        let mut counts = vec![0u32; model.steps.len()];
        for &i in idx {
            counts[i] += 1;
        }
        *histogram.entry(counts).or_default() += 1;
        true
    })?;
    let mut total = BigRational::zero();
    for (counts, mult) in histogram {
        let w = counts
            .iter()
            .zip(&model.weights)
            .fold(BigRational::one(), |acc, (&c, w)| acc * qpow(w, c as u64));
        total += w * BigRational::from_integer(BigInt::from(mult));
    }
    Ok(total)
}

/// A path on which two models disagree.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub steps: Vec<i64>,
    pub weight: String,
    pub expected: String,
}

/// First admitted path (lexicographic) whose weight under `model` differs
/// from its weight under `reference`. Both must share the step set.
pub fn first_counterexample(
    model: &PathModel,
    reference: &PathModel,
) -> Result<Option<Counterexample>> {
    if model.steps != reference.steps {
        return Err(Error::Validation("models have different step sets".into()));
    }
    let mut found = None;
    model.for_each_path(|idx| {
        let (w, r) = (model.weight_of(idx), reference.weight_of(idx));
        if w != r {
            found = Some(Counterexample {
                steps: idx.iter().map(|&i| model.steps[i]).collect(),
                weight: w.to_string(),
                expected: r.to_string(),
            });
            return false;
        }
        true
    })?;
    Ok(found)
}

/// `sum_i C(k, |j|+2i) C(|j|+2i, i) a^{|j|+2i} b^{k-|j|-2i}`
pub fn s_closed(k: u64, j: i64, a: &BigRational, b: &BigRational) -> BigRational {
    let j = j.unsigned_abs();
    if j > k {
        return BigRational::zero();
    }
    (0..=(k - j) / 2)
        .map(|i| {
            let up = j + 2 * i;
            binom_q(k, up) * binom_q(up, i) * qpow(a, up) * qpow(b, k - up)
        })
        .fold(BigRational::zero(), |acc, t| acc + t)
}

/// `C(k, (k-j)/2) / 2^k` for `k - j` even, else 0.
pub fn s_half(k: u64, j: i64) -> BigRational {
    let j = j.unsigned_abs();
    if j > k || (k - j) % 2 == 1 {
        return BigRational::zero();
    }
    binom_q(k, (k - j) / 2) / pow2(k as u32)
}

/// Returning five-step paths with weights `d1/4, d0/2, d1/8`, counted by
/// the number `2i` of unit steps, the surplus `s` of `+2` steps and the
/// number `m` of balanced `+-2` pairs.
pub fn c_closed(k: u64, d0: &BigRational, d1: &BigRational) -> BigRational {
    let mut total = BigRational::zero();
    for i in 0..=k / 2 {
        let outer = binom_q(k, 2 * i) * qpow(d0, 2 * i) * qpow(d1, k - 2 * i);
        for s in 0..=i.min(k - 2 * i) {
            let mid = binom_q(2 * i, s + i);
            for m in 0..=(k - 2 * i - s) / 2 {
                let e = 2 * k - 2 * i + 2 * m + s.saturating_sub(1);
                total += &outer * &mid * binom_q(k - 2 * i, s + 2 * m) * binom_q(s + 2 * m, m)
                    / pow2(e as u32);
            }
        }
    }
    total
}

/// `int Q^k d omega` for `Q = (d1/2) x^2 + d0 x` by the binomial theorem and
/// the arcsine moments.
pub fn arcsine_q_moment(k: u64, d0: &BigRational, d1: &BigRational) -> BigRational {
    (0..=k / 2)
        .map(|i| {
            binom_q(k, 2 * i) * binom_q(2 * (k - i), k - i) * qpow(d0, 2 * i) * qpow(d1, k - 2 * i)
                / pow2((3 * k - 4 * i) as u32)
        })
        .fold(BigRational::zero(), |acc, t| acc + t)
}

fn check_s_index(k: u64, i: u64) -> Result<()> {
    if i > k / 2 {
        return Err(Error::Precondition(format!("S({k}, {i}) needs i <= k/2")));
    }
    Ok(())
}

/// `C(2(k-i), k-i) / 2^{k-2i}`
pub fn s_big_closed(k: u64, i: u64) -> Result<BigRational> {
    check_s_index(k, i)?;
    Ok(binom_q(2 * (k - i), k - i) / pow2((k - 2 * i) as u32))
}

/// Returning paths of length `k` on `{-2..2}` whose unit steps sit at `2i`
/// fixed positions (taken to be the first ones), weight `1/2` per step of
/// size two. Depth-first with pruning of branches that can no longer return
/// to level 0. Letting the unit steps move would multiply the sum by
/// `C(k, 2i)`, the factor carried separately in `c_closed`.
pub fn s_big_bruteforce(k: u64, i: u64) -> Result<BigRational> {
    check_s_index(k, i)?;
    let visited = 3u128
        .checked_pow((k - 2 * i) as u32)
        .and_then(|n| n.checked_mul(1u128 << (2 * i).min(127)))
        .filter(|&n| n <= ENUMERATION_GUARD);
    if visited.is_none() {
        return Err(Error::GuardExceeded(format!(
            "S({k}, {i}) needs 2^{} * 3^{} step sequences, limit {ENUMERATION_GUARD}",
            2 * i,
            k - 2 * i
        )));
    }
    let k = k as usize;
    let units = 2 * i as usize;
    // by_twos[t] = number of paths with t steps of size two
    let mut by_twos = vec![0u64; k + 1];
    fn walk(pos: usize, len: usize, units: usize, level: i64, twos: usize, by_twos: &mut [u64]) {
        if pos == len {
            if level == 0 {
                by_twos[twos] += 1;
            }
            return;
        }
        if level.unsigned_abs() as usize > 2 * (len - pos) {
            return;
        }
        let steps: &[i64] = if pos < units { &[-1, 1] } else { &[-2, 0, 2] };
        for &step in steps {
            let t = twos + usize::from(step.abs() == 2);
            walk(pos + 1, len, units, level + step, t, by_twos);
        }
    }
    walk(0, k, units, 0, 0, &mut by_twos);
    Ok(by_twos
        .iter()
        .enumerate()
        .map(|(t, &c)| BigRational::from_integer(BigInt::from(c)) / pow2(t as u32))
        .fold(BigRational::zero(), |acc, t| acc + t))
}

/// `int x^l d omega`: `C(2m, m) / 2^{2m}` for `l = 2m`, zero for odd `l`.
pub fn wallis_moment(l: u64) -> BigRational {
    if l % 2 == 1 {
        return BigRational::zero();
    }
    let m = l / 2;
    binom_q(2 * m, m) / pow2(2 * m as u32)
}

/// Sum over returning paths of length `length` from level `start`, steps in
/// `-max_step..=max_step`, of the product of `weight(level, step)`, where
/// the level must stay in `[floor, ceiling]`. Paths are enumerated one by
/// one.
pub fn level_path_sum<T, F>(
    start: usize,
    length: usize,
    max_step: i64,
    floor: i64,
    ceiling: Option<i64>,
    weight: F,
) -> T
where
    T: Clone + Zero + One + std::ops::Mul<Output = T>,
    F: Fn(usize, i64) -> T,
{
    fn walk<T, F>(
        level: i64,
        target: i64,
        rem: usize,
        acc: T,
        ctx: &(i64, i64, Option<i64>, &F),
        total: &mut T,
    ) where
        T: Clone + Zero + One + std::ops::Mul<Output = T>,
        F: Fn(usize, i64) -> T,
    {
        let (max_step, floor, ceiling, weight) = *ctx;
        if rem == 0 {
            if level == target {
                *total = total.clone() + acc;
            }
            return;
        }
        for step in -max_step..=max_step {
            let next = level + step;
            if next < floor || ceiling.is_some_and(|c| next > c) {
                continue;
            }
            let w = weight(level as usize, step);
            walk(next, target, rem - 1, acc.clone() * w, ctx, total);
        }
    }
    let mut total = T::zero();
    let ctx = (max_step, floor, ceiling, &weight);
    walk(
        start as i64,
        start as i64,
        length,
        T::one(),
        &ctx,
        &mut total,
    );
    total
}
