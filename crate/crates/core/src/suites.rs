//! Exact identity suites for the path-counting formulas, shared by the
//! `paths verify` command and the acceptance gates.

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::Result;
use crate::paths::{
    arcsine_q_moment, binomial, brute_force_sum, c_closed, first_counterexample, s_big_bruteforce,
    s_big_closed, s_closed, Counterexample, PathModel,
};
use crate::poly::ratio;

/// Largest length checked by each suite.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuiteLimits {
    pub three_step: u64,
    pub five_step: u64,
    pub moment: u64,
    pub returning: u64,
}

impl Default for SuiteLimits {
    fn default() -> Self {
        SuiteLimits {
            three_step: 10,
            five_step: 8,
            moment: 10,
            returning: 12,
        }
    }
}

impl SuiteLimits {
    /// Every suite up to the same length.
    pub fn uniform(k: u64) -> Self {
        SuiteLimits {
            three_step: k,
            five_step: k,
            moment: k,
            returning: k,
        }
    }
}

/// Deliberate corruption of the brute-force side, for exercising the
/// failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Fault {
    #[default]
    None,
    /// Weight of the zero step in the three-step model is off by one.
    ThreeStepZeroWeight,
}

/// One cell of the pass matrix.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteCell {
    pub suite: &'static str,
    pub k: u64,
    pub cases: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteFailure {
    pub suite: &'static str,
    pub case: String,
    pub closed: String,
    pub brute: String,
    pub path: Option<Counterexample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub cells: Vec<SuiteCell>,
    pub first_failure: Option<SuiteFailure>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.failures == 0)
    }

    pub fn cases(&self) -> usize {
        self.cells.iter().map(|c| c.cases).sum()
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().map(|c| c.failures).sum()
    }

    /// Plain-text matrix: one row per suite, one column per length.
    pub fn matrix(&self) -> String {
        let mut out = String::new();
        let mut suites: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !suites.contains(&c.suite) {
                suites.push(c.suite);
            }
        }
        for s in suites {
            out.push_str(&format!("{s:<12}"));
            for c in self.cells.iter().filter(|c| c.suite == s) {
                let mark = if c.failures == 0 { "ok" } else { "FAIL" };
                out.push_str(&format!(" {}:{}", c.k, mark));
            }
            out.push('\n');
        }
        out
    }

    fn record(&mut self, suite: &'static str, k: u64, failure: Option<SuiteFailure>) {
        let idx = match self.cells.iter().position(|c| c.suite == suite && c.k == k) {
            Some(i) => i,
            None => {
                self.cells.push(SuiteCell {
                    suite,
                    k,
                    cases: 0,
                    failures: 0,
                });
                self.cells.len() - 1
            }
        };
        let cell = &mut self.cells[idx];
        cell.cases += 1;
        if let Some(f) = failure {
            cell.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(f);
            }
        }
    }
}

/// Rational weight pairs `(a, b)` for the three-step identity.
pub fn three_step_pairs() -> Vec<(BigRational, BigRational)> {
    vec![
        (ratio(1, 2), ratio(0, 1)),
        (ratio(1, 2), ratio(1, 3)),
        (ratio(2, 5), ratio(1, 7)),
    ]
}

/// `(d0, d1)` pairs for the five-step identities: the pole data of the
/// reference families plus a generic pair.
pub fn five_step_pairs() -> Vec<(BigRational, BigRational)> {
    vec![
        (ratio(3, 1), ratio(1, 1)),
        (ratio(2, 1), ratio(1, 1)),
        (ratio(-2, 1), ratio(1, 1)),
        (ratio(5, 3), ratio(2, 7)),
    ]
}

fn mismatch(
    suite: &'static str,
    case: String,
    closed: &BigRational,
    brute: &BigRational,
    path: Option<Counterexample>,
) -> Option<SuiteFailure> {
    (closed != brute).then(|| SuiteFailure {
        suite,
        case,
        closed: closed.to_string(),
        brute: brute.to_string(),
        path,
    })
}

/// Run all suites. Returns `Err` only when an enumeration exceeds the guard.
pub fn run(limits: SuiteLimits, fault: Fault) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        cells: Vec::new(),
        first_failure: None,
    };
    // refuse oversized requests before doing any work
    let one = BigRational::one();
    PathModel::three_step(&one, &one, limits.three_step as usize, 0).check_guard()?;
    PathModel::five_step([&one, &one, &one], limits.five_step as usize, 0).check_guard()?;
    s_big_bruteforce(limits.returning, 0)?;

    for k in 0..=limits.three_step {
        for (a, b) in three_step_pairs() {
            for j in -(k as i64)..=k as i64 {
                let reference = PathModel::three_step(&a, &b, k as usize, j);
                let mut model = reference.clone();
                if fault == Fault::ThreeStepZeroWeight {
                    model.set_weight(0, &b + BigRational::one())?;
                }
                let brute = brute_force_sum(&model)?;
                let closed = s_closed(k, j, &a, &b);
                let failure = if closed != brute {
                    let path = first_counterexample(&model, &reference)?;
                    mismatch(
                        "s_kj",
                        format!("k={k} j={j} a={a} b={b}"),
                        &closed,
                        &brute,
                        path,
                    )
                } else {
                    None
                };
                report.record("s_kj", k, failure);
            }
        }
    }

    for k in 0..=limits.five_step {
        for (d0, d1) in five_step_pairs() {
            let u = [&d1 / ratio(4, 1), &d0 / ratio(2, 1), &d1 / ratio(8, 1)];
            let model = PathModel::five_step([&u[0], &u[1], &u[2]], k as usize, 0);
            let brute = brute_force_sum(&model)?;
            let closed = c_closed(k, &d0, &d1);
            let failure = mismatch(
                "c_k",
                format!("k={k} d0={d0} d1={d1}"),
                &closed,
                &brute,
                None,
            );
            report.record("c_k", k, failure);
        }
    }

    for k in 0..=limits.moment {
        for (d0, d1) in five_step_pairs() {
            let closed = c_closed(k, &d0, &d1);
            let moment = arcsine_q_moment(k, &d0, &d1);
            let failure = mismatch(
                "c_k_moment",
                format!("k={k} d0={d0} d1={d1}"),
                &closed,
                &moment,
                None,
            );
            report.record("c_k_moment", k, failure);
        }
    }

    for k in 0..=limits.returning {
        for i in 0..=k / 2 {
            let closed = s_big_closed(k, i)?;
            let brute = s_big_bruteforce(k, i)?;
            report.record(
                "S_ki",
                k,
                mismatch("S_ki", format!("k={k} i={i}"), &closed, &brute, None),
            );
            if k < limits.returning {
                let next = if i + 1 <= (k + 1) / 2 {
                    Some(s_big_bruteforce(k + 1, i + 1)?)
                } else {
                    None
                };
                let doubled = &brute * ratio(2, 1);
                let failure = match next {
                    Some(n) => mismatch("S_doubling", format!("k={k} i={i}"), &doubled, &n, None),
                    None => None,
                };
                report.record("S_doubling", k, failure);
            }
        }
        let base = s_big_bruteforce(k, 0)?;
        let expected = BigRational::from_integer(binomial(2 * k, k)) / ratio(1 << k, 1);
        report.record(
            "S_base",
            k,
            mismatch("S_base", format!("k={k}"), &expected, &base, None),
        );
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_limits_pass() {
        let r = run(SuiteLimits::uniform(4), Fault::None).unwrap();
        assert!(r.passed(), "{}", r.matrix());
    }

    #[test]
    fn fault_yields_path() {
        let r = run(SuiteLimits::uniform(3), Fault::ThreeStepZeroWeight).unwrap();
        assert!(!r.passed());
        let f = r.first_failure.unwrap();
        assert!(f.path.unwrap().steps.contains(&0));
    }
}
