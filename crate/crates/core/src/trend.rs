//! Monotonicity verdicts for convergence sequences.

/// Each value is at most the previous one plus `slack`. The slack absorbs
/// rounding once a sequence has reached the noise floor.
pub fn non_increasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Each value is at least the previous one minus `slack`.
pub fn non_decreasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] - slack)
}
