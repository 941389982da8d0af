//! Gauss–Jacobi rules by Golub–Welsch and the adaptive doubling protocol.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::eigen::tridiagonal_ql;
use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;

/// Smallest node count tried by [`adaptive`].
pub const MIN_NODES: usize = 64;
/// Largest node count tried by [`adaptive`] before giving up.
pub const MAX_NODES: usize = 1 << 15;
/// Agreement required between successive doublings.
pub const ADAPTIVE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum_i w_i f(x_i)`
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `m`-point Gauss rule for `(1-x)^alpha (1+x)^beta`.
pub fn gauss_rule(params: &JacobiParams, m: usize) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::Precondition(
            "a Gauss rule needs m >= 1 nodes".into(),
        ));
    }
    let rec = params.recurrence(m);
    let diag: Vec<f64> = (0..m).map(|k| rec.b(k)).collect();
    let off: Vec<f64> = (1..m).map(|k| rec.a(k)).collect();
    let mut z = vec![0.0; m];
    z[0] = 1.0;
    let nodes = tridiagonal_ql(&diag, &off, Some(&mut z))?;
    let mu0 = params.zeroth_moment();
    let mut pairs: Vec<(f64, f64)> = nodes
        .into_iter()
        .zip(z)
        .map(|(x, v)| (x, mu0 * v * v))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(QuadratureRule { nodes, weights })
}

type CacheKey = (u64, u64, usize);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Memoized [`gauss_rule`]. Rules are immutable once inserted.
pub fn cached_rule(params: &JacobiParams, m: usize) -> Result<Arc<QuadratureRule>> {
    let key = (params.alpha().to_bits(), params.beta().to_bits(), m);
    if let Some(rule) = cache().lock().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_rule(params, m)?);
    let mut guard = cache().lock().expect("rule cache poisoned");
    Ok(Arc::clone(guard.entry(key).or_insert(rule)))
}

/// First node count for an integrand whose polynomial part has degree
/// `degree`: a power of two with some headroom above exactness.
pub fn starting_nodes(degree: usize) -> usize {
    (degree / 2 + 16).next_power_of_two().max(MIN_NODES)
}

/// Result of an adaptive batch.
#[derive(Debug, Clone)]
pub struct Adaptive {
    pub values: Vec<f64>,
    pub nodes: usize,
    /// Largest `|I_m - I_2m|` over the batch at the accepted level.
    pub change: f64,
}

/// Integrate a batch of integrands against the Jacobi weight `params`,
/// doubling from `start` nodes until every component satisfies
/// `|I_m - I_2m| <= ADAPTIVE_RTOL * max(scale, |I_2m|)`.
///
/// `eval` receives a rule and returns one value per integrand.
pub fn adaptive<F>(params: &JacobiParams, start: usize, scale: f64, eval: F) -> Result<Adaptive>
where
    F: Fn(&QuadratureRule) -> Result<Vec<f64>>,
{
    refine(params, start, scale, false, eval)
}

/// Like [`adaptive`], but the floor is the largest `|I_2m|` in the batch.
/// For batches of one common magnitude whose small entries come from
/// cancellation, where the per-entry test would chase rounding noise.
pub fn adaptive_batch_relative<F>(params: &JacobiParams, start: usize, eval: F) -> Result<Adaptive>
where
    F: Fn(&QuadratureRule) -> Result<Vec<f64>>,
{
    refine(params, start, 0.0, true, eval)
}

fn refine<F>(
    params: &JacobiParams,
    start: usize,
    scale: f64,
    batch: bool,
    eval: F,
) -> Result<Adaptive>
where
    F: Fn(&QuadratureRule) -> Result<Vec<f64>>,
{
    let mut m = start.max(1);
    let mut prev = eval(cached_rule(params, m)?.as_ref())?;
    loop {
        let next_m = 2 * m;
        if next_m > MAX_NODES {
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature did not settle below {MAX_NODES} nodes"
            )));
        }
        let next = eval(cached_rule(params, next_m)?.as_ref())?;
        if next.len() != prev.len() {
            return Err(Error::Validation(
                "integrand batch changed size between refinements".into(),
            ));
        }
        let scale = if batch {
            next.iter().fold(scale, |s, v| s.max(v.abs()))
        } else {
            scale
        };
        let mut change = 0.0_f64;
        let mut settled = true;
        for (a, b) in prev.iter().zip(&next) {
            let d = (a - b).abs();
            if !d.is_finite() {
                return Err(Error::NonConvergence(
                    "integrand produced a non-finite value".into(),
                ));
            }
            change = change.max(d);
            if d > ADAPTIVE_RTOL * scale.max(b.abs()) {
                settled = false;
            }
        }
        if settled {
            return Ok(Adaptive {
                values: next,
                nodes: next_m,
                change,
            });
        }
        prev = next;
        m = next_m;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_small_rules() {
        let p = JacobiParams::new(0.0, 0.0).unwrap();
        let r = gauss_rule(&p, 1).unwrap();
        assert!(r.nodes()[0].abs() < 1e-15);
        assert!((r.weights()[0] - 2.0).abs() < 1e-14);
        let r = gauss_rule(&p, 2).unwrap();
        let t = 1.0 / 3f64.sqrt();
        assert!((r.nodes()[0] + t).abs() < 1e-15);
        assert!((r.nodes()[1] - t).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_rule() {
        let p = JacobiParams::new(0.0, 0.0).unwrap();
        assert!(gauss_rule(&p, 0).is_err());
    }

    #[test]
    fn nodes_increasing_weights_positive() {
        let p = JacobiParams::new(2.0, 1.0).unwrap();
        let r = gauss_rule(&p, 300).unwrap();
        assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(r.weights().iter().all(|&w| w > 0.0));
        let total: f64 = r.weights().iter().sum();
        assert!((total - p.zeroth_moment()).abs() < 1e-12 * total);
    }

    #[test]
    fn adaptive_settles_on_smooth_integrand() {
        let p = JacobiParams::new(2.0, 1.0).unwrap();
        let out = adaptive(&p, MIN_NODES, 1.0, |r| {
            Ok(vec![r.integrate(|x| 1.0 / (x + 3.0).powi(2))])
        })
        .unwrap();
        assert_eq!(out.nodes, 128);
    }
}
