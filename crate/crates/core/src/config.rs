use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub identity_tol: f64,
    pub asym_gate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity_tol: 1e-8,
            asym_gate: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "N_values")]
    pub n_values: Vec<usize>,
    pub k_max: usize,
    pub l_max: usize,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 2.0,
            beta: 1.0,
            n_values: vec![50, 100, 200, 400],
            k_max: 6,
            l_max: 5,
            tolerances: Tolerances::default(),
            output_dir: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::InvalidParams("alpha and beta must be finite".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::Validation("N_values is empty".into()));
        }
        if self.n_values[0] == 0 {
            return Err(Error::Validation("N_values must be positive".into()));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "N_values must be strictly increasing".into(),
            ));
        }
        if self.k_max < 1 || self.l_max < 1 {
            return Err(Error::Validation("k_max and l_max must be >= 1".into()));
        }
        let t = &self.tolerances;
        if !(t.identity_tol > 0.0
            && t.identity_tol.is_finite()
            && t.asym_gate > 0.0
            && t.asym_gate.is_finite())
        {
            return Err(Error::Validation(
                "tolerances must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    pub fn n_max(&self) -> usize {
        *self.n_values.last().expect("validated config has N values")
    }

    /// The N values used for spectral checks: those `>= 100` when at least
    /// two qualify, otherwise all of them.
    pub fn spectral_n(&self) -> Vec<usize> {
        let big: Vec<usize> = self
            .n_values
            .iter()
            .copied()
            .filter(|&n| n >= 100)
            .collect();
        if big.len() >= 2 {
            big
        } else {
            self.n_values.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: RunConfig =
            serde_json::from_str(r#"{"alpha": 1.0, "beta": 2.0, "format": "json"}"#).unwrap();
        assert_eq!(c.n_values, vec![50, 100, 200, 400]);
        assert_eq!(c.format, Format::Json);
    }

    #[test]
    fn rejects_unordered_n() {
        let c = RunConfig {
            n_values: vec![100, 50],
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
