use std::path::{Path, PathBuf};

use qkls_core::fourier::FourierConstants;
use qkls_core::hamiltonian::DEFAULT_DENSE_CAP;
use serde::{Deserialize, Serialize};

use crate::{BenchError, Result};

/// How the projected-system elements are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    #[default]
    Exact,
    FiniteDifference,
}

impl std::str::FromStr for SourceKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "finite-difference" | "fd" => Ok(Self::FiniteDifference),
            other => Err(BenchError::Config(format!("unknown source `{other}`"))),
        }
    }
}

/// Experiment description; the JSON form mirrors the field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Ising coupling `J`.
    pub coupling: f64,
    pub target_kappas: Vec<f64>,
    pub tau: f64,
    pub m_grid: Vec<usize>,
    pub t_fd_grid: Vec<f64>,
    pub source: SourceKind,
    /// `None` means exact expectation values.
    pub shots: Option<u64>,
    pub seed: u64,
    pub epsilon_targets: Vec<f64>,
    /// Extra coarse baseline points `(J, K)`, resampled over the range of the
    /// coarsest `epsilon_targets` schedule.
    pub fourier_truncations: Vec<(usize, usize)>,
    pub fourier_constants: FourierConstants,
    /// Double `(C_J, C_K)` until the baseline meets its target on `[1/κ, 1]`.
    pub calibrate_fourier: bool,
    /// Relative singular-value cut; `None` picks the source default.
    pub svd_threshold: Option<f64>,
    /// Largest `k` in the overlap study.
    pub overlap_max_k: usize,
    /// Worker threads; `0` uses every available core.
    pub workers: usize,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 10,
            coupling: 0.1,
            target_kappas: vec![27.6, 47.6],
            tau: 0.001,
            m_grid: vec![1, 2, 4, 8, 16, 32, 64, 128, 256],
            t_fd_grid: (1..=10).map(|i| i as f64 / 100.0).collect(),
            source: SourceKind::Exact,
            shots: None,
            seed: 0,
            epsilon_targets: vec![0.5, 0.1, 0.05],
            fourier_truncations: vec![(1, 1), (2, 1), (4, 2), (8, 4), (16, 8)],
            fourier_constants: FourierConstants::default(),
            calibrate_fourier: false,
            svd_threshold: None,
            overlap_max_k: 8,
            workers: 0,
            output_path: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(BenchError::Config(msg));
        if self.n == 0 || self.n > DEFAULT_DENSE_CAP {
            return fail(format!("n must be in 1..={DEFAULT_DENSE_CAP}, got {}", self.n));
        }
        if !self.coupling.is_finite() {
            return fail("coupling must be finite".into());
        }
        if self.target_kappas.is_empty() {
            return fail("target_kappas is empty".into());
        }
        if let Some(k) = self.target_kappas.iter().find(|&&k| !(k > 1.0) || !k.is_finite()) {
            return fail(format!("every kappa must be finite and > 1, got {k}"));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return fail(format!("tau must be positive, got {}", self.tau));
        }
        if self.m_grid.is_empty() || self.m_grid.contains(&0) {
            return fail("m_grid must be nonempty with positive entries".into());
        }
        if self.t_fd_grid.is_empty() || self.t_fd_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return fail("t_fd_grid must be nonempty with positive entries".into());
        }
        if self.epsilon_targets.is_empty() {
            return fail("epsilon_targets is empty".into());
        }
        if let Some(e) = self.epsilon_targets.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
            return fail(format!("every epsilon target must lie in (0, 1), got {e}"));
        }
        if self.fourier_truncations.iter().any(|&(j, k)| j == 0 || k == 0) {
            return fail("fourier_truncations need J, K >= 1".into());
        }
        if self.shots == Some(0) {
            return fail("shots must be positive".into());
        }
        if let Some(th) = self.svd_threshold {
            if !(th >= 0.0) {
                return fail(format!("svd_threshold must be nonnegative, got {th}"));
            }
        }
        Ok(())
    }

    /// `t_fd` used when the finite-difference source builds a system.
    pub fn solve_t_fd(&self) -> f64 {
        self.t_fd_grid[0]
    }

    pub fn max_m(&self) -> usize {
        self.m_grid.iter().copied().max().unwrap_or(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c = ExperimentConfig::from_json(r#"{"n": 4, "target_kappas": [10.0]}"#).unwrap();
        assert_eq!(c.n, 4);
        assert_eq!(c.tau, 0.001);
    }

    #[test]
    fn invalid_configs_rejected() {
        for text in [
            r#"{"epsilon_targets": []}"#,
            r#"{"m_grid": []}"#,
            r#"{"target_kappas": [1.0]}"#,
            r#"{"n": 40}"#,
            r#"{"tau": 0.0}"#,
            r#"{"bogus": 1}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }
}
