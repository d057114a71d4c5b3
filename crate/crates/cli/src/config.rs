//! Experiment configuration files (JSON) and their validation.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use homodyne_u2::{NetworkParams, TuningConstants};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    FimScan,
    FimDiag,
    MleVsM,
    MleVsN,
    SingularityScan,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::FimScan,
        Experiment::FimDiag,
        Experiment::MleVsM,
        Experiment::MleVsN,
        Experiment::SingularityScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FimScan => "fim-scan",
            Experiment::FimDiag => "fim-diag",
            Experiment::MleVsM => "mle-vs-m",
            Experiment::MleVsN => "mle-vs-n",
            Experiment::SingularityScan => "singularity-scan",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment `{s}`")))
    }
}

/// Everything needed to reproduce one table. Missing fields take the
/// defaults used for the shipped figure configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default = "default_truth")]
    pub truth: NetworkParams,
    /// Extra truth tuples for the robustness sweep; empty means `[truth]`.
    #[serde(default)]
    pub truth_sweep: Vec<NetworkParams>,
    #[serde(default = "default_k")]
    pub k: Vec<TuningConstants>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<f64>,
    #[serde(default = "default_m_grid")]
    pub m_grid: Vec<u64>,
    /// Total photon number for Monte Carlo runs over `m_grid`.
    #[serde(default = "default_n_total")]
    pub n_total: f64,
    /// Repetitions for Monte Carlo runs over `n_grid`.
    #[serde(default = "default_m")]
    pub m: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_k_grid")]
    pub k1_grid: Vec<f64>,
    #[serde(default = "default_k_grid")]
    pub k2_grid: Vec<f64>,
    #[serde(default = "default_k3_grid")]
    pub k3_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

pub const DEFAULT_TRUTH: NetworkParams = NetworkParams::new(0.3, 0.8, 0.5, FRAC_PI_4);

fn default_truth() -> NetworkParams {
    DEFAULT_TRUTH
}

fn default_k() -> Vec<TuningConstants> {
    vec![TuningConstants::new(0.5, 0.5, 0.0)]
}

fn default_beta() -> f64 {
    0.5
}

fn default_n_grid() -> Vec<f64> {
    vec![10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1e3, 2e3, 5e3, 1e4]
}

fn default_m_grid() -> Vec<u64> {
    vec![10, 30, 100, 300, 1000]
}

fn default_n_total() -> f64 {
    10.0
}

fn default_m() -> u64 {
    200
}

fn default_trials() -> u64 {
    500
}

fn default_seed() -> u64 {
    1
}

fn default_k_grid() -> Vec<f64> {
    (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect()
}

fn default_k3_grid() -> Vec<f64> {
    vec![0.0]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

/// Upper bounds keeping every run at desk scale.
pub const MAX_GRID_POINTS: usize = 200;
pub const MAX_TRIALS: u64 = 2000;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Truth tuples for Monte Carlo runs.
    pub fn truths(&self) -> Vec<NetworkParams> {
        if self.truth_sweep.is_empty() {
            vec![self.truth]
        } else {
            self.truth_sweep.clone()
        }
    }

    /// Canonical form embedded in artifacts: the output directory is left out
    /// so the same computation written elsewhere produces the same bytes.
    pub fn provenance_json(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        serde_json::to_string(&c).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.provenance_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self, experiment: Experiment) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if let Some(e) = self.experiment {
            if e != experiment {
                return bad(format!("config is for `{e}`, not `{experiment}`"));
            }
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        for t in std::iter::once(&self.truth).chain(&self.truth_sweep) {
            if !t.to_array().iter().all(|v| v.is_finite()) {
                return bad("truth values must be finite".into());
            }
        }
        match experiment {
            Experiment::FimScan | Experiment::FimDiag => {
                check_grid("n_grid", &self.n_grid)?;
                if self.k.is_empty() {
                    return bad("at least one k tuple is required".into());
                }
            }
            Experiment::MleVsM | Experiment::MleVsN => {
                if self.k.len() != 1 {
                    return bad(format!(
                        "Monte Carlo experiments take exactly one k tuple, got {}",
                        self.k.len()
                    ));
                }
                if !(2..=MAX_TRIALS).contains(&self.trials) {
                    return bad(format!(
                        "trials must lie in [2, {MAX_TRIALS}], got {}",
                        self.trials
                    ));
                }
                if experiment == Experiment::MleVsM {
                    let m: Vec<f64> = self.m_grid.iter().map(|&m| m as f64).collect();
                    check_grid("m_grid", &m)?;
                    if !(self.n_total > 0.0 && self.n_total.is_finite()) {
                        return bad(format!("n_total must be positive, got {}", self.n_total));
                    }
                } else {
                    check_grid("n_grid", &self.n_grid)?;
                    if self.m == 0 {
                        return bad("m must be at least 1".into());
                    }
                }
            }
            Experiment::SingularityScan => {
                for (name, grid) in [
                    ("k1_grid", &self.k1_grid),
                    ("k2_grid", &self.k2_grid),
                    ("k3_grid", &self.k3_grid),
                ] {
                    check_grid(name, grid)?;
                }
                let cells = self.k1_grid.len() * self.k2_grid.len() * self.k3_grid.len();
                if cells > MAX_GRID_POINTS * MAX_GRID_POINTS {
                    return bad(format!("singularity grid too large ({cells} cells)"));
                }
            }
        }
        Ok(())
    }
}

/// Nonempty, finite, strictly increasing and, unless it is a `k` grid,
/// strictly positive.
fn check_grid(name: &str, grid: &[f64]) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::Config(format!("{name} is empty")));
    }
    if grid.len() > MAX_GRID_POINTS {
        return Err(CliError::Config(format!(
            "{name} has {} points, limit is {MAX_GRID_POINTS}",
            grid.len()
        )));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Config(format!(
            "{name} contains a non-finite value"
        )));
    }
    if !name.starts_with('k') && grid.iter().any(|&v| v <= 0.0) {
        return Err(CliError::Config(format!("{name} must be positive")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config(format!(
            "{name} must be strictly increasing"
        )));
    }
    Ok(())
}
