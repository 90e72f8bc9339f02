//! TOML experiment configuration. Angles are degrees, lengths meters,
//! noise variance A^2; one file plus its seed fully determines an
//! experiment.

use serde::{Deserialize, Serialize};
use vlp_core::{RoomScenarioConfig, RrcConfig, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Path1,
    Path2,
    Convergence,
    CoverageCeiling,
    CoveragePolar,
    CrlbGrid,
    LocalizeOnce,
}

/// One axis sweep: start, stop (inclusive within 1e-9), step.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let mut v = Vec::new();
        let mut i = 0u32;
        loop {
            let x = self.start + self.step * i as f64;
            if x > self.stop + 1e-9 {
                break;
            }
            v.push(x);
            i += 1;
        }
        v
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.step > 0.0) {
            anyhow::bail!("sweep step must be > 0, got {}", self.step);
        }
        if self.stop < self.start {
            anyhow::bail!("sweep stop {} precedes start {}", self.stop, self.start);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: RoomScenarioConfig,
    pub experiment: ExperimentSection,
    #[serde(default = "default_solver")]
    pub solver: SolverConfig,
    #[serde(default = "default_rrc")]
    pub rrc: RrcConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub noise_variance: f64,
    #[serde(default)]
    pub seed: u64,
    pub sweep: Option<SweepSpec>,
    /// Grid spacing for coverage experiments, meters.
    #[serde(default = "default_grid_spacing")]
    pub grid_spacing: f64,
    /// CRLB thresholds for coverage experiments, meters.
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    /// Cluster counts for the convergence experiment.
    #[serde(default = "default_cluster_counts")]
    pub cluster_counts: Vec<usize>,
    pub output: Option<String>,
}

fn default_trials() -> usize {
    50
}
fn default_grid_spacing() -> f64 {
    0.1
}
fn default_thresholds() -> Vec<f64> {
    vec![0.01, 0.04, 0.07, 0.125, 0.25]
}
fn default_cluster_counts() -> Vec<usize> {
    vec![0, 1, 2, 3, 4]
}
fn default_solver() -> SolverConfig {
    SolverConfig::default()
}
fn default_rrc() -> RrcConfig {
    RrcConfig::default()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.experiment.trials == 0 {
            anyhow::bail!("trials must be >= 1");
        }
        if let Some(sweep) = &self.experiment.sweep {
            sweep.validate()?;
        }
        self.solver.validate()?;
        self.rrc.validate()?;
        Ok(())
    }
}
