// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: one JSON document shared by every subcommand.
//!
//! Relative paths are resolved against the directory holding the config
//! file, so a config and its data can be moved together.

use std::path::{Path, PathBuf};

use newton_unlearn::{Distribution, LossModel, LossSpec, PrivacyBudget};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub loss: Option<LossSpec>,
    pub data: Option<DataSource>,
    pub budget: Option<PrivacyBudget>,
    /// Trained model read by `unlearn`.
    pub model: Option<PathBuf>,
    /// Deletion request read by `unlearn`, `retrain` and `audit`.
    pub deletions: Option<PathBuf>,
    #[serde(default)]
    pub outputs: Outputs,
    pub capacity: Option<CapacitySection>,
    pub demo: Option<DemoSection>,
    pub experiment: Option<ExperimentSection>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Path(PathBuf),
    Synthetic(SyntheticData),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticData {
    pub distribution: Distribution,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Default output file per subcommand; `--out` takes precedence, and
/// output goes to stdout when neither is given.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub train: Option<PathBuf>,
    pub unlearn: Option<PathBuf>,
    pub retrain: Option<PathBuf>,
    pub audit: Option<PathBuf>,
    pub capacity: Option<PathBuf>,
    pub demo: Option<PathBuf>,
    pub experiment: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySection {
    pub d: Vec<usize>,
    pub n: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
    #[serde(default = "one")]
    pub c_unlearn: f64,
    #[serde(default = "one")]
    pub c_dp: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoSection {
    #[serde(default = "demo_n")]
    pub n: usize,
    #[serde(default = "demo_m")]
    pub m: usize,
    #[serde(default = "demo_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn demo_n() -> usize {
    1000
}

fn demo_m() -> usize {
    200
}

fn demo_trials() -> usize {
    200
}

impl Default for DemoSection {
    fn default() -> Self {
        DemoSection {
            n: demo_n(),
            m: demo_m(),
            trials: demo_trials(),
            seed: 0,
        }
    }
}

/// Grid sweep; the loss template comes from the top-level `loss` block.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub distribution: Distribution,
    pub d: Vec<usize>,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
    #[serde(default = "experiment_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "experiment_test_samples")]
    pub test_samples: usize,
}

fn experiment_trials() -> usize {
    1
}

fn experiment_test_samples() -> usize {
    20_000
}

impl RunConfig {
    /// Reads, parses and resolves a config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(spec) = &self.loss {
            LossModel::new(spec).map_err(config_err)?;
        }
        if let Some(b) = &self.budget {
            b.validate().map_err(config_err)?;
        }
        if let Some(DataSource::Synthetic(s)) = &self.data {
            s.distribution.validate().map_err(config_err)?;
            if s.n == 0 {
                return Err(CliError::Config("synthetic data needs n >= 1".into()));
            }
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(DataSource::Path(p)) = &mut self.data {
            fix(p);
        }
        self.model.as_mut().map(fix);
        self.deletions.as_mut().map(fix);
        let o = &mut self.outputs;
        for p in [
            &mut o.train,
            &mut o.unlearn,
            &mut o.retrain,
            &mut o.audit,
            &mut o.capacity,
            &mut o.demo,
            &mut o.experiment,
        ] {
            p.as_mut().map(fix);
        }
    }

    /// Replaces every seed in the config.
    pub fn override_seed(&mut self, seed: u64) {
        if let Some(DataSource::Synthetic(s)) = &mut self.data {
            s.seed = seed;
        }
        if let Some(b) = &mut self.budget {
            b.seed = seed;
        }
        if let Some(d) = &mut self.demo {
            d.seed = seed;
        }
        if let Some(e) = &mut self.experiment {
            e.seed = seed;
        }
    }

    pub fn loss(&self) -> Result<LossModel, CliError> {
        let spec = self.loss.as_ref().ok_or_else(|| missing("loss"))?;
        LossModel::new(spec).map_err(config_err)
    }

    pub fn loss_spec(&self) -> Result<&LossSpec, CliError> {
        self.loss.as_ref().ok_or_else(|| missing("loss"))
    }

    pub fn data(&self) -> Result<&DataSource, CliError> {
        self.data.as_ref().ok_or_else(|| missing("data"))
    }

    pub fn budget(&self) -> Result<PrivacyBudget, CliError> {
        self.budget.ok_or_else(|| missing("budget"))
    }

    pub fn model_path(&self) -> Result<&Path, CliError> {
        self.model.as_deref().ok_or_else(|| missing("model"))
    }

    pub fn deletions_path(&self) -> Result<&Path, CliError> {
        self.deletions.as_deref().ok_or_else(|| missing("deletions"))
    }
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing `{key}` section"))
}

fn config_err(e: newton_unlearn::UnlearnError) -> CliError {
    CliError::Config(e.to_string())
}
