// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end for `newton-unlearn`.
//!
//! Every subcommand reads one JSON config (`--config`), writes one output
//! file (`--out`, the config's `outputs` entry, or stdout) and prints a
//! summary line to stderr. Errors map to exit codes by class: 2 config,
//! 3 input data, 4 solver, 5 deletion budget.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "unlearn", version, about = "Certified data deletion for convex models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output file; overrides the config's `outputs` entry.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Replaces every seed in the config.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write its minimizer and Hessian statistic.
    Train(Common),
    /// Remove the deletion set from a trained model.
    Unlearn {
        #[command(flatten)]
        common: Common,
        /// Also write the pre-noise point `w_bar`.
        #[arg(long)]
        audit: bool,
    },
    /// Retrain from scratch without the deletion set.
    Retrain(Common),
    /// Check the deletion bounds against retraining.
    Audit(Common),
    /// Sweep deletion capacities.
    Capacity(Common),
    /// Mean-estimation demo: adversarial versus random deletions.
    DemoPopulationRisk(Common),
    /// Grid sweep of learn, unlearn and retrain excess risks.
    Experiment(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Train(c)
            | Command::Retrain(c)
            | Command::Audit(c)
            | Command::Capacity(c)
            | Command::DemoPopulationRisk(c)
            | Command::Experiment(c) => c,
            Command::Unlearn { common, .. } => common,
        }
    }
}

/// Runs one subcommand to completion.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.override_seed(seed);
    }
    let outputs = cfg.outputs.clone();
    let (out, default_path) = match &cli.command {
        Command::Train(_) => (commands::train(&cfg)?, outputs.train),
        Command::Unlearn { audit, .. } => (commands::unlearn(&cfg, *audit)?, outputs.unlearn),
        Command::Retrain(_) => (commands::retrain(&cfg)?, outputs.retrain),
        Command::Audit(_) => (commands::audit(&cfg)?, outputs.audit),
        Command::Capacity(_) => (commands::capacity(&cfg)?, outputs.capacity),
        Command::DemoPopulationRisk(_) => (commands::demo(&cfg)?, outputs.demo),
        Command::Experiment(_) => (commands::experiment(&cfg)?, outputs.experiment),
    };
    let path = common.out.clone().or(default_path);
    io::emit(path.as_deref(), &out.bytes)?;
    eprintln!("{}", out.summary);
    Ok(())
}
