// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

use newton_unlearn::{ErrorClass, UnlearnError};
use thiserror::Error;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;
pub const EXIT_BUDGET: u8 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("{label}: {source}", label = class_label(source.class()))]
    Core {
        #[from]
        source: UnlearnError,
    },
}

fn class_label(class: ErrorClass) -> &'static str {
    match class {
        ErrorClass::Config => "config error",
        ErrorClass::Input => "input error",
        ErrorClass::Solver => "solver error",
        ErrorClass::Budget => "budget error",
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Core { source } => match source.class() {
                ErrorClass::Config => EXIT_CONFIG,
                ErrorClass::Input => EXIT_INPUT,
                ErrorClass::Solver => EXIT_SOLVER,
                ErrorClass::Budget => EXIT_BUDGET,
            },
        }
    }
}
