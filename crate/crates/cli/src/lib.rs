//! Configuration-driven experiments on top of the `openhole` library.
//!
//! Every subcommand reads an [`ExperimentConfig`], writes CSV files into an
//! output directory and returns a [`Report`] whose checks decide the exit
//! code.

pub mod commands;
pub mod config;
pub mod report;

pub use config::ExperimentConfig;
pub use report::{Check, Report};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] openhole::Error),
}

macro_rules! from_core {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        })*
    };
}

from_core!(
    openhole::maps::MapError,
    openhole::potentials::PotentialError,
    openhole::noise::NoiseError,
    openhole::transfer::TransferError,
    openhole::openstats::StatsError,
    openhole::thermo::ThermoError
);
