use thiserror::Error;

use crate::{maps::MapError, noise::NoiseError, potentials::PotentialError};
use crate::{openstats::StatsError, thermo::ThermoError, transfer::TransferError};

/// Crate-level error, wrapping the per-module errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
