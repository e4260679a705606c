//! Spectral, statistical and dimensional quantities for Markov interval maps
//! whose holes are switched on at random.
//!
//! The averaged open-system transfer operator `L̂_φ f = ∫ L_φ(f·1_{I_ω^c}) dθ(ω)`
//! equals the closed operator `L_{φ+ψ}` with `ψ = log g`, where `g(x)` is the
//! probability that `x` lies outside the random hole. Everything here is built
//! on top of that identity:
//!
//! * [`maps`]: Markov interval maps, cylinder refinement and orbits.
//! * [`potentials`]: locally Hölder potentials, Birkhoff sums, seminorms.
//! * [`noise`]: the hole law θ, the survival function `g`, `ψ`, sampling.
//! * [`transfer`]: matrix representations of `L_φ` / `L̂_φ`, dominant
//!   eigendata, conditionally stationary measures, escape rates.
//! * [`openstats`]: Monte Carlo survival times of the random open system.
//! * [`survival`]: avoidance subshifts, survivor witnesses, Bowen dimension.
//! * [`presets`]: worked configurations with known answers.
//! * [`thermo`]: pressure, Markov/Gibbs measures, the `T(t)` equation and
//!   the dimension spectrum.

pub mod error;
pub mod linalg;
pub mod maps;
pub mod noise;
pub mod openstats;
pub mod potentials;
pub mod presets;
pub mod survival;
pub mod thermo;
pub mod transfer;

pub use error::{Error, Result};
pub use maps::{Branch, Cylinder, CylinderWord, MapSpec, MarkovMap, RefinedPartition};
pub use noise::{DiscreteHoleModel, HoleModel, NoiseModel};
pub use openstats::{InitialLaw, SurvivalRun};
pub use potentials::Potential;
pub use survival::{OpenInterval, SubshiftGraph};
pub use thermo::{CylinderMeasure, PressureCurve};
pub use transfer::{OperatorMatrix, SpectralData, SpectralOptions};
