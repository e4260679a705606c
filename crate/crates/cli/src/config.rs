//! JSON experiment configuration.

use std::path::Path;

use openhole::maps::MapSpec;
use openhole::noise::NoiseSpec;
use openhole::potentials::PotentialSpec;
use openhole::OpenInterval;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Numerical tolerances. Defaults: spectral `1e-12`, pressure root `1e-10`,
/// Monte Carlo z-threshold `3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative eigenvalue and eigenvector residual of the power iteration.
    pub spectral: f64,
    /// Largest accepted `|pressure(tφ + T(t)ψ)|`.
    pub pressure_root: f64,
    /// Largest accepted `|estimate − theory| / standard error`.
    pub mc_z: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { spectral: 1e-12, pressure_root: 1e-10, mc_z: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    AlphaHat,
    Lebesgue,
    PointMass { x: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub samples: u64,
    pub horizon: usize,
    pub tau_max: usize,
    pub workers: usize,
    pub initial_law: LawSpec,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { samples: 100_000, horizon: 30, tau_max: 10_000, workers: 1, initial_law: LawSpec::AlphaHat }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurvivalConfig {
    /// Forbidden set; defaults to the largest hole of the noise model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forbidden: Option<Vec<OpenInterval>>,
    /// Deepest level for the box-counting estimate.
    pub box_levels: usize,
}

impl Default for SurvivalConfig {
    fn default() -> Self {
        Self { forbidden: None, box_levels: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub t_start: f64,
    pub t_stop: f64,
    pub t_step: f64,
    pub fd_step: f64,
    pub bracket: (f64, f64),
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { t_start: 0.5, t_stop: 3.0, t_step: 0.1, fd_step: 1e-4, bracket: (-64.0, 64.0) }
    }
}

impl SpectrumConfig {
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.t_stop - self.t_start) / self.t_step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.t_start + k as f64 * self.t_step).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GibbsConfig {
    pub n_max: usize,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self { n_max: 8 }
    }
}

fn geometric() -> PotentialSpec {
    PotentialSpec::Geometric
}

fn closed() -> NoiseSpec {
    NoiseSpec::Closed
}

fn one() -> usize {
    1
}

/// Everything one run needs. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: MapSpec,
    #[serde(default = "geometric")]
    pub potential: PotentialSpec,
    #[serde(default = "closed")]
    pub noise: NoiseSpec,
    /// Cylinder level of the operator matrices.
    #[serde(default = "one")]
    pub level: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub survival: SurvivalConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub gibbs: GibbsConfig,
}

impl ExperimentConfig {
    pub fn new(map: MapSpec, noise: NoiseSpec) -> Self {
        Self {
            map,
            potential: geometric(),
            noise,
            level: 1,
            seed: 0,
            tolerances: Tolerances::default(),
            simulation: SimulationConfig::default(),
            survival: SurvivalConfig::default(),
            spectrum: SpectrumConfig::default(),
            gibbs: GibbsConfig::default(),
        }
    }

    /// Parses JSON; errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |path: &str, message: &str| Err(CliError::Config { path: path.into(), message: message.into() });
        if self.level == 0 {
            return bad("level", "must be at least 1");
        }
        let t = &self.tolerances;
        for (name, v) in [("tolerances.spectral", t.spectral), ("tolerances.pressure_root", t.pressure_root), ("tolerances.mc_z", t.mc_z)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(name, "must be positive and finite");
            }
        }
        if self.simulation.samples == 0 {
            return bad("simulation.samples", "must be positive");
        }
        if self.simulation.workers == 0 {
            return bad("simulation.workers", "must be positive");
        }
        let s = &self.spectrum;
        if !(s.t_step > 0.0) || s.t_stop < s.t_start {
            return bad("spectrum", "need t_step > 0 and t_stop >= t_start");
        }
        if !(s.fd_step > 0.0) {
            return bad("spectrum.fd_step", "must be positive");
        }
        if self.gibbs.n_max == 0 {
            return bad("gibbs.n_max", "must be at least 1");
        }
        Ok(())
    }
}
