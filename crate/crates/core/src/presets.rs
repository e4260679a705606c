//! Ready-made configurations with closed-form answers, shared by tests,
//! benchmarks and the command-line `example` runs.

use crate::maps::{CylinderWord, MarkovMap};
use crate::noise::{DiscreteHoleModel, HoleModel, NoiseError, NoiseModel};
use crate::potentials::Potential;

/// A map, its geometric potential and a hole law.
#[derive(Clone, Debug)]
pub struct OpenSystem {
    pub map: MarkovMap,
    pub phi: Potential,
    pub holes: HoleModel,
}

fn cell(s: usize) -> CylinderWord {
    CylinderWord(vec![s])
}

/// Doubling map; the hole `[0, ½)` is present with probability `1 − p`.
///
/// `λ̂ = (1+p)/2`, `ν̂ = [p, 1]/(1+p)`.
pub fn half_hole_doubling(p: f64) -> Result<OpenSystem, NoiseError> {
    let map = MarkovMap::doubling();
    let holes = DiscreteHoleModel::new(&map, 1, vec![(vec![cell(0)], 1.0 - p), (vec![], p)])?;
    Ok(OpenSystem { phi: Potential::geometric(&map), map, holes: holes.into() })
}

/// Tripling map; the hole is `[0, ⅓)` with probability `p` and `[0, ⅔)`
/// otherwise, so the first cell never survives.
///
/// `λ̂ = (1+p)/3`, `ν̂ = [0, p, 1]/(1+p)`.
pub fn nested_holes_tripling(p: f64) -> Result<OpenSystem, NoiseError> {
    let map = MarkovMap::tripling();
    let holes = DiscreteHoleModel::new(&map, 1, vec![(vec![cell(0)], p), (vec![cell(0), cell(1)], 1.0 - p)])?;
    Ok(OpenSystem { phi: Potential::geometric(&map), map, holes: holes.into() })
}

/// Sine-perturbed doubling map with a ball hole centred at `½` whose radius
/// is `0` with probability `p0` and uniform on `[0, ½]` otherwise.
pub fn perturbed_ball_hole(epsilon: f64, p0: f64) -> Result<OpenSystem, NoiseError> {
    let map = MarkovMap::perturbed_doubling(epsilon);
    let holes = NoiseModel::atom_plus_uniform(0.5, p0, 0.0, 0.5)?;
    Ok(OpenSystem { phi: Potential::geometric(&map), map, holes: holes.into() })
}
