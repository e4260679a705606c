//! Pressure, Markov equilibrium measures, Gibbs constants, the `T(t)`
//! pressure equation and its dimension spectrum.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::maps::{refine, CylinderWord, MapError, MarkovMap, RefinedPartition};
use crate::noise::{HoleModel, NoiseError};
use crate::potentials::Potential;
use crate::survival::survivor_nodes;
use crate::transfer::{assemble_closed, dominant_spectrum, OperatorMatrix, SpectralData, SpectralOptions, TransferError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("dominant eigenvalue {lambda} is not simple (second modulus {gap})")]
    NotSimple { lambda: f64, gap: f64 },
    #[error("T(t) undefined: pressure independent of s")]
    PsiZero,
    #[error("no sign change of the pressure on [{lo}, {hi}] (values {p_lo}, {p_hi})")]
    Bracket { lo: f64, hi: f64, p_lo: f64, p_hi: f64 },
    #[error("measure has no mass")]
    EmptyMeasure,
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// `log λ` of `L_potential` on level-`n` cylinders.
pub fn pressure(map: &MarkovMap, potential: &Potential, n: usize) -> Result<f64, ThermoError> {
    let op = assemble_closed(map, potential, n)?;
    pressure_of(&op)
}

pub fn pressure_of(op: &OperatorMatrix) -> Result<f64, ThermoError> {
    match dominant_spectrum(op, &SpectralOptions::default()) {
        Ok(s) => Ok(s.lambda.ln()),
        Err(TransferError::ZeroOperator) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e.into()),
    }
}

/// Stationary Markov chain on level-`n` cylinders realizing `μ = ρν`.
///
/// `Q[i][j] = A[j][i]·ρ_j / (λ ρ_i)` is the time-reversed transition from
/// state `i` to its predecessor `j`; states with `ρ_i = 0` are dropped.
#[derive(Clone, Debug)]
pub struct CylinderMeasure {
    partition: Arc<RefinedPartition>,
    q: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

pub fn markov_measure(op: &OperatorMatrix, spec: &SpectralData) -> Result<CylinderMeasure, ThermoError> {
    if spec.gap >= spec.lambda * (1.0 - 1e-9) {
        return Err(ThermoError::NotSimple { lambda: spec.lambda, gap: spec.gap });
    }
    let z = spec.pairing();
    if !(z > 0.0) {
        return Err(ThermoError::EmptyMeasure);
    }
    let q: Vec<f64> = spec.rho.iter().zip(&spec.nu).map(|(r, v)| r * v / z).collect();
    let at = op.matrix().transpose();
    let rows = (0..q.len())
        .map(|i| {
            if spec.rho[i] <= 0.0 {
                return Vec::new();
            }
            at.row(i)
                .iter()
                .map(|&(j, a)| (j, a * spec.rho[j] / (spec.lambda * spec.rho[i])))
                .filter(|e| e.1 > 0.0)
                .collect()
        })
        .collect();
    Ok(CylinderMeasure { partition: Arc::clone(&spec.partition), q, rows })
}

impl CylinderMeasure {
    pub fn level(&self) -> usize {
        self.partition.level()
    }

    pub fn partition(&self) -> &Arc<RefinedPartition> {
        &self.partition
    }

    /// Stationary vector.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// `Q[i][j]`
    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn transition_dense(&self) -> Vec<Vec<f64>> {
        let n = self.q.len();
        (0..n).map(|i| (0..n).map(|j| self.transition(i, j)).collect()).collect()
    }

    /// `μ([w₀ ⋯ w_{m−1}])`.
    pub fn mass(&self, word: &[usize]) -> f64 {
        let l = self.level();
        if word.len() < l {
            return self
                .partition
                .cylinders()
                .iter()
                .zip(&self.q)
                .filter(|(c, _)| c.word.0.starts_with(word))
                .map(|(_, q)| q)
                .sum();
        }
        let states: Option<Vec<usize>> = word
            .windows(l)
            .map(|w| self.partition.index_of(&CylinderWord(w.to_vec())))
            .collect();
        let Some(states) = states else {
            return 0.0;
        };
        let mut m = self.q[*states.last().unwrap()];
        for k in 0..states.len() - 1 {
            if m == 0.0 {
                break;
            }
            m *= self.transition(states[k + 1], states[k]);
        }
        m
    }

    /// `−Σ q_i Q_ij log Q_ij`
    pub fn entropy(&self) -> f64 {
        self.rows
            .iter()
            .zip(&self.q)
            .filter(|(_, q)| **q > 0.0)
            .map(|(row, q)| -q * row.iter().map(|e| e.1 * e.1.ln()).sum::<f64>())
            .sum()
    }

    /// `Σ q_k v_k`, ignoring states of zero mass.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.q.iter().zip(values).filter(|(q, _)| **q > 0.0).map(|(q, v)| q * v).sum()
    }

    /// `max |q Qᵏ − q|` over `k ≤ steps`.
    pub fn stationarity_residual(&self, steps: usize) -> f64 {
        let mut v = self.q.clone();
        let mut worst = 0.0f64;
        for _ in 0..steps {
            let mut next = vec![0.0; v.len()];
            for (i, row) in self.rows.iter().enumerate() {
                for &(j, p) in row {
                    next[j] += v[i] * p;
                }
            }
            v = next;
            worst = v.iter().zip(&self.q).fold(worst, |m, (a, b)| m.max((a - b).abs()));
        }
        worst
    }

    /// `max |Σ_j Q_ij − 1|` over retained states.
    pub fn row_sum_defect(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| (r.iter().map(|e| e.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `|h(μ) + ∫ log w dμ − log λ|` for the measure built from `op`.
pub fn entropy_identity_defect(measure: &CylinderMeasure, op: &OperatorMatrix, lambda: f64) -> f64 {
    let logw: Vec<f64> = op.weights().iter().map(|w| w.ln()).collect();
    (measure.entropy() + measure.integrate(&logw) - lambda.ln()).abs()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub checked: usize,
    pub violations: Vec<(CylinderWord, f64)>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Admissible words of lengths `1..=n_max`.
pub fn words_up_to(map: &MarkovMap, n_max: usize) -> Result<Vec<CylinderWord>, MapError> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        out.extend(refine(map, n)?.cylinders().iter().map(|c| c.word.clone()));
    }
    Ok(out)
}

/// Checks `lo(n) ≤ μ(Z) ≤ hi(n)` on every cylinder of length `n ≤ n_max`,
/// up to a relative rounding slack of `1e-12`.
pub fn cylinder_bounds_check<F>(measure: &CylinderMeasure, map: &MarkovMap, n_max: usize, bounds: F) -> Result<BoundsReport, MapError>
where
    F: Fn(usize) -> (f64, f64),
{
    let words = words_up_to(map, n_max)?;
    let violations = words
        .iter()
        .filter_map(|w| {
            let (lo, hi) = bounds(w.len());
            let m = measure.mass(&w.0);
            (m < lo * (1.0 - 1e-12) || m > hi * (1.0 + 1e-12)).then(|| (w.clone(), m))
        })
        .collect();
    Ok(BoundsReport { checked: words.len(), violations })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsReport {
    /// Constant observed at each length `1..=n_max`.
    pub per_level: Vec<f64>,
    pub constant: f64,
    /// Cylinders where exactly one of mass and weight vanishes.
    pub violations: Vec<CylinderWord>,
}

/// Largest value of `r` and `1/r` with
/// `r = μ(Z) / (e^{S_n pot(x_Z)} / Σ_Z e^{S_n pot(x_Z)})` over cylinders
/// `Z` of each length; `x_Z` is the cylinder midpoint.
pub fn gibbs_check(measure: &CylinderMeasure, map: &MarkovMap, potential: &Potential, n_max: usize) -> Result<GibbsReport, MapError> {
    let mut per_level = Vec::with_capacity(n_max);
    let mut violations = Vec::new();
    for n in 1..=n_max {
        let p = refine(map, n)?;
        let weights: Vec<f64> = p
            .cylinders()
            .par_iter()
            .map(|c| potential.birkhoff_sum(map, c.midpoint(), n).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        let mut c_n = 1.0f64;
        for (c, w) in p.cylinders().iter().zip(&weights) {
            let m = measure.mass(&c.word.0);
            match (m > 0.0, *w > 0.0) {
                (false, false) => {}
                (true, true) => {
                    let r = m / (w / z);
                    c_n = c_n.max(r).max(1.0 / r);
                }
                _ => violations.push(c.word.clone()),
            }
        }
        per_level.push(c_n);
    }
    let constant = per_level.iter().copied().fold(1.0, f64::max);
    Ok(GibbsReport { per_level, constant, violations })
}

fn combo(a: f64, x: f64, b: f64, y: f64) -> f64 {
    let l = if a == 0.0 { 0.0 } else { a * x };
    let r = if b == 0.0 { 0.0 } else { b * y };
    l + r
}

/// Two potentials sampled at the level-`n` representative points, for
/// repeated pressure evaluations of `a·φ + b·ψ`.
#[derive(Clone, Debug)]
pub struct PressureEquation {
    partition: Arc<RefinedPartition>,
    phi: Vec<f64>,
    psi: Vec<f64>,
    opts: SpectralOptions,
}

impl PressureEquation {
    pub fn new(map: &MarkovMap, phi: &Potential, psi: &Potential, n: usize) -> Result<Self, MapError> {
        let partition = Arc::new(refine(map, n)?);
        let mids: Vec<f64> = partition.cylinders().iter().map(|c| c.midpoint()).collect();
        Ok(Self {
            phi: mids.iter().map(|&x| phi.eval(x)).collect(),
            psi: mids.iter().map(|&x| psi.eval(x)).collect(),
            partition,
            opts: SpectralOptions::default(),
        })
    }

    pub fn with_spectral_options(mut self, opts: SpectralOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn partition(&self) -> &Arc<RefinedPartition> {
        &self.partition
    }

    /// Values of `a·φ + b·ψ` per state (`0·∞` read as 0).
    pub fn values(&self, a: f64, b: f64) -> Vec<f64> {
        self.phi.iter().zip(&self.psi).map(|(x, y)| combo(a, *x, b, *y)).collect()
    }

    pub fn psi_values(&self) -> &[f64] {
        &self.psi
    }

    pub fn phi_values(&self) -> &[f64] {
        &self.phi
    }

    pub fn operator(&self, a: f64, b: f64) -> OperatorMatrix {
        let w = self.values(a, b).into_iter().map(f64::exp).collect();
        OperatorMatrix::from_weights(Arc::clone(&self.partition), w, false)
    }

    /// Pressure of `a·φ + b·ψ`.
    pub fn pressure(&self, a: f64, b: f64) -> Result<f64, ThermoError> {
        match dominant_spectrum(&self.operator(a, b), &self.opts) {
            Ok(s) => Ok(s.lambda.ln()),
            Err(TransferError::ZeroOperator) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e.into()),
        }
    }
}

/// `T(t)`: root in `s` of `pressure(tφ + sψ) = 0`, stopped once the
/// bracket is narrower than `tol`.
///
/// The search starts at `s = 0` (clamped into `bracket`) and walks outward
/// with doubling steps until the pressure changes sign, so extreme values of
/// `s` are only visited when the root is really there.
pub fn solve_t(eq: &PressureEquation, t: f64, bracket: (f64, f64), tol: f64) -> Result<f64, ThermoError> {
    if eq.psi.iter().all(|&v| v == 0.0) {
        return Err(ThermoError::PsiZero);
    }
    let p = |s: f64| eq.pressure(t, s);
    let (b_lo, b_hi) = bracket;
    let start = 0.0f64.clamp(b_lo, b_hi);
    let p_start = p(start)?;
    if p_start == 0.0 {
        return Ok(start);
    }
    // pressure decreases in s: walk up while positive, down while negative
    let up = p_start > 0.0;
    let (mut near, mut far) = (start, start);
    let mut p_far = p_start;
    let mut step = 1.0;
    while (p_far > 0.0) == up {
        let limit = if up { b_hi } else { b_lo };
        if far == limit {
            let (p_lo, p_hi) = if up { (p_start, p_far) } else { (p_far, p_start) };
            return Err(ThermoError::Bracket { lo: b_lo, hi: b_hi, p_lo, p_hi });
        }
        near = far;
        far = if up { (far + step).min(b_hi) } else { (far - step).max(b_lo) };
        step *= 2.0;
        p_far = p(far)?;
        if p_far == 0.0 {
            return Ok(far);
        }
    }
    let (mut lo, mut hi) = if up { (near, far) } else { (far, near) };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let v = p(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `T(t)`, `T′(t)` and `T(t) + t T′(t)` on a grid of `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureCurve {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    /// Central differences with step `fd_step`.
    pub derivative: Vec<f64>,
    pub dimension: Vec<f64>,
    /// `|T′_h − T′_{h/2}|`.
    pub richardson_gap: Vec<f64>,
    /// `|pressure(tφ + T(t)ψ)|`.
    pub pressure_residual: Vec<f64>,
}

impl PressureCurve {
    /// Second differences all `≥ −tol` (uniform grid assumed).
    pub fn is_convex(&self, tol: f64) -> bool {
        self.values.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] >= -tol)
    }

    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub bracket: (f64, f64),
    pub tol: f64,
    pub fd_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { bracket: (-64.0, 64.0), tol: 1e-13, fd_step: 1e-4 }
    }
}

pub fn dimension_spectrum(eq: &PressureEquation, t_grid: &[f64], opts: &SolveOptions) -> Result<PressureCurve, ThermoError> {
    let h = opts.fd_step;
    let rows: Vec<[f64; 5]> = t_grid
        .par_iter()
        .map(|&t| {
            let s = |t: f64| solve_t(eq, t, opts.bracket, opts.tol);
            let value = s(t)?;
            let d1 = (s(t + h)? - s(t - h)?) / (2.0 * h);
            let d2 = (s(t + h / 2.0)? - s(t - h / 2.0)?) / h;
            let residual = eq.pressure(t, value)?.abs();
            Ok([value, d1, value + t * d1, (d1 - d2).abs(), residual])
        })
        .collect::<Result<_, ThermoError>>()?;
    Ok(PressureCurve {
        t: t_grid.to_vec(),
        values: rows.iter().map(|r| r[0]).collect(),
        derivative: rows.iter().map(|r| r[1]).collect(),
        dimension: rows.iter().map(|r| r[2]).collect(),
        richardson_gap: rows.iter().map(|r| r[3]).collect(),
        pressure_residual: rows.iter().map(|r| r[4]).collect(),
    })
}

/// `(t, T, T′, dim)` rows.
pub fn write_curve_csv<W: std::io::Write>(curve: &PressureCurve, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,T,T_prime,dim")?;
    for i in 0..curve.t.len() {
        writeln!(out, "{},{},{},{}", curve.t[i], curve.values[i], curve.derivative[i], curve.dimension[i])?;
    }
    Ok(())
}

/// `ψ̃ = log(g / ∫g dm)`, generating cylinder diameters `exp(S_n ψ̃)`.
#[derive(Clone, Debug)]
pub struct PsiTilde {
    pub potential: Potential,
    pub integral_g: f64,
}

pub fn psi_tilde(holes: &HoleModel) -> Result<PsiTilde, ThermoError> {
    let psi = holes.psi()?;
    let integral_g = holes.integral_g(0.0, 1.0);
    Ok(PsiTilde { potential: psi.plus_constant(-integral_g.ln()), integral_g })
}

impl PsiTilde {
    /// `exp(S_n ψ̃(x))`
    pub fn diameter_at(&self, map: &MarkovMap, x: f64, n: usize) -> f64 {
        self.potential.birkhoff_sum(map, x, n).exp()
    }

    /// Diameter of each level-`n` cylinder, evaluated at its midpoint.
    pub fn diameters(&self, map: &MarkovMap, n: usize) -> Result<Vec<(CylinderWord, f64)>, MapError> {
        Ok(refine(map, n)?
            .cylinders()
            .iter()
            .map(|c| (c.word.clone(), self.diameter_at(map, c.midpoint(), n)))
            .collect())
    }

    /// `log μ([x₁⋯x_n]) / log diam([x₁⋯x_n])`; `None` when the diameter is
    /// 1 or the mass vanishes.
    pub fn pointwise_dimension(&self, measure: &CylinderMeasure, map: &MarkovMap, x: f64, n: usize) -> Option<f64> {
        let word = map.itinerary(x, n);
        let m = measure.mass(&word.0);
        let d = self.diameter_at(map, x, n).ln();
        (m > 0.0 && d.abs() > 1e-300).then(|| m.ln() / d)
    }
}

/// Which one-parameter family of potentials to scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `φ + tψ`
    PhiPlusTPsi,
    /// `t(φ + ψ)`
    Scaled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyPoint {
    pub t: f64,
    pub pressure: f64,
    pub int_psi: f64,
    pub int_phi_psi: f64,
    pub entropy: f64,
    /// `|h + ∫pot dμ − pressure|`
    pub entropy_defect: f64,
    /// Mass of the cylinders outside the survivor set of the largest hole.
    pub mass_outside: f64,
}

/// Per-`t` diagnostics of the equilibrium states of a potential family on
/// level-`n` cylinders; `ψ = log g` may be `−∞`.
pub fn family_diagnostics(
    map: &MarkovMap,
    phi: &Potential,
    holes: &HoleModel,
    n: usize,
    t_list: &[f64],
    family: Family,
) -> Result<Vec<FamilyPoint>, ThermoError> {
    let eq = PressureEquation::new(map, phi, &holes.log_weight(), n)?;
    let survivors = survivor_nodes(map, holes, n)?;
    let mut inside = vec![false; eq.partition.len()];
    for k in survivors {
        inside[k] = true;
    }
    let phi_psi = eq.values(1.0, 1.0);
    t_list
        .par_iter()
        .map(|&t| {
            let (a, b) = match family {
                Family::PhiPlusTPsi => (1.0, t),
                Family::Scaled => (t, t),
            };
            let op = eq.operator(a, b);
            let spec = dominant_spectrum(&op, &eq.opts)?;
            let mu = markov_measure(&op, &spec)?;
            let pot = eq.values(a, b);
            let entropy = mu.entropy();
            let pressure = spec.lambda.ln();
            let mass_outside = mu.q().iter().zip(&inside).filter(|(_, i)| !**i).map(|(q, _)| q).sum();
            Ok(FamilyPoint {
                t,
                pressure,
                int_psi: mu.integrate(&eq.psi),
                int_phi_psi: mu.integrate(&phi_psi),
                entropy,
                entropy_defect: (entropy + mu.integrate(&pot) - pressure).abs(),
                mass_outside,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{DiscreteHoleModel, NoiseModel};

    const LN2: f64 = std::f64::consts::LN_2;

    fn ex1(p: f64) -> (MarkovMap, HoleModel) {
        let map = MarkovMap::doubling();
        let holes = DiscreteHoleModel::new(&map, 1, vec![(vec![CylinderWord(vec![0])], 1.0 - p), (vec![], p)]).unwrap();
        (map, holes.into())
    }

    #[test]
    fn pressure_examples() {
        let d = MarkovMap::doubling();
        assert!(pressure(&d, &Potential::geometric(&d), 3).unwrap().abs() < 1e-14);
        assert!((pressure(&d, &Potential::constant(0.0), 3).unwrap() - LN2).abs() < 1e-13);
        let (map, holes) = ex1(0.5);
        let pot = Potential::combine(1.0, &Potential::geometric(&map), 1.0, &holes.psi().unwrap());
        assert!((pressure(&map, &pot, 1).unwrap() - 0.75f64.ln()).abs() < 1e-14);
        let shifted = pot.plus_constant(0.3);
        assert!((pressure(&map, &shifted, 2).unwrap() - 0.75f64.ln() - 0.3).abs() < 1e-13);
    }

    #[test]
    fn markov_measure_examples() {
        let (map, holes) = ex1(0.5);
        let op = crate::transfer::assemble_open(&map, &Potential::geometric(&map), &holes, 1).unwrap();
        let spec = dominant_spectrum(&op, &SpectralOptions::default()).unwrap();
        let mu = markov_measure(&op, &spec).unwrap();
        let q = mu.transition_dense();
        for row in &q {
            assert!((row[0] - 1.0 / 3.0).abs() < 1e-14 && (row[1] - 2.0 / 3.0).abs() < 1e-14);
        }
        assert!((mu.q()[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!(mu.stationarity_residual(20) < 1e-14);
        assert!(entropy_identity_defect(&mu, &op, spec.lambda) < 1e-14);
        assert!((mu.mass(&[0, 1, 1]) - 4.0 / 27.0).abs() < 1e-15);

        let d = MarkovMap::doubling();
        let op = assemble_closed(&d, &Potential::geometric(&d), 3).unwrap();
        let spec = dominant_spectrum(&op, &SpectralOptions::default()).unwrap();
        let mu = markov_measure(&op, &spec).unwrap();
        for w in words_up_to(&d, 6).unwrap() {
            assert!((mu.mass(&w.0) - 0.5f64.powi(w.len() as i32)).abs() < 1e-15);
        }
        assert!((mu.entropy() - LN2).abs() < 1e-14);
    }

    #[test]
    fn example_one_gibbs_constant_is_one() {
        let p = 0.25;
        let (map, holes) = ex1(p);
        let phi = Potential::geometric(&map);
        let op = crate::transfer::assemble_open(&map, &phi, &holes, 1).unwrap();
        let spec = dominant_spectrum(&op, &SpectralOptions::default()).unwrap();
        let mu = markov_measure(&op, &spec).unwrap();
        let pot = Potential::combine(1.0, &phi, 1.0, &holes.psi().unwrap());
        let r = gibbs_check(&mu, &map, &pot, 8).unwrap();
        assert!((r.constant - 1.0).abs() < 1e-12, "{r:?}");
        let b = cylinder_bounds_check(&mu, &map, 8, |n| ((p / (1.0 + p)).powi(n as i32), (1.0 / (1.0 + p)).powi(n as i32))).unwrap();
        assert!(b.passed());
        assert_eq!(b.checked, 510);
    }

    #[test]
    fn unequal_slopes_have_bounded_gibbs_constant() {
        let map = MarkovMap::affine(vec![0.0, 1.0 / 3.0, 1.0], &[(3.0, 0.0), (1.5, -0.5)]).unwrap();
        let phi = Potential::geometric(&map);
        let op = assemble_closed(&map, &phi, 1).unwrap();
        let spec = dominant_spectrum(&op, &SpectralOptions::default()).unwrap();
        let mu = markov_measure(&op, &spec).unwrap();
        let r = gibbs_check(&mu, &map, &phi, 12).unwrap();
        assert!(r.violations.is_empty());
        assert!(r.constant < 10.0);
        assert!(r.per_level.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!((r.per_level[11] - r.per_level[5]).abs() < 1e-9);
    }

    #[test]
    fn t_equation_examples() {
        let p = 0.5f64;
        let (map, holes) = ex1(p);
        let eq = PressureEquation::new(&map, &Potential::geometric(&map), &holes.psi().unwrap(), 1).unwrap();
        let o = SolveOptions::default();
        assert!(solve_t(&eq, 1.0, o.bracket, o.tol).unwrap().abs() < 1e-12);
        let t2 = solve_t(&eq, 2.0, o.bracket, o.tol).unwrap();
        assert!((t2 + 3f64.ln() / 2f64.ln()).abs() < 1e-11);
        let zero = PressureEquation::new(&map, &Potential::geometric(&map), &Potential::constant(0.0), 1).unwrap();
        assert_eq!(solve_t(&zero, 1.0, o.bracket, o.tol).unwrap_err(), ThermoError::PsiZero);
        assert!(matches!(solve_t(&eq, 2.0, (0.0, 1.0), o.tol), Err(ThermoError::Bracket { .. })));
    }

    #[test]
    fn spectrum_matches_closed_form_derivative() {
        let p = 0.3f64;
        let (map, holes) = ex1(p);
        let eq = PressureEquation::new(&map, &Potential::geometric(&map), &holes.psi().unwrap(), 1).unwrap();
        let grid: Vec<f64> = (0..6).map(|k| 0.5 + 0.5 * k as f64).collect();
        let c = dimension_spectrum(&eq, &grid, &SolveOptions::default()).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let two_t = 2f64.powf(t);
            let exact = two_t * LN2 / (two_t - 1.0) / p.ln();
            assert!((c.derivative[i] - exact).abs() < 1e-6, "t={t}");
        }
        assert!(c.is_convex(1e-9) && c.is_non_increasing(1e-12));
    }

    #[test]
    fn psi_tilde_example() {
        let (map, holes) = ex1(0.5);
        let pt = psi_tilde(&holes).unwrap();
        assert!((pt.integral_g - 0.75).abs() < 1e-15);
        assert!((pt.potential.eval(0.2) - (2.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((pt.potential.eval(0.7) - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        let closed: HoleModel = NoiseModel::no_hole(0.5).into();
        let pc = psi_tilde(&closed).unwrap();
        assert!(pc.diameters(&map, 3).unwrap().iter().all(|d| d.1 == 1.0));
        assert!(psi_tilde(&NoiseModel::uniform(0.5).into()).is_err());
    }

    #[test]
    fn family_moves_toward_survivors() {
        let (map, holes) = ex1(0.5);
        let phi = Potential::geometric(&map);
        let pts = family_diagnostics(&map, &phi, &holes, 4, &[0.0, 1.0, 5.0, 20.0, 100.0], Family::PhiPlusTPsi).unwrap();
        assert!(pts.windows(2).all(|w| w[1].int_psi >= w[0].int_psi));
        assert!(pts.windows(2).all(|w| w[1].mass_outside <= w[0].mass_outside + 1e-15));
        assert!(pts[4].mass_outside < 1e-3);
        assert!(pts.iter().all(|p| p.entropy_defect < 1e-10));
        // t = 0: the closed equilibrium state of φ, i.e. Lebesgue
        assert!((pts[0].entropy - LN2).abs() < 1e-12);
    }
}
