//! Finite matrices of the closed operator `L_φ` and the averaged open
//! operator `L̂_φ f = L_φ(f·g)` on functions constant on level-`n` cylinders.
//!
//! Row `j` of an [`OperatorMatrix`] is a preimage cylinder and carries its
//! weight `e^{φ(y_j)}·w(y_j)` on every column `k` with `T(C_j) ⊇ C_k`. The
//! operator acts by `(L f)_k = Σ_j A[j][k] f_j`, i.e. `L = Aᵀ`; the conformal
//! measure solves `A ν = λ ν`.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{power_iteration, subdominant_modulus, sup_norm, PowerFailure, SparseMatrix};
use crate::maps::{refine, MapError, MarkovMap, RefinedPartition};
use crate::noise::{HoleModel, NoiseError};
use crate::potentials::{Potential, PotentialError};
use crate::survival::mu_hat_support;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransferError {
    #[error("operator matrix is identically zero")]
    ZeroOperator,
    #[error("power iteration did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },
    #[error("dominant eigenvalue {0} exceeds 1: escape rate undefined")]
    NotSubstochastic(f64),
    #[error("no cylinder carries both left and right eigenvector mass")]
    DegenerateEigenvectors,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// Matrix of a transfer operator on level-`n` cylinders.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    partition: Arc<RefinedPartition>,
    matrix: SparseMatrix,
    weights: Vec<f64>,
    exact: bool,
}

impl OperatorMatrix {
    /// Builds the matrix from one weight per preimage cylinder.
    pub fn from_weights(partition: Arc<RefinedPartition>, weights: Vec<f64>, exact: bool) -> Self {
        let rows = (0..partition.len())
            .map(|j| {
                let w = weights[j];
                if w == 0.0 {
                    Vec::new()
                } else {
                    partition.successors(j).iter().map(|&k| (k, w)).collect()
                }
            })
            .collect();
        let matrix = SparseMatrix::new(partition.len(), rows);
        Self { partition, matrix, weights, exact }
    }

    pub fn level(&self) -> usize {
        self.partition.level()
    }

    pub fn partition(&self) -> &Arc<RefinedPartition> {
        &self.partition
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// `e^{φ(y_j)}·w(y_j)` for each preimage cylinder `j`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when the matrix is the exact action on level-`n` step functions.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `L f` for a step function `f` given by its cylinder values.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.matrix.mul_transpose(f)
    }
}

fn assemble_weights<F>(partition: &RefinedPartition, weight: F) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    partition
        .cylinders()
        .par_iter()
        .map(|c| weight(c.midpoint()))
        .collect()
}

fn data_exact(map: &MarkovMap, partition: &RefinedPartition, phi: &Potential, holes: Option<&HoleModel>) -> bool {
    let ends = partition.endpoints();
    map.is_piecewise_affine() && phi.is_constant_between(&ends) && holes.is_none_or(|h| h.is_constant_between(&ends))
}

/// `L_φ` on level-`n` cylinders, representative points at cylinder
/// midpoints.
pub fn assemble_closed(map: &MarkovMap, phi: &Potential, n: usize) -> Result<OperatorMatrix, TransferError> {
    let partition = Arc::new(refine(map, n)?);
    Ok(assemble_closed_on(map, partition, phi))
}

pub fn assemble_closed_on(map: &MarkovMap, partition: Arc<RefinedPartition>, phi: &Potential) -> OperatorMatrix {
    let weights = assemble_weights(&partition, |y| phi.eval(y).exp());
    let exact = data_exact(map, &partition, phi, None);
    OperatorMatrix::from_weights(partition, weights, exact)
}

/// `L̂_φ f = L_φ(f·g)` on level-`n` cylinders; zero rows where `g = 0`.
pub fn assemble_open(map: &MarkovMap, phi: &Potential, holes: &HoleModel, n: usize) -> Result<OperatorMatrix, TransferError> {
    let partition = Arc::new(refine(map, n)?);
    Ok(assemble_open_on(map, partition, phi, holes))
}

pub fn assemble_open_on(map: &MarkovMap, partition: Arc<RefinedPartition>, phi: &Potential, holes: &HoleModel) -> OperatorMatrix {
    let weights = assemble_weights(&partition, |y| phi.eval(y).exp() * holes.g(y));
    let exact = data_exact(map, &partition, phi, Some(holes));
    OperatorMatrix::from_weights(partition, weights, exact)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralOptions {
    pub tol: f64,
    pub maxit: usize,
    /// Deflated iterations used for the gap estimate.
    pub gap_steps: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { tol: 1e-12, maxit: 200_000, gap_steps: 200 }
    }
}

/// Dominant eigendata of an [`OperatorMatrix`].
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub lambda: f64,
    /// Eigenfunction `L ρ = λ ρ`, normalized `∫ρ dm = 1`.
    pub rho: Vec<f64>,
    /// Eigenmeasure `L* ν = λ ν` as cylinder masses, total mass 1.
    pub nu: Vec<f64>,
    /// Modulus of the second eigenvalue (estimate).
    pub gap: f64,
    /// `‖L ρ − λ ρ‖_∞`
    pub residual: f64,
    pub iterations: usize,
    pub partition: Arc<RefinedPartition>,
}

fn iterate<F: Fn(&[f64]) -> Vec<f64>>(apply: F, dim: usize, norm: f64, opts: &SpectralOptions) -> Result<crate::linalg::PowerResult, TransferError> {
    match power_iteration(&apply, dim, 0.0, opts.tol, opts.maxit) {
        Ok(r) => Ok(r),
        Err(PowerFailure::Vanished) => Err(TransferError::ZeroOperator),
        // periodic structure: a positive shift restores strict dominance
        Err(PowerFailure::NotConverged { .. }) => match power_iteration(&apply, dim, norm, opts.tol, opts.maxit) {
            Ok(r) => Ok(r),
            Err(PowerFailure::Vanished) => Err(TransferError::ZeroOperator),
            Err(PowerFailure::NotConverged { residual, iterations }) => Err(TransferError::NotConverged { residual, iterations }),
        },
    }
}

/// Power iteration on `L = Aᵀ` (for `ρ`) and on `A` (for `ν`); gap by
/// Wielandt deflation.
pub fn dominant_spectrum(op: &OperatorMatrix, opts: &SpectralOptions) -> Result<SpectralData, TransferError> {
    let a = &op.matrix;
    if a.dim() == 0 || a.is_zero() {
        return Err(TransferError::ZeroOperator);
    }
    let max_row: f64 = a.rows().iter().map(|r| r.iter().map(|e| e.1).sum::<f64>()).fold(0.0, f64::max);
    let right = iterate(|f| a.mul_transpose(f), a.dim(), max_row, opts)?;
    let left = iterate(|v| a.mul(v), a.dim(), max_row, opts)?;
    let lambda = right.eigenvalue;
    let lengths = op.partition.lengths();
    let mass: f64 = right.vector.iter().zip(&lengths).map(|(r, l)| r * l).sum();
    let rho: Vec<f64> = right.vector.iter().map(|r| r / mass).collect();
    let total: f64 = left.vector.iter().sum();
    let nu: Vec<f64> = left.vector.iter().map(|v| v / total).collect();
    let lr = a.mul_transpose(&rho);
    let residual = lr.iter().zip(&rho).fold(0.0f64, |m, (x, r)| m.max((x - lambda * r).abs()));
    let gap = subdominant_modulus(&a.transpose(), lambda, &rho, &nu, opts.gap_steps);
    Ok(SpectralData {
        lambda,
        rho,
        nu,
        gap,
        residual,
        iterations: right.iterations.max(left.iterations),
        partition: Arc::clone(&op.partition),
    })
}

impl SpectralData {
    /// `λ` obtained from the `ν` iteration alone, for cross-checks.
    pub fn adjoint_lambda(&self, op: &OperatorMatrix) -> f64 {
        let anu = op.matrix.mul(&self.nu);
        anu.iter().sum::<f64>() / self.nu.iter().sum::<f64>()
    }

    /// `∫ρ dν`
    pub fn pairing(&self) -> f64 {
        self.rho.iter().zip(&self.nu).map(|(r, n)| r * n).sum()
    }
}

/// `μ(C) ∝ ρ(C)·ν(C)`, total mass 1.
pub fn equilibrium_measure(spec: &SpectralData) -> Vec<f64> {
    let z = spec.pairing();
    spec.rho.iter().zip(&spec.nu).map(|(r, n)| r * n / z).collect()
}

/// `−log λ`, or `+∞` when `λ = 0`.
pub fn escape_rate(spec: &SpectralData) -> Result<f64, TransferError> {
    escape_rate_of(spec.lambda)
}

pub fn escape_rate_of(lambda: f64) -> Result<f64, TransferError> {
    if lambda <= 0.0 {
        return Ok(f64::INFINITY);
    }
    if lambda > 1.0 + 1e-12 {
        return Err(TransferError::NotSubstochastic(lambda));
    }
    Ok((-lambda.ln()).max(0.0))
}

/// Conditionally stationary measure: density `ρ̂·g / Z`, `Z = ∫ρ̂ g dm`.
#[derive(Clone, Debug)]
pub struct ConditionallyStationary {
    pub lambda: f64,
    /// `∫ρ̂ g dm`; equals `λ̂` for the geometric potential.
    pub normalizer: f64,
    partition: Arc<RefinedPartition>,
    rho: Vec<f64>,
    holes: HoleModel,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
}

pub fn conditionally_stationary(spec: &SpectralData, holes: &HoleModel) -> ConditionallyStationary {
    let raw: Vec<f64> = spec
        .partition
        .cylinders()
        .iter()
        .zip(&spec.rho)
        .map(|(c, r)| r * holes.integral_g(c.lo, c.hi))
        .collect();
    let z: f64 = raw.iter().sum();
    let masses: Vec<f64> = raw.iter().map(|m| m / z).collect();
    let cumulative = masses
        .iter()
        .scan(0.0, |s, m| {
            *s += m;
            Some(*s)
        })
        .collect();
    ConditionallyStationary {
        lambda: spec.lambda,
        normalizer: z,
        partition: Arc::clone(&spec.partition),
        rho: spec.rho.clone(),
        holes: holes.clone(),
        masses,
        cumulative,
    }
}

impl ConditionallyStationary {
    pub fn partition(&self) -> &Arc<RefinedPartition> {
        &self.partition
    }

    /// `|Z − λ̂|`; zero for the geometric potential.
    pub fn lambda_defect(&self) -> f64 {
        (self.normalizer - self.lambda).abs()
    }

    /// Masses of the level-`n` cylinders.
    pub fn cell_masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Density with respect to Lebesgue at `x` in cylinder `k`.
    pub fn density_in(&self, k: usize, x: f64) -> f64 {
        self.rho[k] * self.holes.g(x) / self.normalizer
    }

    /// Mass of `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        self.partition
            .cylinders()
            .iter()
            .zip(&self.rho)
            .map(|(c, r)| {
                let (lo, hi) = (a.max(c.lo), b.min(c.hi));
                if hi > lo {
                    r * self.holes.integral_g(lo, hi)
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            / self.normalizer
    }

    /// One draw: cylinder by mass, then rejection against `g` inside it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let total = self.cumulative[self.cumulative.len() - 1];
        let k = self.cumulative.partition_point(|&c| c <= u * total).min(self.masses.len() - 1);
        let c = self.partition.cylinder(k);
        let bound = self.holes.sup_g(c.lo, c.hi);
        loop {
            let x = c.lo + (c.hi - c.lo) * rng.random::<f64>();
            let g = self.holes.g(x);
            if g >= bound || rng.random::<f64>() * bound < g {
                return x;
            }
        }
    }

    /// Residual of `α̂(A) = λ̂⁻¹ ∫ α̂(T⁻¹(A ∖ I_ω)) dθ(ω)` on every level-`n`
    /// cylinder `A`, with the preimages computed on the level-`(n+1)`
    /// refinement. Exact for step data.
    pub fn fixed_point_residual(&self, map: &MarkovMap) -> Result<f64, TransferError> {
        let n = self.partition.level();
        let fine = refine(map, n + 1)?;
        let mut rhs = vec![0.0; self.partition.len()];
        for d in fine.cylinders() {
            let outer = self.partition.index_of(&crate::maps::CylinderWord(d.word.0[..n].to_vec()));
            let image = self.partition.index_of(&d.word.shifted());
            if let (Some(o), Some(a)) = (outer, image) {
                let x = d.midpoint();
                let ga = self.holes.g(self.partition.cylinder(a).midpoint());
                rhs[a] += self.density_in(o, x) * d.length() * ga;
            }
        }
        Ok(rhs
            .iter()
            .zip(&self.masses)
            .fold(0.0f64, |m, (r, l)| m.max((r / self.lambda - l).abs())))
    }
}

/// `max_f ‖L̂_φ f − L_{φ+ψ} f‖_∞`; `ψ` may be `−∞` where `g = 0`.
pub fn verify_reduction(map: &MarkovMap, phi: &Potential, holes: &HoleModel, n: usize, test_functions: &[Vec<f64>]) -> Result<f64, TransferError> {
    let partition = Arc::new(refine(map, n)?);
    let open = assemble_open_on(map, Arc::clone(&partition), phi, holes);
    let combined = Potential::combine(1.0, phi, 1.0, &holes.log_weight());
    let closed = assemble_closed_on(map, partition, &combined);
    let mut worst = 0.0f64;
    for f in test_functions {
        let a = open.apply(f);
        let b = closed.apply(f);
        worst = worst.max(a.iter().zip(&b).fold(0.0, |m, (x, y)| m.max((x - y).abs())));
    }
    Ok(worst)
}

/// `max_A |ν(T A) − λ e^{−pot(A)} ν(A)|` over level-`n` cylinders, with
/// `T A` located geometrically. Cylinders with zero weight are skipped.
///
/// `log_weight` is the full potential of the operator (`φ + ψ` for open
/// systems).
pub fn conformality_check(spec: &SpectralData, map: &MarkovMap, log_weight: &Potential) -> f64 {
    let cyl = spec.partition.cylinders();
    // cylinders are disjoint, so sorting by left end also sorts right ends
    let mut order: Vec<usize> = (0..cyl.len()).collect();
    order.sort_by(|&a, &b| cyl[a].lo.total_cmp(&cyl[b].lo));
    let mut prefix = Vec::with_capacity(cyl.len() + 1);
    prefix.push(0.0);
    for &k in &order {
        prefix.push(prefix.last().unwrap() + spec.nu[k]);
    }
    let mut worst = 0.0f64;
    for (j, c) in cyl.iter().enumerate() {
        let pot = log_weight.eval(c.midpoint());
        if pot == f64::NEG_INFINITY {
            continue;
        }
        let b = &map.branches()[c.first_symbol()];
        let (y0, y1) = (b.value(c.lo), b.value(c.hi));
        let (lo, hi) = (y0.min(y1) - 1e-9, y0.max(y1) + 1e-9);
        let start = order.partition_point(|&k| cyl[k].lo < lo);
        let end = order.partition_point(|&k| cyl[k].hi <= hi).max(start);
        let image = prefix[end] - prefix[start];
        let predicted = spec.lambda * (-pot).exp() * spec.nu[j];
        worst = worst.max((image - predicted).abs());
    }
    worst
}

/// `‖λ^{−k} L^k f − ρ ∫f dν / ∫ρ dν‖_∞` for `k = 1..=steps`.
pub fn iterate_convergence(op: &OperatorMatrix, f: &[f64], spec: &SpectralData, steps: usize) -> Vec<f64> {
    let c = f.iter().zip(&spec.nu).map(|(a, b)| a * b).sum::<f64>() / spec.pairing();
    let limit: Vec<f64> = spec.rho.iter().map(|r| r * c).collect();
    let mut u = f.to_vec();
    (0..steps)
        .map(|_| {
            u = op.apply(&u).into_iter().map(|x| x / spec.lambda).collect();
            sup_norm(&u.iter().zip(&limit).map(|(a, b)| a - b).collect::<Vec<_>>())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportReport {
    pub matches: bool,
    /// Cylinders with `ρ̂·ν̂` above threshold.
    pub spectral: Vec<usize>,
    /// Cylinders of the pruned avoidance graph of `{g = 0}`.
    pub symbolic: Vec<usize>,
}

/// Compares the support of `ρ̂·ν̂` with the symbolic survivor cylinders.
/// Membership threshold `10⁻¹²` times the uniform mass.
pub fn support_check(spec: &SpectralData, holes: &HoleModel, map: &MarkovMap) -> Result<SupportReport, TransferError> {
    let mu = equilibrium_measure(spec);
    let threshold = 1e-12 / mu.len() as f64;
    let spectral: Vec<usize> = (0..mu.len()).filter(|&k| mu[k] > threshold).collect();
    let symbolic = mu_hat_support(map, holes, spec.partition.level())?;
    Ok(SupportReport { matches: spectral == symbolic, spectral, symbolic })
}

/// `row,col,value` triplets.
pub fn write_matrix_csv<W: Write>(op: &OperatorMatrix, mut out: W) -> std::io::Result<()> {
    writeln!(out, "row,col,value")?;
    for (j, row) in op.matrix.rows().iter().enumerate() {
        for (k, v) in row {
            writeln!(out, "{j},{k},{v}")?;
        }
    }
    Ok(())
}

/// `word,lo,hi,rho,nu` per cylinder.
pub fn write_spectrum_csv<W: Write>(spec: &SpectralData, mut out: W) -> std::io::Result<()> {
    writeln!(out, "word,lo,hi,rho,nu")?;
    for (c, (r, v)) in spec.partition.cylinders().iter().zip(spec.rho.iter().zip(&spec.nu)) {
        writeln!(out, "{},{},{},{r},{v}", c.word, c.lo, c.hi)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::CylinderWord;
    use crate::noise::{DiscreteHoleModel, NoiseModel};

    fn ex1(p: f64) -> (MarkovMap, Potential, HoleModel) {
        let map = MarkovMap::doubling();
        let holes = DiscreteHoleModel::new(&map, 1, vec![(vec![CylinderWord(vec![0])], 1.0 - p), (vec![], p)]).unwrap();
        let phi = Potential::geometric(&map);
        (map, phi, holes.into())
    }

    fn ex2(p: f64) -> (MarkovMap, Potential, HoleModel) {
        let map = MarkovMap::tripling();
        let w = |s: usize| CylinderWord(vec![s]);
        let holes = DiscreteHoleModel::new(&map, 1, vec![(vec![w(0)], p), (vec![w(0), w(1)], 1.0 - p)]).unwrap();
        let phi = Potential::geometric(&map);
        (map, phi, holes.into())
    }

    fn close(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
        a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn closed_matrices() {
        let d = MarkovMap::doubling();
        let a = assemble_closed(&d, &Potential::geometric(&d), 1).unwrap();
        assert!(a.is_exact());
        assert_eq!(a.matrix().to_dense(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let t = MarkovMap::tripling();
        let b = assemble_closed(&t, &Potential::geometric(&t), 1).unwrap();
        assert!(close(&b.matrix().to_dense(), &vec![vec![1.0 / 3.0; 3]; 3], 1e-16));
        let c = assemble_closed(&d, &Potential::constant(0.0), 1).unwrap();
        assert_eq!(c.matrix().to_dense(), vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        let s = dominant_spectrum(&c, &SpectralOptions::default()).unwrap();
        assert!((s.lambda - 2.0).abs() < 1e-14);
    }

    #[test]
    fn open_matrices() {
        let p = 0.3;
        let (map, phi, holes) = ex1(p);
        let a = assemble_open(&map, &phi, &holes, 1).unwrap();
        assert!(a.is_exact());
        assert!(close(&a.matrix().to_dense(), &[vec![p / 2.0, p / 2.0], vec![0.5, 0.5]], 1e-16));
        let (map, phi, holes) = ex2(p);
        let b = assemble_open(&map, &phi, &holes, 1).unwrap();
        let third = 1.0 / 3.0;
        let expect = [vec![0.0; 3], vec![p * third; 3], vec![third; 3]];
        assert!(close(&b.matrix().to_dense(), &expect, 1e-16));
        let closed = NoiseModel::no_hole(0.5).into();
        let c = assemble_open(&map, &phi, &closed, 3).unwrap();
        let d = assemble_closed(&map, &phi, 3).unwrap();
        assert_eq!(c.matrix(), d.matrix());
    }

    #[test]
    fn example_spectra() {
        let opts = SpectralOptions::default();
        let (map, phi, holes) = ex1(0.5);
        let a = assemble_open(&map, &phi, &holes, 1).unwrap();
        let s = dominant_spectrum(&a, &opts).unwrap();
        assert!((s.lambda - 0.75).abs() < 1e-14);
        assert!(s.rho.iter().all(|r| (r - 1.0).abs() < 1e-14));
        assert!((s.nu[0] - 1.0 / 3.0).abs() < 1e-14 && (s.nu[1] - 2.0 / 3.0).abs() < 1e-14);
        assert!(s.gap < 1e-12);
        assert!((escape_rate(&s).unwrap() - 0.287_682_072_451_780_9).abs() < 1e-12);
        let mu = equilibrium_measure(&s);
        assert!((mu[0] - 1.0 / 3.0).abs() < 1e-14);

        let (map, phi, holes) = ex2(0.5);
        let b = assemble_open(&map, &phi, &holes, 1).unwrap();
        let s = dominant_spectrum(&b, &opts).unwrap();
        assert!((s.lambda - 0.5).abs() < 1e-14);
        assert_eq!(s.nu[0], 0.0);
        assert!((s.nu[1] - 1.0 / 3.0).abs() < 1e-14);
        assert!((escape_rate(&s).unwrap() - std::f64::consts::LN_2).abs() < 1e-13);

        let d = MarkovMap::doubling();
        let c = assemble_closed(&d, &Potential::geometric(&d), 1).unwrap();
        let s = dominant_spectrum(&c, &opts).unwrap();
        assert!((s.lambda - 1.0).abs() < 1e-15);
        assert_eq!(escape_rate(&s).unwrap(), 0.0);
        assert!(s.nu.iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn zero_matrix_is_an_error() {
        let map = MarkovMap::doubling();
        let holes: HoleModel = DiscreteHoleModel::new(&map, 1, vec![(vec![CylinderWord(vec![0]), CylinderWord(vec![1])], 1.0)])
            .unwrap()
            .into();
        let a = assemble_open(&map, &Potential::geometric(&map), &holes, 2).unwrap();
        assert_eq!(dominant_spectrum(&a, &SpectralOptions::default()).unwrap_err(), TransferError::ZeroOperator);
        assert_eq!(escape_rate_of(0.0).unwrap(), f64::INFINITY);
        assert!(escape_rate_of(1.5).is_err());
    }

    #[test]
    fn conditionally_stationary_example_one() {
        let p = 0.5;
        let (map, phi, holes) = ex1(p);
        let s = dominant_spectrum(&assemble_open(&map, &phi, &holes, 1).unwrap(), &SpectralOptions::default()).unwrap();
        let cs = conditionally_stationary(&s, &holes);
        assert!(cs.lambda_defect() < 1e-14);
        assert!((cs.density_in(0, 0.2) - 2.0 * p / (p + 1.0)).abs() < 1e-14);
        assert!((cs.density_in(1, 0.7) - 2.0 / (p + 1.0)).abs() < 1e-14);
        assert!((cs.mass(0.0, 0.5) - 1.0 / 3.0).abs() < 1e-14);
        assert!((cs.total_mass() - 1.0).abs() < 1e-14);
        assert!(cs.fixed_point_residual(&map).unwrap() < 1e-14);
    }

    #[test]
    fn closed_system_gives_rho_times_lebesgue() {
        let map = MarkovMap::golden_mean();
        let phi = Potential::geometric(&map);
        let holes: HoleModel = NoiseModel::no_hole(0.3).into();
        let s = dominant_spectrum(&assemble_open(&map, &phi, &holes, 4).unwrap(), &SpectralOptions::default()).unwrap();
        let cs = conditionally_stationary(&s, &holes);
        assert!((s.lambda - 1.0).abs() < 1e-12);
        for (k, c) in s.partition.cylinders().iter().enumerate() {
            assert!((cs.cell_masses()[k] - s.rho[k] * c.length()).abs() < 1e-12);
        }
    }

    #[test]
    fn reduction_and_conformality() {
        let (map, phi, holes) = ex1(0.5);
        let fs = vec![vec![1.0, 0.0, 0.3, -2.0], vec![0.5; 4]];
        assert_eq!(verify_reduction(&map, &phi, &holes, 2, &fs).unwrap(), 0.0);
        let s = dominant_spectrum(&assemble_open(&map, &phi, &holes, 3).unwrap(), &SpectralOptions::default()).unwrap();
        let pot = Potential::combine(1.0, &phi, 1.0, &holes.log_weight());
        assert!(conformality_check(&s, &map, &pot) < 1e-12);
        let d = MarkovMap::doubling();
        let sc = dominant_spectrum(&assemble_closed(&d, &Potential::geometric(&d), 4).unwrap(), &SpectralOptions::default()).unwrap();
        assert!(conformality_check(&sc, &d, &Potential::geometric(&d)) < 1e-15);
    }

    #[test]
    fn rank_one_converges_in_one_step() {
        let (map, phi, holes) = ex1(0.5);
        let a = assemble_open(&map, &phi, &holes, 1).unwrap();
        let s = dominant_spectrum(&a, &SpectralOptions::default()).unwrap();
        let seq = iterate_convergence(&a, &[1.0, 0.0], &s, 3);
        assert!(seq.iter().all(|e| *e < 1e-14), "{seq:?}");
        let seq = iterate_convergence(&a, &s.rho, &s, 3);
        assert!(seq.iter().all(|e| *e < 1e-14));
    }

    #[test]
    fn geometric_decay_on_golden_mean() {
        let map = MarkovMap::golden_mean();
        let a = assemble_closed(&map, &Potential::constant(0.0), 1).unwrap();
        let s = dominant_spectrum(&a, &SpectralOptions::default()).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s.lambda - golden).abs() < 1e-12);
        assert!((s.gap - 1.0 / golden).abs() < 1e-8, "{}", s.gap);
        let seq = iterate_convergence(&a, &[1.0, 0.0], &s, 12);
        let ratio = seq[11] / seq[10];
        assert!((ratio - s.gap / s.lambda).abs() < 1e-6);
    }

    #[test]
    fn support_of_example_two() {
        let (map, phi, holes) = ex2(0.5);
        let s = dominant_spectrum(&assemble_open(&map, &phi, &holes, 3).unwrap(), &SpectralOptions::default()).unwrap();
        let r = support_check(&s, &holes, &map).unwrap();
        assert!(r.matches, "{r:?}");
        assert_eq!(r.spectral.len(), 8);
        let full: HoleModel = NoiseModel::atom_plus_uniform(0.4, 0.2, 0.0, 0.3).unwrap().into();
        let s = dominant_spectrum(&assemble_open(&map, &phi, &full, 2).unwrap(), &SpectralOptions::default()).unwrap();
        let r = support_check(&s, &full, &map).unwrap();
        assert!(r.matches && r.spectral.len() == 9);
    }
}
