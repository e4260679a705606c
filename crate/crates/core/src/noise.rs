//! Random holes: the radius law θ on `[0, ½]` around a fixed center, its
//! survival function `g(x) = θ([0, |x − x₀|])`, and the discrete mode where
//! each hole is a union of cylinders.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maps::{refine, CylinderWord, MapError, MarkovMap, ENDPOINT_TOL};
use crate::potentials::{Potential, PotentialFn};
use crate::survival::OpenInterval;

/// Tolerance on the total mass of θ and on hole probabilities.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("total mass of θ is {0}, expected 1")]
    TotalMass(f64),
    #[error("radius {0} outside [0, 1/2]")]
    Radius(f64),
    #[error("hole center {0} outside [0, 1]")]
    Center(f64),
    #[error("atom mass {0} must be positive")]
    AtomMass(f64),
    #[error("density piece [{lo}, {hi}] with value {value} is malformed or overlaps another piece")]
    Density { lo: f64, hi: f64, value: f64 },
    #[error("psi unbounded: averaged-operator reduction requires θ({{0}})>0 or discrete no-hole event")]
    PsiUnbounded,
    #[error("hole probabilities must be positive and sum to 1 (sum = {0})")]
    HoleProbabilities(f64),
    #[error("hole cylinder {0} is not an admissible word of the declared level")]
    HoleCylinder(CylinderWord),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Piece of the continuous part of θ: constant density `value` on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

impl DensityPiece {
    fn mass(&self) -> f64 {
        self.value * (self.hi - self.lo)
    }

    /// `θ_piece([0, t])`
    fn cdf(&self, t: f64) -> f64 {
        self.value * (t.clamp(self.lo, self.hi) - self.lo)
    }

    /// `∫_0^t θ_piece([0, s]) ds`
    fn integrated_cdf(&self, t: f64) -> f64 {
        let w = self.hi - self.lo;
        if t <= self.lo {
            0.0
        } else if t < self.hi {
            self.value * (t - self.lo).powi(2) / 2.0
        } else {
            self.value * w * (t - 0.5 * (self.lo + self.hi))
        }
    }
}

/// Atom + piecewise-uniform law θ of the hole radius, with the hole
/// `I_ω = (x₀ − ω, x₀ + ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    center: f64,
    atoms: Vec<(f64, f64)>,
    density: Vec<DensityPiece>,
    support: (f64, f64),
    /// `(t, F(t), F(t−))` at every breakpoint of `F`, ascending.
    table: Vec<(f64, f64, f64)>,
}

impl NoiseModel {
    pub fn new(center: f64, atoms: Vec<(f64, f64)>, density: Vec<DensityPiece>) -> Result<Self, NoiseError> {
        if !(0.0..=1.0).contains(&center) {
            return Err(NoiseError::Center(center));
        }
        let mut atoms = atoms;
        for &(r, m) in &atoms {
            if !(0.0..=0.5).contains(&r) {
                return Err(NoiseError::Radius(r));
            }
            if !(m > 0.0) {
                return Err(NoiseError::AtomMass(m));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut density: Vec<DensityPiece> = density.into_iter().filter(|d| d.value != 0.0).collect();
        density.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for (i, d) in density.iter().enumerate() {
            let overlaps = i > 0 && density[i - 1].hi > d.lo;
            if !(0.0 <= d.lo && d.lo < d.hi && d.hi <= 0.5 && d.value > 0.0) || overlaps {
                return Err(NoiseError::Density { lo: d.lo, hi: d.hi, value: d.value });
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum::<f64>() + density.iter().map(DensityPiece::mass).sum::<f64>();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(NoiseError::TotalMass(total));
        }
        let lows = atoms.iter().map(|a| a.0).chain(density.iter().map(|d| d.lo));
        let highs = atoms.iter().map(|a| a.0).chain(density.iter().map(|d| d.hi));
        let support = (lows.fold(f64::INFINITY, f64::min), highs.fold(0.0, f64::max));
        let mut model = Self { center, atoms, density, support, table: Vec::new() };
        let mut breaks: Vec<f64> = model
            .atoms
            .iter()
            .map(|a| a.0)
            .chain(model.density.iter().flat_map(|d| [d.lo, d.hi]))
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        model.table = breaks
            .into_iter()
            .map(|t| {
                let f = model.cdf(t);
                let atom: f64 = model.atoms.iter().filter(|a| a.0 == t).map(|a| a.1).sum();
                (t, f, f - atom)
            })
            .collect();
        Ok(model)
    }

    /// θ = δ₀: the hole is always empty.
    pub fn no_hole(center: f64) -> Self {
        Self::new(center, vec![(0.0, 1.0)], Vec::new()).expect("valid")
    }

    /// θ = p·δ₀ + (1 − p)·δ_r.
    pub fn two_point(center: f64, p: f64, r: f64) -> Result<Self, NoiseError> {
        let mut atoms = vec![(0.0, p), (r, 1.0 - p)];
        atoms.retain(|a| a.1 > 0.0);
        Self::new(center, atoms, Vec::new())
    }

    /// θ = p₀·δ₀ + (1 − p₀)·Uniform[lo, hi].
    pub fn atom_plus_uniform(center: f64, p0: f64, lo: f64, hi: f64) -> Result<Self, NoiseError> {
        let atoms = if p0 > 0.0 { vec![(0.0, p0)] } else { Vec::new() };
        let density = vec![DensityPiece { lo, hi, value: (1.0 - p0) / (hi - lo) }];
        Self::new(center, atoms, density)
    }

    pub fn uniform(center: f64) -> Self {
        Self::atom_plus_uniform(center, 0.0, 0.0, 0.5).expect("valid")
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density(&self) -> &[DensityPiece] {
        &self.density
    }

    /// `[a, b]`, the smallest interval carrying θ.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// `θ({0})`
    pub fn mass_at_zero(&self) -> f64 {
        self.atoms.iter().filter(|a| a.0 == 0.0).map(|a| a.1).sum()
    }

    /// `F(t) = θ([0, t])`, right-closed.
    pub fn cdf(&self, t: f64) -> f64 {
        if t >= self.support.1 {
            return 1.0;
        }
        let atoms: f64 = self.atoms.iter().filter(|a| a.0 <= t).map(|a| a.1).sum();
        let dens: f64 = self.density.iter().map(|d| d.cdf(t)).sum();
        (atoms + dens).min(1.0)
    }

    /// `g(x) = F(|x − x₀|)`
    pub fn g(&self, x: f64) -> f64 {
        self.cdf((x - self.center).abs())
    }

    fn integrated_cdf(&self, r: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|&(w, p)| p * (r - w).max(0.0)).sum();
        atoms + self.density.iter().map(|d| d.integrated_cdf(r)).sum::<f64>()
    }

    /// `∫_a^b g dx`, in closed form.
    pub fn integral_g(&self, a: f64, b: f64) -> f64 {
        let prim = |u: f64| u.signum() * self.integrated_cdf(u.abs());
        prim(b - self.center) - prim(a - self.center)
    }

    /// Points of `(0, 1)` where `g` jumps, when θ is purely atomic.
    pub fn g_jumps(&self) -> Option<Vec<f64>> {
        if !self.density.is_empty() {
            return None;
        }
        let mut j: Vec<f64> = self
            .atoms
            .iter()
            .filter(|a| a.0 > 0.0)
            .flat_map(|a| [self.center - a.0, self.center + a.0])
            .filter(|x| *x > 0.0 && *x < 1.0)
            .collect();
        j.sort_by(f64::total_cmp);
        j.dedup();
        Some(j)
    }

    /// Inverse-CDF draw of one radius; consumes exactly one `f64` from `rng`.
    pub fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u)
    }

    /// `inf{t : F(t) > u}` for `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.table.partition_point(|e| e.1 <= u);
        let Some(&(t, _, left)) = self.table.get(k) else {
            return self.support.1;
        };
        let (prev_t, prev_f) = match k {
            0 => (t, 0.0),
            _ => (self.table[k - 1].0, self.table[k - 1].1),
        };
        if u < left && left > prev_f {
            prev_t + (u - prev_f) / (left - prev_f) * (t - prev_t)
        } else {
            t
        }
    }

    /// `g` as a potential on the base partition `{[0, 1]}`.
    pub fn survival_function(&self) -> Potential {
        HoleModel::Continuous(self.clone()).survival_function()
    }

    /// `ψ = log g`; fails when `g` vanishes somewhere.
    pub fn psi(&self) -> Result<Potential, NoiseError> {
        HoleModel::Continuous(self.clone()).psi()
    }

    /// Supremum of `θ(I)/|I|^α` over open intervals `I ⊂ (0, ∞)`.
    ///
    /// On an atom-free piecewise-uniform law, the ratio restricted to one
    /// endpoint sweep is quasi-convex on each density piece for `α ≤ 1`, so
    /// the supremum is attained at a pair of density breakpoints.
    pub fn ahlfors_check(&self, alpha: f64) -> AhlforsReport {
        if let Some(&(r, m)) = self.atoms.iter().find(|a| a.0 > 0.0) {
            return AhlforsReport::Violation(AhlforsViolation::Atom { radius: r, mass: m });
        }
        if self.density.is_empty() {
            return AhlforsReport::Bounded { k: 0.0 };
        }
        if alpha > 1.0 {
            let d = self.density[0];
            return AhlforsReport::Violation(AhlforsViolation::Density { lo: d.lo, hi: d.hi, value: d.value });
        }
        let mut pts: Vec<f64> = self.density.iter().flat_map(|d| [d.lo, d.hi]).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut k = 0.0f64;
        for (i, &l) in pts.iter().enumerate() {
            for &r in &pts[i + 1..] {
                let mass: f64 = self.density.iter().map(|d| d.cdf(r) - d.cdf(l)).sum();
                k = k.max(mass / (r - l).powf(alpha));
            }
        }
        AhlforsReport::Bounded { k }
    }

    /// Grid estimate of `C_α(g)` compared with the Ahlfors constant.
    pub fn holder_check_g(&self, alpha: f64, grid: usize) -> HolderReport {
        let g = HoleModel::Continuous(self.clone()).survival_potential(alpha);
        let estimate = crate::potentials::estimate_seminorm(&g, grid.max(2)).unwrap_or(f64::INFINITY);
        let k = match self.ahlfors_check(alpha) {
            AhlforsReport::Bounded { k } => Some(k),
            AhlforsReport::Violation(_) => None,
        };
        let g_holder = k.is_some_and(|k| estimate <= k * (1.0 + 1e-9) + 1e-12);
        HolderReport {
            g_seminorm_estimate: estimate,
            ahlfors_constant: k,
            g_holder,
            psi_holder: g_holder && self.mass_at_zero() > 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AhlforsViolation {
    /// Intervals shrinking to a positive-radius atom.
    Atom { radius: f64, mass: f64 },
    /// Exponent above 1 on a positive density.
    Density { lo: f64, hi: f64, value: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum AhlforsReport {
    Bounded { k: f64 },
    Violation(AhlforsViolation),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport {
    pub g_seminorm_estimate: f64,
    pub ahlfors_constant: Option<f64>,
    pub g_holder: bool,
    pub psi_holder: bool,
}

/// Holes `H_i` (unions of cylinders of one level) switched on with
/// probabilities `p_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteHoleModel {
    level: usize,
    words: Vec<Vec<CylinderWord>>,
    /// Per hole: sorted, merged half-open intervals `[lo, hi)`.
    intervals: Vec<Vec<(f64, f64)>>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    /// Piecewise-constant `g`: `g_values[i]` on `[g_breaks[i], g_breaks[i+1])`.
    g_breaks: Vec<f64>,
    g_values: Vec<f64>,
}

fn merge_intervals(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in iv {
        match out.last_mut() {
            Some(last) if lo <= last.1 + ENDPOINT_TOL => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

fn in_intervals(iv: &[(f64, f64)], x: f64) -> bool {
    let k = iv.partition_point(|s| s.0 <= x);
    k > 0 && {
        let (lo, hi) = iv[k - 1];
        x >= lo && (x < hi || (hi >= 1.0 && x <= 1.0))
    }
}

impl DiscreteHoleModel {
    pub fn new(map: &MarkovMap, level: usize, holes: Vec<(Vec<CylinderWord>, f64)>) -> Result<Self, NoiseError> {
        let partition = refine(map, level)?;
        let total: f64 = holes.iter().map(|h| h.1).sum();
        if holes.is_empty() || holes.iter().any(|h| !(h.1 > 0.0)) || (total - 1.0).abs() > MASS_TOL {
            return Err(NoiseError::HoleProbabilities(total));
        }
        let mut words = Vec::new();
        let mut intervals = Vec::new();
        let mut probs = Vec::new();
        for (ws, p) in holes {
            let mut iv = Vec::new();
            for w in &ws {
                let idx = partition.index_of(w).ok_or_else(|| NoiseError::HoleCylinder(w.clone()))?;
                let c = partition.cylinder(idx);
                iv.push((c.lo, c.hi));
            }
            words.push(ws);
            intervals.push(merge_intervals(iv));
            probs.push(p);
        }
        let cumulative = probs
            .iter()
            .scan(0.0, |s, p| {
                *s += p;
                Some(*s)
            })
            .collect();
        let mut breaks = vec![0.0, 1.0];
        for iv in &intervals {
            for &(lo, hi) in iv {
                breaks.push(lo);
                breaks.push(hi);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= ENDPOINT_TOL);
        let mut model = Self {
            level,
            words,
            intervals,
            probs,
            cumulative,
            g_breaks: breaks.clone(),
            g_values: Vec::new(),
        };
        model.g_values = breaks.windows(2).map(|w| model.g_direct(0.5 * (w[0] + w[1]))).collect();
        Ok(model)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn holes(&self) -> impl Iterator<Item = (&[CylinderWord], f64)> {
        self.words.iter().map(Vec::as_slice).zip(self.probs.iter().copied())
    }

    /// Total probability of the holes that are empty.
    pub fn no_hole_probability(&self) -> f64 {
        self.words
            .iter()
            .zip(&self.probs)
            .filter(|(w, _)| w.is_empty())
            .map(|(_, p)| p)
            .sum()
    }

    pub fn hole_intervals(&self, i: usize) -> &[(f64, f64)] {
        &self.intervals[i]
    }

    pub fn in_hole(&self, i: usize, x: f64) -> bool {
        in_intervals(&self.intervals[i], x)
    }

    fn g_direct(&self, x: f64) -> f64 {
        self.probs
            .iter()
            .zip(&self.intervals)
            .filter(|(_, iv)| !in_intervals(iv, x))
            .map(|(p, _)| p)
            .sum()
    }

    /// `g(x) = Σ p_i 1_{x ∉ H_i}`
    pub fn g(&self, x: f64) -> f64 {
        let k = self.g_breaks.partition_point(|&e| e <= x);
        self.g_values[k.clamp(1, self.g_values.len()) - 1]
    }

    pub fn g_pieces(&self) -> (&[f64], &[f64]) {
        (&self.g_breaks, &self.g_values)
    }

    /// `ψ = log Σ p_i 1_{X_i}`, piecewise constant; fails where every hole
    /// with positive probability covers `x`.
    pub fn discrete_psi(&self) -> Result<Potential, NoiseError> {
        if self.g_values.iter().any(|&v| v <= 0.0) {
            return Err(NoiseError::PsiUnbounded);
        }
        let values = self.g_values.iter().map(|v| v.ln()).collect();
        Ok(Potential::piecewise_constant(self.g_breaks.clone(), values).expect("valid breaks"))
    }

    pub fn integral_g(&self, a: f64, b: f64) -> f64 {
        self.g_breaks
            .windows(2)
            .zip(&self.g_values)
            .map(|(w, v)| v * (b.min(w[1]) - a.max(w[0])).max(0.0))
            .sum()
    }

    fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        self.cumulative.partition_point(|&c| c <= u).min(self.probs.len() - 1)
    }
}

/// A realized hole.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HoleDraw {
    /// `(center − radius, center + radius)`
    Ball { radius: f64 },
    /// Hole number `i` of a discrete model.
    Cells(usize),
}

/// Either hole mode, with a common interface.
#[derive(Clone, Debug, PartialEq)]
pub enum HoleModel {
    Continuous(NoiseModel),
    Discrete(DiscreteHoleModel),
}

#[derive(Debug)]
struct SurvivalFn {
    holes: HoleModel,
    log: bool,
}

impl PotentialFn for SurvivalFn {
    fn eval(&self, x: f64) -> f64 {
        let g = self.holes.g(x);
        if self.log {
            g.ln()
        } else {
            g
        }
    }

    fn jumps(&self) -> Option<Vec<f64>> {
        match &self.holes {
            HoleModel::Continuous(n) => n.g_jumps(),
            HoleModel::Discrete(d) => Some(d.g_breaks[1..d.g_breaks.len() - 1].to_vec()),
        }
    }
}

impl From<NoiseModel> for HoleModel {
    fn from(n: NoiseModel) -> Self {
        HoleModel::Continuous(n)
    }
}

impl From<DiscreteHoleModel> for HoleModel {
    fn from(d: DiscreteHoleModel) -> Self {
        HoleModel::Discrete(d)
    }
}

impl HoleModel {
    pub fn g(&self, x: f64) -> f64 {
        match self {
            HoleModel::Continuous(n) => n.g(x),
            HoleModel::Discrete(d) => d.g(x),
        }
    }

    fn survival_potential(&self, alpha: f64) -> Potential {
        let f = SurvivalFn { holes: self.clone(), log: false };
        Potential::custom(Arc::new(f), vec![0.0, 1.0], alpha)
    }

    /// `g` as a potential.
    pub fn survival_function(&self) -> Potential {
        self.survival_potential(1.0)
    }

    /// `ψ = log g`; errors when `g` vanishes somewhere.
    pub fn psi(&self) -> Result<Potential, NoiseError> {
        match self {
            HoleModel::Continuous(n) => {
                // g is smallest at the center, where it equals θ({0})
                if n.mass_at_zero() <= 0.0 {
                    return Err(NoiseError::PsiUnbounded);
                }
                Ok(self.log_weight())
            }
            HoleModel::Discrete(d) => d.discrete_psi(),
        }
    }

    /// `log g` with `−∞` allowed where `g = 0`; only meaningful through
    /// `exp`, as an operator weight.
    pub fn log_weight(&self) -> Potential {
        match self {
            HoleModel::Discrete(d) => {
                let values = d.g_values.iter().map(|v| v.ln()).collect();
                Potential::piecewise_constant(d.g_breaks.clone(), values).expect("valid breaks")
            }
            HoleModel::Continuous(_) => {
                let f = SurvivalFn { holes: self.clone(), log: true };
                Potential::custom(Arc::new(f), vec![0.0, 1.0], 1.0)
            }
        }
    }

    /// True when `g` is constant between consecutive `endpoints`.
    pub fn is_constant_between(&self, endpoints: &[f64]) -> bool {
        self.survival_function().is_constant_between(endpoints)
    }

    pub fn integral_g(&self, a: f64, b: f64) -> f64 {
        match self {
            HoleModel::Continuous(n) => n.integral_g(a, b),
            HoleModel::Discrete(d) => d.integral_g(a, b),
        }
    }

    /// An upper bound for `g` on `[a, b]`.
    pub fn sup_g(&self, a: f64, b: f64) -> f64 {
        match self {
            // g grows with the distance to the center
            HoleModel::Continuous(n) => n.g(a).max(n.g(b)),
            HoleModel::Discrete(d) => d
                .g_breaks
                .windows(2)
                .zip(&d.g_values)
                .filter(|(w, _)| w[0] <= b && w[1] >= a)
                .map(|(_, v)| *v)
                .fold(0.0, f64::max),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> HoleDraw {
        match self {
            HoleModel::Continuous(n) => HoleDraw::Ball { radius: n.sample_radius(rng) },
            HoleModel::Discrete(d) => HoleDraw::Cells(d.draw_index(rng)),
        }
    }

    pub fn in_hole(&self, draw: HoleDraw, x: f64) -> bool {
        match (self, draw) {
            (HoleModel::Continuous(n), HoleDraw::Ball { radius }) => (x - n.center).abs() < radius,
            (HoleModel::Discrete(d), HoleDraw::Cells(i)) => d.in_hole(i, x),
            _ => false,
        }
    }

    /// Open intervals whose union is the interior of `{g = 0}`:
    /// `(x₀ − a, x₀ + a)` in the continuous mode.
    pub fn zero_region(&self) -> Vec<OpenInterval> {
        match self {
            HoleModel::Continuous(n) => {
                let a = n.support().0;
                if a > 0.0 {
                    vec![OpenInterval::new(n.center - a, n.center + a)]
                } else {
                    Vec::new()
                }
            }
            HoleModel::Discrete(d) => {
                let zero: Vec<(f64, f64)> = d
                    .g_breaks
                    .windows(2)
                    .zip(&d.g_values)
                    .filter(|(_, v)| **v <= 0.0)
                    .map(|(w, _)| (w[0], w[1]))
                    .collect();
                merge_intervals(zero).into_iter().map(|(a, b)| OpenInterval::new(a, b)).collect()
            }
        }
    }

    /// Open intervals covering the largest possible hole:
    /// `(x₀ − b, x₀ + b)` in the continuous mode, the union of all holes in
    /// the discrete mode.
    pub fn max_hole(&self) -> Vec<OpenInterval> {
        match self {
            HoleModel::Continuous(n) => {
                let b = n.support().1;
                if b > 0.0 {
                    vec![OpenInterval::new(n.center - b, n.center + b)]
                } else {
                    Vec::new()
                }
            }
            HoleModel::Discrete(d) => merge_intervals(d.intervals.iter().flatten().copied().collect())
                .into_iter()
                .map(|(a, b)| OpenInterval::new(a, b))
                .collect(),
        }
    }
}

/// Config form of a hole model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    /// θ = δ₀.
    Closed,
    Continuous {
        center: f64,
        #[serde(default)]
        atoms: Vec<(f64, f64)>,
        #[serde(default)]
        density: Vec<DensityPiece>,
    },
    Discrete { level: usize, holes: Vec<HoleSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleSpec {
    /// Cylinder words, one symbol list each; empty for the no-hole event.
    pub cells: Vec<Vec<usize>>,
    pub p: f64,
}

impl NoiseSpec {
    pub fn build(&self, map: &MarkovMap) -> Result<HoleModel, NoiseError> {
        match self {
            NoiseSpec::Closed => Ok(NoiseModel::no_hole(0.5).into()),
            NoiseSpec::Continuous { center, atoms, density } => {
                Ok(NoiseModel::new(*center, atoms.clone(), density.clone())?.into())
            }
            NoiseSpec::Discrete { level, holes } => {
                let holes = holes
                    .iter()
                    .map(|h| (h.cells.iter().cloned().map(CylinderWord).collect(), h.p))
                    .collect();
                Ok(DiscreteHoleModel::new(map, *level, holes)?.into())
            }
        }
    }
}
