//! Markov interval maps, their cylinder refinements and orbits.
//!
//! Cells are right-open `[e_{i-1}, e_i)`, except the last cell which also
//! contains `1`. A point on a cell endpoint therefore follows the branch to
//! its right.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when matching branch images against partition endpoints.
pub const ENDPOINT_TOL: f64 = 1e-12;
/// Bisection tolerance for inverting smooth branches.
pub const INVERSION_TOL: f64 = 1e-14;

const DERIVATIVE_SAMPLES: usize = 257;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("partition endpoints must increase strictly from 0 to 1 (got {0:?})")]
    BadEndpoints(Vec<f64>),
    #[error("{cells} cells but {branches} branches")]
    BranchCount { cells: usize, branches: usize },
    #[error("branch {cell} is degenerate or non-finite")]
    DegenerateBranch { cell: usize },
    #[error("declared transition matrix has wrong shape")]
    TransitionShape,
    #[error("word {0} is not admissible")]
    Inadmissible(CylinderWord),
    #[error("refinement level must be at least 1")]
    ZeroLevel,
    #[error("map fails the Markov conditions: {0}")]
    Invalid(String),
}

/// A smooth monotone branch given by value and derivative evaluators.
pub trait SmoothBranch: Send + Sync + fmt::Debug {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
}

/// `T(x) = c + (d − c)·s(u)` with `u` the relative position in the cell and
/// `s(u) = u + ε/(2π)·sin(2πu)` (reversed when `increasing` is false).
/// Monotone for `|ε| < 1`; `|T′| ≥ (d − c)/(hi − lo)·(1 − |ε|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SinePerturbed {
    pub domain: (f64, f64),
    pub image: (f64, f64),
    pub epsilon: f64,
    pub increasing: bool,
}

impl SinePerturbed {
    fn rel(&self, x: f64) -> f64 {
        (x - self.domain.0) / (self.domain.1 - self.domain.0)
    }
}

impl SmoothBranch for SinePerturbed {
    fn value(&self, x: f64) -> f64 {
        let u = self.rel(x);
        let s = u + self.epsilon / (2.0 * PI) * (2.0 * PI * u).sin();
        let (c, d) = self.image;
        if self.increasing {
            c + (d - c) * s
        } else {
            d - (d - c) * s
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        let u = self.rel(x);
        let (c, d) = self.image;
        let base = (d - c) / (self.domain.1 - self.domain.0) * (1.0 + self.epsilon * (2.0 * PI * u).cos());
        if self.increasing {
            base
        } else {
            -base
        }
    }
}

#[derive(Clone, Debug)]
pub enum Branch {
    /// `T(x) = slope·x + offset`
    Affine { slope: f64, offset: f64 },
    Smooth(Arc<dyn SmoothBranch>),
}

impl Branch {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Branch::Affine { slope, offset } => slope * x + offset,
            Branch::Smooth(b) => b.value(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Branch::Affine { slope, .. } => *slope,
            Branch::Smooth(b) => b.derivative(x),
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, Branch::Affine { .. })
    }
}

/// Finite word over the cell alphabet `{0, …, l−1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CylinderWord(pub Vec<usize>);

impl CylinderWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn shifted(&self) -> CylinderWord {
        CylinderWord(self.0[1..].to_vec())
    }
}

impl From<Vec<usize>> for CylinderWord {
    fn from(v: Vec<usize>) -> Self {
        CylinderWord(v)
    }
}

impl fmt::Display for CylinderWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// A length-`n` cylinder with its interval `[lo, hi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder {
    pub word: CylinderWord,
    pub lo: f64,
    pub hi: f64,
}

impl Cylinder {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn first_symbol(&self) -> usize {
        self.word.0[0]
    }
}

/// All admissible cylinders of one refinement level, in lexicographic word
/// order, with the shift successors of each.
#[derive(Clone, Debug)]
pub struct RefinedPartition {
    level: usize,
    cylinders: Vec<Cylinder>,
    successors: Vec<Vec<usize>>,
    index: HashMap<CylinderWord, usize>,
}

impl RefinedPartition {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.cylinders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty()
    }

    pub fn cylinders(&self) -> &[Cylinder] {
        &self.cylinders
    }

    pub fn cylinder(&self, i: usize) -> &Cylinder {
        &self.cylinders[i]
    }

    /// States `k` with `T(cylinder i) ⊇ cylinder k`.
    pub fn successors(&self, i: usize) -> &[usize] {
        &self.successors[i]
    }

    pub fn index_of(&self, word: &CylinderWord) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.cylinders.iter().map(Cylinder::length).collect()
    }

    pub fn max_diameter(&self) -> f64 {
        self.cylinders.iter().map(Cylinder::length).fold(0.0, f64::max)
    }

    /// Sorted list of all cylinder endpoints (including 0 and 1).
    pub fn endpoints(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.cylinders.iter().flat_map(|c| [c.lo, c.hi]).collect();
        e.sort_by(f64::total_cmp);
        e.dedup_by(|a, b| (*a - *b).abs() <= ENDPOINT_TOL);
        e
    }

    /// Index of the cylinder containing `x`, by following the orbit.
    pub fn locate(&self, map: &MarkovMap, x: f64) -> Option<usize> {
        self.index_of(&map.itinerary(x, self.level))
    }
}

/// Markov map of `[0, 1]`: partition, monotone branches and the inferred
/// cell transition structure.
#[derive(Clone, Debug)]
pub struct MarkovMap {
    endpoints: Vec<f64>,
    branches: Vec<Branch>,
    images: Vec<(f64, f64)>,
    transition: Vec<Vec<bool>>,
    declared_transition: Option<Vec<Vec<bool>>>,
    holder_exponent: f64,
}

impl MarkovMap {
    pub fn new(endpoints: Vec<f64>, branches: Vec<Branch>) -> Result<Self, MapError> {
        let ok = endpoints.len() >= 2
            && endpoints[0] == 0.0
            && *endpoints.last().unwrap() == 1.0
            && endpoints.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(MapError::BadEndpoints(endpoints));
        }
        let cells = endpoints.len() - 1;
        if branches.len() != cells {
            return Err(MapError::BranchCount {
                cells,
                branches: branches.len(),
            });
        }
        let mut images = Vec::with_capacity(cells);
        for (i, b) in branches.iter().enumerate() {
            let y0 = b.value(endpoints[i]);
            let y1 = b.value(endpoints[i + 1]);
            if !(y0.is_finite() && y1.is_finite()) || y0 == y1 {
                return Err(MapError::DegenerateBranch { cell: i });
            }
            images.push((y0.min(y1), y0.max(y1)));
        }
        let transition = images
            .iter()
            .map(|&(lo, hi)| {
                (0..cells)
                    .map(|j| endpoints[j] >= lo - ENDPOINT_TOL && endpoints[j + 1] <= hi + ENDPOINT_TOL)
                    .collect()
            })
            .collect();
        // affine branches are C^∞; smooth ones default to Lipschitz derivative
        Ok(Self {
            endpoints,
            branches,
            images,
            transition,
            declared_transition: None,
            holder_exponent: 1.0,
        })
    }

    pub fn affine(endpoints: Vec<f64>, slopes_offsets: &[(f64, f64)]) -> Result<Self, MapError> {
        let branches = slopes_offsets
            .iter()
            .map(|&(slope, offset)| Branch::Affine { slope, offset })
            .collect();
        Self::new(endpoints, branches)
    }

    /// `x ↦ k·x mod 1` with `k` equal cells.
    pub fn full_branch(k: usize) -> Self {
        let endpoints = (0..=k).map(|i| i as f64 / k as f64).collect();
        let so: Vec<(f64, f64)> = (0..k).map(|i| (k as f64, -(i as f64))).collect();
        Self::affine(endpoints, &so).expect("full-branch map is well formed")
    }

    pub fn doubling() -> Self {
        Self::full_branch(2)
    }

    pub fn tripling() -> Self {
        Self::full_branch(3)
    }

    /// Two cells `[0, 1/φ)`, `[1/φ, 1]`, slope `φ` on both, transition
    /// `[[1, 1], [1, 0]]`.
    pub fn golden_mean() -> Self {
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        let g = 1.0 / phi;
        Self::affine(vec![0.0, g, 1.0], &[(phi, 0.0), (phi, -g * phi)]).expect("golden-mean map")
    }

    /// Doubling map with each branch bent by `ε·sin`: full branches, smooth,
    /// `|T′| ≥ 2(1 − |ε|)`.
    pub fn perturbed_doubling(epsilon: f64) -> Self {
        let branches = [(0.0, 0.5), (0.5, 1.0)]
            .into_iter()
            .map(|domain| {
                Branch::Smooth(Arc::new(SinePerturbed {
                    domain,
                    image: (0.0, 1.0),
                    epsilon,
                    increasing: true,
                }))
            })
            .collect();
        Self::new(vec![0.0, 0.5, 1.0], branches).expect("perturbed doubling map")
    }

    pub fn with_declared_transition(mut self, t: Vec<Vec<bool>>) -> Result<Self, MapError> {
        let l = self.cells();
        if t.len() != l || t.iter().any(|r| r.len() != l) {
            return Err(MapError::TransitionShape);
        }
        self.declared_transition = Some(t);
        Ok(self)
    }

    pub fn with_holder_exponent(mut self, alpha: f64) -> Self {
        self.holder_exponent = alpha;
        self
    }

    pub fn cells(&self) -> usize {
        self.branches.len()
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        (self.endpoints[i], self.endpoints[i + 1])
    }

    /// Closed image interval of branch `i`.
    pub fn image(&self, i: usize) -> (f64, f64) {
        self.images[i]
    }

    pub fn transition(&self) -> &[Vec<bool>] {
        &self.transition
    }

    pub fn admissible(&self, a: usize, b: usize) -> bool {
        self.transition[a][b]
    }

    pub fn holder_exponent(&self) -> f64 {
        self.holder_exponent
    }

    pub fn is_piecewise_affine(&self) -> bool {
        self.branches.iter().all(Branch::is_affine)
    }

    /// Smallest `N` with every entry of `transition^N` positive.
    pub fn covering_exponent(&self) -> Option<usize> {
        let l = self.cells();
        let mut power = self.transition.clone();
        for n in 1..=(l * l + 1) {
            if power.iter().all(|r| r.iter().all(|&b| b)) {
                return Some(n);
            }
            power = bool_mul(&power, &self.transition);
        }
        None
    }

    /// Sampled `inf |T′|` and the cell where it occurs.
    pub fn expansion(&self) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for i in 0..self.cells() {
            let m = self.derivative_range(i, self.endpoints[i], self.endpoints[i + 1]).0;
            if m < best.0 {
                best = (m, i);
            }
        }
        best
    }

    /// Sampled `(min |T′|, max |T′|)` of branch `i` over `[lo, hi]`.
    pub fn derivative_range(&self, i: usize, lo: f64, hi: f64) -> (f64, f64) {
        match &self.branches[i] {
            Branch::Affine { slope, .. } => (slope.abs(), slope.abs()),
            Branch::Smooth(b) => {
                let mut range = (f64::INFINITY, 0.0f64);
                for k in 0..DERIVATIVE_SAMPLES {
                    let x = lo + (hi - lo) * k as f64 / (DERIVATIVE_SAMPLES - 1) as f64;
                    let d = b.derivative(x).abs();
                    range = (range.0.min(d), range.1.max(d));
                }
                range
            }
        }
    }

    pub fn cell_of(&self, x: f64) -> usize {
        let k = self.endpoints.partition_point(|&e| e <= x);
        k.clamp(1, self.cells()) - 1
    }

    pub fn apply(&self, x: f64) -> f64 {
        let i = self.cell_of(x);
        self.branches[i].value(x).clamp(0.0, 1.0)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.branches[self.cell_of(x)].derivative(x)
    }

    /// `T^n(x)`.
    pub fn iterate(&self, x: f64, n: usize) -> f64 {
        (0..n).fold(x, |y, _| self.apply(y))
    }

    /// First `n` symbols of the orbit of `x`.
    pub fn itinerary(&self, x: f64, n: usize) -> CylinderWord {
        let mut y = x;
        let mut w = Vec::with_capacity(n);
        for _ in 0..n {
            w.push(self.cell_of(y));
            y = self.apply(y);
        }
        CylinderWord(w)
    }

    /// The point of cell `i` that branch `i` sends to `y` (`y` clamped into
    /// the image).
    pub fn inverse(&self, i: usize, y: f64) -> f64 {
        let (lo, hi) = self.cell_bounds(i);
        let (ilo, ihi) = self.images[i];
        let y = y.clamp(ilo, ihi);
        match &self.branches[i] {
            Branch::Affine { slope, offset } => ((y - offset) / slope).clamp(lo, hi),
            Branch::Smooth(b) => {
                let increasing = b.value(hi) > b.value(lo);
                let (mut a, mut c) = (lo, hi);
                for _ in 0..200 {
                    if c - a <= INVERSION_TOL {
                        break;
                    }
                    let m = 0.5 * (a + c);
                    if (b.value(m) < y) == increasing {
                        a = m;
                    } else {
                        c = m;
                    }
                }
                0.5 * (a + c)
            }
        }
    }
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let l = a.len();
    (0..l)
        .map(|i| (0..l).map(|j| (0..l).any(|k| a[i][k] && b[k][j])).collect())
        .collect()
}

/// All admissible length-`n` cylinders with their intervals.
///
/// Intervals are exact for affine branches and obtained by bisection of the
/// monotone inverse branches otherwise.
pub fn refine(map: &MarkovMap, n: usize) -> Result<RefinedPartition, MapError> {
    if n == 0 {
        return Err(MapError::ZeroLevel);
    }
    let l = map.cells();
    let mut level: Vec<Cylinder> = (0..l)
        .map(|i| Cylinder {
            word: CylinderWord(vec![i]),
            lo: map.endpoints[i],
            hi: map.endpoints[i + 1],
        })
        .collect();
    for _ in 1..n {
        let mut next = Vec::new();
        for a in 0..l {
            for c in &level {
                if !map.admissible(a, c.first_symbol()) {
                    continue;
                }
                let x0 = map.inverse(a, c.lo);
                let x1 = map.inverse(a, c.hi);
                let mut word = Vec::with_capacity(c.word.len() + 1);
                word.push(a);
                word.extend_from_slice(&c.word.0);
                next.push(Cylinder {
                    word: CylinderWord(word),
                    lo: x0.min(x1),
                    hi: x0.max(x1),
                });
            }
        }
        level = next;
    }
    let index: HashMap<CylinderWord, usize> = level
        .iter()
        .enumerate()
        .map(|(i, c)| (c.word.clone(), i))
        .collect();
    let successors = level
        .iter()
        .map(|c| {
            let last = *c.word.0.last().unwrap();
            let mut tail = c.word.0[1..].to_vec();
            tail.push(0);
            (0..l)
                .filter(|&s| map.admissible(last, s))
                .filter_map(|s| {
                    *tail.last_mut().unwrap() = s;
                    index.get(&CylinderWord(tail.clone())).copied()
                })
                .collect()
        })
        .collect();
    Ok(RefinedPartition {
        level: n,
        cylinders: level,
        successors,
        index,
    })
}

/// One numbered condition of the Markov-map class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkovCondition {
    /// Cells partition `[0, 1]`.
    Partition,
    /// Each branch is monotone and `C^{1+α}`.
    MonotoneBranches,
    /// Branch images are unions of closures of cells.
    MarkovImages,
    /// Uniform expansion `inf |T′| > 1`, which makes cylinder diameters shrink.
    Expansion,
    /// Some power of the transition matrix is positive.
    Covering,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionCheck {
    pub condition: MarkovCondition,
    pub passed: bool,
    /// Offending `(cell, point)` when the check fails.
    pub witness: Option<(usize, f64)>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
    pub expansion: f64,
    pub covering_exponent: Option<usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, condition: MarkovCondition) -> &ConditionCheck {
        self.checks
            .iter()
            .find(|c| c.condition == condition)
            .expect("every condition is checked")
    }

    pub fn into_result(self) -> Result<Self, MapError> {
        if self.is_valid() {
            Ok(self)
        } else {
            let failed: Vec<String> = self
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{:?}: {}", c.condition, c.detail))
                .collect();
            Err(MapError::Invalid(failed.join("; ")))
        }
    }
}

/// Checks the five Markov-map conditions, with a witness for each failure.
pub fn check_markov(map: &MarkovMap) -> ValidationReport {
    let l = map.cells();
    let mut checks = vec![ConditionCheck {
        condition: MarkovCondition::Partition,
        passed: true,
        witness: None,
        detail: format!("{l} cells"),
    }];

    let mut monotone = None;
    for i in 0..l {
        let (lo, hi) = map.cell_bounds(i);
        let b = &map.branches[i];
        let mut sign = 0.0;
        let mut prev = b.value(lo);
        for k in 0..DERIVATIVE_SAMPLES {
            let x = lo + (hi - lo) * k as f64 / (DERIVATIVE_SAMPLES - 1) as f64;
            let d = b.derivative(x);
            let v = b.value(x);
            let s = d.signum();
            let step_ok = k == 0 || (v - prev) * s > 0.0;
            if d == 0.0 || !d.is_finite() || (sign != 0.0 && s != sign) || !step_ok {
                monotone = Some((i, x));
                break;
            }
            sign = s;
            prev = v;
        }
        if monotone.is_some() {
            break;
        }
    }
    checks.push(ConditionCheck {
        condition: MarkovCondition::MonotoneBranches,
        passed: monotone.is_none(),
        witness: monotone,
        detail: match monotone {
            Some((i, x)) => format!("branch {i} not strictly monotone near x = {x}"),
            None => "all branches strictly monotone".into(),
        },
    });

    let on_endpoint = |y: f64| map.endpoints.iter().any(|e| (e - y).abs() <= ENDPOINT_TOL);
    let mut markov = None;
    for i in 0..l {
        let (lo, hi) = map.images[i];
        if lo < -ENDPOINT_TOL || hi > 1.0 + ENDPOINT_TOL {
            markov = Some((i, if lo < 0.0 { lo } else { hi }, "image leaves [0, 1]".to_string()));
            break;
        }
        if let Some(y) = [lo, hi].into_iter().find(|y| !on_endpoint(*y)) {
            markov = Some((i, y, "image endpoint is not a partition endpoint".to_string()));
            break;
        }
    }
    if markov.is_none() {
        if let Some(declared) = &map.declared_transition {
            if let Some(i) = (0..l).find(|&i| declared[i] != map.transition[i]) {
                markov = Some((i, map.images[i].0, "declared transition row disagrees with branch image".into()));
            }
        }
    }
    checks.push(ConditionCheck {
        condition: MarkovCondition::MarkovImages,
        passed: markov.is_none(),
        witness: markov.as_ref().map(|(i, y, _)| (*i, *y)),
        detail: match &markov {
            Some((i, y, why)) => format!("branch {i}: {why} (y = {y})"),
            None => "images are unions of cells".into(),
        },
    });

    let (gamma, worst) = map.expansion();
    checks.push(ConditionCheck {
        condition: MarkovCondition::Expansion,
        passed: gamma > 1.0,
        witness: (gamma <= 1.0).then(|| (worst, map.cell_bounds(worst).0)),
        detail: format!("inf |T'| = {gamma}"),
    });

    let covering = map.covering_exponent();
    checks.push(ConditionCheck {
        condition: MarkovCondition::Covering,
        passed: covering.is_some(),
        witness: None,
        detail: match covering {
            Some(n) => format!("N = {n}"),
            None => "no power of the transition matrix is positive".into(),
        },
    });

    ValidationReport {
        checks,
        expansion: gamma,
        covering_exponent: covering,
    }
}

/// Serializable description of a map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Doubling,
    Tripling,
    FullBranch { k: usize },
    GoldenMean,
    PerturbedDoubling { epsilon: f64 },
    Piecewise {
        endpoints: Vec<f64>,
        branches: Vec<BranchSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        transition: Option<Vec<Vec<u8>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BranchSpec {
    Affine { slope: f64, offset: f64 },
    Sine { image: (f64, f64), epsilon: f64, increasing: bool },
}

impl MapSpec {
    /// Builds the map and rejects it unless all Markov conditions hold.
    pub fn build(&self) -> Result<MarkovMap, MapError> {
        let map = match self {
            MapSpec::Doubling => MarkovMap::doubling(),
            MapSpec::Tripling => MarkovMap::tripling(),
            MapSpec::FullBranch { k } => {
                if *k < 2 {
                    return Err(MapError::Invalid("full-branch map needs k ≥ 2".into()));
                }
                MarkovMap::full_branch(*k)
            }
            MapSpec::GoldenMean => MarkovMap::golden_mean(),
            MapSpec::PerturbedDoubling { epsilon } => MarkovMap::perturbed_doubling(*epsilon),
            MapSpec::Piecewise {
                endpoints,
                branches,
                transition,
            } => {
                if branches.len() + 1 != endpoints.len() {
                    return Err(MapError::BranchCount {
                        cells: endpoints.len().saturating_sub(1),
                        branches: branches.len(),
                    });
                }
                let bs = branches
                    .iter()
                    .enumerate()
                    .map(|(i, b)| match *b {
                        BranchSpec::Affine { slope, offset } => Branch::Affine { slope, offset },
                        BranchSpec::Sine {
                            image,
                            epsilon,
                            increasing,
                        } => Branch::Smooth(Arc::new(SinePerturbed {
                            domain: (endpoints[i], endpoints[i + 1]),
                            image,
                            epsilon,
                            increasing,
                        })),
                    })
                    .collect();
                let map = MarkovMap::new(endpoints.clone(), bs)?;
                match transition {
                    Some(t) => map.with_declared_transition(
                        t.iter().map(|r| r.iter().map(|&b| b != 0).collect()).collect(),
                    )?,
                    None => map,
                }
            }
        };
        check_markov(&map).into_result()?;
        Ok(map)
    }
}
