//! Locally Hölder potentials on `[0, 1]`.
//!
//! A [`Potential`] carries its base partition `𝒢` (the pieces on which local
//! Hölder continuity is asserted) and Hölder exponent. Potentials that are
//! piecewise constant report their jump points, which is what lets the
//! transfer-operator assembly decide whether a finite matrix is the exact
//! action on piecewise-constant functions.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maps::{refine, MapError, MarkovMap, ENDPOINT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("potential is infinite or NaN at x = {x}: not locally Hölder on the grid")]
    NotHolder { x: f64 },
    #[error("Hölder quotient grows without bound under grid refinement: {estimates:?}")]
    Unbounded { estimates: Vec<f64> },
    #[error("grid needs at least 2 points per piece (got {0})")]
    GridTooSmall(usize),
    #[error("piecewise data malformed: {0}")]
    Malformed(String),
    #[error("grid file: {0}")]
    GridFile(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// User-supplied potential evaluator.
pub trait PotentialFn: Send + Sync + fmt::Debug {
    fn eval(&self, x: f64) -> f64;

    /// Jump points when the function is piecewise constant (empty when
    /// constant); `None` otherwise.
    fn jumps(&self) -> Option<Vec<f64>> {
        None
    }

    /// Exact Hölder seminorm on the base partition, when known.
    fn seminorm(&self) -> Option<f64> {
        None
    }
}

#[derive(Clone)]
enum Kind {
    Constant(f64),
    /// Values on `[breaks[i], breaks[i+1])`, last piece closed at 1.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    Geometric(Arc<MarkovMap>),
    Grid { xs: Vec<f64>, values: Vec<f64> },
    Analytic { name: String, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
    Custom(Arc<dyn PotentialFn>),
    Linear(Vec<(f64, Potential)>),
}

impl fmt::Debug for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Constant(c) => write!(f, "Constant({c})"),
            Kind::PiecewiseConstant { breaks, values } => {
                write!(f, "PiecewiseConstant({breaks:?}, {values:?})")
            }
            Kind::Geometric(_) => f.write_str("Geometric"),
            Kind::Grid { xs, .. } => write!(f, "Grid({} points)", xs.len()),
            Kind::Analytic { name, .. } => write!(f, "Analytic({name})"),
            Kind::Custom(c) => write!(f, "Custom({c:?})"),
            Kind::Linear(terms) => f.debug_list().entries(terms.iter()).finish(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Potential {
    kind: Arc<Kind>,
    base: Vec<f64>,
    holder_exponent: f64,
}

fn unit_base() -> Vec<f64> {
    vec![0.0, 1.0]
}

fn merge_breaks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut e: Vec<f64> = a.iter().chain(b).copied().collect();
    e.sort_by(f64::total_cmp);
    e.dedup_by(|x, y| (*x - *y).abs() <= ENDPOINT_TOL);
    e
}

fn piece_of(base: &[f64], x: f64) -> usize {
    let k = base.partition_point(|&e| e <= x);
    k.clamp(1, base.len() - 1) - 1
}

/// Coarsest partition generated by the branch images `{T(𝒫_i)}`. For
/// full-branch maps this is `{[0, 1]}`.
pub fn image_partition(map: &MarkovMap) -> Vec<f64> {
    let mut e = unit_base();
    for i in 0..map.cells() {
        let (lo, hi) = map.image(i);
        e.push(lo.clamp(0.0, 1.0));
        e.push(hi.clamp(0.0, 1.0));
    }
    merge_breaks(&e, &[])
}

impl Potential {
    fn from_kind(kind: Kind, base: Vec<f64>, holder_exponent: f64) -> Self {
        Self {
            kind: Arc::new(kind),
            base,
            holder_exponent,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_kind(Kind::Constant(c), unit_base(), 1.0)
    }

    /// Piecewise constant on `[breaks[i], breaks[i+1])`; `breaks` runs from 0
    /// to 1. The base partition is `breaks` itself.
    pub fn piecewise_constant(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self, PotentialError> {
        let ok = breaks.len() == values.len() + 1
            && breaks.first() == Some(&0.0)
            && breaks.last() == Some(&1.0)
            && breaks.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(PotentialError::Malformed(format!(
                "{} breaks for {} values",
                breaks.len(),
                values.len()
            )));
        }
        let base = breaks.clone();
        Ok(Self::from_kind(Kind::PiecewiseConstant { breaks, values }, base, 1.0))
    }

    /// Piecewise constant on the level-`n` cylinders of `map` (values in the
    /// partition's word order).
    pub fn on_cylinders(map: &MarkovMap, n: usize, values: &[f64]) -> Result<Self, PotentialError> {
        let p = refine(map, n)?;
        if values.len() != p.len() {
            return Err(PotentialError::Malformed(format!(
                "{} values for {} cylinders",
                values.len(),
                p.len()
            )));
        }
        let mut pieces: Vec<(f64, f64, f64)> = p
            .cylinders()
            .iter()
            .zip(values)
            .map(|(c, v)| (c.lo, c.hi, *v))
            .collect();
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breaks: Vec<f64> = pieces.iter().map(|p| p.0).collect();
        breaks.push(1.0);
        breaks[0] = 0.0;
        Self::piecewise_constant(breaks, pieces.iter().map(|p| p.2).collect())
    }

    /// `x ↦ −log|T′(x)|`, with the Markov partition as base.
    pub fn geometric(map: &MarkovMap) -> Self {
        let alpha = map.holder_exponent();
        Self::from_kind(
            Kind::Geometric(Arc::new(map.clone())),
            map.endpoints().to_vec(),
            alpha,
        )
    }

    /// Grid-sampled potential, linearly interpolated inside each piece of
    /// `base`.
    pub fn grid(points: Vec<(f64, f64)>, base: Vec<f64>, holder_exponent: f64) -> Result<Self, PotentialError> {
        let mut points = points;
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.len() < 2 || points.iter().any(|p| !(0.0..=1.0).contains(&p.0) || !p.1.is_finite()) {
            return Err(PotentialError::Malformed("grid needs ≥ 2 finite points in [0, 1]".into()));
        }
        let (xs, values) = points.into_iter().unzip();
        Ok(Self::from_kind(Kind::Grid { xs, values }, base, holder_exponent))
    }

    /// Reads `x,value` rows (an optional non-numeric header line is skipped).
    pub fn grid_file(path: &Path, base: Vec<f64>, holder_exponent: f64) -> Result<Self, PotentialError> {
        let text = std::fs::read_to_string(path).map_err(|e| PotentialError::GridFile(e.to_string()))?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let parsed = (fields.next().map(str::parse::<f64>), fields.next().map(str::parse::<f64>));
            match parsed {
                (Some(Ok(x)), Some(Ok(v))) => points.push((x, v)),
                _ if lineno == 0 => continue,
                _ => {
                    return Err(PotentialError::GridFile(format!("line {}: expected x,value", lineno + 1)));
                }
            }
        }
        Self::grid(points, base, holder_exponent)
    }

    pub fn analytic<F>(name: &str, f: F, base: Vec<f64>, holder_exponent: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_kind(
            Kind::Analytic {
                name: name.to_string(),
                f: Arc::new(f),
            },
            base,
            holder_exponent,
        )
    }

    pub fn custom(f: Arc<dyn PotentialFn>, base: Vec<f64>, holder_exponent: f64) -> Self {
        Self::from_kind(Kind::Custom(f), base, holder_exponent)
    }

    /// `a·φ + b·ψ` on the common refinement of both base partitions.
    pub fn combine(a: f64, phi: &Potential, b: f64, psi: &Potential) -> Potential {
        Potential::linear(&[(a, phi), (b, psi)])
    }

    pub fn linear(terms: &[(f64, &Potential)]) -> Potential {
        let base = terms.iter().fold(unit_base(), |acc, (_, p)| merge_breaks(&acc, &p.base));
        let alpha = terms.iter().map(|(_, p)| p.holder_exponent).fold(1.0, f64::min);
        let terms = terms.iter().map(|(c, p)| (*c, (*p).clone())).collect();
        Self::from_kind(Kind::Linear(terms), base, alpha)
    }

    pub fn scaled(&self, c: f64) -> Potential {
        Potential::linear(&[(c, self)])
    }

    pub fn plus_constant(&self, c: f64) -> Potential {
        Potential::combine(1.0, self, c, &Potential::constant(1.0))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &*self.kind {
            Kind::Constant(c) => *c,
            Kind::PiecewiseConstant { breaks, values } => values[piece_of(breaks, x)],
            Kind::Geometric(map) => -map.derivative(x).abs().ln(),
            Kind::Grid { xs, values } => self.eval_grid(xs, values, x),
            Kind::Analytic { f, .. } => f(x),
            Kind::Custom(f) => f.eval(x),
            Kind::Linear(terms) => terms
                .iter()
                .filter(|(c, _)| *c != 0.0)
                .map(|(c, p)| c * p.eval(x))
                .sum(),
        }
    }

    fn eval_grid(&self, xs: &[f64], values: &[f64], x: f64) -> f64 {
        let piece = piece_of(&self.base, x);
        let idx = xs.partition_point(|&g| g <= x);
        let same = |i: usize| piece_of(&self.base, xs[i]) == piece;
        let left = idx.checked_sub(1).filter(|&i| same(i));
        let right = (idx < xs.len()).then_some(idx).filter(|&i| same(i));
        match (left, right) {
            (Some(l), Some(r)) => {
                let t = (x - xs[l]) / (xs[r] - xs[l]);
                values[l] + t * (values[r] - values[l])
            }
            (Some(l), None) => values[l],
            (None, Some(r)) => values[r],
            (None, None) => {
                let nearest = if idx == 0 {
                    0
                } else if idx >= xs.len() || (x - xs[idx - 1]) <= (xs[idx] - x) {
                    idx - 1
                } else {
                    idx
                };
                values[nearest]
            }
        }
    }

    pub fn base_partition(&self) -> &[f64] {
        &self.base
    }

    pub fn holder_exponent(&self) -> f64 {
        self.holder_exponent
    }

    /// Jump points if piecewise constant, `None` otherwise.
    pub fn jumps(&self) -> Option<Vec<f64>> {
        match &*self.kind {
            Kind::Constant(_) => Some(Vec::new()),
            Kind::PiecewiseConstant { breaks, .. } => Some(breaks[1..breaks.len() - 1].to_vec()),
            Kind::Geometric(map) => map
                .is_piecewise_affine()
                .then(|| map.endpoints()[1..map.cells()].to_vec()),
            Kind::Grid { .. } | Kind::Analytic { .. } => None,
            Kind::Custom(f) => f.jumps(),
            Kind::Linear(terms) => {
                let mut all = Vec::new();
                for (c, p) in terms {
                    if *c != 0.0 {
                        all.extend(p.jumps()?);
                    }
                }
                Some(merge_breaks(&all, &[]))
            }
        }
    }

    /// True when the potential is constant on each interval between
    /// consecutive `endpoints`.
    pub fn is_constant_between(&self, endpoints: &[f64]) -> bool {
        match self.jumps() {
            None => false,
            Some(j) => j
                .iter()
                .all(|x| endpoints.iter().any(|e| (e - x).abs() <= ENDPOINT_TOL)),
        }
    }

    /// Exact `C_α` when it is known in closed form.
    pub fn exact_seminorm(&self) -> Option<f64> {
        match &*self.kind {
            Kind::Constant(_) | Kind::PiecewiseConstant { .. } => Some(0.0),
            Kind::Geometric(map) => map.is_piecewise_affine().then_some(0.0),
            Kind::Custom(f) => f.seminorm(),
            Kind::Linear(terms) => terms
                .iter()
                .map(|(c, p)| p.exact_seminorm().map(|s| c.abs() * s))
                .sum(),
            _ => None,
        }
    }

    /// `C_α`: exact when known, otherwise a 512-point-per-piece estimate.
    pub fn seminorm(&self) -> Result<f64, PotentialError> {
        match self.exact_seminorm() {
            Some(s) => Ok(s),
            None => estimate_seminorm(self, 512),
        }
    }

    /// Upper bound `Σ|c_i|·C_α(φ_i)` for combinations; equals `seminorm` for
    /// primitive potentials.
    pub fn seminorm_bound(&self) -> Result<f64, PotentialError> {
        match &*self.kind {
            Kind::Linear(terms) => terms
                .iter()
                .map(|(c, p)| p.seminorm_bound().map(|s| c.abs() * s))
                .sum(),
            _ => self.seminorm(),
        }
    }

    /// `S_nφ(x) = Σ_{k<n} φ(T^k x)`.
    pub fn birkhoff_sum(&self, map: &MarkovMap, x: f64, n: usize) -> f64 {
        let mut y = x;
        let mut s = 0.0;
        for _ in 0..n {
            s += self.eval(y);
            y = map.apply(y);
        }
        s
    }
}

/// `S_nφ(x)`; see [`Potential::birkhoff_sum`].
pub fn birkhoff_sum(phi: &Potential, map: &MarkovMap, x: f64, n: usize) -> f64 {
    phi.birkhoff_sum(map, x, n)
}

pub fn geometric_potential(map: &MarkovMap) -> Potential {
    Potential::geometric(map)
}

pub fn combine(a: f64, phi: &Potential, b: f64, psi: &Potential) -> Potential {
    Potential::combine(a, phi, b, psi)
}

/// `k`-th point of the base-2 van der Corput sequence, `k ≥ 1`; all in (0, 1).
fn van_der_corput(mut k: usize) -> f64 {
    let mut x = 0.0;
    let mut scale = 0.5;
    while k > 0 {
        if k & 1 == 1 {
            x += scale;
        }
        k >>= 1;
        scale *= 0.5;
    }
    x
}

/// Largest Hölder quotient `|φ(x)−φ(y)|/|x−y|^α` over `grid_size` points in
/// each base piece.
///
/// The points of grid size `m` are the first `m` van der Corput points of the
/// piece, so grids are nested and the estimate is non-decreasing in
/// `grid_size`. It is a lower bound on the true seminorm.
pub fn estimate_seminorm(phi: &Potential, grid_size: usize) -> Result<f64, PotentialError> {
    if grid_size < 2 {
        return Err(PotentialError::GridTooSmall(grid_size));
    }
    let alpha = phi.holder_exponent;
    let mut best = 0.0f64;
    for w in phi.base.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(grid_size);
        for k in 1..=grid_size {
            let x = lo + (hi - lo) * van_der_corput(k);
            let v = phi.eval(x);
            if !v.is_finite() {
                return Err(PotentialError::NotHolder { x });
            }
            pts.push((x, v));
        }
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let dx = (pts[i].0 - pts[j].0).abs();
                if dx > 0.0 {
                    best = best.max((pts[i].1 - pts[j].1).abs() / dx.powf(alpha));
                }
            }
        }
    }
    Ok(best)
}

/// Seminorm estimates at `grid`, `4·grid` and `16·grid`; reported unbounded
/// when the estimate at least doubles at both refinements.
pub fn check_holder(phi: &Potential, grid: usize) -> Result<f64, PotentialError> {
    let estimates = [grid, 4 * grid, 16 * grid]
        .iter()
        .map(|&m| estimate_seminorm(phi, m))
        .collect::<Result<Vec<_>, _>>()?;
    if estimates[1] >= 2.0 * estimates[0] && estimates[2] >= 2.0 * estimates[1] && estimates[2] > 0.0 {
        return Err(PotentialError::Unbounded { estimates });
    }
    Ok(estimates[2])
}

/// Config form of a potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Geometric,
    Constant { value: f64 },
    /// One value per level-`level` cylinder, in word order.
    Cylinders { level: usize, values: Vec<f64> },
    /// CSV file of `x,value` rows; interpolated inside the image partition.
    GridFile {
        path: String,
        #[serde(default = "one")]
        holder_exponent: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl PotentialSpec {
    pub fn build(&self, map: &MarkovMap) -> Result<Potential, PotentialError> {
        match self {
            PotentialSpec::Geometric => Ok(Potential::geometric(map)),
            PotentialSpec::Constant { value } => Ok(Potential::constant(*value)),
            PotentialSpec::Cylinders { level, values } => Potential::on_cylinders(map, *level, values),
            PotentialSpec::GridFile { path, holder_exponent } => {
                Potential::grid_file(Path::new(path), image_partition(map), *holder_exponent)
            }
        }
    }
}
