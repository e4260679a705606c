//! Monte Carlo survival times of the random open system.
//!
//! A sample draws `x` from the initial law, then for `k = 1, 2, …` applies
//! the map, draws a fresh hole `ω_k` and stops when `T^k x ∈ I_{ω_k}`. The
//! survival time `τ` counts the steps survived; the starting point itself is
//! never tested.
//!
//! Samples are cut into blocks of [`BLOCK_SIZE`]; block `b` draws from
//! ChaCha8 seeded with `seed` on stream `b`, so histograms do not depend on
//! the number of worker threads.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::maps::MarkovMap;
use crate::noise::HoleModel;
use crate::survival::{least_squares_slope, OpenInterval};
use crate::transfer::ConditionallyStationary;

pub const BLOCK_SIZE: u64 = 16_384;
pub const SAMPLER_ID: &str = "chacha8-seed_from_u64-stream_per_block-16384";
pub const DEFAULT_TAU_MAX: usize = 10_000;
/// Overflow fraction above which moments are flagged as biased.
pub const OVERFLOW_WARNING: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("no samples requested")]
    NoSamples,
    #[error("mean survival time is zero: index of dispersion undefined")]
    ZeroMean,
    #[error("worker count must be positive")]
    Workers,
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("survival curve horizon must be at least 2 (got {0})")]
    Horizon(usize),
}

/// Law of the starting point.
#[derive(Clone, Debug)]
pub enum InitialLaw {
    Alpha(Box<ConditionallyStationary>),
    Lebesgue,
    PointMass(f64),
}

impl InitialLaw {
    pub fn name(&self) -> String {
        match self {
            InitialLaw::Alpha(_) => "alpha_hat".into(),
            InitialLaw::Lebesgue => "lebesgue".into(),
            InitialLaw::PointMass(x) => format!("point_mass({x})"),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            InitialLaw::Alpha(a) => a.sample(rng),
            InitialLaw::Lebesgue => rng.random(),
            InitialLaw::PointMass(x) => *x,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationOptions {
    pub n_samples: u64,
    pub seed: u64,
    pub tau_max: usize,
    pub workers: usize,
    /// Width of the uniform jitter added after every step; see
    /// [`DEFAULT_DITHER`].
    pub dither: f64,
}

/// Floating-point orbits of maps with integer slopes lose one low digit per
/// step (the doubling map reaches 0 after about 53 steps). A centred uniform
/// jitter of this width refills those digits with fresh random ones.
pub const DEFAULT_DITHER: f64 = 1.0 / (1u64 << 50) as f64;

impl SimulationOptions {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        Self { n_samples, seed, tau_max: DEFAULT_TAU_MAX, workers: 1, dither: DEFAULT_DITHER }
    }

    pub fn sampler_id(&self) -> String {
        format!("{SAMPLER_ID}-dither{:e}", self.dither)
    }
}

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Histogram of survival times with derived moments.
#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalRun {
    pub seed: u64,
    pub sampler_id: String,
    pub initial_law: String,
    pub n_samples: u64,
    pub tau_max: usize,
    /// `tau_counts[t]` samples with `τ = t` for `t < τ_max`; the last entry
    /// counts `τ ≥ τ_max`.
    pub tau_counts: Vec<u64>,
    pub mean: f64,
    pub variance: f64,
    pub mean_se: f64,
    pub variance_se: f64,
    /// Third and fourth central moments.
    pub central3: f64,
    pub central4: f64,
    pub overflow_warning: bool,
}

fn run_block(map: &MarkovMap, holes: &HoleModel, law: &InitialLaw, opts: &SimulationOptions, block: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(block);
    let start = block * BLOCK_SIZE;
    let count = BLOCK_SIZE.min(opts.n_samples - start);
    let mut hist = vec![0u64; opts.tau_max + 1];
    for _ in 0..count {
        let mut x = law.sample(&mut rng);
        let mut tau = 0;
        while tau < opts.tau_max {
            x = map.apply(x);
            if opts.dither > 0.0 {
                x = (x + opts.dither * (rng.random::<f64>() - 0.5)).clamp(0.0, BELOW_ONE);
            }
            let hole = holes.draw(&mut rng);
            if holes.in_hole(hole, x) {
                break;
            }
            tau += 1;
        }
        hist[tau] += 1;
    }
    hist
}

/// Simulates `n_samples` survival times.
pub fn simulate_tau(map: &MarkovMap, holes: &HoleModel, law: &InitialLaw, opts: &SimulationOptions) -> Result<SurvivalRun, StatsError> {
    if opts.n_samples == 0 {
        return Err(StatsError::NoSamples);
    }
    if opts.workers == 0 {
        return Err(StatsError::Workers);
    }
    if holes.max_hole().iter().all(OpenInterval::is_empty) {
        // no hole ever opens: every sample overflows
        let mut counts = vec![0u64; opts.tau_max + 1];
        counts[opts.tau_max] = opts.n_samples;
        let mut run = SurvivalRun::from_counts(counts);
        run.seed = opts.seed;
        run.sampler_id = opts.sampler_id();
        run.initial_law = law.name();
        return Ok(run);
    }
    let blocks = opts.n_samples.div_ceil(BLOCK_SIZE);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| StatsError::ThreadPool(e.to_string()))?;
    let counts = pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| run_block(map, holes, law, opts, b))
            .reduce(
                || vec![0u64; opts.tau_max + 1],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    });
    let mut run = SurvivalRun::from_counts(counts);
    run.seed = opts.seed;
    run.sampler_id = opts.sampler_id();
    run.initial_law = law.name();
    Ok(run)
}

impl SurvivalRun {
    /// Moments of a histogram; overflow samples enter as `τ = τ_max`.
    pub fn from_counts(tau_counts: Vec<u64>) -> Self {
        let tau_max = tau_counts.len().saturating_sub(1);
        let n: u64 = tau_counts.iter().sum();
        let nf = n as f64;
        let mean = tau_counts.iter().enumerate().map(|(t, c)| t as f64 * *c as f64).sum::<f64>() / nf;
        let central = |k: i32| {
            tau_counts
                .iter()
                .enumerate()
                .map(|(t, c)| (t as f64 - mean).powi(k) * *c as f64)
                .sum::<f64>()
                / nf
        };
        let m2 = central(2);
        let m3 = central(3);
        let m4 = central(4);
        let variance = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
        let overflow = tau_counts.last().copied().unwrap_or(0);
        Self {
            seed: 0,
            sampler_id: SAMPLER_ID.to_string(),
            initial_law: String::new(),
            n_samples: n,
            tau_max,
            tau_counts,
            mean,
            variance,
            mean_se: (variance / nf).sqrt(),
            variance_se: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
            central3: m3,
            central4: m4,
            overflow_warning: overflow as f64 > OVERFLOW_WARNING * nf,
        }
    }

    pub fn overflow(&self) -> u64 {
        self.tau_counts.last().copied().unwrap_or(0)
    }

    /// `P(τ ≥ n)` for `n = 0..=horizon`. Beyond `τ_max` the last resolved
    /// value is repeated.
    pub fn alive_fractions(&self, horizon: usize) -> Vec<f64> {
        let n = self.n_samples as f64;
        let mut dead = 0u64;
        (0..=horizon)
            .map(|k| {
                if k > 0 && k <= self.tau_max {
                    dead += self.tau_counts[k - 1];
                }
                (self.n_samples - dead) as f64 / n
            })
            .collect()
    }

    /// Variance over mean, with its delta-method standard error.
    pub fn index_of_dispersion(&self) -> Result<(f64, f64), StatsError> {
        if self.mean <= 0.0 {
            return Err(StatsError::ZeroMean);
        }
        let (m, v, n) = (self.mean, self.variance, self.n_samples as f64);
        let d = v / m;
        let var_v = (self.central4 - v * v).max(0.0) / n;
        let var_m = v / n;
        let cov = self.central3 / n;
        let var_d = var_v / (m * m) + v * v / m.powi(4) * var_m - 2.0 * v / m.powi(3) * cov;
        Ok((d, var_d.max(0.0).sqrt()))
    }
}

/// Index of dispersion `Var τ / E τ` and its standard error.
pub fn index_of_dispersion(run: &SurvivalRun) -> Result<(f64, f64), StatsError> {
    run.index_of_dispersion()
}

/// Moments of `τ` predicted from `λ̂` under the initial law `α̂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoryMoments {
    pub mean: f64,
    pub variance: f64,
    pub dispersion: f64,
}

impl TheoryMoments {
    pub fn from_lambda(lambda: f64) -> Self {
        Self {
            mean: lambda / (1.0 - lambda),
            variance: lambda / (1.0 - lambda).powi(2),
            dispersion: 1.0 / (1.0 - lambda),
        }
    }
}

/// Alive fractions `P(τ ≥ n)`, `n = 0..=horizon`, from a fresh simulation.
pub fn survival_curve(
    map: &MarkovMap,
    holes: &HoleModel,
    law: &InitialLaw,
    opts: &SimulationOptions,
    horizon: usize,
) -> Result<Vec<f64>, StatsError> {
    if horizon < 2 {
        return Err(StatsError::Horizon(horizon));
    }
    let mut o = *opts;
    o.tau_max = o.tau_max.max(horizon + 1);
    Ok(simulate_tau(map, holes, law, &o)?.alive_fractions(horizon))
}

/// Least-squares slope of `log alive(n)` over `n ∈ range` (zero fractions
/// skipped).
pub fn fit_log_slope(alive: &[f64], range: std::ops::RangeInclusive<usize>) -> f64 {
    let pts: Vec<(f64, f64)> = range
        .filter(|&n| n < alive.len() && alive[n] > 0.0)
        .map(|n| (n as f64, alive[n].ln()))
        .collect();
    least_squares_slope(&pts)
}

/// Survival CSV: a comment header with the sampler and seed, `n,alive_fraction`
/// rows, then a `quantity,estimate,se,theory,z` summary block.
pub fn write_survival_csv<W: Write>(run: &SurvivalRun, horizon: usize, lambda: Option<f64>, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "# sampler={} seed={} n_samples={} initial_law={} tau_max={}",
        run.sampler_id, run.seed, run.n_samples, run.initial_law, run.tau_max
    )?;
    writeln!(out, "n,alive_fraction")?;
    for (n, a) in run.alive_fractions(horizon).iter().enumerate() {
        writeln!(out, "{n},{a}")?;
    }
    writeln!(out)?;
    writeln!(out, "quantity,estimate,se,theory,z")?;
    let theory = lambda.map(TheoryMoments::from_lambda);
    let row = |out: &mut W, name: &str, est: f64, se: f64, th: Option<f64>| -> std::io::Result<()> {
        match th {
            Some(t) => writeln!(out, "{name},{est},{se},{t},{}", (est - t) / se),
            None => writeln!(out, "{name},{est},{se},,"),
        }
    };
    row(&mut out, "mean", run.mean, run.mean_se, theory.map(|t| t.mean))?;
    row(&mut out, "variance", run.variance, run.variance_se, theory.map(|t| t.variance))?;
    if let Ok((d, se)) = run.index_of_dispersion() {
        row(&mut out, "dispersion", d, se, theory.map(|t| t.dispersion))?;
    }
    writeln!(out, "overflow,{},,,", run.overflow())?;
    Ok(())
}
