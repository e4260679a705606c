//! One function per subcommand.

use std::path::Path;

use openhole::maps::MarkovMap;
use openhole::noise::HoleModel;
use openhole::openstats::{simulate_tau, write_survival_csv, SimulationOptions, SurvivalRun, TheoryMoments};
use openhole::presets::{half_hole_doubling, nested_holes_tripling, OpenSystem};
use openhole::survival::{
    bowen_dimension, box_counting_dimension, build_avoidance_graph, is_survivor_set_nonempty, periodic_point,
    verify_periodic_witness, write_graph_csv,
};
use openhole::thermo::{
    dimension_spectrum, entropy_identity_defect, gibbs_check, markov_measure, solve_t, words_up_to, write_curve_csv,
    PressureEquation, SolveOptions,
};
use openhole::transfer::{
    assemble_closed, assemble_open, conditionally_stationary, dominant_spectrum, escape_rate_of, support_check,
    write_matrix_csv, write_spectrum_csv, OperatorMatrix, SpectralData,
};
use openhole::{InitialLaw, Potential, SpectralOptions};

use crate::config::{ExperimentConfig, LawSpec};
use crate::report::{Check, Report};
use crate::CliError;

/// A config turned into library objects.
struct Setup {
    map: MarkovMap,
    potential: Potential,
    holes: HoleModel,
    opts: SpectralOptions,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup, CliError> {
    let map = cfg.map.build()?;
    let potential = cfg.potential.build(&map)?;
    let holes = cfg.noise.build(&map)?;
    let opts = SpectralOptions { tol: cfg.tolerances.spectral, ..SpectralOptions::default() };
    Ok(Setup { map, potential, holes, opts })
}

fn csv<F>(f: F) -> Vec<u8>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    buf
}

fn spectra(s: &Setup, level: usize) -> Result<(OperatorMatrix, SpectralData, SpectralData), CliError> {
    let open = assemble_open(&s.map, &s.potential, &s.holes, level)?;
    let open_spec = dominant_spectrum(&open, &s.opts)?;
    let closed = assemble_closed(&s.map, &s.potential, level)?;
    let closed_spec = dominant_spectrum(&closed, &s.opts)?;
    Ok((open, open_spec, closed_spec))
}

pub fn spectrum(cfg: &ExperimentConfig, out: &Path) -> Result<Report, CliError> {
    let s = setup(cfg)?;
    let (open, spec, closed) = spectra(&s, cfg.level)?;
    let mut r = Report::default();
    r.line(format!("level {} ({} cylinders, exact mode: {})", cfg.level, open.dim(), open.is_exact()));
    r.line(format!("lambda_hat = {}", spec.lambda));
    r.line(format!("lambda (closed) = {}", closed.lambda));
    r.line(format!("second modulus = {}", spec.gap));
    r.line(format!("iterations = {}, residual = {:e}", spec.iterations, spec.residual));
    if let Ok(e) = escape_rate_of(spec.lambda / closed.lambda) {
        r.line(format!("log(lambda / lambda_hat) = {e}"));
    }
    r.check(Check::at_most("lambda_hat - lambda", (spec.lambda - closed.lambda).max(0.0), cfg.tolerances.spectral * closed.lambda));
    r.write(out, "spectrum.csv", &csv(|b| write_spectrum_csv(&spec, b)))?;
    r.write(out, "matrix.csv", &csv(|b| write_matrix_csv(&open, b)))?;
    Ok(r)
}

pub fn escape_rate(cfg: &ExperimentConfig, out: &Path) -> Result<Report, CliError> {
    let mut s = setup(cfg)?;
    s.potential = Potential::geometric(&s.map);
    let mut r = Report::default();
    let mut table = String::from("level,lambda_hat,escape_rate\n");
    let mut last = None;
    for n in 1..=cfg.level {
        let op = assemble_open(&s.map, &s.potential, &s.holes, n)?;
        let spec = dominant_spectrum(&op, &s.opts)?;
        let e = escape_rate_of(spec.lambda)?;
        table += &format!("{n},{},{e}\n", spec.lambda);
        last = Some((spec.lambda, e, op.is_exact()));
    }
    let (lambda, e, exact) = last.expect("level >= 1");
    r.line(format!("escape rate at level {} = {e} (lambda_hat = {lambda}, exact mode: {exact})", cfg.level));
    r.write(out, "escape_rate.csv", table.as_bytes())?;
    Ok(r)
}

fn initial_law(cfg: &ExperimentConfig, spec: &SpectralData, holes: &HoleModel) -> InitialLaw {
    match cfg.simulation.initial_law {
        LawSpec::AlphaHat => InitialLaw::Alpha(Box::new(conditionally_stationary(spec, holes))),
        LawSpec::Lebesgue => InitialLaw::Lebesgue,
        LawSpec::PointMass { x } => InitialLaw::PointMass(x),
    }
}

fn simulate(cfg: &ExperimentConfig, sys: &OpenSystem, spec: &SpectralData) -> Result<SurvivalRun, CliError> {
    let law = initial_law(cfg, spec, &sys.holes);
    let mut opts = SimulationOptions::new(cfg.simulation.samples, cfg.seed);
    opts.tau_max = cfg.simulation.tau_max.max(cfg.simulation.horizon + 1);
    opts.workers = cfg.simulation.workers;
    Ok(simulate_tau(&sys.map, &sys.holes, &law, &opts)?)
}

fn moment_checks(r: &mut Report, run: &SurvivalRun, lambda: f64, z: f64) {
    let t = TheoryMoments::from_lambda(lambda);
    r.check(Check::new("tau mean", run.mean, t.mean, z * run.mean_se));
    r.check(Check::new("tau variance", run.variance, t.variance, z * run.variance_se));
    if let Ok((d, se)) = run.index_of_dispersion() {
        r.check(Check::new("index of dispersion", d, t.dispersion, z * se));
    }
}

pub fn survive_mc(cfg: &ExperimentConfig, out: &Path) -> Result<Report, CliError> {
    let s = setup(cfg)?;
    let phi = Potential::geometric(&s.map);
    let sys = OpenSystem { map: s.map, phi, holes: s.holes };
    let op = assemble_open(&sys.map, &sys.phi, &sys.holes, cfg.level)?;
    let spec = dominant_spectrum(&op, &s.opts)?;
    let run = simulate(cfg, &sys, &spec)?;
    let mut r = Report::default();
    r.line(format!("{} samples, seed {}, law {}, sampler {}", run.n_samples, run.seed, run.initial_law, run.sampler_id));
    r.line(format!("lambda_hat = {} (level {}, exact mode: {})", spec.lambda, cfg.level, op.is_exact()));
    r.line(format!("mean tau = {} ± {}", run.mean, run.mean_se));
    r.line(format!("variance = {} ± {}", run.variance, run.variance_se));
    if run.overflow_warning {
        r.line(format!("warning: {} samples reached tau_max = {}; moments are biased low", run.overflow(), run.tau_max));
    }
    let theory = matches!(cfg.simulation.initial_law, LawSpec::AlphaHat) && op.is_exact() && spec.lambda < 1.0;
    if theory {
        moment_checks(&mut r, &run, spec.lambda, cfg.tolerances.mc_z);
    } else {
        r.line("no closed-form comparison (needs the alpha_hat law, exact mode and lambda_hat < 1)");
    }
    let lambda = theory.then_some(spec.lambda);
    r.write(out, "survival.csv", &csv(|b| write_survival_csv(&run, cfg.simulation.horizon, lambda, b)))?;
    Ok(r)
}

pub fn survival_set(cfg: &ExperimentConfig, out: &Path) -> Result<Report, CliError> {
    let s = setup(cfg)?;
    let forbidden = cfg.survival.forbidden.clone().unwrap_or_else(|| s.holes.max_hole());
    let graph = build_avoidance_graph(&s.map, &forbidden, cfg.level)?;
    let verdict = is_survivor_set_nonempty(&graph);
    let mut r = Report::default();
    let holes: Vec<String> = forbidden.iter().map(|f| format!("({}, {})", f.lo, f.hi)).collect();
    r.line(format!("forbidden: {}", if holes.is_empty() { "none".into() } else { holes.join(" ∪ ") }));
    r.line(format!("level {}: {} nodes, {} edges", cfg.level, graph.len(), graph.edge_count()));
    match &verdict.word {
        Some(w) => {
            let x = periodic_point(&s.map, w);
            let ok = verify_periodic_witness(&s.map, &forbidden, w);
            r.line(format!("survivor set nonempty: periodic word {w}, point {x}"));
            r.check(Check::new("witness verified", f64::from(u8::from(ok)), 1.0, 0.0));
        }
        None => r.line("survivor set empty at this level"),
    }
    let bowen = bowen_dimension(&graph, &s.map);
    r.line(format!("Bowen dimension = {} (bounds {:?})", bowen.dimension, bowen.bounds));
    if s.map.is_piecewise_affine() {
        let boxed = box_counting_dimension(&s.map, &forbidden, cfg.survival.box_levels);
        r.line(format!("box-counting slope (m ≤ {}) = {boxed}", cfg.survival.box_levels));
    }
    r.write(out, "graph.csv", &csv(|b| write_graph_csv(&graph, b)))?;
    Ok(r)
}

pub fn dimension_spectrum_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<Report, CliError> {
    let s = setup(cfg)?;
    let psi = s.holes.psi()?;
    let eq = PressureEquation::new(&s.map, &s.potential, &psi, cfg.level)?.with_spectral_options(s.opts);
    let sc = &cfg.spectrum;
    let opts = SolveOptions { bracket: sc.bracket, tol: 1e-13, fd_step: sc.fd_step };
    let curve = dimension_spectrum(&eq, &sc.grid(), &opts)?;
    let mut r = Report::default();
    r.line(format!("{} grid points on [{}, {}]", curve.t.len(), sc.t_start, sc.t_stop));
    let worst = curve.pressure_residual.iter().copied().fold(0.0, f64::max);
    let rich = curve.richardson_gap.iter().copied().fold(0.0, f64::max);
    r.line(format!("largest Richardson gap in T' = {rich:e}"));
    r.line(format!("convex: {}, non-increasing: {}", curve.is_convex(1e-8), curve.is_non_increasing(1e-12)));
    r.check(Check::at_most("max |pressure(tφ + T(t)ψ)|", worst, cfg.tolerances.pressure_root));
    r.write(out, "dimension_spectrum.csv", &csv(|b| write_curve_csv(&curve, b)))?;
    Ok(r)
}

pub fn gibbs_check_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<Report, CliError> {
    let s = setup(cfg)?;
    let (op, spec, _) = spectra(&s, cfg.level)?;
    let mu = markov_measure(&op, &spec)?;
    let pot = Potential::combine(1.0, &s.potential, 1.0, &s.holes.log_weight());
    let g = gibbs_check(&mu, &s.map, &pot, cfg.gibbs.n_max)?;
    let mut r = Report::default();
    r.line(format!("Gibbs constant up to n = {}: {}", cfg.gibbs.n_max, g.constant));
    r.line(format!("entropy = {}", mu.entropy()));
    r.check(Check::at_most("zero-mass/positive-weight cylinders", g.violations.len() as f64, 0.0));
    if op.is_exact() {
        r.check(Check::at_most("entropy identity defect", entropy_identity_defect(&mu, &op, spec.lambda), 1e-10));
    }
    let mut table = String::from("n,C\n");
    for (n, c) in g.per_level.iter().enumerate() {
        table += &format!("{},{c}\n", n + 1);
    }
    r.write(out, "gibbs.csv", table.as_bytes())?;
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Example {
    /// Doubling map with a half hole.
    Ex1,
    /// Tripling map with nested holes.
    Ex2,
}

/// Runs a worked example end to end and compares every computed quantity
/// with its closed form.
pub fn example(which: Example, p: f64, cfg: &ExperimentConfig, out: &Path) -> Result<Report, CliError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CliError::Config { path: "p".into(), message: format!("must lie in (0, 1), got {p}") });
    }
    let sys = match which {
        Example::Ex1 => half_hole_doubling(p)?,
        Example::Ex2 => nested_holes_tripling(p)?,
    };
    let opts = SpectralOptions { tol: cfg.tolerances.spectral, ..SpectralOptions::default() };
    let op = assemble_open(&sys.map, &sys.phi, &sys.holes, 1)?;
    let spec = dominant_spectrum(&op, &opts)?;
    let mu = markov_measure(&op, &spec)?;
    let alpha = conditionally_stationary(&spec, &sys.holes);
    let mut r = Report::default();
    let k = sys.map.cells() as f64;
    let lambda = (1.0 + p) / k;
    let nu: Vec<f64> = match which {
        Example::Ex1 => vec![p / (1.0 + p), 1.0 / (1.0 + p)],
        Example::Ex2 => vec![0.0, p / (1.0 + p), 1.0 / (1.0 + p)],
    };
    r.line(format!("{:?}, p = {p}", which));
    r.check(Check::new("lambda_hat", spec.lambda, lambda, 1e-12));
    r.check(Check::new("escape rate", escape_rate_of(spec.lambda)?, -lambda.ln(), 1e-12));
    for (i, v) in nu.iter().enumerate() {
        r.check(Check::new(format!("nu_hat[{i}]"), spec.nu[i], *v, 1e-10));
        r.check(Check::new(format!("rho_hat[{i}]"), spec.rho[i], 1.0, 1e-10));
        r.check(Check::new(format!("q[{i}]"), mu.q()[i], *v, 1e-10));
        for j in 0..nu.len() {
            r.check(Check::new(format!("Q[{j}][{i}]"), mu.transition(j, i), *v, 1e-10));
        }
        let c = sys.map.cell_bounds(i);
        r.check(Check::new(format!("alpha_hat density on cell {i}"), alpha.density_in(i, 0.5 * (c.0 + c.1)), k * v, 1e-10));
    }
    r.check(Check::at_most("entropy identity defect", entropy_identity_defect(&mu, &op, spec.lambda), 1e-10));
    let pot = Potential::combine(1.0, &sys.phi, 1.0, &sys.holes.log_weight());
    let g = gibbs_check(&mu, &sys.map, &pot, cfg.gibbs.n_max)?;
    r.check(Check::at_most("Gibbs violations", g.violations.len() as f64, 0.0));
    match which {
        Example::Ex1 => {
            r.check(Check::new("Gibbs constant", g.constant, 1.0, 1e-12));
            let eq = PressureEquation::new(&sys.map, &sys.phi, &sys.holes.psi()?, 1)?.with_spectral_options(opts);
            let so = SolveOptions::default();
            for t in [1.0, 2.0] {
                let tt = solve_t(&eq, t, so.bracket, so.tol)?;
                let exact = (2f64.powf(t) - 1.0).ln() / p.ln();
                r.check(Check::new(format!("T({t})"), tt, exact, 1e-8));
                r.check(Check::at_most(format!("|pressure at T({t})|"), eq.pressure(t, tt)?.abs(), cfg.tolerances.pressure_root));
            }
        }
        Example::Ex2 => {
            let bad = words_up_to(&sys.map, cfg.gibbs.n_max)?
                .iter()
                .filter(|w| w.0.contains(&0) && mu.mass(&w.0) != 0.0)
                .count();
            r.check(Check::at_most("cylinders through cell 0 with mass", bad as f64, 0.0));
            let supp = support_check(&spec, &sys.holes, &sys.map)?;
            r.check(Check::new("spectral support = symbolic support", f64::from(u8::from(supp.matches)), 1.0, 0.0));
        }
    }
    let run = simulate(cfg, &sys, &spec)?;
    r.line(format!("Monte Carlo: {} samples, seed {}, law {}", run.n_samples, run.seed, run.initial_law));
    if matches!(cfg.simulation.initial_law, LawSpec::AlphaHat) {
        moment_checks(&mut r, &run, spec.lambda, cfg.tolerances.mc_z);
    }
    r.write(out, "survival.csv", &csv(|b| write_survival_csv(&run, cfg.simulation.horizon, Some(spec.lambda), b)))?;
    r.write(out, "spectrum.csv", &csv(|b| write_spectrum_csv(&spec, b)))?;
    let checks = r.checks_csv();
    r.write(out, "checks.csv", checks.as_bytes())?;
    Ok(r)
}
