//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

use std::time::{Duration, Instant};

use openhole::maps::{refine, CylinderWord, MarkovMap};
use openhole::openstats::{fit_log_slope, simulate_tau, write_survival_csv, SimulationOptions, SurvivalRun};
use openhole::presets::{half_hole_doubling, nested_holes_tripling, perturbed_ball_hole, OpenSystem};
use openhole::survival::{
    box_counting_dimension, build_avoidance_graph, bowen_dimension, is_survivor_set_nonempty, verify_periodic_witness,
};
use openhole::thermo::{
    cylinder_bounds_check, dimension_spectrum, entropy_identity_defect, gibbs_check, markov_measure, solve_t,
    words_up_to, PressureEquation, SolveOptions,
};
use openhole::transfer::{
    assemble_closed, assemble_open, conditionally_stationary, conformality_check, dominant_spectrum, verify_reduction,
    SpectralData,
};
use openhole::{InitialLaw, NoiseModel, OpenInterval, OperatorMatrix, Potential, SpectralOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PS: [f64; 4] = [0.1, 0.25, 0.5, 0.9];
const MC_SEED: u64 = 0x5eed_2024;
const MC_SAMPLES: u64 = 1_000_000;

type Outcome = Result<String, String>;

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<String, String> {
    let t = start.elapsed();
    check(t < limit, || format!("took {t:?}, limit {limit:?}"))?;
    Ok(format!("{:.3}s", t.as_secs_f64()))
}

fn open_spectrum(s: &OpenSystem, n: usize) -> (OperatorMatrix, SpectralData) {
    let op = assemble_open(&s.map, &s.phi, &s.holes, n).unwrap();
    let spec = dominant_spectrum(&op, &SpectralOptions::default()).unwrap();
    (op, spec)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn example_one_exactness() -> Outcome {
    let start = Instant::now();
    for p in PS {
        let s = half_hole_doubling(p).unwrap();
        let (op, spec) = open_spectrum(&s, 1);
        let lambda = (1.0 + p) / 2.0;
        check((spec.lambda - lambda).abs() < 1e-12, || format!("p={p}: λ̂={}", spec.lambda))?;
        let nu = [p / (p + 1.0), 1.0 / (p + 1.0)];
        check(max_diff(&spec.nu, &nu) < 1e-10, || format!("p={p}: ν̂={:?}", spec.nu))?;
        check(max_diff(&spec.rho, &[1.0, 1.0]) < 1e-10, || format!("p={p}: ρ̂={:?}", spec.rho))?;
        let mu = markov_measure(&op, &spec).map_err(|e| e.to_string())?;
        let q: Vec<f64> = mu.transition_dense().concat();
        check(max_diff(&q, &[nu[0], nu[1], nu[0], nu[1]]) < 1e-10, || format!("p={p}: Q={q:?}"))?;
        check(max_diff(mu.q(), &nu) < 1e-10, || format!("p={p}: q={:?}", mu.q()))?;
        let alpha = conditionally_stationary(&spec, &s.holes);
        let dens = [alpha.density_in(0, 0.25), alpha.density_in(1, 0.75)];
        let expect = [2.0 * p / (p + 1.0), 2.0 / (p + 1.0)];
        check(max_diff(&dens, &expect) < 1e-10, || format!("p={p}: α̂ density {dens:?}"))?;
    }
    within_time(start, Duration::from_secs(1))
}

fn example_two_exactness() -> Outcome {
    let start = Instant::now();
    let mut zero_checked = 0;
    for p in PS {
        let s = nested_holes_tripling(p).unwrap();
        let (op, spec) = open_spectrum(&s, 1);
        check((spec.lambda - (1.0 + p) / 3.0).abs() < 1e-12, || format!("p={p}: λ̂={}", spec.lambda))?;
        let nu = [0.0, p / (p + 1.0), 1.0 / (p + 1.0)];
        check(max_diff(&spec.nu, &nu) < 1e-10, || format!("p={p}: ν̂={:?}", spec.nu))?;
        let mu = markov_measure(&op, &spec).map_err(|e| e.to_string())?;
        for w in words_up_to(&s.map, 8).unwrap() {
            if w.0.contains(&0) {
                let m = mu.mass(&w.0);
                check(m == 0.0, || format!("p={p}: μ̂({w}) = {m}"))?;
                zero_checked += 1;
            }
        }
    }
    let t = within_time(start, Duration::from_secs(1))?;
    Ok(format!("{zero_checked} cylinders of zero mass, {t}"))
}

/// Averages `L_φ(1_{X_ω} f)` over the hole law directly at `x`.
fn averaged_operator_at(s: &OpenSystem, f: &dyn Fn(f64) -> f64, x: f64, survive: &dyn Fn(f64) -> f64) -> f64 {
    (0..s.map.cells())
        .filter(|&i| {
            let (lo, hi) = s.map.image(i);
            x >= lo && x <= hi
        })
        .map(|i| {
            let y = s.map.inverse(i, x);
            s.phi.eval(y).exp() * survive(y) * f(y)
        })
        .sum()
}

fn combined_operator_at(s: &OpenSystem, f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let pot = Potential::combine(1.0, &s.phi, 1.0, &s.holes.log_weight());
    (0..s.map.cells())
        .filter(|&i| {
            let (lo, hi) = s.map.image(i);
            x >= lo && x <= hi
        })
        .map(|i| {
            let y = s.map.inverse(i, x);
            pot.eval(y).exp() * f(y)
        })
        .sum()
}

fn reduction_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p0 = 0.4;
    let continuous = OpenSystem {
        map: MarkovMap::doubling(),
        phi: Potential::geometric(&MarkovMap::doubling()),
        holes: NoiseModel::atom_plus_uniform(0.3, p0, 0.0, 0.5).unwrap().into(),
    };
    // probability of surviving each hole event, taken from the hole law
    let ex1_survive = |p: f64| move |y: f64| if y < 0.5 { p } else { 1.0 };
    let ex2_survive = |p: f64| move |y: f64| if y < 1.0 / 3.0 { 0.0 } else if y < 2.0 / 3.0 { p } else { 1.0 };
    let cont_survive = move |y: f64| p0 + (1.0 - p0) * ((y - 0.3f64).abs() / 0.5).min(1.0);
    let systems: Vec<(&str, OpenSystem, Box<dyn Fn(f64) -> f64>)> = vec![
        ("ex1", half_hole_doubling(0.3).unwrap(), Box::new(ex1_survive(0.3))),
        ("ex2", nested_holes_tripling(0.6).unwrap(), Box::new(ex2_survive(0.6))),
        ("continuous", continuous, Box::new(cont_survive)),
    ];
    let mut worst = 0.0f64;
    for (name, s, survive) in &systems {
        for n in 1..=10 {
            let part = refine(&s.map, n).unwrap();
            let fs: Vec<Vec<f64>> = (0..100).map(|_| (0..part.len()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).collect();
            let matrix_gap = verify_reduction(&s.map, &s.phi, &s.holes, n, &fs).unwrap();
            worst = worst.max(matrix_gap);
            // pointwise, with the average over the hole law done independently
            for f in fs.iter().take(5) {
                let step = |y: f64| part.locate(&s.map, y).map_or(0.0, |k| f[k]);
                for k in 0..64 {
                    let x = (k as f64 + 0.37) / 64.0;
                    let a = averaged_operator_at(s, &step, x, survive.as_ref());
                    let b = combined_operator_at(s, &step, x);
                    worst = worst.max((a - b).abs());
                }
            }
            check(worst < 1e-12, || format!("{name} n={n}: gap {worst:e}"))?;
        }
    }
    Ok(format!("max gap {worst:.2e}"))
}

fn survival_run(workers: usize) -> SurvivalRun {
    let s = half_hole_doubling(0.5).unwrap();
    let (_, spec) = open_spectrum(&s, 1);
    let law = InitialLaw::Alpha(Box::new(conditionally_stationary(&spec, &s.holes)));
    let mut opts = SimulationOptions::new(MC_SAMPLES, MC_SEED);
    opts.workers = workers;
    simulate_tau(&s.map, &s.holes, &law, &opts).unwrap()
}

fn survival_statistics(run: &SurvivalRun, elapsed: Duration) -> Outcome {
    let z_mean = (run.mean - 3.0) / run.mean_se;
    let z_var = (run.variance - 12.0) / run.variance_se;
    let (d, d_se) = run.index_of_dispersion().map_err(|e| e.to_string())?;
    let z_d = (d - 4.0) / d_se;
    let summary = format!(
        "mean {:.4} (z {z_mean:.2}), variance {:.3} (z {z_var:.2}), dispersion {d:.4} (z {z_d:.2}), {:.2}s",
        run.mean,
        run.variance,
        elapsed.as_secs_f64()
    );
    check(z_mean.abs() < 3.0 && z_var.abs() < 3.0 && z_d.abs() < 3.0, || summary.clone())?;
    check(elapsed < Duration::from_secs(30), || summary.clone())?;
    Ok(summary)
}

fn survival_curve_slope(run: &SurvivalRun) -> Outcome {
    let alive = run.alive_fractions(20);
    let slope = fit_log_slope(&alive, 1..=20);
    let target = 0.75f64.ln();
    let rel = ((slope - target) / target).abs();
    check(rel < 0.01, || format!("slope {slope} vs {target}"))?;
    Ok(format!("slope {slope:.5}, relative error {rel:.2e}"))
}

fn conformality() -> Outcome {
    let mut configs: Vec<(&str, OpenSystem)> = Vec::new();
    for p in PS {
        configs.push(("ex1", half_hole_doubling(p).unwrap()));
        configs.push(("ex2", nested_holes_tripling(p).unwrap()));
    }
    let d = MarkovMap::doubling();
    configs.push(("closed doubling", OpenSystem { phi: Potential::geometric(&d), map: d, holes: NoiseModel::no_hole(0.5).into() }));
    let mut worst = 0.0f64;
    for (name, s) in &configs {
        let pot = Potential::combine(1.0, &s.phi, 1.0, &s.holes.log_weight());
        for n in 1..=10 {
            let (op, spec) = open_spectrum(s, n);
            check(op.is_exact(), || format!("{name} n={n}: not exact"))?;
            let r = conformality_check(&spec, &s.map, &pot);
            worst = worst.max(r);
            check(r < 1e-10, || format!("{name} n={n}: residual {r:e}"))?;
        }
    }
    Ok(format!("max residual {worst:.2e}"))
}

fn bowen() -> Outcome {
    let start = Instant::now();
    let map = MarkovMap::doubling();
    let hole = [OpenInterval::new(0.0, 0.25)];
    let g = build_avoidance_graph(&map, &hole, 2).unwrap();
    let s = bowen_dimension(&g, &map).dimension;
    check((s - 0.6942419).abs() < 1e-6, || format!("s* = {s}"))?;
    let boxed = box_counting_dimension(&map, &hole, 20);
    check((boxed - s).abs() < 0.02, || format!("box-counting {boxed} vs {s}"))?;
    let full = bowen_dimension(&build_avoidance_graph(&map, &[], 3).unwrap(), &map).dimension;
    check(full == 1.0, || format!("no hole: {full}"))?;
    let half = bowen_dimension(&build_avoidance_graph(&map, &[OpenInterval::new(0.0, 0.5)], 3).unwrap(), &map).dimension;
    check(half == 0.0, || format!("half hole: {half}"))?;
    let t = within_time(start, Duration::from_secs(5))?;
    Ok(format!("s* {s:.8}, box-counting {boxed:.4}, {t}"))
}

fn non_emptiness() -> Outcome {
    let map = MarkovMap::doubling();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let b = 0.1;
    for _ in 0..20 {
        let x0: f64 = rng.random();
        let hole = [OpenInterval::new(x0 - b, x0 + b)];
        for n in 3..=6 {
            let v = is_survivor_set_nonempty(&build_avoidance_graph(&map, &hole, n).unwrap());
            check(v.nonempty, || format!("x0={x0} n={n}: empty verdict"))?;
            let w: &CylinderWord = v.word.as_ref().ok_or_else(|| format!("x0={x0} n={n}: no witness"))?;
            check(verify_periodic_witness(&map, &hole, w), || format!("x0={x0} n={n}: witness {w} rejected"))?;
        }
    }
    Ok("20 centres, levels 3..6".into())
}

fn t_equation() -> Outcome {
    let grid: Vec<f64> = (0..=25).map(|k| 0.5 + 0.1 * k as f64).collect();
    let opts = SolveOptions::default();
    let mut worst_p = 0.0f64;
    let mut worst_t = 0.0f64;
    for p in PS {
        let s = half_hole_doubling(p).unwrap();
        let eq = PressureEquation::new(&s.map, &s.phi, &s.holes.psi().unwrap(), 1).unwrap();
        let curve = dimension_spectrum(&eq, &grid, &opts).map_err(|e| e.to_string())?;
        for (i, &t) in grid.iter().enumerate() {
            let exact = (2f64.powf(t) - 1.0).ln() / p.ln();
            worst_p = worst_p.max(curve.pressure_residual[i]);
            worst_t = worst_t.max((curve.values[i] - exact).abs());
        }
        let t1 = solve_t(&eq, 1.0, opts.bracket, opts.tol).map_err(|e| e.to_string())?;
        check(t1.abs() <= opts.tol, || format!("p={p}: T(1) = {t1}"))?;
        if p == 0.5 {
            let t2 = solve_t(&eq, 2.0, opts.bracket, opts.tol).map_err(|e| e.to_string())?;
            check((t2 + 1.5849625).abs() < 1e-7, || format!("T(2) = {t2}"))?;
        }
    }
    check(worst_p < 1e-10, || format!("pressure residual {worst_p:e}"))?;
    check(worst_t < 1e-8, || format!("closed-form gap {worst_t:e}"))?;
    Ok(format!("pressure residual {worst_p:.1e}, closed-form gap {worst_t:.1e}"))
}

fn gibbs_and_entropy() -> Outcome {
    let mut worst_c = 0.0f64;
    let mut worst_h = 0.0f64;
    let mut cylinders = 0;
    for p in PS {
        let s = half_hole_doubling(p).unwrap();
        let (op, spec) = open_spectrum(&s, 1);
        let mu = markov_measure(&op, &spec).map_err(|e| e.to_string())?;
        let pot = Potential::combine(1.0, &s.phi, 1.0, &s.holes.psi().unwrap());
        let g = gibbs_check(&mu, &s.map, &pot, 12).unwrap();
        check(g.violations.is_empty(), || format!("p={p}: {} violations", g.violations.len()))?;
        worst_c = worst_c.max((g.constant - 1.0).abs());
        let b = cylinder_bounds_check(&mu, &s.map, 12, |n| ((p / (1.0 + p)).powi(n as i32), (1.0 / (1.0 + p)).powi(n as i32))).unwrap();
        check(b.passed(), || format!("p={p}: bounds fail on {:?}", b.violations.first()))?;
        cylinders += b.checked;
    }
    check(worst_c < 1e-12, || format!("|C − 1| = {worst_c:e}"))?;

    let mut exact: Vec<OpenSystem> = Vec::new();
    for p in PS {
        exact.push(half_hole_doubling(p).unwrap());
        exact.push(nested_holes_tripling(p).unwrap());
    }
    for k in [2, 3] {
        let m = MarkovMap::full_branch(k);
        exact.push(OpenSystem { phi: Potential::geometric(&m), map: m, holes: NoiseModel::no_hole(0.5).into() });
    }
    for s in &exact {
        for n in 1..=6 {
            let (op, spec) = open_spectrum(s, n);
            let mu = markov_measure(&op, &spec).map_err(|e| e.to_string())?;
            worst_h = worst_h.max(entropy_identity_defect(&mu, &op, spec.lambda));
        }
    }
    let d = MarkovMap::doubling();
    let op = assemble_closed(&d, &Potential::constant(0.3), 4).unwrap();
    let spec = dominant_spectrum(&op, &SpectralOptions::default()).unwrap();
    worst_h = worst_h.max(entropy_identity_defect(&markov_measure(&op, &spec).unwrap(), &op, spec.lambda));
    check(worst_h < 1e-10, || format!("entropy identity defect {worst_h:e}"))?;
    Ok(format!("|C − 1| {worst_c:.1e}, entropy defect {worst_h:.1e}, {cylinders} cylinder bounds"))
}

fn refinement_convergence() -> Outcome {
    let mut ratios = Vec::new();
    for eps in [0.05, 0.1, 0.2] {
        for p0 in [0.3, 0.7] {
            let s = perturbed_ball_hole(eps, p0).unwrap();
            let mut lambdas = Vec::new();
            for n in 4..=11 {
                let (_, spec) = open_spectrum(&s, n);
                let closed = dominant_spectrum(&assemble_closed(&s.map, &s.phi, n).unwrap(), &SpectralOptions::default()).unwrap();
                check(spec.lambda <= closed.lambda && spec.lambda <= 1.0, || {
                    format!("eps={eps} p0={p0} n={n}: λ̂ {} vs λ {}", spec.lambda, closed.lambda)
                })?;
                lambdas.push(spec.lambda);
            }
            let diffs: Vec<f64> = lambdas.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
            check(diffs.windows(2).all(|w| w[1] < w[0]), || format!("eps={eps} p0={p0}: {diffs:?}"))?;
            ratios.push(diffs[diffs.len() - 1] / diffs[diffs.len() - 2]);
        }
    }
    let r = ratios.iter().copied().fold(0.0, f64::max);
    Ok(format!("6 configurations, largest late contraction ratio {r:.3}"))
}

fn reproducibility(first: &SurvivalRun) -> Outcome {
    let csv = |run: &SurvivalRun| {
        let mut buf = Vec::new();
        write_survival_csv(run, 50, Some(0.75), &mut buf).unwrap();
        buf
    };
    let again = survival_run(1);
    check(csv(first) == csv(&again), || "CSV differs between identical runs".into())?;
    let parallel = survival_run(8);
    check(parallel.tau_counts == first.tau_counts, || "histograms differ for 1 vs 8 workers".into())?;
    Ok(format!("{} bytes identical; 1 vs 8 workers identical", csv(first).len()))
}

fn main() {
    let start = Instant::now();
    let run = survival_run(1);
    let mc_time = start.elapsed();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 example-one exactness", example_one_exactness()),
        ("2 example-two exactness", example_two_exactness()),
        ("3 reduction identity", reduction_identity()),
        ("4 survival-time statistics", survival_statistics(&run, mc_time)),
        ("5 geometric survival curve", survival_curve_slope(&run)),
        ("6 conformality", conformality()),
        ("7 bowen dimension", bowen()),
        ("8 survivor non-emptiness", non_emptiness()),
        ("9 pressure equation", t_equation()),
        ("10 gibbs and entropy identities", gibbs_and_entropy()),
        ("11 refinement convergence", refinement_convergence()),
        ("12 reproducibility", reproducibility(&run)),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
