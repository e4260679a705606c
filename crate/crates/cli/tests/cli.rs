use std::path::{Path, PathBuf};
use std::process::Command;

use openhole::maps::MapSpec;
use openhole::noise::NoiseSpec;
use openhole_cli::commands::{self, Example};
use openhole_cli::{CliError, ExperimentConfig};

fn configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn config(name: &str) -> PathBuf {
    configs().into_iter().find(|p| p.file_name().unwrap() == name).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_openhole"))
}

#[test]
fn shipped_configs_round_trip() {
    assert!(configs().len() >= 4);
    for path in configs() {
        let cfg = ExperimentConfig::load(&path).unwrap();
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
    }
    let t = ExperimentConfig::new(MapSpec::PerturbedDoubling { epsilon: 0.1 }, NoiseSpec::Closed);
    assert_eq!(ExperimentConfig::from_json(&t.to_json()).unwrap(), t);
}

#[test]
fn unknown_keys_are_rejected_with_their_path() {
    let err = ExperimentConfig::from_json(r#"{"map": {"kind": "doubling"}, "simulation": {"sample": 5}}"#).unwrap_err();
    match err {
        CliError::Config { path, message } => {
            assert_eq!(path, "simulation.sample");
            assert!(message.contains("sample"), "{message}");
        }
        other => panic!("{other}"),
    }
    let err = ExperimentConfig::from_json(r#"{"map": {"kind": "doubling"}, "levle": 3}"#).unwrap_err();
    assert!(err.to_string().contains("levle"));
    let err = ExperimentConfig::from_json(r#"{"map": {"kind": "doubling"}, "tolerances": {"spectral": -1}}"#).unwrap_err();
    assert!(err.to_string().contains("tolerances.spectral"));
}

#[test]
fn defaults_are_documented_values() {
    let cfg = ExperimentConfig::from_json(r#"{"map": {"kind": "doubling"}}"#).unwrap();
    assert_eq!(cfg.tolerances.spectral, 1e-12);
    assert_eq!(cfg.tolerances.pressure_root, 1e-10);
    assert_eq!(cfg.tolerances.mc_z, 3.0);
    assert_eq!(cfg.spectrum.grid().len(), 26);
}

#[test]
fn examples_pass_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(MapSpec::Doubling, NoiseSpec::Closed);
    cfg.simulation.samples = 50_000;
    for p in [0.25, 0.5, 0.9] {
        for which in [Example::Ex1, Example::Ex2] {
            let r = commands::example(which, p, &cfg, dir.path()).unwrap();
            assert!(r.passed(), "{which:?} p={p}\n{r}");
        }
    }
    assert!(commands::example(Example::Ex1, 1.5, &cfg, dir.path()).is_err());
}

#[test]
fn closed_system_has_no_escape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::load(&config("closed_doubling.json")).unwrap();
    let r = commands::spectrum(&cfg, dir.path()).unwrap();
    assert!(r.passed());
    let text = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(text.starts_with("word,lo,hi,rho,nu"), "{text}");
    commands::escape_rate(&cfg, dir.path()).unwrap();
    let table = std::fs::read_to_string(dir.path().join("escape_rate.csv")).unwrap();
    for row in table.lines().skip(1) {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - 1.0).abs() < 1e-12 && cols[2] == 0.0, "{row}");
    }
}

#[test]
fn same_seed_gives_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut cfg = ExperimentConfig::load(&config("half_hole_doubling.json")).unwrap();
    cfg.simulation.samples = 40_000;
    commands::survive_mc(&cfg, a.path()).unwrap();
    cfg.simulation.workers = 4;
    commands::survive_mc(&cfg, b.path()).unwrap();
    let read = |d: &Path| std::fs::read(d.join("survival.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    cfg.seed += 1;
    commands::survive_mc(&cfg, b.path()).unwrap();
    assert_ne!(read(a.path()), read(b.path()));
}

#[test]
fn every_subcommand_runs_on_the_shipped_configs() {
    let dir = tempfile::tempdir().unwrap();
    for path in configs() {
        let mut cfg = ExperimentConfig::load(&path).unwrap();
        cfg.simulation.samples = cfg.simulation.samples.min(20_000);
        cfg.level = cfg.level.min(6);
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let out = dir.path().join(&name);
        assert!(commands::spectrum(&cfg, &out).unwrap().passed(), "{name}");
        commands::escape_rate(&cfg, &out).unwrap();
        assert!(commands::survive_mc(&cfg, &out).unwrap().passed(), "{name}");
        assert!(commands::survival_set(&cfg, &out).unwrap().passed(), "{name}");
        assert!(commands::gibbs_check_cmd(&cfg, &out).unwrap().passed(), "{name}");
        let has_no_hole_event = !matches!(name.as_str(), "nested_holes_tripling" | "closed_doubling");
        let spectrum = commands::dimension_spectrum_cmd(&cfg, &out);
        assert_eq!(spectrum.is_ok(), has_no_hole_event, "{name}: {:?}", spectrum.err());
    }
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin()
        .args(["example", "ex1", "--p", "0.5", "--samples", "20000", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));
    let table = String::from_utf8_lossy(&ok.stdout);
    assert!(table.contains("lambda_hat") && table.contains("PASS") && !table.contains("FAIL"));
    assert!(dir.path().join("checks.csv").exists());

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"map": {"kind": "doubling"}, "extra": 1}"#).unwrap();
    let err = bin().arg("spectrum").arg(&bad).arg("--out-dir").arg(dir.path()).output().unwrap();
    assert_eq!(err.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&err.stderr).contains("extra"));

    let template = bin().arg("template").output().unwrap();
    assert!(template.status.success());
    ExperimentConfig::from_json(&String::from_utf8_lossy(&template.stdout)).unwrap();
}
