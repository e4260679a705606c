use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use openhole::maps::MapSpec;
use openhole::noise::NoiseSpec;
use openhole_cli::commands::{self, Example};
use openhole_cli::{CliError, ExperimentConfig, Report};

/// Spectra, escape rates, survival statistics and dimensions of Markov
/// interval maps with random holes.
#[derive(Parser, Debug)]
#[command(name = "openhole", version)]
struct Cli {
    /// Directory for CSV output.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config refinement level.
    #[arg(long, global = true)]
    level: Option<usize>,
    /// Overrides the config Monte Carlo sample count.
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dominant eigendata of the averaged open operator.
    Spectrum { config: PathBuf },
    /// Escape rate −log λ̂ at levels 1..=level.
    EscapeRate { config: PathBuf },
    /// Monte Carlo survival times.
    SurviveMc { config: PathBuf },
    /// Survivor-set verdict, periodic witness and Bowen dimension.
    SurvivalSet { config: PathBuf },
    /// T(t), T′(t) and T(t) + t T′(t) on a grid.
    DimensionSpectrum { config: PathBuf },
    /// Gibbs constants of the equilibrium measure per cylinder length.
    GibbsCheck { config: PathBuf },
    /// Reproduces a worked example against its closed forms.
    Example {
        which: Which,
        /// Probability that the small hole (ex2) or no hole (ex1) occurs.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// Prints a config with every field at its default.
    Template,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    Ex1,
    Ex2,
}

fn load(cli: &Cli, path: &Path) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    apply_overrides(cli, &mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn apply_overrides(cli: &Cli, cfg: &mut ExperimentConfig) {
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(l) = cli.level {
        cfg.level = l;
    }
    if let Some(n) = cli.samples {
        cfg.simulation.samples = n;
    }
}

fn run(cli: &Cli) -> Result<Option<Report>, CliError> {
    let out = &cli.out_dir;
    let report = match &cli.command {
        Command::Spectrum { config } => commands::spectrum(&load(cli, config)?, out)?,
        Command::EscapeRate { config } => commands::escape_rate(&load(cli, config)?, out)?,
        Command::SurviveMc { config } => commands::survive_mc(&load(cli, config)?, out)?,
        Command::SurvivalSet { config } => commands::survival_set(&load(cli, config)?, out)?,
        Command::DimensionSpectrum { config } => commands::dimension_spectrum_cmd(&load(cli, config)?, out)?,
        Command::GibbsCheck { config } => commands::gibbs_check_cmd(&load(cli, config)?, out)?,
        Command::Example { which, p } => {
            let mut cfg = ExperimentConfig::new(MapSpec::Doubling, NoiseSpec::Closed);
            apply_overrides(cli, &mut cfg);
            cfg.validate()?;
            let which = match which {
                Which::Ex1 => Example::Ex1,
                Which::Ex2 => Example::Ex2,
            };
            commands::example(which, *p, &cfg, out)?
        }
        Command::Template => {
            println!("{}", ExperimentConfig::new(MapSpec::Doubling, NoiseSpec::Closed).to_json());
            return Ok(None);
        }
    };
    Ok(Some(report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(report)) => {
            print!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                eprintln!("one or more checks failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
