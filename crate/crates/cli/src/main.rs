//! Command-line front end for the experiment harness.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use impatient::harness::{self, Experiment, ExperimentConfig, Format};

#[derive(Parser)]
#[command(name = "impatient", version, about = "Impatient and ageing random walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(clap::Args)]
struct Common {
    /// TOML (or JSON) experiment config
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    /// Write one excursion as a step,vertex,actual_time CSV
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Closed-form vs series verdicts over the Lamperti phase diagram
    PhaseSweep,
    /// KS test of the infinitely impatient occupation fraction
    UniformTest,
    /// Recurrence class of a kernel and schedule
    Classify,
    /// Monte Carlo excursion statistics
    Excursions,
    /// Range growth R_t along trajectories
    Range,
    /// Space-dependent passage times on Z or Z^2
    Space,
}

impl Command {
    fn experiment(self) -> Experiment {
        match self {
            Command::PhaseSweep => Experiment::PhaseSweep,
            Command::UniformTest => Experiment::UniformTest,
            Command::Classify => Experiment::Classify,
            Command::Excursions => Experiment::Excursions,
            Command::Range => Experiment::Range,
            Command::Space => Experiment::Space,
        }
    }
}

fn load(cli: &Cli) -> impatient::Result<ExperimentConfig> {
    let exp = cli.command.experiment();
    let c = &cli.common;
    let mut config = match &c.config {
        Some(path) => {
            let mut cfg = ExperimentConfig::load(path)?;
            if cfg.experiment != exp {
                return Err(impatient::Error::Config(format!(
                    "config is for {} but the subcommand is {}",
                    cfg.experiment.name(),
                    exp.name()
                )));
            }
            if let Some(seed) = c.seed {
                cfg.seed = seed;
            }
            cfg
        }
        None => {
            let seed = c.seed.ok_or_else(|| impatient::Error::Config("a seed is required: pass --seed or --config".into()))?;
            ExperimentConfig::new(exp, seed)
        }
    };
    if let Some(f) = c.format {
        config.output.format = match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        };
    }
    if let Some(p) = &c.out {
        config.output.path = Some(p.clone());
    }
    if let Some(p) = &c.trace {
        config.output.trace = Some(p.clone());
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = harness::run(&config);
    let code = harness::exit_code(&outcome);
    match &outcome {
        Ok(out) => {
            let written = match &config.output.path {
                Some(path) => harness::emit(out, config.output.format, path),
                None => harness::render(out, config.output.format).map(|s| print!("{s}")),
            };
            let traced = match &config.output.trace {
                Some(path) => harness::write_trace(&config, path),
                None => Ok(()),
            };
            if let Err(e) = written.and(traced) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if !out.passed {
                eprintln!("{}: assertions failed", config.experiment.name());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(code as u8)
}
