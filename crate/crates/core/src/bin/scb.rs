use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use scb_core::config::{self, Mode, RunConfig};
use scb_core::experiments::{self, ExperimentReport};
use scb_core::Error;

const EXIT_IO: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_ASSERTION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "scb",
    version,
    about = "Space-code beamforming radar simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation analysis of Zadoff-Chu sequences.
    SeqAnalyze(Common),
    /// Effective isotropic radiated power patterns.
    Eirp(Common),
    /// End-to-end transmit, propagate and receive simulation.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Replaces the configured list of receive modes.
        #[arg(long, value_enum)]
        mode: Option<CliMode>,
    },
    /// Run every shipped preset plus the system-level checks.
    ReproduceAll {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Noise seed (overrides the configuration).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Figure1,
    Figure2,
    Figure3,
    Figure5,
    Figure8,
    Figure10,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Multi,
    Single,
    Subcarrier,
}

impl From<CliMode> for Mode {
    fn from(m: CliMode) -> Self {
        match m {
            CliMode::Multi => Mode::Multi,
            CliMode::Single => Mode::Single,
            CliMode::Subcarrier => Mode::Subcarrier,
        }
    }
}

impl Common {
    fn load(&self) -> scb_core::Result<RunConfig> {
        let mut cfg = match (&self.config, self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(p)) => {
                let name = p.to_possible_value().expect("no skipped variants");
                config::preset(name.get_name())?
            }
            (None, None) => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.outputs.dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.scenario.noise_seed = seed;
        }
        Ok(cfg)
    }
}

fn run(command: Command) -> scb_core::Result<ExperimentReport> {
    match command {
        Command::SeqAnalyze(c) => experiments::seq_analyze(&c.load()?),
        Command::Eirp(c) => {
            let mut cfg = c.load()?;
            cfg.eirp.get_or_insert_with(Default::default);
            experiments::eirp(&cfg)
        }
        Command::Simulate { common, mode } => {
            let mut cfg = common.load()?;
            if let Some(m) = mode {
                cfg.simulation.modes = vec![m.into()];
            }
            experiments::simulate(&cfg)
        }
        Command::ReproduceAll { out } => experiments::reproduce_all(&out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_PARSE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for a in &report.assertions {
                println!(
                    "{} {}: {}",
                    if a.passed { "PASS" } else { "FAIL" },
                    a.name,
                    a.detail
                );
            }
            println!(
                "{} artifacts written, digest {}",
                report.artifacts.len(),
                report.digest
            );
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_ASSERTION)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => EXIT_PARSE,
                Error::Io(_) | Error::Csv(_) => EXIT_IO,
                _ => EXIT_PRECONDITION,
            })
        }
    }
}
