use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::{ExperimentConfig, ExperimentKind};
use super::convergence::{comparison_table, run_convergence};
use super::phase::{grid_csv, run_phase};
use super::presets::{preset, PRESETS};
use crate::error::NoodlError;
use crate::runner::Algorithm;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "noodl", version, about = "Online dictionary learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Start from a named preset instead of a config file.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Overrides both the ground-truth and the solver seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Only log errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run each configured algorithm and write per-iteration traces.
    Convergence,
    /// Run the sample-complexity sweep and write the success-rate grid.
    Phase,
    /// Run both algorithms on the same data and print a summary table.
    Compare,
    /// Print a preset as JSON.
    GenConfig,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(NoodlError),
    Degenerate,
}

impl From<NoodlError> for Failure {
    fn from(e: NoodlError) -> Self {
        Failure::Run(e)
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Tables and generated configs go to `stdout`.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else {
        log::LevelFilter::Info
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();

    let result = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be positive".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Failure::Usage(format!("cannot start thread pool: {e}"))),
        },
        None => execute(&cli),
    };
    match result {
        Ok(text) => match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: writing to standard output: {e}");
                EXIT_FAILURE
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Degenerate) => {
            eprintln!("error: an atom collapsed during the run; partial results were written");
            EXIT_DEGENERATE
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            match e {
                NoodlError::Config(_) | NoodlError::Json(_) => EXIT_USAGE,
                NoodlError::DegenerateAtom { .. } => EXIT_DEGENERATE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(_), Some(_)) => return Err(Failure::Usage("--config and --preset are mutually exclusive".into())),
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name)
            .ok_or_else(|| Failure::Usage(format!("unknown preset {name:?}; known: {}", PRESETS.join(", "))))?,
        (None, None) => return Err(Failure::Usage("one of --config or --preset is required".into())),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.solver.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let cfg = load(cli)?;
    let mut stdout = String::new();
    match cli.command {
        Command::GenConfig => {
            stdout = cfg.to_json() + "\n";
        }
        Command::Convergence | Command::Compare => {
            let compare = matches!(cli.command, Command::Compare) || cfg.kind == ExperimentKind::Compare;
            let algorithms = if compare {
                vec![Algorithm::Noodl, Algorithm::BiasedHt]
            } else {
                cfg.algorithms.clone()
            };
            if algorithms.is_empty() {
                return Err(Failure::Usage("config selects no algorithms".into()));
            }
            let out = run_convergence(&cfg, &algorithms)?;
            if compare {
                let table = comparison_table(&out.summaries);
                let path = cfg.output_dir.join("comparison.csv");
                std::fs::write(&path, &table).map_err(|e| NoodlError::io(&path, e))?;
                stdout = table;
            }
            for f in &out.files {
                log::info!("wrote {}", f.display());
            }
            if out.any_degenerate() {
                return Err(Failure::Degenerate);
            }
        }
        Command::Phase => {
            if cfg.sweep.is_none() {
                return Err(Failure::Usage("phase needs a config with a sweep".into()));
            }
            let out = run_phase(&cfg)?;
            stdout = grid_csv(&out.cells);
            for f in &out.files {
                log::info!("wrote {}", f.display());
            }
        }
    }
    Ok(stdout)
}
