//! Command-line front end: `run`, `compare` and `schema`.

mod compare;
mod config;
mod manifest;
mod schema;
mod tasks;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

/// Failures, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Config(String),
    /// Exit 2: the output location could not be written.
    Io(String),
    /// Exit 3, with the failing module named.
    Numeric { module: &'static str, error: hn_spectra::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric { .. } => 3,
        }
    }

    fn report(&self) -> String {
        match self {
            CliError::Config(m) => format!("config error: {m}"),
            CliError::Io(m) => format!("output error: {m}"),
            CliError::Numeric { module, error } => serde_json::to_string_pretty(&serde_json::json!({
                "status": "numeric_failure",
                "module": module,
                "error": error.to_string(),
                "detail": format!("{error:?}"),
            }))
            .expect("report serializes"),
        }
    }
}

#[derive(Parser)]
#[command(name = "hn-spectra", version, about = "Spectra of non-reciprocal ergodic operators from config files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task described by a config (or a previous run's manifest).
    Run {
        config: PathBuf,
        /// Override a key path, e.g. `--set model.g=0.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Diff the artifacts of two run directories.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
    },
    /// Print the config schema.
    Schema,
}

fn threads(configured: usize) -> Result<usize, CliError> {
    match std::env::var("HN_SPECTRA_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("HN_SPECTRA_THREADS must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(configured),
    }
}

fn run(path: &PathBuf, set: &[String]) -> Result<(), CliError> {
    let start = Instant::now();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = config::load(&text, set)?;
    cfg.resolve();
    let n = threads(cfg.threads)?;
    if n > 0 {
        // the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (artifacts, resolved) = tasks::run_task(&cfg)?;
    let m = manifest::Manifest::new(resolved, &artifacts, rayon::current_num_threads(), start.elapsed().as_secs_f64());
    manifest::write_outputs(&cfg.output, &artifacts, &m)?;
    eprintln!("{}: {} files written to {}", m.task, artifacts.len() + 1, cfg.output.display());
    Ok(())
}

/// Prints to stdout, ignoring a closed pipe.
fn print_json(v: &serde_json::Value) {
    let text = serde_json::to_string_pretty(v).expect("value serializes");
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, set } => run(config, set),
        Command::Compare { a, b, tolerance } => compare::compare(a, b, *tolerance).map(|report| print_json(&report)),
        Command::Schema => {
            print_json(&schema::schema());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code())
        }
    }
}
