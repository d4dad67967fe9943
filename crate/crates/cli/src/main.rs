#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hidden_basis::experiment::{
    run_convergence_order, run_fixed_points, run_generate, run_perturbation_sweep, run_recover, write_fixed_points,
    write_generated, write_rows, ExperimentSpec,
};

/// Hidden-basis recovery experiments.
#[derive(Parser)]
#[command(name = "hidden-basis", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover hidden bases and write one row per repeat.
    Recover(Common),
    /// Measure convergence orders for monomial contrasts and the matrix case.
    ConvergenceOrder(Common),
    /// Recovery error as a function of the perturbation size.
    PerturbSweep(Common),
    /// Enumerate the fixed points of an exact BEF.
    FixedPoints {
        #[command(flatten)]
        common: Common,
        /// Tolerance for the per-support solve.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Write synthetic data from the configured generator.
    Gen(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Root seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of repeats; overrides the config.
    #[arg(long)]
    repeats: Option<usize>,
    /// Reference control flow with no practical shortcuts.
    #[arg(long)]
    strict_paper: bool,
    /// CSV output path; overrides the config. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 2 when any repeat fails.
    #[arg(long)]
    strict: bool,
}

enum Failure {
    Config(String),
    Acceptance(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load(common: &Common) -> Result<ExperimentSpec, Failure> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let mut spec: ExperimentSpec = serde_json::from_str(&text)?;
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    if let Some(r) = common.repeats {
        spec.repeats = r;
    }
    if common.strict_paper {
        spec.strict_paper = true;
    }
    if common.out.is_some() {
        spec.output = common.out.clone();
    }
    spec.validate()?;
    Ok(spec)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// The JSON summary goes to stdout when the CSV goes to a file, and to
/// stderr otherwise.
fn emit_summary<T: Serialize>(spec: &ExperimentSpec, summary: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(summary)?;
    if spec.output.is_some() {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Recover(common) => {
            let spec = load(&common)?;
            let (rows, summary) = run_recover(&spec)?;
            write_rows(output(spec.output.as_deref())?, &rows)?;
            emit_summary(&spec, &summary)?;
            let failed = rows.iter().filter(|r| r.failed).count();
            if common.strict && failed > 0 {
                return Err(Failure::Acceptance(format!("{failed} of {} repeats failed", rows.len())));
            }
        }
        Command::PerturbSweep(common) => {
            let spec = load(&common)?;
            let (rows, summary) = run_perturbation_sweep(&spec)?;
            write_rows(output(spec.output.as_deref())?, &rows)?;
            emit_summary(&spec, &summary)?;
            let failed: usize = rows.iter().map(|r| r.failures).sum();
            if common.strict && failed > 0 {
                return Err(Failure::Acceptance(format!("{failed} repeats failed across the sweep")));
            }
        }
        Command::ConvergenceOrder(common) => {
            let spec = load(&common)?;
            let rows = run_convergence_order(&spec)?;
            write_rows(output(spec.output.as_deref())?, &rows)?;
            if common.strict {
                let bad = rows.iter().filter(|r| match (r.kind.as_str(), r.order) {
                    ("matrix", Some(q)) => (q - 1.0).abs() > 0.2,
                    (_, Some(q)) => q < r.power - 1.5,
                    _ => true,
                });
                let n = bad.count();
                if n > 0 {
                    return Err(Failure::Acceptance(format!("{n} runs below the expected order")));
                }
            }
        }
        Command::FixedPoints { common, tol } => {
            let spec = load(&common)?;
            let rows = run_fixed_points(&spec, tol)?;
            write_fixed_points(output(spec.output.as_deref())?, &rows)?;
            let bad = rows.iter().filter(|r| !(r.residual <= 10.0 * tol.max(1e-12))).count();
            if common.strict && bad > 0 {
                return Err(Failure::Acceptance(format!("{bad} fixed points exceed the residual tolerance")));
            }
        }
        Command::Gen(common) => {
            let spec = load(&common)?;
            let generated = run_generate(&spec)?;
            write_generated(output(spec.output.as_deref())?, &generated)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Acceptance(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(2)
        }
    }
}
