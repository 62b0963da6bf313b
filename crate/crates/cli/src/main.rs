//! Scenario-driven runner for the graded Drury-Arveson laboratory.
//!
//! Exit status: 0 all checks pass; 1 a tolerance or invariant was violated;
//! 2 invalid input; 3 scale guard tripped.

mod cache;
mod runner;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scenario::{parse_scenario, Scenario, ScenarioError, Task};

#[derive(Parser)]
#[command(
    name = "dalab",
    version,
    about = "Graded diagnostics for quotient modules of the Drury-Arveson space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scenario file (JSON; see schema/scenario.schema.json)
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for CSV tables and summary.json
    /// (defaults to the scenario's outDir, then ./dalab-out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cache directory (defaults to the scenario's cacheDir, then $DALAB_CACHE_DIR)
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Override the scenario's maxDegree
    #[arg(long)]
    max_degree: Option<u32>,
    /// Override the scenario's Schatten exponent list, comma separated
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-degree dimensions of the graded pieces
    Dims(CommonArgs),
    /// Hilbert dimensions and the fitted Hilbert polynomial
    Hilbert(CommonArgs),
    /// Friedrichs angles and tensor-power decay for component subjects
    Angles(CommonArgs),
    /// Commutator series, Schatten partial sums and decay fits
    Essnorm(CommonArgs),
    /// Closedness witness and sum floors for component subjects
    Closedness(CommonArgs),
    /// Graded similarity map diagnostics (requires a map in the scenario)
    Similarity(CommonArgs),
    /// Run every task the scenario supports
    Report(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, args) = match &cli.command {
        Command::Dims(a) => (Task::Dims, a.clone()),
        Command::Hilbert(a) => (Task::Hilbert, a.clone()),
        Command::Angles(a) => (Task::Angles, a.clone()),
        Command::Essnorm(a) => (Task::Essnorm, a.clone()),
        Command::Closedness(a) => (Task::Closedness, a.clone()),
        Command::Similarity(a) => (Task::Similarity, a.clone()),
        Command::Report(a) => (Task::FullReport, a.clone()),
    };

    let mut scenario = match parse_scenario(&args.scenario) {
        Ok(s) => s,
        Err(e @ ScenarioError::ScaleGuard { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(code) = apply_overrides(&mut scenario, &args, task) {
        return code;
    }

    let cache_dir = args
        .cache
        .or_else(|| scenario.cache_dir.clone())
        .or_else(|| std::env::var_os("DALAB_CACHE_DIR").map(PathBuf::from));
    let out_dir = args
        .out
        .or_else(|| scenario.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("dalab-out"));

    match runner::run_scenario(&scenario, &out_dir, cache_dir) {
        Ok(outcome) => {
            for t in &outcome.summary.tasks {
                println!("task {}: {:?}", t.task, t.verdict);
            }
            if outcome.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn apply_overrides(
    scenario: &mut Scenario,
    args: &CommonArgs,
    task: Task,
) -> Result<(), ExitCode> {
    scenario.tasks = vec![task];
    if task == Task::Similarity && scenario.map.is_none() {
        eprintln!("error: task `similarity` requires a map in the scenario");
        return Err(ExitCode::from(2));
    }
    if let Some(n) = args.max_degree {
        if n < 2 {
            eprintln!("error: --max-degree must be at least 2");
            return Err(ExitCode::from(2));
        }
        let dim = dalab_core::fock::graded_dim(scenario.d, n as usize);
        if dim > scenario::DEFAULT_DIM_CAP as u128 {
            eprintln!(
                "error: scale guard: the largest requested graded piece has dimension {dim}, \
                 above the cap {}",
                scenario::DEFAULT_DIM_CAP
            );
            return Err(ExitCode::from(3));
        }
        scenario.max_degree = n;
    }
    if let Some(ps) = &args.p {
        if ps.iter().any(|&p| p < 1.0) {
            eprintln!("error: --p values must be >= 1");
            return Err(ExitCode::from(2));
        }
        scenario.p_list = ps.clone();
    }
    Ok(())
}
