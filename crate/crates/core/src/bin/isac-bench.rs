use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use isac_beam::harness::{self, ExperimentKind, ExperimentSpec, SolverSet};
use isac_beam::SystemConfig;

/// Monte-Carlo benchmarks for the ISAC max-min beamforming solvers.
///
/// Results are written as CSV files with a provenance footer, next to a
/// matplotlib script per experiment. Set ISAC_THREADS to limit worker threads.
#[derive(Parser, Debug)]
#[command(name = "isac-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML file with system parameters; missing keys take default values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides the value from --config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Channel realizations per configuration.
    #[arg(long, global = true, default_value_t = 100)]
    realizations: usize,

    #[arg(long, global = true, value_enum, default_value_t = Solver::Both)]
    solver: Solver,

    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,

    /// Smoothing parameters, comma-separated (convergence).
    #[arg(long, global = true, value_delimiter = ',')]
    mu: Option<Vec<f64>>,

    /// Sensing weights, comma-separated.
    #[arg(long, global = true, value_delimiter = ',')]
    delta: Option<Vec<f64>>,

    /// User counts, comma-separated (usersweep, timing).
    #[arg(long, global = true, value_delimiter = ',')]
    users: Option<Vec<usize>>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Objective against iteration, averaged over realizations.
    Convergence,
    /// Minimum SINR and SCNR across sensing weights.
    Tradeoff,
    /// Minimum SINR and SCNR across user counts.
    Usersweep,
    /// Per-user SINR and per-target SCNR.
    Fairness,
    /// Mean solve time per user count and sensing weight.
    Timing,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Solver {
    Alg1,
    Fp,
    Both,
}

fn build_spec(cli: &Cli) -> isac_beam::Result<ExperimentSpec> {
    let kind = match cli.command {
        Command::Convergence => ExperimentKind::Convergence,
        Command::Tradeoff => ExperimentKind::Tradeoff,
        Command::Usersweep => ExperimentKind::UserSweep,
        Command::Fairness => ExperimentKind::FairnessTable,
        Command::Timing => ExperimentKind::Timing,
    };
    let mut spec = ExperimentSpec::new(kind, &cli.out);
    spec.base = match &cli.config {
        Some(path) => SystemConfig::load(path)?,
        None => SystemConfig::default(),
    };
    if let Some(seed) = cli.seed {
        spec.base.seed = seed;
    }
    spec.n_realizations = cli.realizations;
    spec.solvers = match cli.solver {
        Solver::Alg1 => SolverSet::Alg1,
        Solver::Fp => SolverSet::Fp,
        Solver::Both => SolverSet::Both,
    };
    if let Some(mu) = &cli.mu {
        spec.mus = mu.clone();
    }
    if let Some(delta) = &cli.delta {
        if kind == ExperimentKind::Convergence {
            // a single weight for the traces
            spec.base.delta = delta.first().copied().unwrap_or(spec.base.delta);
        }
        spec.deltas = delta.clone();
    }
    if let Some(users) = &cli.users {
        spec.users = users.clone();
    }
    spec.threads = harness::threads_from_env()?;
    spec.validate()?;
    Ok(spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_spec(&cli).and_then(|spec| harness::run(&spec));
    match result {
        Ok(outputs) => {
            for path in outputs.csv.iter().chain(&outputs.scripts) {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("isac-bench: {e}");
            ExitCode::FAILURE
        }
    }
}
