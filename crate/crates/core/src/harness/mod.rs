//! Monte-Carlo experiments: convergence traces, the communications/sensing
//! tradeoff, the user sweep, the per-user fairness table and solver timing.
//!
//! Realization `r` always uses the scene seeded with
//! `derive_seed(base.seed, r)`, so every experiment and both solvers see the
//! same scenes. Realizations run in parallel and are aggregated in index
//! order, which makes the CSV output independent of the thread count.

mod experiments;
mod output;

use std::path::PathBuf;

use rayon::prelude::*;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::fp::{self, FpOptions};
use crate::maxmin::{self, SolverOptions};
use crate::scene::{derive_seed, generate_scene};
use crate::trace::Solution;

pub use experiments::{
    run_convergence, run_fairness_table, run_timing, run_tradeoff, run_user_sweep,
    ConvergenceCurve, ConvergencePoint, FairnessRow, SweepRow, TimingRow, TradeoffRow,
};
pub use output::{provenance, CsvTable, VERSION};

/// Environment variable that caps the worker thread count.
pub const THREADS_ENV: &str = "ISAC_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Convergence,
    Tradeoff,
    UserSweep,
    FairnessTable,
    Timing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SolverKind {
    Alg1,
    Fp,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Alg1 => "alg1",
            SolverKind::Fp => "fp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverSet {
    Alg1,
    Fp,
    Both,
}

impl SolverSet {
    pub fn kinds(self) -> Vec<SolverKind> {
        match self {
            SolverSet::Alg1 => vec![SolverKind::Alg1],
            SolverSet::Fp => vec![SolverKind::Fp],
            SolverSet::Both => vec![SolverKind::Alg1, SolverKind::Fp],
        }
    }
}

/// Sensing weights for the tradeoff sweep.
pub const DEFAULT_DELTA_GRID: [f64; 8] = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0, 1e4, 1e6];
pub const DEFAULT_USERS: [usize; 6] = [2, 4, 6, 8, 10, 12];
pub const DEFAULT_MUS: [f64; 3] = [1.0, 10.0, 100.0];

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub base: SystemConfig,
    /// Smoothing parameters (convergence only).
    pub mus: Vec<f64>,
    /// Sensing weights (all kinds except convergence, which uses `base.delta`).
    pub deltas: Vec<f64>,
    /// User counts (user sweep and timing).
    pub users: Vec<usize>,
    pub n_realizations: usize,
    pub solvers: SolverSet,
    pub out_dir: PathBuf,
    pub alg1: SolverOptions,
    pub fp: FpOptions,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl ExperimentSpec {
    /// Spec with the default sweep lists for `kind`.
    pub fn new(kind: ExperimentKind, out_dir: impl Into<PathBuf>) -> Self {
        let deltas = match kind {
            ExperimentKind::Convergence | ExperimentKind::FairnessTable => vec![1.0],
            ExperimentKind::Tradeoff => DEFAULT_DELTA_GRID.to_vec(),
            ExperimentKind::UserSweep | ExperimentKind::Timing => vec![0.0, 1.0],
        };
        Self {
            kind,
            base: SystemConfig::default(),
            mus: DEFAULT_MUS.to_vec(),
            deltas,
            users: DEFAULT_USERS.to_vec(),
            n_realizations: 100,
            solvers: SolverSet::Both,
            out_dir: out_dir.into(),
            alg1: SolverOptions::default(),
            fp: FpOptions::default(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.alg1.validate()?;
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n_realizations == 0 {
            return bad("n_realizations must be at least 1");
        }
        match self.kind {
            ExperimentKind::Convergence if self.mus.is_empty() => return bad("mu list is empty"),
            ExperimentKind::UserSweep | ExperimentKind::Timing if self.users.is_empty() => {
                return bad("user list is empty")
            }
            ExperimentKind::Tradeoff
            | ExperimentKind::UserSweep
            | ExperimentKind::Timing
            | ExperimentKind::FairnessTable
                if self.deltas.is_empty() =>
            {
                return bad("delta list is empty")
            }
            _ => {}
        }
        if self.mus.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return bad("mu values must be finite and > 0");
        }
        if self.deltas.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
            return bad("delta values must be finite and >= 0");
        }
        if self.users.contains(&0) {
            return bad("user counts must be at least 1");
        }
        if self.threads == Some(0) {
            return bad("thread count must be at least 1");
        }
        Ok(())
    }

    /// Configuration of realization `r`.
    pub fn realization(&self, r: usize) -> SystemConfig {
        SystemConfig {
            seed: derive_seed(self.base.seed, r as u64),
            ..self.base.clone()
        }
    }
}

/// Files written by an experiment.
#[derive(Debug, Clone, Default)]
pub struct Outputs {
    pub csv: Vec<PathBuf>,
    pub scripts: Vec<PathBuf>,
}

/// Runs the experiment selected by `spec.kind` and returns the written files.
pub fn run(spec: &ExperimentSpec) -> Result<Outputs> {
    match spec.kind {
        ExperimentKind::Convergence => run_convergence(spec).map(|r| r.1),
        ExperimentKind::Tradeoff => run_tradeoff(spec).map(|r| r.1),
        ExperimentKind::UserSweep => run_user_sweep(spec).map(|r| r.1),
        ExperimentKind::FairnessTable => run_fairness_table(spec).map(|r| r.1),
        ExperimentKind::Timing => run_timing(spec).map(|r| r.1),
    }
}

/// Thread count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidConfig(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

pub fn solve_with(
    kind: SolverKind,
    config: &SystemConfig,
    spec: &ExperimentSpec,
) -> Result<Solution> {
    let scene = generate_scene(config)?;
    match kind {
        SolverKind::Alg1 => maxmin::solve(&scene, config, &spec.alg1),
        SolverKind::Fp => fp::solve_fp(&scene, config, &spec.fp),
    }
}

/// Evaluates `job` for every realization index, in parallel, returning results
/// in index order. The first error in index order is returned.
pub(crate) fn for_realizations<T, F>(spec: &ExperimentSpec, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let work = || {
        (0..spec.n_realizations)
            .into_par_iter()
            .map(&job)
            .collect::<Vec<_>>()
    };
    let results = match spec.threads {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(work),
    };
    results.into_iter().collect()
}
