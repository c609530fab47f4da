//! Per-iteration solver history and its CSV form.

use std::io::Write;
use std::time::Duration;

use crate::metrics::{min_of, to_db, Beamformers, MetricsReport};

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Weighted surrogate the solver monitors for convergence.
    pub surrogate: f64,
    pub objective_p1: f64,
    pub objective_p2: f64,
    pub sinr: Vec<f64>,
    pub scnr: Vec<f64>,
    /// Wall-clock time since the solve started.
    pub elapsed: Duration,
}

impl IterationRecord {
    pub fn min_sinr(&self) -> f64 {
        min_of(&self.sinr)
    }

    pub fn min_scnr(&self) -> f64 {
        min_of(&self.scnr)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
}

impl RunTrace {
    pub const CSV_HEADER: &'static str =
        "iteration,surrogate,obj_p1,min_sinr_db,min_scnr_db,elapsed_ms";

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn surrogates(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.surrogate).collect()
    }

    pub fn objectives_p1(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective_p1).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.records {
            writeln!(
                out,
                "{},{:.12e},{:.12e},{:.6},{:.6},{:.3}",
                r.iteration,
                r.surrogate,
                r.objective_p1,
                to_db(r.min_sinr()),
                to_db(r.min_scnr()),
                r.elapsed.as_secs_f64() * 1e3
            )?;
        }
        Ok(())
    }
}

/// Output of either solver.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Beamformers that are reported (the selected iterate).
    pub beamformers: Beamformers,
    pub report: MetricsReport,
    pub trace: RunTrace,
    /// Whether the stopping tolerance was met before the iteration cap.
    pub converged: bool,
    /// Index into the trace of the reported iterate; 0 is the initial point.
    pub selected_iteration: usize,
    pub elapsed: Duration,
}
