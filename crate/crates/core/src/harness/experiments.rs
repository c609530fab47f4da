use std::time::Duration;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::harness::output::{self, db, num, CsvTable};
use crate::harness::{
    for_realizations, provenance, solve_with, ExperimentKind, ExperimentSpec, Outputs, SolverKind,
};
use crate::metrics::to_db;

fn check_kind(spec: &ExperimentSpec, kind: ExperimentKind) -> Result<()> {
    spec.validate()?;
    if spec.kind != kind {
        return Err(Error::InvalidConfig(format!(
            "expected a {kind:?} spec, got {:?}",
            spec.kind
        )));
    }
    output::ensure_dir(&spec.out_dir)
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn fmt_param(x: f64) -> String {
    format!("{x}")
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    pub iteration: usize,
    pub surrogate: f64,
    pub objective_p1: f64,
    /// Realization-averaged linear minima.
    pub min_sinr: f64,
    pub min_scnr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCurve {
    pub solver: SolverKind,
    /// `None` for the baseline, which has no smoothing parameter.
    pub mu: Option<f64>,
    pub points: Vec<ConvergencePoint>,
    pub mean_iterations: f64,
    pub mean_seconds: f64,
}

/// Iteration-wise averages of the solver traces. Shorter traces are extended
/// with their final value.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<(Vec<ConvergenceCurve>, Outputs)> {
    check_kind(spec, ExperimentKind::Convergence)?;
    let mut runs: Vec<(SolverKind, Option<f64>)> = Vec::new();
    for kind in spec.solvers.kinds() {
        match kind {
            SolverKind::Alg1 => runs.extend(spec.mus.iter().map(|&mu| (kind, Some(mu)))),
            SolverKind::Fp => runs.push((kind, None)),
        }
    }

    let footer = provenance(spec);
    let mut outputs = Outputs::default();
    let mut curves = Vec::new();
    let mut plotted = Vec::new();
    let mut timing = CsvTable::new(["solver", "mu", "mean_iterations", "mean_seconds"]);
    for (kind, mu) in runs {
        let mut local = spec.clone();
        if let Some(mu) = mu {
            local.alg1.mu = mu;
        }
        let traces = for_realizations(&local, |r| {
            let sol = solve_with(kind, &local.realization(r), &local)?;
            Ok((sol.trace, sol.elapsed))
        })?;
        let len = traces.iter().map(|(t, _)| t.len()).max().unwrap_or(0);
        let points = (0..len)
            .map(|i| {
                let at = |t: &crate::trace::RunTrace| t.records[i.min(t.len() - 1)].clone();
                let recs: Vec<_> = traces.iter().map(|(t, _)| at(t)).collect();
                ConvergencePoint {
                    iteration: i,
                    surrogate: mean(recs.iter().map(|r| r.surrogate)),
                    objective_p1: mean(recs.iter().map(|r| r.objective_p1)),
                    min_sinr: mean(recs.iter().map(|r| r.min_sinr())),
                    min_scnr: mean(recs.iter().map(|r| r.min_scnr())),
                }
            })
            .collect::<Vec<_>>();

        let mut table = CsvTable::new([
            "iteration",
            "surrogate",
            "obj_p1",
            "min_sinr_db",
            "min_scnr_db",
        ]);
        for p in &points {
            table.push(vec![
                p.iteration.to_string(),
                num(p.surrogate),
                num(p.objective_p1),
                db(p.min_sinr),
                db(p.min_scnr),
            ]);
        }
        let (name, label) = match mu {
            Some(mu) => (
                format!("convergence_{}_mu{}.csv", kind.name(), fmt_param(mu)),
                format!("{} mu={}", kind.name(), mu),
            ),
            None => (
                format!("convergence_{}.csv", kind.name()),
                kind.name().to_string(),
            ),
        };
        let path = spec.out_dir.join(&name);
        table.write(&path, &footer)?;
        outputs.csv.push(path);
        plotted.push((label, name));

        let mean_iterations = mean(traces.iter().map(|(t, _)| (t.len() - 1) as f64));
        let mean_seconds = mean(traces.iter().map(|(_, e)| e.as_secs_f64()));
        timing.push(vec![
            kind.name().into(),
            mu.map(fmt_param).unwrap_or_default(),
            format!("{mean_iterations}"),
            num(mean_seconds),
        ]);
        curves.push(ConvergenceCurve {
            solver: kind,
            mu,
            points,
            mean_iterations,
            mean_seconds,
        });
    }
    let path = spec.out_dir.join("convergence_timing.csv");
    timing.write(&path, &footer)?;
    outputs.csv.push(path);
    outputs.scripts.push(output::write_script(
        &spec.out_dir,
        "plot_convergence.py",
        &output::convergence_script(&plotted),
    )?);
    Ok((curves, outputs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffRow {
    pub solver: SolverKind,
    pub delta: f64,
    /// Realization means of the linear minima.
    pub min_sinr: f64,
    pub min_scnr: f64,
}

/// Minimum SINR and SCNR against the sensing weight.
pub fn run_tradeoff(spec: &ExperimentSpec) -> Result<(Vec<TradeoffRow>, Outputs)> {
    check_kind(spec, ExperimentKind::Tradeoff)?;
    let mut rows = Vec::new();
    for kind in spec.solvers.kinds() {
        for &delta in &spec.deltas {
            let minima = for_realizations(spec, |r| {
                let cfg = SystemConfig {
                    delta,
                    ..spec.realization(r)
                };
                let sol = solve_with(kind, &cfg, spec)?;
                Ok((sol.report.min_sinr, sol.report.min_scnr))
            })?;
            rows.push(TradeoffRow {
                solver: kind,
                delta,
                min_sinr: mean(minima.iter().map(|m| m.0)),
                min_scnr: mean(minima.iter().map(|m| m.1)),
            });
        }
    }
    let mut table = CsvTable::new(["solver", "delta", "min_sinr_db", "min_scnr_db"]);
    for r in &rows {
        table.push(vec![
            r.solver.name().into(),
            fmt_param(r.delta),
            db(r.min_sinr),
            db(r.min_scnr),
        ]);
    }
    let path = spec.out_dir.join("tradeoff.csv");
    table.write(&path, &provenance(spec))?;
    let script = output::write_script(&spec.out_dir, "plot_tradeoff.py", output::TRADEOFF_SCRIPT)?;
    Ok((
        rows,
        Outputs {
            csv: vec![path],
            scripts: vec![script],
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub solver: SolverKind,
    pub delta: f64,
    pub users: usize,
    pub min_sinr: f64,
    pub min_scnr: f64,
    pub mean_seconds: f64,
}

/// Minimum SINR and SCNR against the number of users.
pub fn run_user_sweep(spec: &ExperimentSpec) -> Result<(Vec<SweepRow>, Outputs)> {
    check_kind(spec, ExperimentKind::UserSweep)?;
    let mut rows = Vec::new();
    for kind in spec.solvers.kinds() {
        for &delta in &spec.deltas {
            let mut users = spec.users.clone();
            users.sort_unstable();
            users.dedup();
            for k in users {
                let out = for_realizations(spec, |r| {
                    let cfg = SystemConfig {
                        delta,
                        n_users: k,
                        ..spec.realization(r)
                    };
                    let sol = solve_with(kind, &cfg, spec)?;
                    Ok((sol.report.min_sinr, sol.report.min_scnr, sol.elapsed))
                })?;
                rows.push(SweepRow {
                    solver: kind,
                    delta,
                    users: k,
                    min_sinr: mean(out.iter().map(|o| o.0)),
                    min_scnr: mean(out.iter().map(|o| o.1)),
                    mean_seconds: mean(out.iter().map(|o| o.2.as_secs_f64())),
                });
            }
        }
    }
    let footer = provenance(spec);
    let mut table = CsvTable::new(["solver", "delta", "users", "min_sinr_db", "min_scnr_db"]);
    let mut timing = CsvTable::new(["solver", "delta", "users", "mean_seconds"]);
    for r in &rows {
        let key = [
            r.solver.name().to_string(),
            fmt_param(r.delta),
            r.users.to_string(),
        ];
        let mut row = key.to_vec();
        row.extend([db(r.min_sinr), db(r.min_scnr)]);
        table.push(row);
        let mut row = key.to_vec();
        row.push(num(r.mean_seconds));
        timing.push(row);
    }
    let path = spec.out_dir.join("usersweep.csv");
    table.write(&path, &footer)?;
    let timing_path = spec.out_dir.join("usersweep_timing.csv");
    timing.write(&timing_path, &footer)?;
    let script =
        output::write_script(&spec.out_dir, "plot_usersweep.py", output::USERSWEEP_SCRIPT)?;
    Ok((
        rows,
        Outputs {
            csv: vec![path, timing_path],
            scripts: vec![script],
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FairnessRow {
    pub solver: SolverKind,
    pub delta: f64,
    /// Per-user SINR averaged over realizations, dB.
    pub sinr_db: Vec<f64>,
    /// Per-target SCNR averaged over realizations, dB.
    pub scnr_db: Vec<f64>,
    /// Realization mean of the minimum SINR, dB.
    pub min_sinr_db: f64,
    pub min_scnr_db: f64,
}

impl FairnessRow {
    /// Largest minus smallest entry of `sinr_db`.
    pub fn sinr_spread_db(&self) -> f64 {
        spread(&self.sinr_db)
    }

    pub fn scnr_spread_db(&self) -> f64 {
        spread(&self.scnr_db)
    }
}

/// Per-user SINR and per-target SCNR, averaged over realizations.
pub fn run_fairness_table(spec: &ExperimentSpec) -> Result<(Vec<FairnessRow>, Outputs)> {
    check_kind(spec, ExperimentKind::FairnessTable)?;
    let (n_users, n_targets) = (spec.base.n_users, spec.base.n_targets);
    let mut rows = Vec::new();
    for kind in spec.solvers.kinds() {
        for &delta in &spec.deltas {
            let reports = for_realizations(spec, |r| {
                let cfg = SystemConfig {
                    delta,
                    ..spec.realization(r)
                };
                Ok(solve_with(kind, &cfg, spec)?.report)
            })?;
            rows.push(FairnessRow {
                solver: kind,
                delta,
                sinr_db: (0..n_users)
                    .map(|k| to_db(mean(reports.iter().map(|r| r.sinr[k]))))
                    .collect(),
                scnr_db: (0..n_targets)
                    .map(|m| to_db(mean(reports.iter().map(|r| r.scnr[m]))))
                    .collect(),
                min_sinr_db: to_db(mean(reports.iter().map(|r| r.min_sinr))),
                min_scnr_db: to_db(mean(reports.iter().map(|r| r.min_scnr))),
            });
        }
    }
    let mut header = vec!["solver".to_string(), "delta".to_string()];
    header.extend((1..=n_users).map(|k| format!("sinr_{k}_db")));
    header.extend((1..=n_targets).map(|m| format!("scnr_{m}_db")));
    header.extend(["min_sinr_db", "min_scnr_db", "sinr_spread_db"].map(String::from));
    let mut table = CsvTable::new(header);
    let f6 = |x: f64| format!("{x:.6}");
    for r in &rows {
        let mut row = vec![r.solver.name().to_string(), fmt_param(r.delta)];
        row.extend(r.sinr_db.iter().chain(&r.scnr_db).map(|&v| f6(v)));
        row.extend([f6(r.min_sinr_db), f6(r.min_scnr_db), f6(r.sinr_spread_db())]);
        table.push(row);
    }
    let path = spec.out_dir.join("fairness.csv");
    table.write(&path, &provenance(spec))?;
    let script = output::write_script(&spec.out_dir, "plot_fairness.py", output::FAIRNESS_SCRIPT)?;
    Ok((
        rows,
        Outputs {
            csv: vec![path],
            scripts: vec![script],
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub solver: SolverKind,
    pub delta: f64,
    pub users: usize,
    pub mean_seconds: f64,
    pub mean_iterations: f64,
}

/// Wall-clock solve time per configuration. Solves run one at a time so the
/// two solvers are measured under the same load; each configuration starts
/// with one untimed warm-up solve.
pub fn run_timing(spec: &ExperimentSpec) -> Result<(Vec<TimingRow>, Outputs)> {
    check_kind(spec, ExperimentKind::Timing)?;
    let kinds = spec.solvers.kinds();
    let mut users = spec.users.clone();
    users.sort_unstable();
    users.dedup();
    let mut rows = Vec::new();
    for &k in &users {
        for &delta in &spec.deltas {
            let cfg_at = |r: usize| SystemConfig {
                delta,
                n_users: k,
                ..spec.realization(r)
            };
            for &kind in &kinds {
                solve_with(kind, &cfg_at(0), spec)?;
            }
            let mut totals = vec![(Duration::ZERO, 0usize); kinds.len()];
            for r in 0..spec.n_realizations {
                let cfg = cfg_at(r);
                for (slot, &kind) in totals.iter_mut().zip(&kinds) {
                    let sol = solve_with(kind, &cfg, spec)?;
                    slot.0 += sol.elapsed;
                    slot.1 += sol.trace.len() - 1;
                }
            }
            let n = spec.n_realizations as f64;
            for (&(time, iters), &kind) in totals.iter().zip(&kinds) {
                rows.push(TimingRow {
                    solver: kind,
                    delta,
                    users: k,
                    mean_seconds: time.as_secs_f64() / n,
                    mean_iterations: iters as f64 / n,
                });
            }
        }
    }
    let mut table = CsvTable::new([
        "users",
        "delta",
        "solver",
        "mean_seconds",
        "mean_iterations",
    ]);
    for r in &rows {
        table.push(vec![
            r.users.to_string(),
            fmt_param(r.delta),
            r.solver.name().into(),
            num(r.mean_seconds),
            format!("{}", r.mean_iterations),
        ]);
    }
    let path = spec.out_dir.join("timing.csv");
    table.write(&path, &provenance(spec))?;
    let script = output::write_script(&spec.out_dir, "plot_timing.py", output::TIMING_SCRIPT)?;
    Ok((
        rows,
        Outputs {
            csv: vec![path],
            scripts: vec![script],
        },
    ))
}
