use std::fs;
use std::path::Path;

use isac_beam::harness::{self, ExperimentKind, ExperimentSpec, SolverSet};
use isac_beam::SystemConfig;

fn small_spec(kind: ExperimentKind, out: &Path) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(kind, out);
    spec.base = SystemConfig {
        n_tx: 4,
        n_rx: 4,
        n_users: 2,
        n_targets: 1,
        n_clutter: 2,
        seed: 99,
        ..SystemConfig::default()
    };
    spec.n_realizations = 3;
    spec.alg1.outer_max = 30;
    spec.fp.outer_max = 4;
    spec.fp.epigraph.iters = 100;
    spec
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .collect()
}

#[test]
fn tradeoff_csv_schema_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(ExperimentKind::Tradeoff, dir.path());
    spec.deltas = vec![0.0, 1.0, 100.0];
    let out = harness::run(&spec).unwrap();
    let csv = fs::read_to_string(dir.path().join("tradeoff.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "solver,delta,min_sinr_db,min_scnr_db"
    );
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2 * 3);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 4);
        assert!(fields[0] == "alg1" || fields[0] == "fp");
        for f in &fields[1..] {
            assert!(f.parse::<f64>().unwrap().is_finite());
        }
    }
    let footer = csv.lines().last().unwrap();
    assert!(footer.starts_with("# isac-beam v"), "{footer}");
    assert!(footer.contains("seed=99") && footer.contains("realizations=3"));
    assert!(out.scripts.iter().any(|p| p.ends_with("plot_tradeoff.py")));
}

#[test]
fn user_sweep_single_solver() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(ExperimentKind::UserSweep, dir.path());
    spec.solvers = SolverSet::Alg1;
    spec.users = vec![1, 2, 3];
    spec.deltas = vec![1.0];
    let (rows, _) = harness::run_user_sweep(&spec).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.solver.name() == "alg1"));
    let csv = fs::read_to_string(dir.path().join("usersweep.csv")).unwrap();
    assert_eq!(data_rows(&csv).len(), 3);
    assert!(dir.path().join("usersweep_timing.csv").exists());
}

#[test]
fn fairness_columns_follow_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(ExperimentKind::FairnessTable, dir.path());
    let (rows, _) = harness::run_fairness_table(&spec).unwrap();
    for row in &rows {
        assert_eq!(row.sinr_db.len(), 2);
        assert_eq!(row.scnr_db.len(), 1);
        assert!(row.sinr_spread_db() >= 0.0);
    }
    let csv = fs::read_to_string(dir.path().join("fairness.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(
        header.contains("sinr_1") && header.contains("sinr_2") && header.contains("scnr_1"),
        "{header}"
    );
}

#[test]
fn convergence_writes_one_trace_per_curve() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(ExperimentKind::Convergence, dir.path());
    spec.mus = vec![1.0, 10.0];
    let (curves, out) = harness::run_convergence(&spec).unwrap();
    assert_eq!(curves.len(), 3);
    assert_eq!(out.csv.len(), 4);
    for curve in &curves {
        assert!(!curve.points.is_empty());
        assert_eq!(curve.points[0].iteration, 0);
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let render = |threads| {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = small_spec(ExperimentKind::Tradeoff, dir.path());
        spec.deltas = vec![0.5, 5.0];
        spec.threads = Some(threads);
        harness::run(&spec).unwrap();
        fs::read_to_string(dir.path().join("tradeoff.csv")).unwrap()
    };
    assert_eq!(render(1), render(3));
}

#[test]
fn invalid_specs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(ExperimentKind::Tradeoff, dir.path());
    spec.n_realizations = 0;
    assert!(harness::run(&spec).is_err());
    let mut spec = small_spec(ExperimentKind::Tradeoff, dir.path());
    spec.deltas = vec![-1.0];
    assert!(harness::run(&spec).is_err());
}
