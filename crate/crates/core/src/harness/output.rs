//! CSV tables with a provenance footer, and matplotlib scripts that plot them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::ExperimentSpec;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, footer: &str) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        let _ = writeln!(out, "# {footer}");
        out
    }

    pub fn write(&self, path: &Path, footer: &str) -> Result<()> {
        std::fs::write(path, self.render(footer)).map_err(|e| Error::io(path, e))
    }
}

/// Footer line: configuration digest, master seed, realization count, version.
pub fn provenance(spec: &ExperimentSpec) -> String {
    format!(
        "isac-beam {VERSION} config={} seed={} realizations={}",
        spec.base.digest(),
        spec.base.seed,
        spec.n_realizations
    )
}

pub(crate) fn db(x: f64) -> String {
    format!("{:.6}", crate::metrics::to_db(x))
}

pub(crate) fn num(x: f64) -> String {
    format!("{x:.9e}")
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub(crate) fn write_script(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    let text = format!("{SCRIPT_PRELUDE}{body}");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

const SCRIPT_PRELUDE: &str = r##"#!/usr/bin/env python3
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read(name):
    with open(os.path.join(HERE, name)) as fh:
        rows = [r for r in csv.DictReader(l for l in fh if not l.startswith("#"))]
    return rows


def col(rows, key):
    return [float(r[key]) for r in rows]


"##;

pub(crate) fn convergence_script(files: &[(String, String)]) -> String {
    let mut s = String::from("CURVES = [\n");
    for (label, file) in files {
        let _ = writeln!(s, "    ({label:?}, {file:?}),");
    }
    s.push_str(
        r#"]

fig, ax = plt.subplots()
for label, name in CURVES:
    rows = read(name)
    ax.plot(col(rows, "iteration"), col(rows, "obj_p1"), label=label)
ax.set_xlabel("iteration")
ax.set_ylabel("objective (min SINR + delta min SCNR)")
ax.set_yscale("log")
ax.legend()
fig.savefig(os.path.join(HERE, "convergence.png"), dpi=150)
"#,
    );
    s
}

pub(crate) const TRADEOFF_SCRIPT: &str = r#"rows = read("tradeoff.csv")
fig, ax = plt.subplots()
for solver in sorted({r["solver"] for r in rows}):
    sub = [r for r in rows if r["solver"] == solver]
    ax.plot(col(sub, "min_sinr_db"), col(sub, "min_scnr_db"), marker="o", label=solver)
ax.set_xlabel("mean min SINR (dB)")
ax.set_ylabel("mean min SCNR (dB)")
ax.legend()
fig.savefig(os.path.join(HERE, "tradeoff.png"), dpi=150)
"#;

pub(crate) const USERSWEEP_SCRIPT: &str = r#"rows = read("usersweep.csv")
fig, (a1, a2) = plt.subplots(1, 2, figsize=(10, 4))
for key in sorted({(r["solver"], r["delta"]) for r in rows}):
    sub = [r for r in rows if (r["solver"], r["delta"]) == key]
    label = "%s, delta=%s" % key
    a1.plot(col(sub, "users"), col(sub, "min_sinr_db"), marker="o", label=label)
    a2.plot(col(sub, "users"), col(sub, "min_scnr_db"), marker="o", label=label)
a1.set_xlabel("users K")
a1.set_ylabel("mean min SINR (dB)")
a2.set_xlabel("users K")
a2.set_ylabel("mean min SCNR (dB)")
a1.legend()
fig.savefig(os.path.join(HERE, "usersweep.png"), dpi=150)
"#;

pub(crate) const FAIRNESS_SCRIPT: &str = r#"rows = read("fairness.csv")
keys = [k for k in rows[0] if k.startswith("sinr_") or k.startswith("scnr_")]
fig, ax = plt.subplots()
width = 0.8 / len(rows)
for i, r in enumerate(rows):
    xs = [j + i * width for j in range(len(keys))]
    ax.bar(xs, [float(r[k]) for k in keys], width, label="%s, delta=%s" % (r["solver"], r["delta"]))
ax.set_xticks([j + 0.4 - width / 2 for j in range(len(keys))])
ax.set_xticklabels(keys)
ax.set_ylabel("mean ratio (dB)")
ax.legend()
fig.savefig(os.path.join(HERE, "fairness.png"), dpi=150)
"#;

pub(crate) const TIMING_SCRIPT: &str = r#"rows = read("timing.csv")
fig, ax = plt.subplots()
for key in sorted({(r["solver"], r["delta"]) for r in rows}):
    sub = [r for r in rows if (r["solver"], r["delta"]) == key]
    ax.plot(col(sub, "users"), col(sub, "mean_seconds"), marker="o", label="%s, delta=%s" % key)
ax.set_xlabel("users K")
ax.set_ylabel("mean solve time (s)")
ax.set_yscale("log")
ax.legend()
fig.savefig(os.path.join(HERE, "timing.png"), dpi=150)
"#;
