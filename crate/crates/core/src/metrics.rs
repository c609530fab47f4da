//! SINR/SCNR evaluation and the two max-min objectives.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scene::Scene;
use crate::CMat;

/// Transmit precoder (`n_tx x n_users`) and radar combiner (`n_rx x n_targets`).
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformers {
    pub w: CMat,
    pub f: CMat,
}

impl Beamformers {
    pub fn new(w: CMat, f: CMat) -> Self {
        Self { w, f }
    }

    pub fn check_dims(&self, scene: &Scene) -> Result<()> {
        if self.w.shape() != (scene.n_tx(), scene.n_users()) {
            return Err(Error::DimensionMismatch(format!(
                "precoder is {:?}, scene needs {:?}",
                self.w.shape(),
                (scene.n_tx(), scene.n_users())
            )));
        }
        if self.f.shape() != (scene.n_rx(), scene.n_targets()) {
            return Err(Error::DimensionMismatch(format!(
                "combiner is {:?}, scene needs {:?}",
                self.f.shape(),
                (scene.n_rx(), scene.n_targets())
            )));
        }
        Ok(())
    }

    /// Largest per-antenna transmit power, `max_i sum_k |w[i,k]|^2`.
    pub fn max_antenna_power(&self) -> f64 {
        antenna_powers(&self.w).max()
    }

    /// Whether every antenna respects `p_tx / n_tx` up to a relative slack.
    pub fn is_feasible(&self, p_tx: f64, rel_tol: f64) -> bool {
        let cap = p_tx / self.w.nrows() as f64;
        self.max_antenna_power() <= cap * (1.0 + rel_tol)
    }
}

pub fn antenna_powers(w: &CMat) -> DVector<f64> {
    DVector::from_fn(w.nrows(), |i, _| w.row(i).norm_squared())
}

/// `|h_k^H w_j|^2` for every user `k` (row) and beam `j` (column).
pub fn comm_gains(scene: &Scene, w: &CMat) -> DMatrix<f64> {
    scene.h.ad_mul(w).map(|c| c.norm_sqr())
}

/// `||f_m^H G_j W||^2` for every target `m` (row) and response `j` (column).
pub fn echo_powers(scene: &Scene, bf: &Beamformers) -> DMatrix<f64> {
    let n_resp = scene.n_responses();
    let beam_power: Vec<f64> = (0..n_resp)
        .map(|j| scene.tx_steering(j).ad_mul(&bf.w).norm_squared())
        .collect();
    DMatrix::from_fn(scene.n_targets(), n_resp, |m, j| {
        let fa = bf.f.column(m).dotc(scene.rx_steering(j));
        (scene.responses[j].amplitude * fa).norm_sqr() * beam_power[j]
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn sinr_from_gains(gains: &DMatrix<f64>, k: usize, sigma2: f64) -> f64 {
    let interference: f64 = (0..gains.ncols())
        .filter(|&j| j != k)
        .map(|j| gains[(k, j)])
        .sum();
    ratio(gains[(k, k)], interference + sigma2)
}

fn scnr_from_powers(powers: &DMatrix<f64>, m: usize, noise: f64) -> f64 {
    let clutter: f64 = (0..powers.ncols())
        .filter(|&j| j != m)
        .map(|j| powers[(m, j)])
        .sum();
    ratio(powers[(m, m)], clutter + noise)
}

/// Receiver noise term `L_r * sigma_s^2 * ||f_m||^2`.
pub(crate) fn sensing_noise(scene: &Scene, f: &CMat, m: usize) -> f64 {
    scene.n_rx() as f64 * scene.sigma2_s * f.column(m).norm_squared()
}

pub fn sinr(scene: &Scene, bf: &Beamformers, k: usize) -> Result<f64> {
    if k >= scene.n_users() {
        return Err(Error::IndexOutOfRange {
            what: "user",
            index: k,
            len: scene.n_users(),
        });
    }
    bf.check_dims(scene)?;
    Ok(sinr_from_gains(
        &comm_gains(scene, &bf.w),
        k,
        scene.sigma2_c,
    ))
}

pub fn scnr(scene: &Scene, bf: &Beamformers, m: usize) -> Result<f64> {
    if m >= scene.n_targets() {
        return Err(Error::IndexOutOfRange {
            what: "target",
            index: m,
            len: scene.n_targets(),
        });
    }
    bf.check_dims(scene)?;
    let powers = echo_powers(scene, bf);
    Ok(scnr_from_powers(&powers, m, sensing_noise(scene, &bf.f, m)))
}

pub fn all_sinr(scene: &Scene, w: &CMat) -> Vec<f64> {
    let gains = comm_gains(scene, w);
    (0..scene.n_users())
        .map(|k| sinr_from_gains(&gains, k, scene.sigma2_c))
        .collect()
}

pub fn all_scnr(scene: &Scene, bf: &Beamformers) -> Vec<f64> {
    let powers = echo_powers(scene, bf);
    (0..scene.n_targets())
        .map(|m| scnr_from_powers(&powers, m, sensing_noise(scene, &bf.f, m)))
        .collect()
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Linear-ratio objective `min_k sinr + delta * min_m scnr`.
pub fn objective_linear(sinr: &[f64], scnr: &[f64], delta: f64) -> f64 {
    min_of(sinr) + delta * min_of(scnr)
}

/// Log-rate objective `min_k ln(1+sinr) + delta * min_m ln(1+scnr)`.
pub fn objective_log(sinr: &[f64], scnr: &[f64], delta: f64) -> f64 {
    min_of(sinr).ln_1p() + delta * min_of(scnr).ln_1p()
}

pub(crate) fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn spread_db(v: &[f64]) -> f64 {
    let lo = min_of(v);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        0.0
    } else {
        to_db(hi / lo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub sinr: Vec<f64>,
    pub scnr: Vec<f64>,
    pub min_sinr: f64,
    pub min_scnr: f64,
    pub objective_p1: f64,
    pub objective_p2: f64,
    pub spread_sinr_db: f64,
    pub spread_scnr_db: f64,
}

impl MetricsReport {
    pub fn csv_header(n_users: usize, n_targets: usize) -> String {
        let mut cols: Vec<String> = (1..=n_users).map(|k| format!("sinr_{k}")).collect();
        cols.extend((1..=n_targets).map(|m| format!("scnr_{m}")));
        cols.extend(["min_sinr_db", "min_scnr_db", "obj_p1", "obj_p2"].map(String::from));
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols: Vec<String> = self
            .sinr
            .iter()
            .chain(&self.scnr)
            .map(|v| format!("{v:.9e}"))
            .collect();
        cols.push(format!("{:.6}", to_db(self.min_sinr)));
        cols.push(format!("{:.6}", to_db(self.min_scnr)));
        cols.push(format!("{:.9e}", self.objective_p1));
        cols.push(format!("{:.9e}", self.objective_p2));
        cols.join(",")
    }
}

pub fn evaluate(scene: &Scene, bf: &Beamformers, delta: f64) -> MetricsReport {
    let sinr = all_sinr(scene, &bf.w);
    let scnr = all_scnr(scene, bf);
    MetricsReport {
        min_sinr: min_of(&sinr),
        min_scnr: min_of(&scnr),
        objective_p1: objective_linear(&sinr, &scnr, delta),
        objective_p2: objective_log(&sinr, &scnr, delta),
        spread_sinr_db: spread_db(&sinr),
        spread_scnr_db: spread_db(&scnr),
        sinr,
        scnr,
    }
}
