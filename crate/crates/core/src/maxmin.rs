//! Low-complexity first-order solver for the log-rate max-min problem.
//!
//! The pointwise minima are replaced by softmin weights, the rate terms are
//! decoupled with Lagrangian-dual and quadratic transforms (auxiliaries `xi`
//! and `theta`), and the precoder subproblem is handled by minorize-maximize
//! steps whose maximizer is a per-antenna row normalization.

use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{
    dominant_eigenpair, hermitian_solve, project_per_antenna, HermitianMatrix, ProjectionMode,
};
use crate::metrics::{self, evaluate, sensing_noise, Beamformers};
use crate::scene::Scene;
use crate::trace::{IterationRecord, RunTrace, Solution};
use crate::{CMat, CVec};

/// Softmin weights and transform auxiliaries.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxState {
    pub z_c: DVector<f64>,
    pub z_s: DVector<f64>,
    pub xi_c: DVector<f64>,
    pub xi_s: DVector<f64>,
    pub theta_c: CVec,
    /// One row per target, one column per user.
    pub theta_s: CMat,
}

impl AuxState {
    /// Zero auxiliaries with uniform weights.
    pub fn zeros(n_users: usize, n_targets: usize) -> Self {
        Self {
            z_c: DVector::from_element(n_users, 1.0 / n_users as f64),
            z_s: DVector::from_element(n_targets, 1.0 / n_targets as f64),
            xi_c: DVector::zeros(n_users),
            xi_s: DVector::zeros(n_targets),
            theta_c: CVec::zeros(n_users),
            theta_s: CMat::zeros(n_targets, n_users),
        }
    }
}

/// How the smoothing parameter evolves over outer iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuSchedule {
    Fixed,
    /// `mu_t = min(mu, start * growth^t)`.
    Warmup {
        start: f64,
        growth: f64,
    },
}

/// Which iterate a solver reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Best iterate under the linear-ratio objective.
    BestLinear,
    /// Best iterate under the log-rate objective.
    BestLog,
    Last,
}

/// Auxiliaries at which the softmin weights are evaluated each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightOrder {
    /// Re-tightened at the current beamformers, so `f = ln(1 + ratio)`.
    TightAuxiliaries,
    /// Carried over from the previous iteration. Can collapse the weights
    /// onto a single user once the precoder has moved far.
    PreviousAuxiliaries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub mu: f64,
    pub weights: WeightOrder,
    pub schedule: MuSchedule,
    pub outer_max: usize,
    pub inner_w: usize,
    pub tol: f64,
    pub selection: Selection,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            mu: 10.0,
            weights: WeightOrder::TightAuxiliaries,
            schedule: MuSchedule::Fixed,
            outer_max: 500,
            inner_w: 5,
            tol: 1e-5,
            selection: Selection::BestLinear,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || self.inner_w == 0 || self.outer_max == 0 || !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig(
                "mu must be > 0, inner_w and outer_max >= 1, tol >= 0".into(),
            ));
        }
        Ok(())
    }

    fn mu_at(&self, iteration: usize) -> f64 {
        match self.schedule {
            MuSchedule::Fixed => self.mu,
            MuSchedule::Warmup { start, growth } => {
                (start * growth.powi(iteration as i32)).min(self.mu)
            }
        }
    }
}

/// Per-iteration quantities that every update shares.
pub(crate) struct Couplings {
    /// `h_k^H w_j`, users by beams.
    pub hw: CMat,
    /// `a_t(j)^H W`, responses by beams.
    pub atw: CMat,
    /// `amplitude_j * f_m^H a_r(j)`, targets by responses.
    pub gain: CMat,
    /// `L_r sigma_s^2 ||f_m||^2`.
    pub noise_s: Vec<f64>,
}

impl Couplings {
    pub fn new(scene: &Scene, bf: &Beamformers) -> Self {
        Self {
            hw: scene.h.ad_mul(&bf.w),
            atw: transmit_projections(scene, &bf.w),
            gain: echo_gains(scene, &bf.f),
            noise_s: (0..scene.n_targets())
                .map(|m| sensing_noise(scene, &bf.f, m))
                .collect(),
        }
    }

    /// `sum_j |h_k^H w_j|^2 + sigma_c^2`.
    pub fn comm_total(&self, k: usize, sigma2: f64) -> f64 {
        self.hw.row(k).norm_squared() + sigma2
    }

    /// `||f_m^H G_j W||^2`.
    pub fn echo(&self, m: usize, j: usize) -> f64 {
        self.gain[(m, j)].norm_sqr() * self.atw.row(j).norm_squared()
    }

    /// `sum_j ||f_m^H G_j W||^2 + L_r sigma_s^2 ||f_m||^2`.
    pub fn sense_total(&self, m: usize) -> f64 {
        (0..self.atw.nrows()).map(|j| self.echo(m, j)).sum::<f64>() + self.noise_s[m]
    }

    /// Row vector `f_m^H G_m W` as a column of length K.
    pub fn target_signal(&self, m: usize) -> CVec {
        self.atw.row(m).transpose() * self.gain[(m, m)]
    }
}

/// Rows `a_t(j)^H W` for every response.
pub(crate) fn transmit_projections(scene: &Scene, w: &CMat) -> CMat {
    let mut out = CMat::zeros(scene.n_responses(), w.ncols());
    for j in 0..scene.n_responses() {
        out.set_row(j, &scene.tx_steering(j).ad_mul(w));
    }
    out
}

pub(crate) fn echo_gains(scene: &Scene, f: &CMat) -> CMat {
    CMat::from_fn(f.ncols(), scene.n_responses(), |m, j| {
        scene.responses[j].amplitude * f.column(m).dotc(scene.rx_steering(j))
    })
}

/// `f_ck` and `f_sm`: the transformed rate terms at the given auxiliaries.
pub fn surrogate_terms(
    scene: &Scene,
    bf: &Beamformers,
    aux: &AuxState,
) -> (DVector<f64>, DVector<f64>) {
    let cp = Couplings::new(scene, bf);
    let f_c = DVector::from_fn(scene.n_users(), |k, _| {
        let xi = aux.xi_c[k];
        let th = aux.theta_c[k];
        xi.ln_1p() + 2.0 * (1.0 + xi).sqrt() * (cp.hw[(k, k)] * th.conj()).re
            - th.norm_sqr() * cp.comm_total(k, scene.sigma2_c)
            - xi
    });
    let f_s = DVector::from_fn(scene.n_targets(), |m, _| {
        let xi = aux.xi_s[m];
        let th = aux.theta_s.row(m);
        let cross: Complex64 = cp
            .target_signal(m)
            .iter()
            .zip(th.iter())
            .map(|(s, t)| s * t.conj())
            .sum();
        xi.ln_1p() + 2.0 * (1.0 + xi).sqrt() * cross.re - th.norm_squared() * cp.sense_total(m) - xi
    });
    (f_c, f_s)
}

fn softmin(f: &DVector<f64>, mu: f64) -> DVector<f64> {
    let lo = f.min();
    let e = f.map(|v| (-mu * (v - lo)).exp());
    let total = e.sum();
    e / total
}

/// Log-sum-exp smoothed minimizer weights, `z_k ∝ exp(-mu f_k)`.
pub fn update_z(f_c: &DVector<f64>, f_s: &DVector<f64>, mu: f64) -> (DVector<f64>, DVector<f64>) {
    (softmin(f_c, mu), softmin(f_s, mu))
}

/// Closed-form `xi` and `theta` at fixed beamformers. Weights are left uniform.
pub fn update_aux(scene: &Scene, bf: &Beamformers) -> AuxState {
    let cp = Couplings::new(scene, bf);
    let mut aux = AuxState::zeros(scene.n_users(), scene.n_targets());
    for k in 0..scene.n_users() {
        let signal = cp.hw[(k, k)];
        let total = cp.comm_total(k, scene.sigma2_c);
        let xi = signal.norm_sqr() / (total - signal.norm_sqr());
        aux.xi_c[k] = xi;
        aux.theta_c[k] = signal * ((1.0 + xi).sqrt() / total);
    }
    for m in 0..scene.n_targets() {
        let total = cp.sense_total(m);
        let own = cp.echo(m, m);
        let xi = if own == 0.0 { 0.0 } else { own / (total - own) };
        aux.xi_s[m] = xi;
        let row = cp.target_signal(m) * Complex64::new((1.0 + xi).sqrt() / total, 0.0);
        aux.theta_s.set_row(m, &row.transpose());
    }
    aux
}

/// Covariance `sum_j G_j W W^H G_j^H + L_r sigma_s^2 I` seen by the radar receiver,
/// optionally leaving one response out.
pub(crate) fn echo_covariance(scene: &Scene, atw: &CMat, skip: Option<usize>) -> HermitianMatrix {
    let n = scene.n_rx();
    let mut r = CMat::identity(n, n) * Complex64::new(n as f64 * scene.sigma2_s, 0.0);
    for j in 0..scene.n_responses() {
        if Some(j) == skip {
            continue;
        }
        let power = scene.responses[j].amplitude.norm_sqr() * atw.row(j).norm_squared();
        let a = scene.rx_steering(j);
        r += a * a.adjoint() * Complex64::new(power, 0.0);
    }
    HermitianMatrix::from_parts_unchecked(r)
}

/// Closed-form receive combiner maximizing each `f_sm` at fixed `W` and auxiliaries.
pub fn update_f(scene: &Scene, bf: &Beamformers, aux: &AuxState) -> Result<CMat> {
    let atw = transmit_projections(scene, &bf.w);
    let r = echo_covariance(scene, &atw, None);
    let mut rhs = CMat::zeros(scene.n_rx(), scene.n_targets());
    for m in 0..scene.n_targets() {
        let theta = aux.theta_s.row(m);
        let theta_norm2 = theta.norm_squared();
        if theta_norm2 == 0.0 {
            return Err(Error::StalledAuxiliary { target: m });
        }
        // G_m W theta^H = amplitude * a_r(m) * (a_t(m)^H W theta^H)
        let proj: Complex64 = atw
            .row(m)
            .iter()
            .zip(theta.iter())
            .map(|(a, t)| a * t.conj())
            .sum();
        let coef = scene.responses[m].amplitude * proj * ((1.0 + aux.xi_s[m]).sqrt() / theta_norm2);
        rhs.set_column(m, &(scene.rx_steering(m) * coef));
    }
    hermitian_solve(&r, &rhs)
}

/// Quadratic precoder subproblem
/// `max_W 2 Re tr(W (X + S1^H H^H)) - tr(W W^H (Y + H S2 H^H))`.
#[derive(Debug, Clone)]
pub struct WProblem {
    pub sigma1: CVec,
    pub sigma2: DVector<f64>,
    /// `K x n_tx`.
    pub x: CMat,
    pub y: HermitianMatrix,
    h: CMat,
    /// `Y + H S2 H^H`.
    curvature: HermitianMatrix,
    /// `X^H + H S1`.
    linear: CMat,
}

impl WProblem {
    pub fn curvature(&self) -> &HermitianMatrix {
        &self.curvature
    }

    /// Objective value at `w`, constant terms dropped.
    pub fn objective(&self, w: &CMat) -> f64 {
        let lin = self.linear.dotc(w).re;
        let quad = w.dotc(&(self.curvature.as_matrix() * w)).re;
        2.0 * lin - quad
    }

    /// Maximizer of the quadratic minorizer at `p`, before projection.
    pub fn mm_direction(&self, p: &CMat, lambda: f64) -> CMat {
        &self.linear + p * Complex64::new(lambda, 0.0) - self.curvature.as_matrix() * p
    }

    pub fn h(&self) -> &CMat {
        &self.h
    }
}

pub fn assemble_w_problem(scene: &Scene, aux: &AuxState, f: &CMat, delta: f64) -> WProblem {
    let n_tx = scene.n_tx();
    let h = scene.h.clone();
    let sigma1 = CVec::from_fn(scene.n_users(), |k, _| {
        aux.theta_c[k] * (aux.z_c[k] * (1.0 + aux.xi_c[k]).sqrt())
    });
    let sigma2 = DVector::from_fn(scene.n_users(), |k, _| {
        aux.z_c[k] * aux.theta_c[k].norm_sqr()
    });

    let gain = echo_gains(scene, f);
    let mut x = CMat::zeros(scene.n_users(), n_tx);
    let mut y = CMat::zeros(n_tx, n_tx);
    if delta != 0.0 {
        for m in 0..scene.n_targets() {
            // theta_m^H (f_m^H G_m) with f_m^H G_m = gain[m,m] a_t(m)^H
            let weight = delta * aux.z_s[m] * (1.0 + aux.xi_s[m]).sqrt();
            let theta_h = aux.theta_s.row(m).adjoint();
            x += theta_h * scene.tx_steering(m).adjoint() * (gain[(m, m)] * weight);
        }
        for j in 0..scene.n_responses() {
            let coef: f64 = (0..scene.n_targets())
                .map(|m| aux.z_s[m] * aux.theta_s.row(m).norm_squared() * gain[(m, j)].norm_sqr())
                .sum::<f64>()
                * delta;
            let a = scene.tx_steering(j);
            y += a * a.adjoint() * Complex64::new(coef, 0.0);
        }
    }
    let y = HermitianMatrix::from_parts_unchecked(y);

    let hs2 = CMat::from_fn(n_tx, scene.n_users(), |i, k| h[(i, k)] * sigma2[k]);
    let curvature = HermitianMatrix::from_parts_unchecked(y.as_matrix() + hs2 * h.adjoint());
    let hs1 = CMat::from_fn(n_tx, scene.n_users(), |i, k| h[(i, k)] * sigma1[k]);
    let linear = x.adjoint() + hs1;
    WProblem {
        sigma1,
        sigma2,
        x,
        y,
        h,
        curvature,
        linear,
    }
}

/// `inner_w` minorize-maximize steps on the precoder subproblem from `w`.
pub fn update_w(problem: &WProblem, w: &CMat, p_tx: f64, inner_w: usize) -> Result<CMat> {
    let lambda = dominant_eigenpair(problem.curvature(), None).value;
    let mut w = w.clone();
    for _ in 0..inner_w {
        let direction = problem.mm_direction(&w, lambda);
        w = project_per_antenna(&direction, p_tx, ProjectionMode::Boundary)?;
    }
    Ok(w)
}

/// Matched-filter precoder scaled onto the per-antenna boundary, steering combiners.
pub fn initial_beamformers(scene: &Scene, p_tx: f64) -> Result<Beamformers> {
    let w = project_per_antenna(&scene.h, p_tx, ProjectionMode::Boundary)?;
    let f = CMat::from_columns(
        &(0..scene.n_targets())
            .map(|m| scene.rx_steering(m).clone())
            .collect::<Vec<_>>(),
    );
    Ok(Beamformers::new(w, f))
}

fn weighted_surrogate(aux: &AuxState, f_c: &DVector<f64>, f_s: &DVector<f64>, delta: f64) -> f64 {
    aux.z_c.dot(f_c) + delta * aux.z_s.dot(f_s)
}

pub(crate) fn record(
    iteration: usize,
    surrogate: f64,
    scene: &Scene,
    bf: &Beamformers,
    delta: f64,
    start: Instant,
) -> IterationRecord {
    let r = evaluate(scene, bf, delta);
    IterationRecord {
        iteration,
        surrogate,
        objective_p1: r.objective_p1,
        objective_p2: r.objective_p2,
        sinr: r.sinr,
        scnr: r.scnr,
        elapsed: start.elapsed(),
    }
}

pub(crate) fn selection_score(rec: &IterationRecord, selection: Selection) -> f64 {
    match selection {
        Selection::BestLinear => rec.objective_p1,
        Selection::BestLog => rec.objective_p2,
        Selection::Last => rec.iteration as f64,
    }
}

pub(crate) fn relative_change(prev: f64, next: f64) -> f64 {
    let scale = prev.abs().max(next.abs());
    if scale == 0.0 {
        0.0
    } else {
        (next - prev).abs() / scale
    }
}

/// Runs the smoothed max-min solver on one scene.
pub fn solve(scene: &Scene, config: &SystemConfig, options: &SolverOptions) -> Result<Solution> {
    options.validate()?;
    let start = Instant::now();
    let delta = config.delta;
    let mut bf = initial_beamformers(scene, config.p_tx)?;
    bf.check_dims(scene)?;
    let mut aux = update_aux(scene, &bf);

    let (f_c, f_s) = surrogate_terms(scene, &bf, &aux);
    let mut trace = RunTrace::default();
    trace.records.push(record(
        0,
        weighted_surrogate(&aux, &f_c, &f_s, delta),
        scene,
        &bf,
        delta,
        start,
    ));
    let mut best = (
        selection_score(&trace.records[0], options.selection),
        0,
        bf.clone(),
    );
    let mut prev_surrogate = trace.records[0].surrogate;
    let mut converged = false;

    for n in 1..=options.outer_max {
        let fresh = update_aux(scene, &bf);
        let (f_c, f_s) = match options.weights {
            WeightOrder::TightAuxiliaries => surrogate_terms(scene, &bf, &fresh),
            WeightOrder::PreviousAuxiliaries => surrogate_terms(scene, &bf, &aux),
        };
        let (z_c, z_s) = update_z(&f_c, &f_s, options.mu_at(n));
        aux = AuxState { z_c, z_s, ..fresh };
        bf.f = update_f(scene, &bf, &aux)?;
        let problem = assemble_w_problem(scene, &aux, &bf.f, delta);
        bf.w = update_w(&problem, &bf.w, config.p_tx, options.inner_w)?;

        let (f_c, f_s) = surrogate_terms(scene, &bf, &aux);
        let surrogate = weighted_surrogate(&aux, &f_c, &f_s, delta);
        let rec = record(n, surrogate, scene, &bf, delta, start);
        let score = selection_score(&rec, options.selection);
        if score >= best.0 {
            best = (score, n, bf.clone());
        }
        trace.records.push(rec);
        if relative_change(prev_surrogate, surrogate) < options.tol {
            converged = true;
            break;
        }
        prev_surrogate = surrogate;
    }

    let (_, selected_iteration, beamformers) = best;
    Ok(Solution {
        report: metrics::evaluate(scene, &beamformers, delta),
        beamformers,
        trace,
        converged,
        selected_iteration,
        elapsed: start.elapsed(),
    })
}
