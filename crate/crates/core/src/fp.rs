//! Standard fractional-programming baseline: alternating optimization over
//! quadratic-transform auxiliaries, the radar combiner, and the precoder.
//!
//! The precoder block maximizes `min_k q_ck(W) + delta min_m q_sm(W)` over the
//! per-antenna power set, where each `q` is a concave quadratic. It is solved
//! by projected supergradient ascent with best-iterate bookkeeping.

use std::time::Instant;

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::Result;
use crate::linalg::{hermitian_solve, project_per_antenna, ProjectionMode};
use crate::maxmin::{
    echo_covariance, initial_beamformers, record, relative_change, selection_score, Couplings,
    Selection,
};
use crate::metrics::{evaluate, min_of, Beamformers};
use crate::scene::Scene;
use crate::trace::{RunTrace, Solution};
use crate::{CMat, CVec};

/// Quadratic-transform auxiliaries.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaState {
    pub beta_c: CVec,
    /// One row per target, one column per user.
    pub beta_s: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpigraphOptions {
    /// Initial step; `None` picks `step_scale sqrt(P_t/L_t) / ||g_0||`.
    pub step0: Option<f64>,
    pub step_scale: f64,
    pub iters: usize,
}

impl Default for EpigraphOptions {
    fn default() -> Self {
        Self {
            step0: None,
            step_scale: 0.01,
            iters: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpOptions {
    pub outer_max: usize,
    /// Relative change of the linear objective between rounds that stops the loop.
    pub tol: f64,
    pub epigraph: EpigraphOptions,
}

impl Default for FpOptions {
    fn default() -> Self {
        Self {
            outer_max: 100,
            tol: 1e-5,
            epigraph: EpigraphOptions::default(),
        }
    }
}

/// Optimal auxiliaries at fixed beamformers; each quadratic transform is then tight.
pub fn update_beta(scene: &Scene, bf: &Beamformers) -> BetaState {
    let cp = Couplings::new(scene, bf);
    let beta_c = CVec::from_fn(scene.n_users(), |k, _| {
        let signal = cp.hw[(k, k)];
        signal / (cp.comm_total(k, scene.sigma2_c) - signal.norm_sqr())
    });
    let mut beta_s = CMat::zeros(scene.n_targets(), scene.n_users());
    for m in 0..scene.n_targets() {
        let den = cp.sense_total(m) - cp.echo(m, m);
        beta_s.set_row(
            m,
            &(cp.target_signal(m) / Complex64::new(den, 0.0)).transpose(),
        );
    }
    BetaState { beta_c, beta_s }
}

/// Quadratic-transform values `(q_c, q_s)` at the given beamformers.
pub fn transform_values(scene: &Scene, bf: &Beamformers, beta: &BetaState) -> (Vec<f64>, Vec<f64>) {
    let cp = Couplings::new(scene, bf);
    let q_c = (0..scene.n_users())
        .map(|k| {
            let b = beta.beta_c[k];
            let signal = cp.hw[(k, k)];
            let interf = cp.comm_total(k, scene.sigma2_c) - signal.norm_sqr();
            2.0 * (signal * b.conj()).re - b.norm_sqr() * interf
        })
        .collect();
    let q_s = (0..scene.n_targets())
        .map(|m| {
            let b = beta.beta_s.row(m);
            let cross: Complex64 = cp
                .target_signal(m)
                .iter()
                .zip(b.iter())
                .map(|(s, t)| s * t.conj())
                .sum();
            let interf = cp.sense_total(m) - cp.echo(m, m);
            2.0 * cross.re - b.norm_squared() * interf
        })
        .collect();
    (q_c, q_s)
}

/// MMSE combiner `(sum_{j != m} G_j W W^H G_j^H + L_r sigma_s^2 I)^{-1} G_m W beta_m^H`.
/// A target whose right-hand side vanishes keeps its current filter.
pub fn update_f_fp(scene: &Scene, bf: &Beamformers, beta: &BetaState) -> Result<CMat> {
    let cp = Couplings::new(scene, bf);
    let mut f = bf.f.clone();
    for m in 0..scene.n_targets() {
        let proj: Complex64 = cp
            .atw
            .row(m)
            .iter()
            .zip(beta.beta_s.row(m).iter())
            .map(|(a, b)| a * b.conj())
            .sum();
        let coef = scene.responses[m].amplitude * proj;
        if coef == Complex64::new(0.0, 0.0) {
            continue;
        }
        let r = echo_covariance(scene, &cp.atw, Some(m));
        let rhs =
            CMat::from_column_slice(scene.n_rx(), 1, (scene.rx_steering(m) * coef).as_slice());
        f.set_column(m, &hermitian_solve(&r, &rhs)?.column(0));
    }
    Ok(f)
}

/// The precoder block at fixed `beta` and combiner.
pub struct EpigraphProblem<'a> {
    scene: &'a Scene,
    beta: &'a BetaState,
    delta: f64,
    /// `amplitude_j * f_m^H a_r(j)`.
    gain: CMat,
    noise_s: Vec<f64>,
    /// Rows `a_t(j)^H`.
    at: CMat,
}

impl<'a> EpigraphProblem<'a> {
    pub fn new(scene: &'a Scene, beta: &'a BetaState, f: &CMat, delta: f64) -> Self {
        let bf = Beamformers::new(CMat::zeros(scene.n_tx(), scene.n_users()), f.clone());
        let cp = Couplings::new(scene, &bf);
        let mut at = CMat::zeros(scene.n_responses(), scene.n_tx());
        for j in 0..scene.n_responses() {
            at.set_row(j, &scene.tx_steering(j).adjoint());
        }
        Self {
            scene,
            beta,
            delta,
            gain: cp.gain,
            noise_s: cp.noise_s,
            at,
        }
    }

    fn values(&self, hw: &CMat, atw: &CMat) -> (Vec<f64>, Vec<f64>) {
        let scene = self.scene;
        let q_c = (0..scene.n_users())
            .map(|k| {
                let b = self.beta.beta_c[k];
                let interf: f64 = (0..hw.ncols())
                    .filter(|&j| j != k)
                    .map(|j| hw[(k, j)].norm_sqr())
                    .sum();
                2.0 * (hw[(k, k)] * b.conj()).re - b.norm_sqr() * (interf + scene.sigma2_c)
            })
            .collect();
        let q_s = (0..scene.n_targets())
            .map(|m| {
                let b = self.beta.beta_s.row(m);
                let cross: Complex64 = atw
                    .row(m)
                    .iter()
                    .zip(b.iter())
                    .map(|(a, t)| a * t.conj())
                    .sum();
                let interf: f64 = (0..atw.nrows())
                    .filter(|&j| j != m)
                    .map(|j| self.gain[(m, j)].norm_sqr() * atw.row(j).norm_squared())
                    .sum();
                2.0 * (self.gain[(m, m)] * cross).re - b.norm_squared() * (interf + self.noise_s[m])
            })
            .collect();
        (q_c, q_s)
    }

    /// `min_k q_ck + delta min_m q_sm` and the per-term values.
    pub fn evaluate(&self, w: &CMat) -> (f64, Vec<f64>, Vec<f64>) {
        let hw = self.scene.h.ad_mul(w);
        let atw = &self.at * w;
        let (q_c, q_s) = self.values(&hw, &atw);
        let obj = if self.delta == 0.0 {
            min_of(&q_c)
        } else {
            min_of(&q_c) + self.delta * min_of(&q_s)
        };
        (obj, q_c, q_s)
    }

    /// Supergradient (with respect to `conj(W)`) from the lowest-index active terms.
    pub fn supergradient(&self, w: &CMat, q_c: &[f64], q_s: &[f64]) -> CMat {
        let scene = self.scene;
        let mut g = CMat::zeros(w.nrows(), w.ncols());
        let k = argmin(q_c);
        let h_k = scene.h.column(k);
        let b = self.beta.beta_c[k];
        let hw_k = h_k.ad_mul(w);
        for j in 0..w.ncols() {
            let coef = if j == k {
                b
            } else {
                -hw_k[(0, j)] * b.norm_sqr()
            };
            g.column_mut(j).axpy(coef, &h_k, Complex64::new(1.0, 0.0));
        }
        if self.delta != 0.0 {
            let m = argmin(q_s);
            let b = self.beta.beta_s.row(m);
            let a_m = scene.tx_steering(m);
            // conj(gain_mm) a_t(m) beta_m
            g += a_m * b * (self.gain[(m, m)].conj() * self.delta);
            let bn = b.norm_squared();
            for j in (0..scene.n_responses()).filter(|&j| j != m) {
                let a_j = scene.tx_steering(j);
                let coef = self.gain[(m, j)].norm_sqr() * bn * self.delta;
                g -= a_j * (self.at.row(j) * w) * Complex64::new(coef, 0.0);
            }
        }
        g
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct EpigraphResult {
    pub w: CMat,
    pub objective: f64,
    pub start_objective: f64,
    pub iterations: usize,
}

/// Projected supergradient ascent from `w_start` with steps `step0 / sqrt(t)`;
/// returns the best iterate seen, never worse than the start.
pub fn solve_w_epigraph(
    scene: &Scene,
    beta: &BetaState,
    f: &CMat,
    w_start: &CMat,
    delta: f64,
    p_tx: f64,
    opts: &EpigraphOptions,
) -> Result<EpigraphResult> {
    let problem = EpigraphProblem::new(scene, beta, f, delta);
    let (start_objective, mut q_c, mut q_s) = problem.evaluate(w_start);
    let mut best = (start_objective, w_start.clone());
    let mut w = w_start.clone();
    let cap = (p_tx / scene.n_tx() as f64).sqrt();
    let mut step0 = opts.step0;
    let mut iterations = 0;
    for t in 1..=opts.iters {
        let g = problem.supergradient(&w, &q_c, &q_s);
        let gnorm = g.norm();
        if gnorm == 0.0 {
            break;
        }
        let s0 = *step0.get_or_insert(opts.step_scale * cap / gnorm);
        let step = s0 / (t as f64).sqrt();
        w = project_per_antenna(
            &(&w + g * Complex64::new(step, 0.0)),
            p_tx,
            ProjectionMode::Euclidean,
        )?;
        iterations = t;
        let (obj, c, s) = problem.evaluate(&w);
        q_c = c;
        q_s = s;
        if obj > best.0 {
            best = (obj, w.clone());
        }
    }
    Ok(EpigraphResult {
        w: best.1,
        objective: best.0,
        start_objective,
        iterations,
    })
}

/// Runs the alternating-optimization baseline on one scene.
pub fn solve_fp(scene: &Scene, config: &SystemConfig, opts: &FpOptions) -> Result<Solution> {
    let start = Instant::now();
    let delta = config.delta;
    let mut bf = initial_beamformers(scene, config.p_tx)?;
    bf.check_dims(scene)?;
    let mut trace = RunTrace::default();
    let first = record(0, 0.0, scene, &bf, delta, start);
    let mut prev = first.objective_p1;
    trace.records.push(first);
    trace.records[0].surrogate = prev;
    let mut best = (prev, 0, bf.clone());
    let mut converged = false;

    for n in 1..=opts.outer_max {
        let beta = update_beta(scene, &bf);
        bf.f = update_f_fp(scene, &bf, &beta)?;
        // re-tighten the sensing auxiliaries for the new combiner
        let beta = update_beta(scene, &bf);
        let res = solve_w_epigraph(
            scene,
            &beta,
            &bf.f,
            &bf.w,
            delta,
            config.p_tx,
            &opts.epigraph,
        )?;
        bf.w = res.w;

        let mut rec = record(n, 0.0, scene, &bf, delta, start);
        rec.surrogate = rec.objective_p1;
        let obj = rec.objective_p1;
        if selection_score(&rec, Selection::BestLinear) >= best.0 {
            best = (obj, n, bf.clone());
        }
        trace.records.push(rec);
        if relative_change(prev, obj) < opts.tol {
            converged = true;
            break;
        }
        prev = obj;
    }

    let (_, selected_iteration, beamformers) = best;
    Ok(Solution {
        report: evaluate(scene, &beamformers, delta),
        beamformers,
        trace,
        converged,
        selected_iteration,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{all_scnr, all_sinr};
    use crate::scene::{generate_scene, TargetResponse};
    use crate::test_util::{random_beamformers, random_cmat, random_scene, rng};
    use approx::assert_relative_eq;

    #[test]
    fn scalar_beta_is_one() {
        let one = CMat::from_element(1, 1, Complex64::new(1.0, 0.0));
        let target = TargetResponse {
            amplitude: Complex64::new(1.0, 0.0),
            angle: 0.0,
            is_clutter: false,
        };
        let scene = Scene::new(one.clone(), vec![target], 1, 1.0, 1.0).unwrap();
        let beta = update_beta(&scene, &Beamformers::new(one.clone(), one));
        assert_eq!(beta.beta_c[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn transform_is_tight_at_optimal_beta() {
        for seed in 0..20 {
            let mut r = rng(200 + seed);
            let scene = random_scene(&mut r, 6, 5, 3, 2, 2, 0.3);
            let bf = random_beamformers(&mut r, &scene, 6.0);
            let beta = update_beta(&scene, &bf);
            let (q_c, q_s) = transform_values(&scene, &bf, &beta);
            for (q, g) in q_c.iter().zip(all_sinr(&scene, &bf.w)) {
                assert_relative_eq!(*q, g, max_relative = 1e-10);
            }
            for (q, g) in q_s.iter().zip(all_scnr(&scene, &bf)) {
                assert_relative_eq!(*q, g, max_relative = 1e-10);
            }
            let (obj, _, _) = EpigraphProblem::new(&scene, &beta, &bf.f, 0.5).evaluate(&bf.w);
            let expected = min_of(&all_sinr(&scene, &bf.w)) + 0.5 * min_of(&all_scnr(&scene, &bf));
            assert_relative_eq!(obj, expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn transform_lower_bounds_ratio_for_any_beta() {
        let mut r = rng(9);
        let scene = random_scene(&mut r, 5, 4, 3, 2, 1, 0.3);
        let bf = random_beamformers(&mut r, &scene, 5.0);
        for _ in 0..50 {
            let beta = BetaState {
                beta_c: random_cmat(&mut r, 3, 1).column(0).into(),
                beta_s: random_cmat(&mut r, 2, 3),
            };
            let (q_c, q_s) = transform_values(&scene, &bf, &beta);
            assert!(q_c
                .iter()
                .zip(all_sinr(&scene, &bf.w))
                .all(|(q, g)| *q <= g + 1e-12));
            assert!(q_s
                .iter()
                .zip(all_scnr(&scene, &bf))
                .all(|(q, g)| *q <= g + 1e-12));
        }
    }

    #[test]
    fn zero_precoder_gives_zero_beta() {
        let mut r = rng(10);
        let scene = random_scene(&mut r, 4, 4, 2, 2, 1, 1.0);
        let mut bf = random_beamformers(&mut r, &scene, 4.0);
        bf.w.fill(Complex64::new(0.0, 0.0));
        let beta = update_beta(&scene, &bf);
        assert_eq!(beta.beta_c.camax(), 0.0);
        assert_eq!(beta.beta_s.camax(), 0.0);
        assert_eq!(update_f_fp(&scene, &bf, &beta).unwrap(), bf.f);
    }

    #[test]
    fn mmse_combiner_never_lowers_scnr() {
        let mut r = rng(11);
        for _ in 0..50 {
            let scene = random_scene(&mut r, 5, 5, 3, 2, 2, 0.2);
            let mut bf = random_beamformers(&mut r, &scene, 5.0);
            let before = all_scnr(&scene, &bf);
            let beta = update_beta(&scene, &bf);
            bf.f = update_f_fp(&scene, &bf, &beta).unwrap();
            let after = all_scnr(&scene, &bf);
            assert!(after
                .iter()
                .zip(&before)
                .all(|(a, b)| *a >= b * (1.0 - 1e-12)));
            let scaled = Beamformers::new(bf.w.clone(), &bf.f * Complex64::new(0.0, -4.0));
            for (a, b) in after.iter().zip(all_scnr(&scene, &scaled)) {
                assert_relative_eq!(*a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn mmse_combiner_is_matched_without_interference() {
        let mut r = rng(12);
        let scene = random_scene(&mut r, 4, 6, 2, 1, 0, 1.0);
        let bf = random_beamformers(&mut r, &scene, 4.0);
        let beta = update_beta(&scene, &bf);
        let f = update_f_fp(&scene, &bf, &beta).unwrap();
        let g = scene.response_matrix(0) * &bf.w * beta.beta_s.row(0).adjoint();
        let cos = f.column(0).dotc(&g.column(0)).norm() / (f.column(0).norm() * g.norm());
        assert!(cos > 0.999, "{cos}");
    }

    #[test]
    fn epigraph_never_worse_than_start() {
        let mut r = rng(13);
        for _ in 0..20 {
            let scene = random_scene(&mut r, 6, 4, 3, 2, 2, 0.3);
            let bf = random_beamformers(&mut r, &scene, 6.0);
            let beta = update_beta(&scene, &bf);
            let start = random_beamformers(&mut r, &scene, 6.0).w;
            let opts = EpigraphOptions {
                iters: 50,
                ..Default::default()
            };
            let res = solve_w_epigraph(&scene, &beta, &bf.f, &start, 1.0, 6.0, &opts).unwrap();
            assert!(res.objective >= res.start_objective);
            let (obj, _, _) = EpigraphProblem::new(&scene, &beta, &bf.f, 1.0).evaluate(&res.w);
            assert_eq!(obj, res.objective);
            assert!(Beamformers::new(res.w, bf.f.clone()).is_feasible(6.0, 1e-9));
        }
    }

    #[test]
    fn single_user_matches_closed_form() {
        let mut r = rng(14);
        for _ in 0..10 {
            let scene = random_scene(&mut r, 5, 4, 1, 1, 1, 0.5);
            let bf = random_beamformers(&mut r, &scene, 5.0);
            let beta = update_beta(&scene, &bf);
            let opts = EpigraphOptions {
                step_scale: 0.1,
                iters: 20_000,
                ..Default::default()
            };
            let res = solve_w_epigraph(&scene, &beta, &bf.f, &bf.w, 0.0, 5.0, &opts).unwrap();
            // one linear term: best is every antenna at full power, phase-aligned
            let b = beta.beta_c[0];
            let optimum =
                2.0 * b.norm() * scene.h.iter().map(|v| v.norm()).sum::<f64>() - b.norm_sqr() * 0.5;
            assert!(res.objective <= optimum * (1.0 + 1e-12));
            assert!(
                res.objective >= optimum - 0.01 * optimum.abs(),
                "{} vs {optimum}",
                res.objective
            );
        }
    }

    /// `min(q_1, q_2)` for a two-antenna, two-user toy by direct scalar evaluation.
    fn toy_objective(h: &CMat, beta: &CVec, sigma2: f64, w: &[[Complex64; 2]; 2]) -> f64 {
        let inner = |k: usize, j: usize| h[(0, k)].conj() * w[0][j] + h[(1, k)].conj() * w[1][j];
        (0..2)
            .map(|k| {
                let other = 1 - k;
                2.0 * (beta[k].conj() * inner(k, k)).re
                    - beta[k].norm_sqr() * (inner(k, other).norm_sqr() + sigma2)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn toy_point(cap: f64, p: &[f64; 8]) -> [[Complex64; 2]; 2] {
        let row = |q: &[f64]| {
            let rho = cap * q[0].clamp(0.0, 1.0);
            [
                Complex64::from_polar(rho * q[1].cos(), q[2]),
                Complex64::from_polar(rho * q[1].sin(), q[3]),
            ]
        };
        [row(&p[0..4]), row(&p[4..8])]
    }

    #[test]
    fn two_by_two_matches_grid_search() {
        use std::f64::consts::{FRAC_PI_2, PI};
        let mut r = rng(15);
        let scene = random_scene(&mut r, 2, 2, 2, 1, 0, 0.5);
        let bf = random_beamformers(&mut r, &scene, 2.0);
        let beta = update_beta(&scene, &bf);
        let cap = 1.0;
        let eval = |p: &[f64; 8]| toy_objective(&scene.h, &beta.beta_c, 0.5, &toy_point(cap, p));

        let rhos = [0.25, 0.5, 0.75, 1.0];
        let alphas: Vec<f64> = (0..5).map(|i| FRAC_PI_2 * i as f64 / 4.0).collect();
        let phases: Vec<f64> = (0..8).map(|i| 2.0 * PI * i as f64 / 8.0).collect();
        let mut rows = Vec::new();
        for &a in &rhos {
            for &b in &alphas {
                for &c in &phases {
                    for &d in &phases {
                        rows.push([a, b, c, d]);
                    }
                }
            }
        }
        let mut best = ([0.0; 8], f64::NEG_INFINITY);
        for r0 in &rows {
            for r1 in &rows {
                let p = [r0[0], r0[1], r0[2], r0[3], r1[0], r1[1], r1[2], r1[3]];
                let v = eval(&p);
                if v > best.1 {
                    best = (p, v);
                }
            }
        }
        // pattern-search refinement around the best grid cell
        let mut step = [
            0.125,
            FRAC_PI_2 / 8.0,
            PI / 8.0,
            PI / 8.0,
            0.125,
            FRAC_PI_2 / 8.0,
            PI / 8.0,
            PI / 8.0,
        ];
        for _ in 0..60 {
            let mut improved = false;
            for i in 0..8 {
                for sign in [-1.0, 1.0] {
                    let mut p = best.0;
                    p[i] += sign * step[i];
                    let v = eval(&p);
                    if v > best.1 {
                        best = (p, v);
                        improved = true;
                    }
                }
            }
            if !improved {
                step.iter_mut().for_each(|s| *s *= 0.5);
            }
        }

        let opts = EpigraphOptions {
            iters: 3000,
            ..Default::default()
        };
        let res = solve_w_epigraph(&scene, &beta, &bf.f, &bf.w, 0.0, 2.0, &opts).unwrap();
        assert!(
            (res.objective - best.1).abs() <= 0.02 * best.1.abs(),
            "{} vs {}",
            res.objective,
            best.1
        );
    }

    #[test]
    fn alternating_rounds_are_monotone() {
        for seed in 0..5 {
            let cfg = SystemConfig {
                seed: crate::scene::derive_seed(7, seed),
                ..SystemConfig::default()
            };
            let scene = generate_scene(&cfg).unwrap();
            let opts = FpOptions {
                outer_max: 15,
                ..Default::default()
            };
            let sol = solve_fp(&scene, &cfg, &opts).unwrap();
            for w in sol.trace.objectives_p1().windows(2) {
                assert!(w[1] >= w[0] - 1e-6, "{} -> {}", w[0], w[1]);
            }
            assert!(sol.beamformers.is_feasible(cfg.p_tx, 1e-9));
            let again = solve_fp(&scene, &cfg, &opts).unwrap();
            assert_eq!(sol.trace.objectives_p1(), again.trace.objectives_p1());
        }
    }
}
