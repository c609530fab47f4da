//! Independent oracles and random fixtures for unit tests.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::metrics::Beamformers;
use crate::scene::{complex_normal, Scene};
use crate::CMat;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x5eed)
}

pub fn random_cmat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
    DMatrix::from_fn(r, c, |_, _| complex_normal(rng))
}

/// `B^H B` for a random square `B`.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let b = random_cmat(rng, n, n);
    b.adjoint() * b
}

/// SINR by explicit scalar loops over channel and precoder entries.
pub fn oracle_sinr(scene: &Scene, w: &CMat, k: usize) -> f64 {
    let inner = |j: usize| {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..w.nrows() {
            acc += scene.h[(i, k)].conj() * w[(i, j)];
        }
        acc.norm_sqr()
    };
    let interf: f64 = (0..w.ncols()).filter(|&j| j != k).map(inner).sum();
    inner(k) / (interf + scene.sigma2_c)
}

/// `||f_m^H G_j W||^2` by scalar loops over the materialized echo matrix.
pub fn oracle_echo(scene: &Scene, bf: &Beamformers, m: usize, j: usize) -> f64 {
    let g = scene.response_matrix(j);
    let mut total = 0.0;
    for col in 0..bf.w.ncols() {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..g.nrows() {
            for c in 0..g.ncols() {
                acc += bf.f[(r, m)].conj() * g[(r, c)] * bf.w[(c, col)];
            }
        }
        total += acc.norm_sqr();
    }
    total
}

pub fn oracle_scnr(scene: &Scene, bf: &Beamformers, m: usize) -> f64 {
    let interf: f64 = (0..scene.n_responses())
        .filter(|&j| j != m)
        .map(|j| oracle_echo(scene, bf, m, j))
        .sum();
    let fnorm: f64 = (0..bf.f.nrows()).map(|r| bf.f[(r, m)].norm_sqr()).sum();
    oracle_echo(scene, bf, m, m) / (interf + scene.n_rx() as f64 * scene.sigma2_s * fnorm)
}

/// Well-scaled random scene with `m` targets followed by `c` clutter sources.
pub fn random_scene(
    rng: &mut ChaCha8Rng,
    n_tx: usize,
    n_rx: usize,
    k: usize,
    m: usize,
    c: usize,
    sigma2: f64,
) -> Scene {
    use rand::Rng;
    let h = random_cmat(rng, n_tx, k);
    let responses = (0..m + c)
        .map(|i| crate::scene::TargetResponse {
            amplitude: complex_normal(rng),
            angle: rng.random_range(-2.0..2.0),
            is_clutter: i >= m,
        })
        .collect();
    Scene::new(h, responses, n_rx, sigma2, sigma2).unwrap()
}

/// Random feasible beamformers on the per-antenna boundary.
pub fn random_beamformers(rng: &mut ChaCha8Rng, scene: &Scene, p_tx: f64) -> Beamformers {
    use crate::linalg::{project_per_antenna, ProjectionMode};
    let w = random_cmat(rng, scene.n_tx(), scene.n_users());
    let w = project_per_antenna(&w, p_tx, ProjectionMode::Boundary).unwrap();
    Beamformers::new(w, random_cmat(rng, scene.n_rx(), scene.n_targets()))
}
