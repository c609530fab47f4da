//! Random channel realizations: Rician-faded user channels and rank-one
//! monostatic target/clutter responses seen by a uniform linear array.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::{CMat, CVec};

/// Smallest distance a Gaussian distance draw is clamped to, meters.
pub const MIN_DISTANCE_M: f64 = 1.0;

/// Response of one point scatterer. The echo matrix is
/// `amplitude * a_r(angle) * a_t(angle)^H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetResponse {
    pub amplitude: Complex64,
    pub angle: f64,
    pub is_clutter: bool,
}

/// One channel realization. Responses are ordered targets first, then clutter.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// User channels, one column per user (`n_tx x n_users`).
    pub h: CMat,
    pub responses: Vec<TargetResponse>,
    pub sigma2_c: f64,
    pub sigma2_s: f64,
    n_rx: usize,
    n_targets: usize,
    tx_steer: Vec<CVec>,
    rx_steer: Vec<CVec>,
}

impl Scene {
    pub fn new(
        h: CMat,
        responses: Vec<TargetResponse>,
        n_rx: usize,
        sigma2_c: f64,
        sigma2_s: f64,
    ) -> Result<Self> {
        if h.nrows() == 0 || h.ncols() == 0 || n_rx == 0 {
            return Err(Error::DimensionMismatch(
                "empty channel or receive array".into(),
            ));
        }
        let n_targets = responses.iter().take_while(|r| !r.is_clutter).count();
        if n_targets == 0 {
            return Err(Error::InvalidConfig(
                "scene needs at least one target".into(),
            ));
        }
        if responses[n_targets..].iter().any(|r| !r.is_clutter) {
            return Err(Error::InvalidConfig("targets must precede clutter".into()));
        }
        if !(sigma2_c > 0.0 && sigma2_s > 0.0) {
            return Err(Error::InvalidConfig("noise powers must be positive".into()));
        }
        let n_tx = h.nrows();
        let tx_steer = responses
            .iter()
            .map(|r| steering_vector(r.angle, n_tx))
            .collect();
        let rx_steer = responses
            .iter()
            .map(|r| steering_vector(r.angle, n_rx))
            .collect();
        Ok(Self {
            h,
            responses,
            sigma2_c,
            sigma2_s,
            n_rx,
            n_targets,
            tx_steer,
            rx_steer,
        })
    }

    pub fn n_tx(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_users(&self) -> usize {
        self.h.ncols()
    }

    pub fn n_targets(&self) -> usize {
        self.n_targets
    }

    /// Targets plus clutter.
    pub fn n_responses(&self) -> usize {
        self.responses.len()
    }

    pub fn tx_steering(&self, i: usize) -> &CVec {
        &self.tx_steer[i]
    }

    pub fn rx_steering(&self, i: usize) -> &CVec {
        &self.rx_steer[i]
    }

    /// Materialized `n_rx x n_tx` echo matrix of response `i`.
    pub fn response_matrix(&self, i: usize) -> CMat {
        let a_r = &self.rx_steer[i];
        let a_t = &self.tx_steer[i];
        a_r * a_t.adjoint() * self.responses[i].amplitude
    }
}

/// Unit-norm ULA steering vector with half-wavelength spacing.
pub fn steering_vector(angle: f64, n: usize) -> CVec {
    let scale = 1.0 / (n as f64).sqrt();
    let phase = std::f64::consts::PI * angle.sin();
    DVector::from_fn(n, |m, _| Complex64::from_polar(scale, phase * m as f64))
}

/// Amplitude-domain large-scale gain `sqrt(10^(ref_db/10) * d^-exponent)`.
pub fn path_loss_amplitude(ref_db: f64, distance: f64, exponent: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::NonPositiveDistance(distance));
    }
    Ok((10f64.powf(ref_db / 10.0) * distance.powf(-exponent)).sqrt())
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws the LoS and NLoS parts of a Rician channel with large-scale gain
/// `gain` and linear K-factor `k_factor`. The channel is their sum.
pub fn rician_channel<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    gain: f64,
    k_factor: f64,
    angle: f64,
) -> (CVec, CVec) {
    let (los_w, nlos_w) = if k_factor.is_infinite() {
        (1.0, 0.0)
    } else {
        (
            (k_factor / (1.0 + k_factor)).sqrt(),
            (1.0 / (1.0 + k_factor)).sqrt(),
        )
    };
    let alpha = complex_normal(rng);
    let los = steering_vector(angle, n) * (alpha * gain * los_w);
    let nlos = DVector::from_fn(n, |_, _| complex_normal(rng) * (gain * nlos_w));
    (los, nlos)
}

/// Mixes a master seed with a realization index into an independent stream seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x6a09_e667_f3bc_c909)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn draw_distance<R: Rng + ?Sized>(rng: &mut R, base: f64, spread: f64) -> f64 {
    let eta: f64 = rng.sample(StandardNormal);
    (base + spread * eta).max(MIN_DISTANCE_M)
}

/// Generates a scene from `config`; bit-identical for identical configs.
pub fn generate_scene(config: &SystemConfig) -> Result<Scene> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let k_factor = 10f64.powf(config.rician_db / 10.0);

    let mut h = DMatrix::zeros(config.n_tx, config.n_users);
    for k in 0..config.n_users {
        let d = draw_distance(&mut rng, config.dist_c_base, config.dist_c_spread);
        let gain = path_loss_amplitude(config.pl_ref_db, d, config.pl_exp_c)?;
        let angle = rng.random_range(config.angle_lo..config.angle_hi);
        let (los, nlos) = rician_channel(&mut rng, config.n_tx, gain, k_factor, angle);
        h.set_column(k, &(los + nlos));
    }

    let total = config.n_targets + config.n_clutter;
    let mut responses = Vec::with_capacity(total);
    for i in 0..total {
        let d = draw_distance(&mut rng, config.dist_s_base, config.dist_s_spread);
        let gain = path_loss_amplitude(config.pl_ref_db, d, config.pl_exp_s)?;
        let angle = rng.random_range(config.angle_lo..config.angle_hi);
        let alpha = complex_normal(&mut rng);
        responses.push(TargetResponse {
            amplitude: alpha * gain,
            angle,
            is_clutter: i >= config.n_targets,
        });
    }

    Scene::new(h, responses, config.n_rx, config.sigma2_c, config.sigma2_s)
}
