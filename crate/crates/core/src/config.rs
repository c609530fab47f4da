//! System parameters shared by scene generation and both solvers.
//!
//! Defaults reproduce the reference simulation setup: 16 transmit and 16
//! receive antennas, four users, two targets among two clutter sources,
//! Rician factor 3 dB, -30 dB reference path loss and -120 dBm noise.
//!
//! The 20 dB SNR is taken at the receiver: `p_tx` is chosen so that a user at
//! the nominal distance `dist_c_base` sees `p_tx * path_gain / sigma2_c` of
//! 20 dB. Measured against the transmit power alone the same budget would
//! leave every user around -80 dB.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// -120 dBm expressed in watts.
pub const NOISE_POWER_W: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Transmit antennas.
    pub n_tx: usize,
    /// Radar receive antennas.
    pub n_rx: usize,
    pub n_users: usize,
    pub n_targets: usize,
    pub n_clutter: usize,
    /// Total transmit power budget in watts, split evenly across antennas.
    pub p_tx: f64,
    /// Noise power at every user, watts.
    pub sigma2_c: f64,
    /// Noise power per radar receive antenna, watts.
    pub sigma2_s: f64,
    /// Sensing weight in the max-min objective.
    pub delta: f64,
    pub rician_db: f64,
    pub pl_ref_db: f64,
    pub pl_exp_c: f64,
    pub pl_exp_s: f64,
    pub dist_c_base: f64,
    pub dist_c_spread: f64,
    pub dist_s_base: f64,
    pub dist_s_spread: f64,
    pub angle_lo: f64,
    pub angle_hi: f64,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::unscaled().with_snr_db(DEFAULT_SNR_DB)
    }
}

/// Received SNR of the reference setup.
pub const DEFAULT_SNR_DB: f64 = 20.0;

impl SystemConfig {
    fn unscaled() -> Self {
        Self {
            n_tx: 16,
            n_rx: 16,
            n_users: 4,
            n_targets: 2,
            n_clutter: 2,
            p_tx: NOISE_POWER_W,
            sigma2_c: NOISE_POWER_W,
            sigma2_s: NOISE_POWER_W,
            delta: 1.0,
            rician_db: 3.0,
            pl_ref_db: -30.0,
            pl_exp_c: 3.0,
            pl_exp_s: 2.0,
            dist_c_base: 100.0,
            dist_c_spread: 20.0,
            dist_s_base: 10.0,
            dist_s_spread: 2.0,
            angle_lo: -2.0 * PI / 3.0,
            angle_hi: 2.0 * PI / 3.0,
            seed: 0,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n_tx == 0 || self.n_rx == 0 || self.n_users == 0 || self.n_targets == 0 {
            return bad("antenna, user and target counts must be at least 1");
        }
        let positive = [
            ("p_tx", self.p_tx),
            ("sigma2_c", self.sigma2_c),
            ("sigma2_s", self.sigma2_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return bad("delta must be finite and >= 0");
        }
        if !(self.angle_lo < self.angle_hi) {
            return bad("angle_lo must be below angle_hi");
        }
        if self.rician_db.is_nan() {
            return bad("rician_db must not be NaN");
        }
        let finite = [
            self.pl_ref_db,
            self.pl_exp_c,
            self.pl_exp_s,
            self.dist_c_base,
            self.dist_c_spread,
            self.dist_s_base,
            self.dist_s_spread,
            self.angle_lo,
            self.angle_hi,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("geometry and propagation parameters must be finite");
        }
        Ok(())
    }

    /// Per-antenna power cap `P_t / L_t`.
    pub fn per_antenna_power(&self) -> f64 {
        self.p_tx / self.n_tx as f64
    }

    /// Power gain of a communications link at the nominal user distance.
    pub fn nominal_path_gain(&self) -> f64 {
        10f64.powf(self.pl_ref_db / 10.0) * self.dist_c_base.powf(-self.pl_exp_c)
    }

    /// Sets `p_tx` so that a user at the nominal distance receives the given
    /// SNR over `sigma2_c`.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.p_tx = self.sigma2_c * 10f64.powf(snr_db / 10.0) / self.nominal_path_gain();
        self
    }

    /// Received SNR at the nominal user distance, dB.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.p_tx * self.nominal_path_gain() / self.sigma2_c).log10()
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        let cfg: SystemConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: SystemConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Short stable digest of the serialized configuration, used in CSV footers.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_toml_string().as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_match_reference_setup() {
        let c = SystemConfig::default();
        c.validate().unwrap();
        assert_eq!(
            (c.n_tx, c.n_rx, c.n_users, c.n_targets, c.n_clutter),
            (16, 16, 4, 2, 2)
        );
        assert!((c.snr_db() - 20.0).abs() < 1e-9);
        assert!((c.p_tx - 1e-4).abs() < 1e-15);
        assert!((c.per_antenna_power() - c.p_tx / 16.0).abs() < 1e-30);
    }

    #[test]
    fn toml_round_trip_with_partial_file() {
        let c = SystemConfig::from_toml_str("n_users = 6\nseed = 42\n").unwrap();
        assert_eq!(c.n_users, 6);
        assert_eq!(c.seed, 42);
        assert_eq!(c.n_tx, 16);
        let back = SystemConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_invalid_values() {
        assert!(SystemConfig::from_toml_str("n_users = 0").is_err());
        assert!(SystemConfig::from_toml_str("p_tx = -1.0").is_err());
        assert!(SystemConfig::from_toml_str("angle_lo = 1.0\nangle_hi = 0.5").is_err());
        assert!(SystemConfig::from_toml_str("bogus = 1").is_err());
        let c = SystemConfig {
            n_clutter: 0,
            ..SystemConfig::default()
        };
        assert!(c.validate().is_ok());
    }

    #[test]
    fn digest_changes_with_content() {
        let a = SystemConfig::default();
        let b = SystemConfig {
            seed: 1,
            ..a.clone()
        };
        assert_eq!(a.digest(), a.clone().digest());
        assert_ne!(a.digest(), b.digest());
    }
}
