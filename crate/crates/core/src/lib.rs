//! Joint transmit/receive beamforming for monostatic integrated sensing and
//! communications downlinks.
//!
//! Two solvers maximize `min_k SINR_k + delta * min_m SCNR_m` under a
//! per-antenna power cap:
//!
//! * [`maxmin`]: a first-order method that smooths the pointwise minima with
//!   a softmin, updates the auxiliaries and the radar combiner in closed form,
//!   and refines the precoder by minorize-maximize steps whose maximizer is a
//!   row normalization.
//! * [`fp`]: alternating optimization over quadratic-transform auxiliaries,
//!   the MMSE combiner, and the precoder, where the precoder block is a
//!   max-min of concave quadratics solved by projected supergradient ascent.
//!
//! [`harness`] runs the Monte-Carlo experiments and writes CSV files.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fp;
pub mod harness;
pub mod linalg;
pub mod maxmin;
pub mod metrics;
pub mod scene;
pub mod trace;

#[cfg(test)]
pub(crate) mod test_util;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub use config::SystemConfig;
pub use error::{Error, Result};
pub use metrics::{evaluate, Beamformers, MetricsReport};
pub use scene::{generate_scene, Scene, TargetResponse};
pub use trace::{RunTrace, Solution};
