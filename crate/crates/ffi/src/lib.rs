//! C interface to the `isac-beam` solvers.
//!
//! Objects are opaque handles created by `*_new`/`*_generate`/`isac_solve_*`
//! and released with the matching `*_free`. Every fallible call returns an
//! [`IsacStatus`]; the message of the most recent failure on the calling
//! thread is available from [`isac_last_error`].
//!
//! Complex matrices are copied out column-major as interleaved
//! `re, im` pairs.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access the function
//! documents: handles must come from this library and not be freed yet,
//! strings must be NUL-terminated, and `(buf, len)` must describe writable
//! memory of at least `len` elements. Handles are not thread-safe to share
//! across concurrent calls that mutate them.

#![allow(clippy::missing_safety_doc, clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use isac_beam::fp::{self, FpOptions};
use isac_beam::maxmin::{self, SolverOptions};
use isac_beam::{CMat, Error, Scene, Solution, SystemConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    IndexOutOfRange = 3,
    DimensionMismatch = 4,
    Numerical = 5,
    Io = 6,
    Parse = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// System parameters.
pub struct IsacConfig(SystemConfig);

/// One channel realization.
pub struct IsacScene(Scene);

/// Solver output.
pub struct IsacSolution(Solution);

/// Options of the first-order solver.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IsacAlg1Options {
    pub mu: f64,
    pub outer_max: u32,
    pub inner_w: u32,
    pub tol: f64,
}

/// Options of the fractional-programming baseline.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IsacFpOptions {
    pub outer_max: u32,
    pub tol: f64,
    pub epigraph_iters: u32,
    pub step_scale: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IsacSummary {
    pub n_tx: u32,
    pub n_rx: u32,
    pub n_users: u32,
    pub n_targets: u32,
    pub min_sinr: f64,
    pub min_scnr: f64,
    pub objective_p1: f64,
    pub objective_p2: f64,
    pub iterations: u32,
    pub converged: bool,
    pub seconds: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: IsacStatus, msg: impl Into<String>) -> IsacStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> IsacStatus {
    let status = match &e {
        Error::InvalidConfig(_) => IsacStatus::InvalidArgument,
        Error::IndexOutOfRange { .. } => IsacStatus::IndexOutOfRange,
        Error::DimensionMismatch(_) => IsacStatus::DimensionMismatch,
        Error::NonPositiveDistance(_)
        | Error::NotHermitian(_)
        | Error::Singular
        | Error::DegenerateRow { .. }
        | Error::StalledAuxiliary { .. } => IsacStatus::Numerical,
        Error::Io { .. } => IsacStatus::Io,
        Error::Parse { .. } => IsacStatus::Parse,
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into [`IsacStatus::Panic`].
fn guard(f: impl FnOnce() -> IsacStatus) -> IsacStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(IsacStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, IsacStatus> {
    if s.is_null() {
        return Err(fail(IsacStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(IsacStatus::InvalidArgument, "string argument is not UTF-8"))
}

macro_rules! deref {
    ($p:expr, $what:literal) => {
        match $p.as_ref() {
            Some(v) => v,
            None => return fail(IsacStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

macro_rules! deref_mut {
    ($p:expr, $what:literal) => {
        match $p.as_mut() {
            Some(v) => v,
            None => return fail(IsacStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL, or
/// 0 when there is no error.
#[no_mangle]
pub unsafe extern "C" fn isac_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn isac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Default system configuration. Never null.
#[no_mangle]
pub extern "C" fn isac_config_new() -> *mut IsacConfig {
    Box::into_raw(Box::new(IsacConfig(SystemConfig::default())))
}

/// Parses a TOML configuration; missing keys take defaults.
#[no_mangle]
pub unsafe extern "C" fn isac_config_from_toml(
    text: *const c_char,
    out: *mut *mut IsacConfig,
) -> IsacStatus {
    guard(|| {
        let out = deref_mut!(out, "out");
        let text = match str_arg(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match SystemConfig::from_toml_str(text) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(IsacConfig(c)));
                IsacStatus::Ok
            }
            Err(msg) => fail(IsacStatus::Parse, msg),
        }
    })
}

/// Loads a TOML configuration file.
#[no_mangle]
pub unsafe extern "C" fn isac_config_load(
    path: *const c_char,
    out: *mut *mut IsacConfig,
) -> IsacStatus {
    guard(|| {
        let out = deref_mut!(out, "out");
        let path = match str_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match SystemConfig::load(Path::new(path)) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(IsacConfig(c)));
                IsacStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn isac_config_free(cfg: *mut IsacConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

#[no_mangle]
pub unsafe extern "C" fn isac_config_set_seed(cfg: *mut IsacConfig, seed: u64) -> IsacStatus {
    deref_mut!(cfg, "config").0.seed = seed;
    IsacStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn isac_config_set_delta(cfg: *mut IsacConfig, delta: f64) -> IsacStatus {
    let cfg = deref_mut!(cfg, "config");
    if !(delta.is_finite() && delta >= 0.0) {
        return fail(IsacStatus::InvalidArgument, "delta must be finite and >= 0");
    }
    cfg.0.delta = delta;
    IsacStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn isac_config_set_users(cfg: *mut IsacConfig, n_users: u32) -> IsacStatus {
    let cfg = deref_mut!(cfg, "config");
    if n_users == 0 {
        return fail(IsacStatus::InvalidArgument, "n_users must be at least 1");
    }
    cfg.0.n_users = n_users as usize;
    IsacStatus::Ok
}

/// Sets the transmit power so that a user at the nominal distance sees
/// `snr_db` over the user noise power.
#[no_mangle]
pub unsafe extern "C" fn isac_config_set_snr_db(cfg: *mut IsacConfig, snr_db: f64) -> IsacStatus {
    let cfg = deref_mut!(cfg, "config");
    if !snr_db.is_finite() {
        return fail(IsacStatus::InvalidArgument, "snr_db must be finite");
    }
    cfg.0 = cfg.0.clone().with_snr_db(snr_db);
    IsacStatus::Ok
}

/// Writes the configuration as TOML into `buf` (NUL-terminated). `needed`
/// receives the length including the NUL.
#[no_mangle]
pub unsafe extern "C" fn isac_config_to_toml(
    cfg: *const IsacConfig,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> IsacStatus {
    guard(|| {
        let cfg = deref!(cfg, "config");
        let text = cfg.0.to_toml_string();
        let n = text.len() + 1;
        if let Some(needed) = needed.as_mut() {
            *needed = n;
        }
        if buf.is_null() || len < n {
            return fail(IsacStatus::BufferTooSmall, format!("need {n} bytes"));
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
        *buf.add(text.len()) = 0;
        IsacStatus::Ok
    })
}

/// Draws the scene for the configuration's seed.
#[no_mangle]
pub unsafe extern "C" fn isac_scene_generate(
    cfg: *const IsacConfig,
    out: *mut *mut IsacScene,
) -> IsacStatus {
    guard(|| {
        let cfg = deref!(cfg, "config");
        let out = deref_mut!(out, "out");
        match isac_beam::generate_scene(&cfg.0) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(IsacScene(s)));
                IsacStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn isac_scene_free(scene: *mut IsacScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Copies the user channel matrix (`n_tx x n_users`) into `buf`, which must
/// hold `2 * n_tx * n_users` doubles.
#[no_mangle]
pub unsafe extern "C" fn isac_scene_channels(
    scene: *const IsacScene,
    buf: *mut f64,
    len: usize,
) -> IsacStatus {
    guard(|| copy_matrix(&deref!(scene, "scene").0.h, buf, len))
}

#[no_mangle]
pub extern "C" fn isac_alg1_options_default() -> IsacAlg1Options {
    let o = SolverOptions::default();
    IsacAlg1Options {
        mu: o.mu,
        outer_max: o.outer_max as u32,
        inner_w: o.inner_w as u32,
        tol: o.tol,
    }
}

#[no_mangle]
pub extern "C" fn isac_fp_options_default() -> IsacFpOptions {
    let o = FpOptions::default();
    IsacFpOptions {
        outer_max: o.outer_max as u32,
        tol: o.tol,
        epigraph_iters: o.epigraph.iters as u32,
        step_scale: o.epigraph.step_scale,
    }
}

fn store(result: isac_beam::Result<Solution>, out: &mut *mut IsacSolution) -> IsacStatus {
    match result {
        Ok(sol) => {
            *out = Box::into_raw(Box::new(IsacSolution(sol)));
            IsacStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// Runs the first-order solver. `opts` may be null for defaults. The sensing
/// weight and power budget come from `cfg`.
#[no_mangle]
pub unsafe extern "C" fn isac_solve_alg1(
    scene: *const IsacScene,
    cfg: *const IsacConfig,
    opts: *const IsacAlg1Options,
    out: *mut *mut IsacSolution,
) -> IsacStatus {
    guard(|| {
        let scene = deref!(scene, "scene");
        let cfg = deref!(cfg, "config");
        let out = deref_mut!(out, "out");
        let mut options = SolverOptions::default();
        if let Some(o) = opts.as_ref() {
            options.mu = o.mu;
            options.outer_max = o.outer_max as usize;
            options.inner_w = o.inner_w as usize;
            options.tol = o.tol;
        }
        store(maxmin::solve(&scene.0, &cfg.0, &options), out)
    })
}

/// Runs the fractional-programming baseline. `opts` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn isac_solve_fp(
    scene: *const IsacScene,
    cfg: *const IsacConfig,
    opts: *const IsacFpOptions,
    out: *mut *mut IsacSolution,
) -> IsacStatus {
    guard(|| {
        let scene = deref!(scene, "scene");
        let cfg = deref!(cfg, "config");
        let out = deref_mut!(out, "out");
        let mut options = FpOptions::default();
        if let Some(o) = opts.as_ref() {
            if o.epigraph_iters == 0 || !(o.step_scale > 0.0) {
                return fail(
                    IsacStatus::InvalidArgument,
                    "epigraph_iters and step_scale must be positive",
                );
            }
            options.outer_max = o.outer_max as usize;
            options.tol = o.tol;
            options.epigraph.iters = o.epigraph_iters as usize;
            options.epigraph.step_scale = o.step_scale;
        }
        store(fp::solve_fp(&scene.0, &cfg.0, &options), out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn isac_solution_free(sol: *mut IsacSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

#[no_mangle]
pub unsafe extern "C" fn isac_solution_summary(
    sol: *const IsacSolution,
    out: *mut IsacSummary,
) -> IsacStatus {
    let sol = &deref!(sol, "solution").0;
    let out = deref_mut!(out, "out");
    let (w, f) = (&sol.beamformers.w, &sol.beamformers.f);
    *out = IsacSummary {
        n_tx: w.nrows() as u32,
        n_rx: f.nrows() as u32,
        n_users: w.ncols() as u32,
        n_targets: f.ncols() as u32,
        min_sinr: sol.report.min_sinr,
        min_scnr: sol.report.min_scnr,
        objective_p1: sol.report.objective_p1,
        objective_p2: sol.report.objective_p2,
        iterations: (sol.trace.len() - 1) as u32,
        converged: sol.converged,
        seconds: sol.elapsed.as_secs_f64(),
    };
    IsacStatus::Ok
}

unsafe fn copy_matrix(m: &CMat, buf: *mut f64, len: usize) -> IsacStatus {
    let need = 2 * m.len();
    if buf.is_null() {
        return fail(IsacStatus::NullPointer, "buffer is null");
    }
    if len < need {
        return fail(
            IsacStatus::BufferTooSmall,
            format!("need {need} doubles, got {len}"),
        );
    }
    let out = std::slice::from_raw_parts_mut(buf, need);
    for (pair, v) in out.chunks_exact_mut(2).zip(m.iter()) {
        pair[0] = v.re;
        pair[1] = v.im;
    }
    IsacStatus::Ok
}

unsafe fn copy_reals(v: &[f64], buf: *mut f64, len: usize) -> IsacStatus {
    if buf.is_null() {
        return fail(IsacStatus::NullPointer, "buffer is null");
    }
    if len < v.len() {
        return fail(
            IsacStatus::BufferTooSmall,
            format!("need {} doubles, got {len}", v.len()),
        );
    }
    ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
    IsacStatus::Ok
}

/// Precoder `W` (`n_tx x n_users`); `len` counts doubles, at least `2 * n_tx * n_users`.
#[no_mangle]
pub unsafe extern "C" fn isac_solution_precoder(
    sol: *const IsacSolution,
    buf: *mut f64,
    len: usize,
) -> IsacStatus {
    guard(|| copy_matrix(&deref!(sol, "solution").0.beamformers.w, buf, len))
}

/// Radar combiner `F` (`n_rx x n_targets`); `len` at least `2 * n_rx * n_targets`.
#[no_mangle]
pub unsafe extern "C" fn isac_solution_combiner(
    sol: *const IsacSolution,
    buf: *mut f64,
    len: usize,
) -> IsacStatus {
    guard(|| copy_matrix(&deref!(sol, "solution").0.beamformers.f, buf, len))
}

/// Linear per-user SINR; `len` at least `n_users`.
#[no_mangle]
pub unsafe extern "C" fn isac_solution_sinr(
    sol: *const IsacSolution,
    buf: *mut f64,
    len: usize,
) -> IsacStatus {
    guard(|| copy_reals(&deref!(sol, "solution").0.report.sinr, buf, len))
}

/// Linear per-target SCNR; `len` at least `n_targets`.
#[no_mangle]
pub unsafe extern "C" fn isac_solution_scnr(
    sol: *const IsacSolution,
    buf: *mut f64,
    len: usize,
) -> IsacStatus {
    guard(|| copy_reals(&deref!(sol, "solution").0.report.scnr, buf, len))
}

/// Per-iteration linear objective of the trace; `len` at least iterations + 1.
#[no_mangle]
pub unsafe extern "C" fn isac_solution_objective_trace(
    sol: *const IsacSolution,
    buf: *mut f64,
    len: usize,
) -> IsacStatus {
    guard(|| copy_reals(&deref!(sol, "solution").0.trace.objectives_p1(), buf, len))
}
