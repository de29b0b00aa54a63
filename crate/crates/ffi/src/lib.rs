//! C ABI over `handoff-core`.
//!
//! Conventions:
//! - every fallible call returns an [`HoStatus`]; results go through out-pointers;
//! - on failure, [`ho_last_error`] holds a message for the calling thread;
//! - handles are opaque and owned by the caller, released with the matching `_free`;
//! - strings returned by the library are released with [`ho_string_free`].
//!
//! Panics never cross the boundary; they surface as `HO_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use handoff_core::analysis::{
    drone_handoff_rate, handoff_prob, handoff_rate, multi_tier_handoff_prob, ppp_length_intensity, sojourn_time,
    AnalysisError, MobilityMoments, QuadratureSpec,
};
use handoff_core::geometry::Tier;
use handoff_core::harness::{run_experiment, validate_config_str, ExperimentConfig, ExperimentSummary, HarnessError};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Numerical = 4,
    Simulation = 5,
    Io = 6,
    OutOfRange = 7,
    Panic = 99,
}

/// One BS tier.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HoTier {
    /// BS per m².
    pub density: f64,
    /// Watts.
    pub tx_power: f64,
    pub bias: f64,
    pub pathloss_exponent: f64,
}

/// One row of an experiment summary. Missing values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HoRow {
    pub x: f64,
    pub analytical: f64,
    pub sim_mean: f64,
    pub sim_std_error: f64,
    pub sim_n: u64,
    pub rel_gap: f64,
}

/// Parsed, validated experiment config.
pub struct HoExperiment {
    config: ExperimentConfig,
}

/// Result of running an experiment.
pub struct HoSummary {
    summary: ExperimentSummary,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: HoStatus, msg: impl Into<String>) -> HoStatus {
    set_error(msg);
    status
}

fn analysis_status(e: AnalysisError) -> HoStatus {
    let s = match e {
        AnalysisError::InvalidInput(_) => HoStatus::InvalidArgument,
        _ => HoStatus::Numerical,
    };
    fail(s, e.to_string())
}

fn harness_status(e: HarnessError) -> HoStatus {
    let s = match &e {
        HarnessError::Invalid(_) => HoStatus::InvalidConfig,
        HarnessError::Read { .. } | HarnessError::Io(_) | HarnessError::Csv(_) | HarnessError::Json(_) => HoStatus::Io,
        HarnessError::Analysis(_) => HoStatus::Numerical,
        _ => HoStatus::Simulation,
    };
    fail(s, e.to_string())
}

/// Runs `f`, converting a panic into `HO_STATUS_PANIC`.
fn guard<F: FnOnce() -> HoStatus>(f: F) -> HoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == HoStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(HoStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, HoStatus> {
    if s.is_null() {
        return Err(fail(HoStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(HoStatus::InvalidArgument, "string argument is not UTF-8"))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

macro_rules! out_ptr {
    ($p:expr) => {
        if $p.is_null() {
            return fail(HoStatus::NullPointer, concat!(stringify!($p), " is null"));
        }
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ho_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn ho_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn ho_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// One-period handoff probability of a single-tier PPP network.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn ho_handoff_prob(v: f64, lambda: f64, out: *mut f64) -> HoStatus {
    guard(|| {
        out_ptr!(out);
        match handoff_prob(v, lambda, &QuadratureSpec::default()) {
            Ok(q) => {
                *out = q.value;
                HoStatus::Ok
            }
            Err(e) => analysis_status(e),
        }
    })
}

/// Handoff rate of a single-tier PPP network for mobility moments
/// `E[V]`, `E[T]`, `E[S]`.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn ho_handoff_rate_ppp(lambda: f64, e_v: f64, e_t: f64, e_s: f64, out: *mut f64) -> HoStatus {
    guard(|| {
        out_ptr!(out);
        if !(lambda > 0.0 && lambda.is_finite()) {
            return fail(HoStatus::InvalidArgument, format!("density must be positive, got {lambda}"));
        }
        match handoff_rate(ppp_length_intensity(lambda), MobilityMoments::new(e_v, e_t, e_s)) {
            Ok(h) => {
                *out = h;
                HoStatus::Ok
            }
            Err(e) => analysis_status(e),
        }
    })
}

/// Handoff rate of a drone with 3-D mean speed `v_bar`.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn ho_drone_handoff_rate(v_bar: f64, lambda: f64, out: *mut f64) -> HoStatus {
    guard(|| {
        out_ptr!(out);
        match drone_handoff_rate(v_bar, lambda) {
            Ok(h) => {
                *out = h;
                HoStatus::Ok
            }
            Err(e) => analysis_status(e),
        }
    })
}

/// Mean sojourn time in the initial cell, censored at `period`.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn ho_sojourn_time(v: f64, period: f64, lambda: f64, out: *mut f64) -> HoStatus {
    guard(|| {
        out_ptr!(out);
        match sojourn_time(v, period, lambda, &QuadratureSpec::default()) {
            Ok(q) => {
                *out = q.value;
                HoStatus::Ok
            }
            Err(e) => analysis_status(e),
        }
    })
}

/// Total handoff probability of a multi-tier network under biased
/// association.
///
/// # Safety
/// `tiers` must point to `n_tiers` readable `HoTier` values; `out` must be a
/// valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn ho_multi_tier_handoff_prob(v: f64, tiers: *const HoTier, n_tiers: usize, out: *mut f64) -> HoStatus {
    guard(|| {
        out_ptr!(out);
        out_ptr!(tiers);
        if n_tiers == 0 {
            return fail(HoStatus::InvalidArgument, "need at least one tier");
        }
        let tiers: Vec<Tier> = std::slice::from_raw_parts(tiers, n_tiers)
            .iter()
            .map(|t| Tier::new(t.density, t.tx_power, t.bias, t.pathloss_exponent))
            .collect();
        match multi_tier_handoff_prob(v, &tiers, &QuadratureSpec::default()) {
            Ok(m) => {
                *out = m.total;
                HoStatus::Ok
            }
            Err(e) => analysis_status(e),
        }
    })
}

/// Checks an experiment config. Writes the number of problems to
/// `n_problems` and, when `report` is non-NULL, a newline-separated
/// `line:column: path: message` listing (free with `ho_string_free`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `n_problems` must be valid;
/// `report` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ho_validate_config(json: *const c_char, n_problems: *mut usize, report: *mut *mut c_char) -> HoStatus {
    guard(|| {
        out_ptr!(n_problems);
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let diags = validate_config_str(text);
        *n_problems = diags.len();
        if !report.is_null() {
            let listing = diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n");
            *report = to_c_string(listing);
        }
        HoStatus::Ok
    })
}

/// Parses and validates an experiment config.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ho_experiment_from_json(json: *const c_char, out: *mut *mut HoExperiment) -> HoStatus {
    guard(|| {
        out_ptr!(out);
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ExperimentConfig::from_json(text) {
            Ok(config) => {
                *out = Box::into_raw(Box::new(HoExperiment { config }));
                HoStatus::Ok
            }
            Err(e) => harness_status(e),
        }
    })
}

/// Overrides the base seed and replication count (0 keeps the config's).
///
/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ho_experiment_set_plan(exp: *mut HoExperiment, base_seed: u64, n_replications: usize) -> HoStatus {
    guard(|| {
        out_ptr!(exp);
        let cfg = &mut (*exp).config;
        cfg.plan.base_seed = base_seed;
        if n_replications > 0 {
            cfg.plan.n_replications = n_replications;
        }
        HoStatus::Ok
    })
}

/// Turns the Monte Carlo side on or off.
///
/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ho_experiment_set_simulate(exp: *mut HoExperiment, simulate: bool) -> HoStatus {
    guard(|| {
        out_ptr!(exp);
        (*exp).config.simulate = simulate;
        HoStatus::Ok
    })
}

/// Runs the experiment.
///
/// # Safety
/// `exp` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ho_experiment_run(exp: *const HoExperiment, out: *mut *mut HoSummary) -> HoStatus {
    guard(|| {
        out_ptr!(out);
        *out = ptr::null_mut();
        out_ptr!(exp);
        match run_experiment(&(*exp).config) {
            Ok(summary) => {
                *out = Box::into_raw(Box::new(HoSummary { summary }));
                HoStatus::Ok
            }
            Err(e) => harness_status(e),
        }
    })
}

/// Releases an experiment handle. NULL is ignored.
///
/// # Safety
/// `exp` must come from `ho_experiment_from_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ho_experiment_free(exp: *mut HoExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Number of result rows.
///
/// # Safety
/// `summary` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn ho_summary_row_count(summary: *const HoSummary) -> usize {
    summary.as_ref().map_or(0, |s| s.summary.rows.len())
}

/// Copies row `index` into `out`.
///
/// # Safety
/// `summary` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ho_summary_row(summary: *const HoSummary, index: usize, out: *mut HoRow) -> HoStatus {
    guard(|| {
        out_ptr!(summary);
        out_ptr!(out);
        let rows = &(*summary).summary.rows;
        let Some(r) = rows.get(index) else {
            return fail(HoStatus::OutOfRange, format!("row {index} of {}", rows.len()));
        };
        *out = HoRow {
            x: r.x,
            analytical: r.analytical.unwrap_or(f64::NAN),
            sim_mean: r.simulated.map_or(f64::NAN, |s| s.mean),
            sim_std_error: r.simulated.map_or(f64::NAN, |s| s.std_error),
            sim_n: r.simulated.map_or(0, |s| s.n as u64),
            rel_gap: r.rel_gap.unwrap_or(f64::NAN),
        };
        HoStatus::Ok
    })
}

/// Series label of row `index` (free with `ho_string_free`).
///
/// # Safety
/// `summary` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ho_summary_row_series(summary: *const HoSummary, index: usize, out: *mut *mut c_char) -> HoStatus {
    guard(|| {
        out_ptr!(summary);
        out_ptr!(out);
        match (&(*summary).summary.rows).get(index) {
            Some(r) => {
                *out = to_c_string(r.series.clone());
                HoStatus::Ok
            }
            None => fail(HoStatus::OutOfRange, format!("row {index}")),
        }
    })
}

/// Full summary as JSON (free with `ho_string_free`).
///
/// # Safety
/// `summary` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ho_summary_to_json(summary: *const HoSummary, out: *mut *mut c_char) -> HoStatus {
    guard(|| {
        out_ptr!(summary);
        out_ptr!(out);
        match serde_json::to_string(&(*summary).summary) {
            Ok(s) => {
                *out = to_c_string(s);
                HoStatus::Ok
            }
            Err(e) => fail(HoStatus::Io, e.to_string()),
        }
    })
}

/// Releases a summary handle. NULL is ignored.
///
/// # Safety
/// `summary` must come from `ho_experiment_run` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ho_summary_free(summary: *mut HoSummary) {
    if !summary.is_null() {
        drop(Box::from_raw(summary));
    }
}
