//! C interface to the simulator.
//!
//! Every function returns an [`IqStatus`]. On failure the message is kept per
//! thread and can be read with [`iq_last_error`]. Handles are opaque and must
//! be released with their `_free` function. Strings handed out by the library
//! are released with [`iq_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use isingqec::engine::{run_trial, Config, TrialOutcome};
use isingqec::error::SimError;
use isingqec::harness::{self, ResultRow, RunOptions};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    Io = 3,
    Parse = 4,
    Simulation = 5,
    /// `iq_replay_verify` ran but the trace did not verify.
    VerificationFailed = 6,
    Panic = 7,
}

/// Simulation parameters.
pub struct IqConfig(Config);

/// A completed trial.
pub struct IqTrial(TrialOutcome);

/// Aggregate of one batch of trials.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IqResultRow {
    pub l: u32,
    pub p: f64,
    pub rounds: u32,
    pub trials: u64,
    pub sigma_failures: u64,
    pub psi_failures: u64,
    pub failures_total: u64,
    pub failure_rate_per_round: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub completion_timeouts: u64,
    pub master_seed: u64,
}

impl From<&ResultRow> for IqResultRow {
    fn from(r: &ResultRow) -> Self {
        IqResultRow {
            l: r.l,
            p: r.p,
            rounds: r.rounds,
            trials: r.trials,
            sigma_failures: r.sigma_failures,
            psi_failures: r.psi_failures,
            failures_total: r.failures_total,
            failure_rate_per_round: r.failure_rate_per_round,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            completion_timeouts: r.completion_timeouts,
            master_seed: r.master_seed,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &SimError) -> IqStatus {
    match e {
        SimError::Config(_) => IqStatus::InvalidConfig,
        SimError::Io(_) => IqStatus::Io,
        SimError::Parse { .. } | SimError::Trace(_) | SimError::Json(_) | SimError::Csv(_) => IqStatus::Parse,
        _ => IqStatus::Simulation,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (IqStatus, String)>) -> IqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IqStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("panic: {msg}"));
            IqStatus::Panic
        }
    }
}

fn sim(e: SimError) -> (IqStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (IqStatus, String) {
    (IqStatus::NullPointer, "null pointer argument".to_string())
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, (IqStatus, String)> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (IqStatus::Parse, "string is not UTF-8".to_string()))
}

fn give_string(s: String, out: *mut *mut c_char) -> Result<(), (IqStatus, String)> {
    let c = CString::new(s).map_err(|_| (IqStatus::Simulation, "interior NUL".to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the next call that fails.
#[no_mangle]
pub extern "C" fn iq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a configuration with one trial and master seed 0.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iq_config_new(l: u32, p: f64, rounds: u32, out: *mut *mut IqConfig) -> IqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let cfg = Config::new(l, p, rounds);
        cfg.validate().map_err(|e| sim(e.into()))?;
        *out = Box::into_raw(Box::new(IqConfig(cfg)));
        Ok(())
    })
}

/// Parses a JSON configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iq_config_from_json(json: *const c_char, out: *mut *mut IqConfig) -> IqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let cfg: Config = serde_json::from_str(c_str(json)?).map_err(|e| sim(e.into()))?;
        cfg.validate().map_err(|e| sim(e.into()))?;
        *out = Box::into_raw(Box::new(IqConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iq_config_set_trials(cfg: *mut IqConfig, trials: u64) -> IqStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(null)?;
        if trials == 0 {
            return Err(sim(isingqec::error::ConfigError::Trials.into()));
        }
        cfg.0.trials = trials;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iq_config_set_seed(cfg: *mut IqConfig, seed: u64) -> IqStatus {
    guard(|| {
        cfg.as_mut().ok_or_else(null)?.0.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iq_config_free(cfg: *mut IqConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs all trials of `cfg` and writes the aggregate to `out`.
///
/// `trace_dir` may be null; otherwise one JSONL trace per trial is written there.
///
/// # Safety
/// `cfg` must be a live handle, `trace_dir` null or a NUL-terminated path, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iq_run(
    cfg: *const IqConfig,
    workers: u32,
    trace_dir: *const c_char,
    out: *mut IqResultRow,
) -> IqStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let trace_dir = if trace_dir.is_null() {
            None
        } else {
            Some(Path::new(c_str(trace_dir)?).to_path_buf())
        };
        let opts = RunOptions {
            workers: workers as usize,
            trace_dir,
        };
        let report = harness::run(&cfg.0, &opts).map_err(sim)?;
        *out = IqResultRow::from(&report.row);
        Ok(())
    })
}

/// Runs trial `index` of `cfg`.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iq_trial_run(cfg: *const IqConfig, index: u64, out: *mut *mut IqTrial) -> IqStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        cfg.0.validate().map_err(|e| sim(e.into()))?;
        let outcome = run_trial(&cfg.0, index).map_err(sim)?;
        *out = Box::into_raw(Box::new(IqTrial(outcome)));
        Ok(())
    })
}

/// Success flag of a trial: 1 success, 0 failure, -1 completion timed out.
///
/// # Safety
/// `trial` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iq_trial_success(trial: *const IqTrial, out: *mut i32) -> IqStatus {
    guard(|| {
        let t = trial.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        *out = match &t.0.verdict {
            Some(v) => v.success as i32,
            None => -1,
        };
        Ok(())
    })
}

/// JSONL trace of a trial; release with [`iq_string_free`].
///
/// # Safety
/// `trial` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iq_trial_trace_json(trial: *const IqTrial, out: *mut *mut c_char) -> IqStatus {
    guard(|| {
        let t = trial.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        give_string(t.0.to_jsonl(), out)
    })
}

/// # Safety
/// `trial` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iq_trial_free(trial: *mut IqTrial) {
    if !trial.is_null() {
        drop(Box::from_raw(trial));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Re-analyses a trace file. Returns `VerificationFailed` if the recomputed
/// verdict or correction differs from the recorded one. `report_json` may be
/// null; otherwise it receives the report, to be released with [`iq_string_free`].
///
/// # Safety
/// `path` must be a NUL-terminated path; `report_json` null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn iq_replay_verify(path: *const c_char, report_json: *mut *mut c_char) -> IqStatus {
    let mut verified = true;
    let status = guard(|| {
        let report = harness::replay_verify(Path::new(c_str(path)?)).map_err(sim)?;
        verified = report.ok();
        if !report_json.is_null() {
            let s = serde_json::to_string(&report).map_err(|e| sim(e.into()))?;
            give_string(s, report_json)?;
        }
        Ok(())
    });
    if status == IqStatus::Ok && !verified {
        set_error("trace did not verify".to_string());
        return IqStatus::VerificationFailed;
    }
    status
}
