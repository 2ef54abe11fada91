//! C ABI over the `dcrm` engine.
//!
//! Scenarios and simulation results cross the boundary as opaque handles that
//! the caller frees with the matching `*_free` function. Every fallible call
//! returns a [`DcrmStatus`]; on failure a message is available from
//! [`dcrm_last_error`] on the same thread. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dcrm::config::{ConfigError, ScenarioConfig};
use dcrm::dcrm::{self as model, SimulationOptions};
use dcrm::payd::{self, PaydPolicy};
use dcrm::{DcrmScenario, Error, SimulationResult};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcrmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Config = 4,
    Io = 5,
    Unsupported = 6,
    BufferTooSmall = 7,
    Panic = 99,
}

/// Opaque scenario handle.
pub struct DcrmScenarioHandle {
    config: ScenarioConfig,
}

/// Opaque simulation result handle.
pub struct DcrmSimulationHandle {
    result: SimulationResult,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DcrmEstimate {
    pub value: f64,
    pub std_error: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DcrmSummary {
    pub n_paths: u64,
    pub mean: f64,
    pub mean_std_error: f64,
    pub variance: f64,
    pub variance_std_error: f64,
}

/// `per_expected_mile` is NaN when no mileage is expected.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DcrmQuote {
    pub net_premium: f64,
    pub std_error: f64,
    pub expected_mileage: f64,
    pub per_expected_mile: f64,
    pub n_outer_paths: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn fail(status: DcrmStatus, message: impl Into<String>) -> DcrmStatus {
    set_error(message.into());
    status
}

fn from_model(err: Error) -> DcrmStatus {
    let status = match err {
        Error::MgfDomain { .. } => DcrmStatus::Domain,
        Error::Unsupported(_) | Error::MissingTrace => DcrmStatus::Unsupported,
        _ => DcrmStatus::InvalidArgument,
    };
    fail(status, err.to_string())
}

fn from_config(err: ConfigError) -> DcrmStatus {
    let status = match err {
        ConfigError::Io { .. } => DcrmStatus::Io,
        _ => DcrmStatus::Config,
    };
    fail(status, err.to_string())
}

fn guard(f: impl FnOnce() -> DcrmStatus) -> DcrmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == DcrmStatus::Ok {
                set_error(String::new());
            }
            status
        }
        Err(_) => fail(DcrmStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, DcrmStatus> {
    if p.is_null() {
        return Err(fail(DcrmStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(DcrmStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn scenario_ref<'a>(p: *const DcrmScenarioHandle) -> Result<&'a DcrmScenarioHandle, DcrmStatus> {
    p.as_ref().ok_or_else(|| fail(DcrmStatus::NullPointer, "scenario handle is null"))
}

fn write_out<T>(out: *mut T, value: T) -> DcrmStatus {
    if out.is_null() {
        return fail(DcrmStatus::NullPointer, "output pointer is null");
    }
    unsafe { out.write(value) };
    DcrmStatus::Ok
}

fn finish<T>(out: *mut T, value: Result<T, DcrmStatus>) -> DcrmStatus {
    match value {
        Ok(v) => write_out(out, v),
        Err(s) => s,
    }
}

/// Copies the calling thread's last error message (NUL-terminated, truncated to
/// fit) into `buf` and returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dcrm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parses a TOML scenario. Relative trip-log paths resolve against `base_dir`
/// (the working directory when null).
///
/// # Safety
/// `text` and `base_dir` must be null or NUL-terminated strings; `out` must be
/// null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_scenario_from_toml(
    text: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut DcrmScenarioHandle,
) -> DcrmStatus {
    guard(|| {
        let parsed = (|| {
            let text = str_arg(text, "text")?;
            let base = if base_dir.is_null() { "." } else { str_arg(base_dir, "base_dir")? };
            let config = ScenarioConfig::from_toml_str(text, Path::new(base)).map_err(from_config)?;
            Ok(Box::into_raw(Box::new(DcrmScenarioHandle { config })))
        })();
        finish(out, parsed)
    })
}

/// Loads a TOML scenario file.
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_scenario_load(path: *const c_char, out: *mut *mut DcrmScenarioHandle) -> DcrmStatus {
    guard(|| {
        let loaded = (|| {
            let path = str_arg(path, "path")?;
            let config = ScenarioConfig::load(Path::new(path)).map_err(from_config)?;
            Ok(Box::into_raw(Box::new(DcrmScenarioHandle { config })))
        })();
        finish(out, loaded)
    })
}

/// # Safety
/// `handle` must be null or come from `dcrm_scenario_from_toml`/`dcrm_scenario_load`
/// and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn dcrm_scenario_free(handle: *mut DcrmScenarioHandle) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// `μ1 λ (1 - e^{-δt}) / δ`, with the `δ = 0` limit `μ1 λ t`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_analytic_mean(mu1: f64, lambda: f64, delta: f64, t: f64, out: *mut f64) -> DcrmStatus {
    guard(|| {
        if !(delta >= 0.0 && t >= 0.0 && lambda >= 0.0) {
            return fail(DcrmStatus::InvalidArgument, "lambda, delta and t must be >= 0");
        }
        write_out(out, model::analytic_mean(mu1, lambda, delta, t))
    })
}

/// `μ2 λ (1 - e^{-2δt}) / (2δ)`, with the `δ = 0` limit `μ2 λ t`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_analytic_variance(mu2: f64, lambda: f64, delta: f64, t: f64, out: *mut f64) -> DcrmStatus {
    guard(|| {
        if !(delta >= 0.0 && t >= 0.0 && lambda >= 0.0) {
            return fail(DcrmStatus::InvalidArgument, "lambda, delta and t must be >= 0");
        }
        write_out(out, model::analytic_variance(mu2, lambda, delta, t))
    })
}

/// Closed-form m.g.f. for exponential claims with mean `beta`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_mgf_exponential_closed(
    beta: f64,
    lambda: f64,
    delta: f64,
    t: f64,
    u: f64,
    out: *mut f64,
) -> DcrmStatus {
    guard(|| finish(out, model::mgf_exponential_closed(beta, lambda, delta, t, u).map_err(from_model)))
}

/// Quadrature m.g.f. of `Z_t` for a non-Cox scenario.
///
/// # Safety
/// `scenario` must be a live handle or null; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_scenario_mgf(scenario: *const DcrmScenarioHandle, u: f64, out: *mut f64) -> DcrmStatus {
    guard(|| {
        let value = (|| {
            let s: &DcrmScenario = &scenario_ref(scenario)?.config.scenario;
            if s.is_cox() {
                return Err(fail(DcrmStatus::Unsupported, "use dcrm_mgf_cox for mileage-driven scenarios"));
            }
            model::mgf_nhpp(&s.claim, &s.intensity, s.delta, s.horizon, u).map_err(from_model)
        })();
        finish(out, value)
    })
}

/// Simulates `n_paths` realizations of `Z_t`; `full_trace` is taken from the scenario.
///
/// # Safety
/// `scenario` must be a live handle or null; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_simulate(
    scenario: *const DcrmScenarioHandle,
    n_paths: u64,
    seed: u64,
    out: *mut *mut DcrmSimulationHandle,
) -> DcrmStatus {
    guard(|| {
        let sim = (|| {
            let h = scenario_ref(scenario)?;
            let opts = SimulationOptions {
                full_trace: h.config.simulation.full_trace,
            };
            let result = model::simulate_zt(&h.config.scenario, n_paths as usize, seed, opts).map_err(from_model)?;
            Ok(Box::into_raw(Box::new(DcrmSimulationHandle { result })))
        })();
        finish(out, sim)
    })
}

/// # Safety
/// `handle` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn dcrm_simulation_free(handle: *mut DcrmSimulationHandle) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of paths, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn dcrm_simulation_len(handle: *const DcrmSimulationHandle) -> usize {
    handle.as_ref().map_or(0, |h| h.result.n_paths())
}

/// Copies the per-path `Z_t` values into `buf`, which must hold at least
/// `dcrm_simulation_len` values.
///
/// # Safety
/// `handle` must be null or a live simulation handle; `buf` must be null or
/// valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_simulation_copy_z(handle: *const DcrmSimulationHandle, buf: *mut f64, len: usize) -> DcrmStatus {
    guard(|| {
        let Some(h) = handle.as_ref() else {
            return fail(DcrmStatus::NullPointer, "simulation handle is null");
        };
        if buf.is_null() {
            return fail(DcrmStatus::NullPointer, "buffer is null");
        }
        let z = &h.result.z;
        if len < z.len() {
            return fail(DcrmStatus::BufferTooSmall, format!("need {} values, got {len}", z.len()));
        }
        ptr::copy_nonoverlapping(z.as_ptr(), buf, z.len());
        DcrmStatus::Ok
    })
}

/// Copies the per-path claim counts into `buf`.
///
/// # Safety
/// As [`dcrm_simulation_copy_z`].
#[no_mangle]
pub unsafe extern "C" fn dcrm_simulation_copy_counts(
    handle: *const DcrmSimulationHandle,
    buf: *mut u32,
    len: usize,
) -> DcrmStatus {
    guard(|| {
        let Some(h) = handle.as_ref() else {
            return fail(DcrmStatus::NullPointer, "simulation handle is null");
        };
        if buf.is_null() {
            return fail(DcrmStatus::NullPointer, "buffer is null");
        }
        let c = &h.result.counts;
        if len < c.len() {
            return fail(DcrmStatus::BufferTooSmall, format!("need {} values, got {len}", c.len()));
        }
        ptr::copy_nonoverlapping(c.as_ptr(), buf, c.len());
        DcrmStatus::Ok
    })
}

/// # Safety
/// `handle` must be null or a live simulation handle; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_simulation_summary(handle: *const DcrmSimulationHandle, out: *mut DcrmSummary) -> DcrmStatus {
    guard(|| {
        let Some(h) = handle.as_ref() else {
            return fail(DcrmStatus::NullPointer, "simulation handle is null");
        };
        let s = h.result.summary();
        write_out(
            out,
            DcrmSummary {
                n_paths: s.n as u64,
                mean: s.mean,
                mean_std_error: s.std_error(),
                variance: s.variance,
                variance_std_error: s.variance_std_error(),
            },
        )
    })
}

/// Sample m.g.f. `mean(exp(u Z))` over the simulated paths.
///
/// # Safety
/// `handle` must be null or a live simulation handle; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_simulation_mgf(handle: *const DcrmSimulationHandle, u: f64, out: *mut DcrmEstimate) -> DcrmStatus {
    guard(|| {
        let Some(h) = handle.as_ref() else {
            return fail(DcrmStatus::NullPointer, "simulation handle is null");
        };
        let est = model::estimate_mgf_empirical(&h.result, u)
            .map(|e| DcrmEstimate {
                value: e.value,
                std_error: e.std_error,
            })
            .map_err(from_model);
        finish(out, est)
    })
}

unsafe fn policy_of(scenario: *const DcrmScenarioHandle) -> Result<PaydPolicy, DcrmStatus> {
    PaydPolicy::from_scenario(&scenario_ref(scenario)?.config.scenario).map_err(from_model)
}

/// PAYD net premium over `n_outer` mileage paths (one for deterministic mileage).
///
/// # Safety
/// `scenario` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_price(
    scenario: *const DcrmScenarioHandle,
    n_outer: u64,
    seed: u64,
    out: *mut DcrmQuote,
) -> DcrmStatus {
    guard(|| {
        let quote = (|| {
            let q = payd::price_payd(&policy_of(scenario)?, n_outer as usize, seed).map_err(from_model)?;
            Ok(DcrmQuote {
                net_premium: q.net_premium,
                std_error: q.standard_error,
                expected_mileage: q.expected_mileage,
                per_expected_mile: q.per_expected_mile.unwrap_or(f64::NAN),
                n_outer_paths: q.n_outer_paths as u64,
            })
        })();
        finish(out, quote)
    })
}

/// Cox-process m.g.f. of `Z_t` by outer Monte Carlo over mileage paths.
///
/// # Safety
/// `scenario` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dcrm_mgf_cox(
    scenario: *const DcrmScenarioHandle,
    u: f64,
    n_outer: u64,
    seed: u64,
    out: *mut DcrmEstimate,
) -> DcrmStatus {
    guard(|| {
        let est = (|| {
            let e = payd::mgf_cox(&policy_of(scenario)?, u, n_outer as usize, seed).map_err(from_model)?;
            Ok(DcrmEstimate {
                value: e.value,
                std_error: e.std_error,
            })
        })();
        finish(out, est)
    })
}
