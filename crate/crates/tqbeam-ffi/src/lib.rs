//! C ABI for the two-stage beamforming library.
//!
//! The surface follows the usual opaque-handle pattern: constructors return
//! `TqStatus` and write a handle through an out-pointer, accessors copy data
//! into caller-owned buffers, and every handle has a matching `_free`
//! function. Errors set a thread-local message retrievable with
//! [`tq_last_error_message`]. The generated header lives at
//! `include/tqbeam.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use tqbeam::channel::{one_ring_covariance, OneRingParams};
use tqbeam::harness::{run_experiment_to_files, with_threads, Experiment, ExperimentConfig};
use tqbeam::outer::{design_outer, GroupConfig, OuterBeamformer, OuterMethod, Scenario};
use tqbeam::Error;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NotPositiveDefinite = 3,
    NotPsd = 4,
    ConvergenceFailure = 5,
    SingularChannel = 6,
    InfeasibleBd = 7,
    ConfigError = 8,
    IoError = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// Outer beamformer design selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TqMethod {
    Tqp = 0,
    P3Svd = 1,
    WeightedDiff = 2,
    Bd = 3,
}

impl From<TqMethod> for OuterMethod {
    fn from(m: TqMethod) -> Self {
        match m {
            TqMethod::Tqp => OuterMethod::Tqp,
            TqMethod::P3Svd => OuterMethod::P3Svd,
            TqMethod::WeightedDiff => OuterMethod::WeightedDiff,
            TqMethod::Bd => OuterMethod::Bd,
        }
    }
}

/// Opaque system description handle.
pub struct TqScenario {
    inner: Scenario,
}

/// Opaque outer beamformer handle.
pub struct TqOuterBeamformer {
    inner: OuterBeamformer,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn remember_error(message: &str) {
    let sanitized: String = message.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> TqStatus {
    match err {
        Error::InvalidInput(_) => TqStatus::InvalidInput,
        Error::NotPositiveDefinite(_) => TqStatus::NotPositiveDefinite,
        Error::NotPsd(_) => TqStatus::NotPsd,
        Error::ConvergenceFailure { .. } => TqStatus::ConvergenceFailure,
        Error::SingularChannel => TqStatus::SingularChannel,
        Error::InfeasibleBd { .. } => TqStatus::InfeasibleBd,
        Error::Config(_) => TqStatus::ConfigError,
        Error::Io(_) => TqStatus::IoError,
    }
}

fn fail(err: &Error) -> TqStatus {
    remember_error(&err.to_string());
    status_of(err)
}

fn guarded(body: impl FnOnce() -> TqStatus) -> TqStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            remember_error("internal panic");
            TqStatus::Panic
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn tq_status_name(status: TqStatus) -> *const c_char {
    let name: &'static str = match status {
        TqStatus::Ok => "ok\0",
        TqStatus::NullPointer => "null pointer\0",
        TqStatus::InvalidInput => "invalid input\0",
        TqStatus::NotPositiveDefinite => "not positive definite\0",
        TqStatus::NotPsd => "not positive semidefinite\0",
        TqStatus::ConvergenceFailure => "convergence failure\0",
        TqStatus::SingularChannel => "singular channel\0",
        TqStatus::InfeasibleBd => "block diagonalization infeasible\0",
        TqStatus::ConfigError => "config error\0",
        TqStatus::IoError => "io error\0",
        TqStatus::BufferTooSmall => "buffer too small\0",
        TqStatus::Panic => "internal panic\0",
    };
    name.as_ptr() as *const c_char
}

/// Copies the last error message of the calling thread into `buf`
/// (NUL-terminated, truncated to `len`). Returns the full message length
/// in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes, or be NULL with
/// `len == 0` to query the length alone.
#[no_mangle]
pub unsafe extern "C" fn tq_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Builds a scenario whose per-group covariances follow the one-ring
/// scattering model.
///
/// `theta_rad`, `delta_rad`, `users`, and `outer_dim` are per-group arrays
/// of length `groups`. On success writes a handle to `out`; free it with
/// [`tq_scenario_free`].
///
/// # Safety
/// The four array pointers must reference `groups` readable elements and
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tq_scenario_one_ring(
    antennas: usize,
    groups: usize,
    theta_rad: *const f64,
    delta_rad: *const f64,
    users: *const usize,
    outer_dim: *const usize,
    spacing: f64,
    noise_power: f64,
    total_power: f64,
    out: *mut *mut TqScenario,
) -> TqStatus {
    if out.is_null()
        || theta_rad.is_null()
        || delta_rad.is_null()
        || users.is_null()
        || outer_dim.is_null()
    {
        remember_error("null pointer argument");
        return TqStatus::NullPointer;
    }
    let theta = std::slice::from_raw_parts(theta_rad, groups);
    let delta = std::slice::from_raw_parts(delta_rad, groups);
    let users = std::slice::from_raw_parts(users, groups);
    let outer_dim = std::slice::from_raw_parts(outer_dim, groups);
    guarded(|| {
        let mut group_configs = Vec::with_capacity(groups);
        for g in 0..groups {
            let params = match OneRingParams::new(antennas, theta[g], delta[g], spacing) {
                Ok(p) => p,
                Err(e) => return fail(&e),
            };
            group_configs.push(GroupConfig {
                covariance: one_ring_covariance(&params),
                users: users[g],
                outer_dim: outer_dim[g],
                streams: users[g],
            });
        }
        match Scenario::new(antennas, group_configs, noise_power, total_power) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(TqScenario { inner }));
                TqStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a scenario handle. NULL is ignored.
///
/// # Safety
/// `scenario` must be NULL or a pointer returned by a scenario constructor
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn tq_scenario_free(scenario: *mut TqScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of base-station antennas.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tq_scenario_antennas(scenario: *const TqScenario) -> usize {
    if scenario.is_null() {
        return 0;
    }
    (*scenario).inner.antennas
}

/// Number of user groups.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tq_scenario_groups(scenario: *const TqScenario) -> usize {
    if scenario.is_null() {
        return 0;
    }
    (*scenario).inner.group_count()
}

/// Designs the outer beamformer of one group.
///
/// `eps` and `max_iter` control the trace-quotient iteration, `weight` the
/// fixed-weight baseline, and `energy_threshold` the BD dominant-eigenspace
/// retention; parameters not used by the chosen method are ignored. On
/// success writes a handle to `out`; free it with [`tq_outer_free`].
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tq_outer_design(
    scenario: *const TqScenario,
    group: usize,
    method: TqMethod,
    eps: f64,
    max_iter: usize,
    weight: f64,
    energy_threshold: f64,
    out: *mut *mut TqOuterBeamformer,
) -> TqStatus {
    if scenario.is_null() || out.is_null() {
        remember_error("null pointer argument");
        return TqStatus::NullPointer;
    }
    let scenario = &(*scenario).inner;
    guarded(|| {
        match design_outer(
            scenario,
            group,
            method.into(),
            eps,
            max_iter,
            weight,
            energy_threshold,
        ) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(TqOuterBeamformer { inner }));
                TqStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases an outer beamformer handle. NULL is ignored.
///
/// # Safety
/// `beamformer` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tq_outer_free(beamformer: *mut TqOuterBeamformer) {
    if !beamformer.is_null() {
        drop(Box::from_raw(beamformer));
    }
}

/// Rows of the beamformer matrix (antenna count).
///
/// # Safety
/// `beamformer` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tq_outer_rows(beamformer: *const TqOuterBeamformer) -> usize {
    if beamformer.is_null() {
        return 0;
    }
    (*beamformer).inner.matrix.nrows()
}

/// Columns of the beamformer matrix (outer dimension).
///
/// # Safety
/// `beamformer` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tq_outer_cols(beamformer: *const TqOuterBeamformer) -> usize {
    if beamformer.is_null() {
        return 0;
    }
    (*beamformer).inner.matrix.ncols()
}

/// Iterations the design took (0 for the one-shot methods).
///
/// # Safety
/// `beamformer` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tq_outer_iterations(beamformer: *const TqOuterBeamformer) -> usize {
    if beamformer.is_null() {
        return 0;
    }
    (*beamformer).inner.iterations
}

/// Length of the objective trace (0 for the one-shot methods).
///
/// # Safety
/// `beamformer` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tq_outer_objective_len(beamformer: *const TqOuterBeamformer) -> usize {
    if beamformer.is_null() {
        return 0;
    }
    (*beamformer).inner.rho_trace.len()
}

/// Copies the objective trace into `buf`.
///
/// # Safety
/// `beamformer` must be a live handle and `buf` must point to at least
/// `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tq_outer_objective(
    beamformer: *const TqOuterBeamformer,
    buf: *mut f64,
    len: usize,
) -> TqStatus {
    if beamformer.is_null() || buf.is_null() {
        remember_error("null pointer argument");
        return TqStatus::NullPointer;
    }
    let trace = &(*beamformer).inner.rho_trace;
    if len < trace.len() {
        remember_error("objective buffer too small");
        return TqStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(trace.as_ptr(), buf, trace.len());
    TqStatus::Ok
}

/// Copies the beamformer matrix into `buf` as row-major interleaved
/// (re, im) pairs; `len` counts doubles and must be at least
/// `2 * rows * cols`.
///
/// # Safety
/// `beamformer` must be a live handle and `buf` must point to at least
/// `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tq_outer_matrix(
    beamformer: *const TqOuterBeamformer,
    buf: *mut f64,
    len: usize,
) -> TqStatus {
    if beamformer.is_null() || buf.is_null() {
        remember_error("null pointer argument");
        return TqStatus::NullPointer;
    }
    let matrix = &(*beamformer).inner.matrix;
    let needed = 2 * matrix.nrows() * matrix.ncols();
    if len < needed {
        remember_error("matrix buffer too small");
        return TqStatus::BufferTooSmall;
    }
    let mut idx = 0;
    for r in 0..matrix.nrows() {
        for c in 0..matrix.ncols() {
            let z = matrix[(r, c)];
            *buf.add(idx) = z.re;
            *buf.add(idx + 1) = z.im;
            idx += 2;
        }
    }
    TqStatus::Ok
}

/// Runs one experiment from a JSON configuration string and writes the CSV
/// (and optional JSON mirror) to the given paths.
///
/// `experiment` is one of `sumrate`, `as-sweep`, `convergence`, `power`;
/// `json_path` may be NULL; `threads = 0` uses the default worker pool. The
/// emitted bytes are identical for every thread count.
///
/// # Safety
/// All non-NULL pointers must reference NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn tq_run_experiment_json(
    config_json: *const c_char,
    experiment: *const c_char,
    csv_path: *const c_char,
    json_path: *const c_char,
    threads: usize,
) -> TqStatus {
    if config_json.is_null() || experiment.is_null() || csv_path.is_null() {
        remember_error("null pointer argument");
        return TqStatus::NullPointer;
    }
    let parse = |ptr: *const c_char| -> Result<&str, TqStatus> {
        CStr::from_ptr(ptr).to_str().map_err(|_| {
            remember_error("argument is not valid UTF-8");
            TqStatus::InvalidInput
        })
    };
    let config_json = match parse(config_json) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let experiment = match parse(experiment) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let csv_path = match parse(csv_path) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let json_path = if json_path.is_null() {
        None
    } else {
        match parse(json_path) {
            Ok(s) => Some(s.to_string()),
            Err(status) => return status,
        }
    };
    guarded(|| {
        let cfg = match ExperimentConfig::from_json_str(config_json) {
            Ok(cfg) => cfg,
            Err(e) => return fail(&e),
        };
        let experiment: Experiment = match experiment.parse() {
            Ok(e) => e,
            Err(e) => return fail(&e),
        };
        let result = with_threads(threads, || {
            run_experiment_to_files(
                &cfg,
                experiment,
                Path::new(csv_path),
                json_path.as_deref().map(Path::new),
            )
        });
        match result {
            Ok(_) => TqStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}
