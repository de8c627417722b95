//! C ABI over the fpdvi solver.
//!
//! Problems and solutions are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns an
//! [`FpdviStatus`]; on failure a message is available from
//! [`fpdvi_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use fpdvi_core::cli::{assemble, load_problem, parse_problem, CliError, LoadedProblem};
use fpdvi_core::evolution::{solve_fpdvi, EvolutionError, SolveOutcome};
use fpdvi_core::mittag_leffler::{ml_real, MLParams};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpdviStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The problem could not be read, parsed or validated.
    InputError = 3,
    /// Picard iteration hit its outer-iteration cap. A solution handle is
    /// still produced.
    NotConverged = 4,
    NumericError = 5,
    /// A caller buffer is too short.
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque problem handle.
pub struct FpdviProblem {
    inner: LoadedProblem,
}

/// Opaque solution handle.
pub struct FpdviSolution {
    outcome: SolveOutcome,
}

/// Scalar diagnostics of a solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FpdviSummary {
    pub converged: bool,
    pub iterations: usize,
    pub final_change: f64,
    pub fixed_point_defect: f64,
    pub nonlocal_defect: f64,
    pub max_vi_residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: FpdviStatus, msg: impl Into<String>) -> FpdviStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> FpdviStatus) -> FpdviStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(FpdviStatus::Panic, "internal panic"))
}

fn cli_status(e: CliError) -> FpdviStatus {
    let status = match e {
        CliError::Numeric(_) => FpdviStatus::NumericError,
        _ => FpdviStatus::InputError,
    };
    fail(status, e.to_string())
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, FpdviStatus> {
    if s.is_null() {
        return Err(fail(FpdviStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(FpdviStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn store_problem(
    loaded: Result<LoadedProblem, CliError>,
    out: *mut *mut FpdviProblem,
) -> FpdviStatus {
    match loaded {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(FpdviProblem { inner }));
            FpdviStatus::Ok
        }
        Err(e) => cli_status(e),
    }
}

/// Builds a problem from a JSON document in the problem-file format.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_problem_from_json(
    json: *const c_char,
    out: *mut *mut FpdviProblem,
) -> FpdviStatus {
    guard(|| {
        if out.is_null() {
            return fail(FpdviStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match str_arg(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        store_problem(
            parse_problem(text, Path::new("<json>")).and_then(assemble),
            out,
        )
    })
}

/// Loads a problem file from `path`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_problem_from_file(
    path: *const c_char,
    out: *mut *mut FpdviProblem,
) -> FpdviStatus {
    guard(|| {
        if out.is_null() {
            return fail(FpdviStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let path = match str_arg(path) {
            Ok(t) => t,
            Err(s) => return s,
        };
        store_problem(load_problem(Path::new(path)), out)
    })
}

/// Releases a problem. Null is ignored.
///
/// # Safety
/// `problem` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_problem_free(problem: *mut FpdviProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// State dimension `n`, or 0 for null.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_problem_state_dim(problem: *const FpdviProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.problem.state_dim())
}

/// Control dimension `m`, or 0 for null.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_problem_control_dim(problem: *const FpdviProblem) -> usize {
    problem
        .as_ref()
        .map_or(0, |p| p.inner.problem.control_dim())
}

/// Solves with the grid and solver options of the problem file. On
/// [`FpdviStatus::NotConverged`] `out` still receives the last iterate.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_solve(
    problem: *const FpdviProblem,
    out: *mut *mut FpdviSolution,
) -> FpdviStatus {
    guard(|| {
        if out.is_null() {
            return fail(FpdviStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some(p) = problem.as_ref() else {
            return fail(FpdviStatus::NullPointer, "null problem");
        };
        let l = &p.inner;
        let (outcome, status) = match solve_fpdvi(&l.problem, &l.grid, &l.options) {
            Ok(o) => (o, FpdviStatus::Ok),
            Err(EvolutionError::MaxOuterExceeded(o)) => {
                set_error(format!(
                    "no fixed point within {} outer iterations",
                    o.report.iterations
                ));
                (*o, FpdviStatus::NotConverged)
            }
            Err(
                e @ (EvolutionError::InvalidProblem(_)
                | EvolutionError::InvalidOptions(_)
                | EvolutionError::DimensionMismatch(_)),
            ) => return fail(FpdviStatus::InputError, e.to_string()),
            Err(e) => return fail(FpdviStatus::NumericError, e.to_string()),
        };
        *out = Box::into_raw(Box::new(FpdviSolution { outcome }));
        status
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_solution_free(solution: *mut FpdviSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Number of grid nodes `N + 1`, or 0 for null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_solution_node_count(solution: *const FpdviSolution) -> usize {
    solution
        .as_ref()
        .map_or(0, |s| s.outcome.trajectory.grid.len())
}

unsafe fn copy_out(
    src: impl ExactSizeIterator<Item = f64>,
    buf: *mut f64,
    len: usize,
) -> FpdviStatus {
    if buf.is_null() {
        return fail(FpdviStatus::NullPointer, "null buffer");
    }
    if len < src.len() {
        return fail(
            FpdviStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", src.len()),
        );
    }
    let dst = std::slice::from_raw_parts_mut(buf, len);
    for (d, v) in dst.iter_mut().zip(src) {
        *d = v;
    }
    FpdviStatus::Ok
}

/// Copies the grid nodes into `buf` (`node_count` values).
///
/// # Safety
/// `solution` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_solution_times(
    solution: *const FpdviSolution,
    buf: *mut f64,
    len: usize,
) -> FpdviStatus {
    guard(|| match solution.as_ref() {
        Some(s) => copy_out(s.outcome.trajectory.grid.nodes().iter().copied(), buf, len),
        None => fail(FpdviStatus::NullPointer, "null solution"),
    })
}

/// Copies the states row-major, one row of `n` values per node.
///
/// # Safety
/// `solution` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_solution_states(
    solution: *const FpdviSolution,
    buf: *mut f64,
    len: usize,
) -> FpdviStatus {
    guard(|| match solution.as_ref() {
        Some(s) => {
            let rows = &s.outcome.trajectory.theta;
            let vals: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
            copy_out(vals.into_iter(), buf, len)
        }
        None => fail(FpdviStatus::NullPointer, "null solution"),
    })
}

/// Copies the controls row-major, one row of `m` values per node.
///
/// # Safety
/// `solution` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_solution_controls(
    solution: *const FpdviSolution,
    buf: *mut f64,
    len: usize,
) -> FpdviStatus {
    guard(|| match solution.as_ref() {
        Some(s) => {
            let rows = &s.outcome.trajectory.u;
            let vals: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
            copy_out(vals.into_iter(), buf, len)
        }
        None => fail(FpdviStatus::NullPointer, "null solution"),
    })
}

/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_solution_summary(
    solution: *const FpdviSolution,
    out: *mut FpdviSummary,
) -> FpdviStatus {
    guard(|| {
        let (Some(s), false) = (solution.as_ref(), out.is_null()) else {
            return fail(FpdviStatus::NullPointer, "null argument");
        };
        let r = &s.outcome.report;
        *out = FpdviSummary {
            converged: r.converged,
            iterations: r.iterations,
            final_change: r.final_change,
            fixed_point_defect: r.fixed_point_defect,
            nonlocal_defect: r.nonlocal_defect,
            max_vi_residual: r.max_vi_residual,
        };
        FpdviStatus::Ok
    })
}

/// Real Mittag-Leffler function `E_{alpha,beta}(x)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpdvi_mittag_leffler(
    alpha: f64,
    beta: f64,
    x: f64,
    out: *mut f64,
) -> FpdviStatus {
    guard(|| {
        if out.is_null() {
            return fail(FpdviStatus::NullPointer, "null output pointer");
        }
        match MLParams::new(alpha, beta).and_then(|p| ml_real(p, x)) {
            Ok(v) => {
                *out = v;
                FpdviStatus::Ok
            }
            Err(e) => fail(FpdviStatus::NumericError, e.to_string()),
        }
    })
}

/// Message of the last failing call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fpdvi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fpdvi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
