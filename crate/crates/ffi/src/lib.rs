//! C ABI over `covthresh`.
//!
//! Matrices and solutions cross the boundary as opaque handles. Every fallible
//! call returns a [`CtStatus`]; on failure the message is kept per thread and
//! read back with [`ct_last_error_message`]. Node labels are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use covthresh::compgraph::{lambda_for_max_component, threshold_partition};
use covthresh::covmodel::{sample_covariance, to_correlation};
use covthresh::screen::screen_solve;
use covthresh::{DataMatrix, Error, ScreenedSolution, SolverConfig, SymMatrix};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    NotPositiveDefinite = 4,
    Infeasible = 5,
    BufferTooSmall = 6,
    Panic = 99,
}

/// Symmetric matrix handle.
pub struct CtMatrix {
    inner: SymMatrix,
}

/// Screened graphical lasso solution handle.
pub struct CtSolution {
    inner: ScreenedSolution,
}

/// Solver settings. Obtain defaults from [`ct_solver_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CtSolverConfig {
    pub kkt_tol: f64,
    pub conv_tol: f64,
    pub support_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl From<CtSolverConfig> for SolverConfig {
    fn from(c: CtSolverConfig) -> Self {
        SolverConfig {
            kkt_tol: c.kkt_tol,
            conv_tol: c.conv_tol,
            support_tol: c.support_tol,
            max_outer: c.max_outer,
            max_inner: c.max_inner,
            ..SolverConfig::default()
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> CtStatus {
    match err {
        Error::DimensionMismatch { .. } | Error::NotSquare { .. } => CtStatus::DimensionMismatch,
        Error::NotPositiveDefinite { .. } => CtStatus::NotPositiveDefinite,
        Error::Infeasible { .. } => CtStatus::Infeasible,
        _ => CtStatus::InvalidInput,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (CtStatus, String)>) -> CtStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CtStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CtStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (CtStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(what: &str) -> (CtStatus, String) {
    (CtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_slice<'a>(data: *const f64, len: usize) -> Result<&'a [f64], (CtStatus, String)> {
    if data.is_null() {
        return Err(null_err("data"));
    }
    // SAFETY: caller promises `len` readable doubles at `data`.
    Ok(unsafe { std::slice::from_raw_parts(data, len) })
}

fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), (CtStatus, String)> {
    if out.is_null() {
        return Err(null_err("out"));
    }
    // SAFETY: non-null, caller provides a writable pointer slot.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ct_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn ct_solver_config_default() -> CtSolverConfig {
    let d = SolverConfig::default();
    CtSolverConfig {
        kkt_tol: d.kkt_tol,
        conv_tol: d.conv_tol,
        support_tol: d.support_tol,
        max_outer: d.max_outer,
        max_inner: d.max_inner,
    }
}

/// Copies a `p x p` row-major matrix. It must be exactly symmetric.
///
/// # Safety
/// `data` must point to `p * p` readable doubles and `out` to a writable slot.
#[no_mangle]
pub unsafe extern "C" fn ct_matrix_new(data: *const f64, p: usize, out: *mut *mut CtMatrix) -> CtStatus {
    guard(|| {
        let len = p.checked_mul(p).ok_or_else(|| (CtStatus::InvalidInput, "p too large".into()))?;
        let values = unsafe { read_slice(data, len) }?.to_vec();
        let inner = SymMatrix::from_row_major(p, values).map_err(lib_err)?;
        write_out(out, CtMatrix { inner })
    })
}

/// Sample covariance (divisor `n`) of an `n x p` row-major data matrix.
///
/// # Safety
/// `data` must point to `n * p` readable doubles and `out` to a writable slot.
#[no_mangle]
pub unsafe extern "C" fn ct_sample_covariance(
    data: *const f64,
    n: usize,
    p: usize,
    center: bool,
    correlation: bool,
    out: *mut *mut CtMatrix,
) -> CtStatus {
    guard(|| {
        let len = n.checked_mul(p).ok_or_else(|| (CtStatus::InvalidInput, "n * p too large".into()))?;
        let values = unsafe { read_slice(data, len) }?.to_vec();
        let x = DataMatrix::new(n, p, values).map_err(lib_err)?;
        let mut s = sample_covariance(&x, center);
        if correlation {
            s = to_correlation(&s).map_err(lib_err)?;
        }
        write_out(out, CtMatrix { inner: s })
    })
}

/// # Safety
/// `m` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ct_matrix_free(m: *mut CtMatrix) {
    if !m.is_null() {
        // SAFETY: allocated by `write_out`.
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Dimension of the matrix, 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_matrix_dim(m: *const CtMatrix) -> usize {
    unsafe { m.as_ref() }.map_or(0, |m| m.inner.dim())
}

/// Copies the matrix into `buf` (row-major, `len >= p * p`).
///
/// # Safety
/// `m` must be a live handle and `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ct_matrix_copy(m: *const CtMatrix, buf: *mut f64, len: usize) -> CtStatus {
    guard(|| {
        let m = unsafe { m.as_ref() }.ok_or_else(|| null_err("matrix"))?;
        unsafe { copy_to(m.inner.as_slice(), buf, len) }
    })
}

unsafe fn copy_to(src: &[f64], buf: *mut f64, len: usize) -> Result<(), (CtStatus, String)> {
    if buf.is_null() {
        return Err(null_err("buffer"));
    }
    if len < src.len() {
        return Err((CtStatus::BufferTooSmall, format!("buffer holds {len}, need {}", src.len())));
    }
    // SAFETY: `buf` holds at least `src.len()` doubles.
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    Ok(())
}

/// Component labels of the graph `|S_ij| > lambda`. Writes `p` labels into
/// `labels` (blocks numbered by smallest member) and the block count into
/// `num_blocks`.
///
/// # Safety
/// `s` must be a live handle, `labels` must hold `len` writable entries and
/// `num_blocks` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_partition(
    s: *const CtMatrix,
    lambda: f64,
    labels: *mut usize,
    len: usize,
    num_blocks: *mut usize,
) -> CtStatus {
    guard(|| {
        let s = unsafe { s.as_ref() }.ok_or_else(|| null_err("matrix"))?;
        if labels.is_null() || num_blocks.is_null() {
            return Err(null_err("output"));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err((CtStatus::InvalidInput, format!("invalid lambda {lambda}")));
        }
        let p = s.inner.dim();
        if len < p {
            return Err((CtStatus::BufferTooSmall, format!("buffer holds {len}, need {p}")));
        }
        let part = threshold_partition(&s.inner, lambda);
        let l = part.labels();
        // SAFETY: checked above.
        unsafe {
            ptr::copy_nonoverlapping(l.as_ptr(), labels, p);
            *num_blocks = part.num_blocks();
        }
        Ok(())
    })
}

/// Smallest critical penalty whose components all have at most `p_max` nodes.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ct_lambda_for_max_component(s: *const CtMatrix, p_max: usize, out: *mut f64) -> CtStatus {
    guard(|| {
        let s = unsafe { s.as_ref() }.ok_or_else(|| null_err("matrix"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let l = lambda_for_max_component(&s.inner, p_max).map_err(lib_err)?;
        // SAFETY: checked above.
        unsafe { *out = l };
        Ok(())
    })
}

/// Solves the penalized problem component by component. `cfg` may be NULL
/// for defaults. A solution that hit the iteration cap is still returned;
/// check [`ct_solution_converged`].
///
/// # Safety
/// `s` must be a live handle, `cfg` NULL or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ct_screen_solve(
    s: *const CtMatrix,
    lambda: f64,
    cfg: *const CtSolverConfig,
    out: *mut *mut CtSolution,
) -> CtStatus {
    guard(|| {
        let s = unsafe { s.as_ref() }.ok_or_else(|| null_err("matrix"))?;
        let cfg: SolverConfig = unsafe { cfg.as_ref() }.map_or_else(SolverConfig::default, |c| (*c).into());
        let sol = screen_solve(&s.inner, lambda, &cfg, None).map_err(lib_err)?;
        write_out(out, CtSolution { inner: sol })
    })
}

/// # Safety
/// `sol` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ct_solution_free(sol: *mut CtSolution) {
    if !sol.is_null() {
        // SAFETY: allocated by `write_out`.
        drop(unsafe { Box::from_raw(sol) });
    }
}

/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_solution_dim(sol: *const CtSolution) -> usize {
    unsafe { sol.as_ref() }.map_or(0, |s| s.inner.assembled_theta.dim())
}

/// Objective value, NaN for NULL.
///
/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_solution_objective(sol: *const CtSolution) -> f64 {
    unsafe { sol.as_ref() }.map_or(f64::NAN, |s| s.inner.objective)
}

/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_solution_converged(sol: *const CtSolution) -> bool {
    unsafe { sol.as_ref() }.is_some_and(|s| s.inner.converged)
}

/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_solution_num_blocks(sol: *const CtSolution) -> usize {
    unsafe { sol.as_ref() }.map_or(0, |s| s.inner.partition.num_blocks())
}

/// Largest KKT violation of the assembled solution, NaN for NULL.
///
/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_solution_kkt_violation(sol: *const CtSolution) -> f64 {
    unsafe { sol.as_ref() }.map_or(f64::NAN, |s| s.inner.global_kkt.max_violation())
}

/// Copies the estimated precision matrix (row-major, `len >= p * p`).
///
/// # Safety
/// `sol` must be a live handle and `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ct_solution_theta(sol: *const CtSolution, buf: *mut f64, len: usize) -> CtStatus {
    guard(|| {
        let sol = unsafe { sol.as_ref() }.ok_or_else(|| null_err("solution"))?;
        unsafe { copy_to(sol.inner.assembled_theta.as_slice(), buf, len) }
    })
}

/// Copies the estimated covariance matrix (row-major, `len >= p * p`).
///
/// # Safety
/// `sol` must be a live handle and `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ct_solution_w(sol: *const CtSolution, buf: *mut f64, len: usize) -> CtStatus {
    guard(|| {
        let sol = unsafe { sol.as_ref() }.ok_or_else(|| null_err("solution"))?;
        unsafe { copy_to(sol.inner.assembled_w.as_slice(), buf, len) }
    })
}
