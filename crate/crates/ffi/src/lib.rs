//! C interface to `fss-core`.
//!
//! Objects are opaque handles created by `*_new`-style functions and
//! released with the matching `*_free`. Every fallible call returns an
//! [`FssStatus`]; on failure the message is available from
//! [`fss_last_error_message`] on the same thread.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use fss_core::renorm::arithmetic::{detect_arithmetic, DEFAULT_ARITH_TOL, DEFAULT_K_MAX};
use fss_core::{discretize, AtomicMeasure, BoundaryConditions, Error, LadderSpec, Placement, StringProblem};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FssStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed spec, bad argument or out-of-range index.
    InvalidArgument = 2,
    /// Request beyond the resolution or atom budget of a discretization.
    Resolution = 3,
    /// The ladder lacks the arithmetic structure the call needs.
    Structure = 4,
    /// A numerical routine failed to converge.
    Numerical = 5,
    /// Internal panic; the handle arguments are left untouched.
    Panic = 6,
}

/// Atom placement inside each cell.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FssPlacement {
    Midpoint = 0,
    Barycenter = 1,
}

/// Opaque self-similar ladder.
pub struct FssLadder {
    spec: LadderSpec,
}

/// Opaque finite atomic measure.
pub struct FssMeasure {
    measure: AtomicMeasure,
}

/// Opaque string problem: a measure with Robin coefficients.
pub struct FssProblem {
    problem: StringProblem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FssStatus {
    match e {
        Error::Resolution { .. } | Error::Depth { .. } => FssStatus::Resolution,
        Error::Structure(_) => FssStatus::Structure,
        Error::Quadrature { .. } | Error::NonMonotone { .. } | Error::EventCollision { .. } => FssStatus::Numerical,
        _ => FssStatus::InvalidArgument,
    }
}

fn fail(status: FssStatus, msg: impl Into<String>) -> FssStatus {
    set_error(msg.into());
    status
}

fn lib_err(e: Error) -> FssStatus {
    let status = status_of(&e);
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), FssStatus>) -> FssStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FssStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(FssStatus::Panic, "internal panic"),
    }
}

fn check_null<T>(p: *const T, name: &str) -> Result<(), FssStatus> {
    if p.is_null() {
        Err(fail(FssStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// The classical middle-thirds ladder with equal weights.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn fss_ladder_cantor(out: *mut *mut FssLadder) -> FssStatus {
    guard(|| {
        check_null(out, "out")?;
        *out = Box::into_raw(Box::new(FssLadder { spec: LadderSpec::classical_cantor() }));
        Ok(())
    })
}

/// Builds a ladder from `m` segments.
///
/// `segments` holds `2m` doubles `a_1, b_1, ..., a_m, b_m`; `weights` holds
/// `m`. `orientations` may be null (all maps increasing); otherwise a
/// nonzero entry reverses the corresponding map.
///
/// # Safety
/// The arrays must hold the stated number of elements and `out` must be
/// valid for one handle.
#[no_mangle]
pub unsafe extern "C" fn fss_ladder_new(
    segments: *const f64,
    weights: *const f64,
    orientations: *const u8,
    m: usize,
    out: *mut *mut FssLadder,
) -> FssStatus {
    guard(|| {
        check_null(segments, "segments")?;
        check_null(weights, "weights")?;
        check_null(out, "out")?;
        let seg = slice::from_raw_parts(segments, 2 * m);
        let segs = seg.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let w = slice::from_raw_parts(weights, m).to_vec();
        let o = if orientations.is_null() {
            vec![false; m]
        } else {
            slice::from_raw_parts(orientations, m).iter().map(|&b| b != 0).collect()
        };
        let spec = LadderSpec::new(segs, w, o).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(FssLadder { spec }));
        Ok(())
    })
}

/// Parses a ladder from a NUL-terminated JSON spec.
///
/// # Safety
/// `json` must be a valid C string and `out` valid for one handle.
#[no_mangle]
pub unsafe extern "C" fn fss_ladder_from_json(json: *const c_char, out: *mut *mut FssLadder) -> FssStatus {
    guard(|| {
        check_null(json, "json")?;
        check_null(out, "out")?;
        let s = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(FssStatus::InvalidArgument, format!("spec is not UTF-8: {e}")))?;
        let spec = LadderSpec::from_json_str(s).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(FssLadder { spec }));
        Ok(())
    })
}

/// # Safety
/// `ladder` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fss_ladder_free(ladder: *mut FssLadder) {
    if !ladder.is_null() {
        drop(Box::from_raw(ladder));
    }
}

/// Number of segments.
///
/// # Safety
/// `ladder` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn fss_ladder_len(ladder: *const FssLadder) -> usize {
    ladder.as_ref().map_or(0, |l| l.spec.m())
}

/// `S^depth(id)(t)` for `t` in `[0, 1]`.
///
/// # Safety
/// `ladder` must be a live handle and `out` valid for one double.
#[no_mangle]
pub unsafe extern "C" fn fss_ladder_eval(ladder: *const FssLadder, t: f64, depth: usize, out: *mut f64) -> FssStatus {
    guard(|| {
        check_null(ladder, "ladder")?;
        check_null(out, "out")?;
        *out = (*ladder).spec.eval_ladder(t, depth).map_err(lib_err)?;
        Ok(())
    })
}

/// Spectral exponent `D` and period `T` of an arithmetic ladder.
///
/// Returns `FSS_STATUS_STRUCTURE` when the ladder is not arithmetic.
/// `period` may be null.
///
/// # Safety
/// `ladder` must be a live handle and `d` valid for one double.
#[no_mangle]
pub unsafe extern "C" fn fss_ladder_spectral_exponent(ladder: *const FssLadder, d: *mut f64, period: *mut f64) -> FssStatus {
    guard(|| {
        check_null(ladder, "ladder")?;
        check_null(d, "d")?;
        let arith = detect_arithmetic(&(*ladder).spec, DEFAULT_ARITH_TOL, DEFAULT_K_MAX)
            .and_then(|a| a.into_structure())
            .map_err(lib_err)?;
        *d = arith.d;
        if !period.is_null() {
            *period = arith.period;
        }
        Ok(())
    })
}

/// Atomic approximation with one atom per depth-`depth` cell.
///
/// # Safety
/// `ladder` must be a live handle and `out` valid for one handle.
#[no_mangle]
pub unsafe extern "C" fn fss_ladder_discretize(
    ladder: *const FssLadder,
    depth: usize,
    placement: FssPlacement,
    out: *mut *mut FssMeasure,
) -> FssStatus {
    guard(|| {
        check_null(ladder, "ladder")?;
        check_null(out, "out")?;
        let placement = match placement {
            FssPlacement::Midpoint => Placement::Midpoint,
            FssPlacement::Barycenter => Placement::Barycenter,
        };
        let measure = discretize(&(*ladder).spec, depth, placement).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(FssMeasure { measure }));
        Ok(())
    })
}

/// Measure from `len` atoms on the carrier `[a, b]`.
///
/// # Safety
/// `positions` and `masses` must hold `len` doubles; `out` valid for one handle.
#[no_mangle]
pub unsafe extern "C" fn fss_measure_new(
    positions: *const f64,
    masses: *const f64,
    len: usize,
    a: f64,
    b: f64,
    out: *mut *mut FssMeasure,
) -> FssStatus {
    guard(|| {
        check_null(out, "out")?;
        let (p, w) = if len == 0 {
            (Vec::new(), Vec::new())
        } else {
            check_null(positions, "positions")?;
            check_null(masses, "masses")?;
            (slice::from_raw_parts(positions, len).to_vec(), slice::from_raw_parts(masses, len).to_vec())
        };
        let measure = AtomicMeasure::new(p, w, (a, b)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(FssMeasure { measure }));
        Ok(())
    })
}

/// # Safety
/// `measure` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fss_measure_free(measure: *mut FssMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// Number of atoms.
///
/// # Safety
/// `measure` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn fss_measure_len(measure: *const FssMeasure) -> usize {
    measure.as_ref().map_or(0, |m| m.measure.len())
}

/// Copies positions and masses into caller buffers of `capacity` doubles.
///
/// Either buffer may be null to skip it. Fails with
/// `FSS_STATUS_INVALID_ARGUMENT` if `capacity` is below the atom count.
///
/// # Safety
/// Non-null buffers must be writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn fss_measure_atoms(
    measure: *const FssMeasure,
    positions: *mut f64,
    masses: *mut f64,
    capacity: usize,
) -> FssStatus {
    guard(|| {
        check_null(measure, "measure")?;
        let m = &(*measure).measure;
        if capacity < m.len() {
            return Err(fail(FssStatus::InvalidArgument, format!("capacity {capacity} < {} atoms", m.len())));
        }
        if !positions.is_null() {
            slice::from_raw_parts_mut(positions, m.len()).copy_from_slice(m.positions());
        }
        if !masses.is_null() {
            slice::from_raw_parts_mut(masses, m.len()).copy_from_slice(m.masses());
        }
        Ok(())
    })
}

/// Carrier interval `[a, b]`.
///
/// # Safety
/// `measure` must be a live handle; `a` and `b` valid for one double each.
#[no_mangle]
pub unsafe extern "C" fn fss_measure_carrier(measure: *const FssMeasure, a: *mut f64, b: *mut f64) -> FssStatus {
    guard(|| {
        check_null(measure, "measure")?;
        check_null(a, "a")?;
        check_null(b, "b")?;
        (*a, *b) = (*measure).measure.carrier();
        Ok(())
    })
}

/// Restriction to `[c, d]`, carried on `[c, d]`.
///
/// # Safety
/// `measure` must be a live handle and `out` valid for one handle.
#[no_mangle]
pub unsafe extern "C" fn fss_measure_restrict(
    measure: *const FssMeasure,
    c: f64,
    d: f64,
    out: *mut *mut FssMeasure,
) -> FssStatus {
    guard(|| {
        check_null(measure, "measure")?;
        check_null(out, "out")?;
        if !(c < d) {
            return Err(fail(FssStatus::InvalidArgument, format!("empty interval [{c}, {d}]")));
        }
        let measure = (*measure).measure.restrict(c, d);
        *out = Box::into_raw(Box::new(FssMeasure { measure }));
        Ok(())
    })
}

/// String problem for `measure` with Robin coefficients `gamma0, gamma1`
/// (both zero for Neumann). The measure is copied.
///
/// # Safety
/// `measure` must be a live handle and `out` valid for one handle.
#[no_mangle]
pub unsafe extern "C" fn fss_problem_new(
    measure: *const FssMeasure,
    gamma0: f64,
    gamma1: f64,
    out: *mut *mut FssProblem,
) -> FssStatus {
    guard(|| {
        check_null(measure, "measure")?;
        check_null(out, "out")?;
        let bc = BoundaryConditions::robin(gamma0, gamma1).map_err(lib_err)?;
        let problem = StringProblem::new((*measure).measure.clone(), bc).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(FssProblem { problem }));
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fss_problem_free(problem: *mut FssProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of eigenvalues.
///
/// # Safety
/// `problem` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn fss_problem_dimension(problem: *const FssProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.problem.dimension())
}

/// Number of eigenvalues strictly below `lambda`.
///
/// # Safety
/// `problem` must be a live handle and `out` valid for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn fss_problem_count_below(problem: *const FssProblem, lambda: f64, out: *mut usize) -> FssStatus {
    guard(|| {
        check_null(problem, "problem")?;
        check_null(out, "out")?;
        *out = (*problem).problem.count_below(lambda).map_err(lib_err)?;
        Ok(())
    })
}

/// The `n`-th eigenvalue (from 0) to relative tolerance `rel_tol`.
///
/// # Safety
/// `problem` must be a live handle and `out` valid for one double.
#[no_mangle]
pub unsafe extern "C" fn fss_problem_eigenvalue(
    problem: *const FssProblem,
    n: usize,
    rel_tol: f64,
    out: *mut f64,
) -> FssStatus {
    guard(|| {
        check_null(problem, "problem")?;
        check_null(out, "out")?;
        *out = (*problem).problem.eigenvalue(n, rel_tol).map_err(lib_err)?;
        Ok(())
    })
}

/// The first `count` eigenvalues, written to `out`; `count` may not
/// exceed the dimension.
///
/// # Safety
/// `problem` must be a live handle and `out` writable for `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn fss_problem_eigenvalues(
    problem: *const FssProblem,
    count: usize,
    rel_tol: f64,
    out: *mut f64,
) -> FssStatus {
    guard(|| {
        check_null(problem, "problem")?;
        if count == 0 {
            return Ok(());
        }
        check_null(out, "out")?;
        let p = &(*problem).problem;
        if count > p.dimension() {
            return Err(lib_err(Error::Index { n: count - 1, len: p.dimension() }));
        }
        let values = p.eigenvalues(count, rel_tol).map_err(lib_err)?;
        slice::from_raw_parts_mut(out, count).copy_from_slice(&values);
        Ok(())
    })
}
