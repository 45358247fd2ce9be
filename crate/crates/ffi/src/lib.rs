//! C ABI for the compclass toolkit.
//!
//! Matrices are opaque handles created and destroyed through this API.
//! Every fallible function returns a [`CcStatus`]; on failure a
//! thread-local message is available via [`cc_last_error_message`].
//! Vector and matrix data cross the boundary as row-major `double`
//! buffers owned by the caller.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::path::PathBuf;

use libc::{c_char, size_t};

use compclass::classifier::ClassifierKind;
use compclass::error::Error;
use compclass::frames::MeasurementMatrix;
use compclass::signals::{HypothesisSet, SparseSignal};
use compclass::io;
use nalgebra::DVector;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    RankDeficient = 3,
    Infeasible = 4,
    DegenerateDifference = 5,
    ParseError = 6,
    IoError = 7,
}

/// Classifier selector for `cc_classify`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcClassifier {
    Correlation = 0,
    MatchedFilter = 1,
}

/// Tightness / equi-norm certificate of a matrix.
///
/// `frame_constant_c` is NaN when the matrix is not tight and
/// `column_norm_psi` is NaN when it is not equi-norm.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CcCertificate {
    pub is_tight: bool,
    pub is_equinorm: bool,
    pub frame_constant_c: f64,
    pub column_norm_psi: f64,
    pub tightness_residual: f64,
}

/// Opaque measurement-matrix handle.
pub struct CcMatrix {
    inner: MeasurementMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: CcStatus, msg: &str) -> CcStatus {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
    status
}

fn fail_with(err: Error) -> CcStatus {
    let status = match err {
        Error::RankDeficient { .. } => CcStatus::RankDeficient,
        Error::Infeasible { .. } => CcStatus::Infeasible,
        Error::DegenerateDifference => CcStatus::DegenerateDifference,
        Error::Parse(_) => CcStatus::ParseError,
        Error::Io(_) => CcStatus::IoError,
        _ => CcStatus::InvalidArgument,
    };
    fail(status, &err.to_string())
}

/// Copies the message from the last failing call on this thread into
/// `buffer` (NUL-terminated, truncated to `capacity`). Returns the full
/// message length in bytes, excluding the NUL.
///
/// # Safety
/// `buffer` must point to `capacity` writable bytes, or be null (in which
/// case only the length is returned).
#[no_mangle]
pub unsafe extern "C" fn cc_last_error_message(buffer: *mut c_char, capacity: size_t) -> size_t {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buffer, n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

unsafe fn path_from(ptr: *const c_char) -> Result<PathBuf, CcStatus> {
    if ptr.is_null() {
        return Err(fail(CcStatus::NullPointer, "null path"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => Err(fail(CcStatus::InvalidArgument, "path is not valid UTF-8")),
    }
}

unsafe fn store(out: *mut *mut CcMatrix, matrix: MeasurementMatrix) -> CcStatus {
    if out.is_null() {
        return fail(CcStatus::NullPointer, "null output handle");
    }
    *out = Box::into_raw(Box::new(CcMatrix { inner: matrix }));
    CcStatus::Ok
}

unsafe fn deref<'a>(handle: *const CcMatrix) -> Result<&'a MeasurementMatrix, CcStatus> {
    handle
        .as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| fail(CcStatus::NullPointer, "null matrix handle"))
}

unsafe fn vector_from(data: *const f64, len: size_t) -> Result<DVector<f64>, CcStatus> {
    if data.is_null() {
        return Err(fail(CcStatus::NullPointer, "null vector"));
    }
    Ok(DVector::from_column_slice(std::slice::from_raw_parts(
        data, len,
    )))
}

unsafe fn signal_from(data: *const f64, len: size_t) -> Result<SparseSignal, CcStatus> {
    let v = vector_from(data, len)?;
    let k = v.iter().filter(|x| **x != 0.0).count().max(1);
    SparseSignal::new(v, k).map_err(fail_with)
}

/// Builds an `n x cols` matrix from a row-major buffer of `n * cols`
/// doubles.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles and `out` to a
/// writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn cc_matrix_from_data(
    rows: size_t,
    cols: size_t,
    data: *const f64,
    out: *mut *mut CcMatrix,
) -> CcStatus {
    if data.is_null() {
        return fail(CcStatus::NullPointer, "null data");
    }
    let slice = std::slice::from_raw_parts(data, rows * cols);
    let entries = nalgebra::DMatrix::from_row_slice(rows, cols, slice);
    match MeasurementMatrix::new(entries) {
        Ok(m) => store(out, m),
        Err(e) => fail_with(e),
    }
}

/// Draws an `n x cols` matrix with i.i.d. standard Gaussian entries.
///
/// # Safety
/// `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn cc_matrix_generate_gaussian(
    rows: size_t,
    cols: size_t,
    seed: u64,
    out: *mut *mut CcMatrix,
) -> CcStatus {
    match MeasurementMatrix::generate_gaussian(rows, cols, seed) {
        Ok(m) => store(out, m),
        Err(e) => fail_with(e),
    }
}

/// Reads a matrix file (`n N` header followed by rows).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable slot.
#[no_mangle]
pub unsafe extern "C" fn cc_matrix_read(path: *const c_char, out: *mut *mut CcMatrix) -> CcStatus {
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match io::read_matrix(&path) {
        Ok(m) => store(out, m),
        Err(e) => fail_with(e),
    }
}

/// Writes the matrix in the same text format `cc_matrix_read` accepts.
///
/// # Safety
/// `handle` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cc_matrix_write(
    handle: *const CcMatrix,
    path: *const c_char,
) -> CcStatus {
    let m = match deref(handle) {
        Ok(m) => m,
        Err(s) => return s,
    };
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match io::write_matrix(&path, m) {
        Ok(()) => CcStatus::Ok,
        Err(e) => fail_with(e),
    }
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_matrix_rows(handle: *const CcMatrix) -> size_t {
    handle.as_ref().map_or(0, |h| h.inner.rows())
}

/// Number of columns, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_matrix_cols(handle: *const CcMatrix) -> size_t {
    handle.as_ref().map_or(0, |h| h.inner.cols())
}

/// Copies the entries row-major into `data` (`rows * cols` doubles).
///
/// # Safety
/// `data` must point to `rows * cols` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cc_matrix_copy_data(
    handle: *const CcMatrix,
    data: *mut f64,
) -> CcStatus {
    let m = match deref(handle) {
        Ok(m) => m,
        Err(s) => return s,
    };
    if data.is_null() {
        return fail(CcStatus::NullPointer, "null data");
    }
    let entries = m.entries();
    let mut p = data;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            *p = entries[(i, j)];
            p = p.add(1);
        }
    }
    CcStatus::Ok
}

/// Row-orthogonalizes the matrix so the output satisfies
/// `Phi * Phi^T = c * I`, preserving the row space.
///
/// # Safety
/// `handle` must be a live handle and `out` a writable slot.
#[no_mangle]
pub unsafe extern "C" fn cc_matrix_tighten(
    handle: *const CcMatrix,
    c: f64,
    out: *mut *mut CcMatrix,
) -> CcStatus {
    let m = match deref(handle) {
        Ok(m) => m,
        Err(s) => return s,
    };
    match m.tighten(c) {
        Ok(t) => store(out, t),
        Err(e) => fail_with(e),
    }
}

/// Fills `cert` with the tightness / equi-norm certificate.
///
/// # Safety
/// `handle` must be a live handle and `cert` a writable certificate.
#[no_mangle]
pub unsafe extern "C" fn cc_matrix_certify(
    handle: *const CcMatrix,
    cert: *mut CcCertificate,
) -> CcStatus {
    let m = match deref(handle) {
        Ok(m) => m,
        Err(s) => return s,
    };
    if cert.is_null() {
        return fail(CcStatus::NullPointer, "null certificate");
    }
    let c = m.certify();
    *cert = CcCertificate {
        is_tight: c.is_tight,
        is_equinorm: c.is_equinorm,
        frame_constant_c: c.frame_constant_c.unwrap_or(f64::NAN),
        column_norm_psi: c.column_norm_psi.unwrap_or(f64::NAN),
        tightness_residual: c.tightness_residual,
    };
    CcStatus::Ok
}

/// Releases a handle. Null is a no-op.
///
/// # Safety
/// `handle` must be null or a pointer returned by this library that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn cc_matrix_free(handle: *mut CcMatrix) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Gaussian tail probability `Q(x) = P(Z > x)`.
#[no_mangle]
pub extern "C" fn cc_q_function(x: f64) -> f64 {
    compclass::q_function(x)
}

/// Separation ratio `||Phi d||^2 / ||Phi^T Phi d||` for `d = s1 - s2`.
///
/// # Safety
/// `s1` and `s2` must point to `len` readable doubles each; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cc_separation_ratio(
    handle: *const CcMatrix,
    s1: *const f64,
    s2: *const f64,
    len: size_t,
    out: *mut f64,
) -> CcStatus {
    let m = match deref(handle) {
        Ok(m) => m,
        Err(s) => return s,
    };
    if out.is_null() {
        return fail(CcStatus::NullPointer, "null output");
    }
    let (a, b) = match (signal_from(s1, len), signal_from(s2, len)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match compclass::separation_ratio(m, &a, &b) {
        Ok(r) => {
            *out = r;
            CcStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Exact 2-ary false-classification probability `Q(ratio / (2 sigma))`.
///
/// # Safety
/// Same buffer requirements as `cc_separation_ratio`.
#[no_mangle]
pub unsafe extern "C" fn cc_error_probability_2ary(
    handle: *const CcMatrix,
    s1: *const f64,
    s2: *const f64,
    len: size_t,
    sigma: f64,
    out: *mut f64,
) -> CcStatus {
    let m = match deref(handle) {
        Ok(m) => m,
        Err(s) => return s,
    };
    if out.is_null() {
        return fail(CcStatus::NullPointer, "null output");
    }
    let (a, b) = match (signal_from(s1, len), signal_from(s2, len)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match compclass::error_probability_2ary(m, &a, &b, sigma) {
        Ok(err) => {
            *out = err.probability;
            CcStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Classifies a measurement `y` (length `rows`) against `m` hypothesis
/// signals stored contiguously in `signals` (`m * len` doubles, one
/// signal after another). Writes the decided 0-based index to `out`.
///
/// The hypotheses must have disjoint-support orthogonality and equal
/// norms; otherwise `InvalidArgument` is returned.
///
/// # Safety
/// `y` must point to `y_len` readable doubles, `signals` to
/// `num_signals * len` readable doubles, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cc_classify(
    handle: *const CcMatrix,
    y: *const f64,
    y_len: size_t,
    signals: *const f64,
    num_signals: size_t,
    len: size_t,
    kind: CcClassifier,
    out: *mut size_t,
) -> CcStatus {
    let m = match deref(handle) {
        Ok(m) => m,
        Err(s) => return s,
    };
    if out.is_null() {
        return fail(CcStatus::NullPointer, "null output");
    }
    let y = match vector_from(y, y_len) {
        Ok(v) => v,
        Err(s) => return s,
    };
    if signals.is_null() {
        return fail(CcStatus::NullPointer, "null signals");
    }
    let mut parsed = Vec::with_capacity(num_signals);
    for i in 0..num_signals {
        match signal_from(signals.add(i * len), len) {
            Ok(s) => parsed.push(s),
            Err(s) => return s,
        }
    }
    let set = match HypothesisSet::new(parsed) {
        Ok(set) => set,
        Err(e) => return fail_with(e),
    };
    let kind = match kind {
        CcClassifier::Correlation => ClassifierKind::Correlation,
        CcClassifier::MatchedFilter => ClassifierKind::MatchedFilter,
    };
    match compclass::classify(&y, m, &set, kind) {
        Ok(idx) => {
            *out = idx;
            CcStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}
