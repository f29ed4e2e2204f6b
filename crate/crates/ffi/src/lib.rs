//! C ABI for the citerank ranking engine.
//!
//! The surface follows the usual opaque-handle pattern: constructors return
//! a handle through an out-parameter and a [`CrStatus`] code; every handle
//! has a matching `_free` function; strings returned to the caller are
//! allocated here and must be released with [`citerank_string_free`]. On
//! any non-OK status, [`citerank_last_error`] returns a thread-local
//! message that stays valid until the next call on the same thread.
//!
//! The generated header lands in `include/citerank.h` at build time.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::Path;
use std::slice;

use citerank::analytics;
use citerank::harvest;
use citerank::metrics::{compute_metric_table, MetricVector};
use citerank::model::{model_from_json, LinearModel};
use citerank::roster::{normalize_name, parse_roster, Snapshot};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ValidationError = 4,
    IoError = 5,
    MissingMeasure = 6,
    IndexOutOfRange = 7,
    DegenerateInput = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl AsRef<str>) {
    let sanitized: String = message
        .as_ref()
        .chars()
        .map(|c| if c == '\0' { ' ' } else { c })
        .collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: CrStatus, message: impl AsRef<str>) -> CrStatus {
    set_error(message);
    status
}

/// Message for the most recent error on this thread. Borrowed; valid until
/// the next citerank call on the same thread.
#[no_mangle]
pub extern "C" fn citerank_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Opaque validated snapshot handle.
pub struct CrSnapshot {
    inner: Snapshot,
}

/// Opaque per-program metric table handle.
pub struct CrMetricTable {
    inner: Vec<MetricVector>,
}

/// Opaque scoring-model handle.
pub struct CrModel {
    inner: LinearModel,
}

unsafe fn bytes_from<'a>(data: *const u8, len: usize) -> Option<&'a [u8]> {
    if data.is_null() {
        return None;
    }
    Some(slice::from_raw_parts(data, len))
}

/// Parse a roster CSV into a validated snapshot.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn citerank_snapshot_from_roster_csv(
    data: *const u8,
    len: usize,
    out: *mut *mut CrSnapshot,
) -> CrStatus {
    if out.is_null() {
        return fail(CrStatus::NullArgument, "out pointer is null");
    }
    let Some(bytes) = bytes_from(data, len) else {
        return fail(CrStatus::NullArgument, "data pointer is null");
    };
    match parse_roster(bytes) {
        Ok(snapshot) => {
            *out = Box::into_raw(Box::new(CrSnapshot { inner: snapshot }));
            CrStatus::Ok
        }
        Err(err) => fail(CrStatus::ParseError, err.to_string()),
    }
}

/// Load a snapshot directory written by the `ingest` subcommand.
///
/// # Safety
/// `dir` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn citerank_snapshot_load(
    dir: *const c_char,
    out: *mut *mut CrSnapshot,
) -> CrStatus {
    if dir.is_null() || out.is_null() {
        return fail(CrStatus::NullArgument, "dir/out pointer is null");
    }
    let Ok(dir) = CStr::from_ptr(dir).to_str() else {
        return fail(CrStatus::InvalidUtf8, "dir is not valid UTF-8");
    };
    match Snapshot::load(Path::new(dir)) {
        Ok(snapshot) => {
            *out = Box::into_raw(Box::new(CrSnapshot { inner: snapshot }));
            CrStatus::Ok
        }
        Err(err) => fail(CrStatus::IoError, err.to_string()),
    }
}

/// # Safety
/// `snapshot` must be a live handle from a citerank constructor.
#[no_mangle]
pub unsafe extern "C" fn citerank_snapshot_faculty_count(snapshot: *const CrSnapshot) -> usize {
    snapshot.as_ref().map_or(0, |s| s.inner.faculty.len())
}

/// # Safety
/// `snapshot` must be a live handle from a citerank constructor.
#[no_mangle]
pub unsafe extern "C" fn citerank_snapshot_department_count(snapshot: *const CrSnapshot) -> usize {
    snapshot.as_ref().map_or(0, |s| s.inner.departments.len())
}

/// # Safety
/// `snapshot` must come from a citerank constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn citerank_snapshot_free(snapshot: *mut CrSnapshot) {
    if !snapshot.is_null() {
        drop(Box::from_raw(snapshot));
    }
}

/// Compute the per-program metric table of a snapshot.
///
/// # Safety
/// `snapshot` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn citerank_metrics_compute(
    snapshot: *const CrSnapshot,
    out: *mut *mut CrMetricTable,
) -> CrStatus {
    if out.is_null() {
        return fail(CrStatus::NullArgument, "out pointer is null");
    }
    let Some(snapshot) = snapshot.as_ref() else {
        return fail(CrStatus::NullArgument, "snapshot handle is null");
    };
    match compute_metric_table(&snapshot.inner) {
        Ok(table) => {
            *out = Box::into_raw(Box::new(CrMetricTable { inner: table }));
            CrStatus::Ok
        }
        Err(err) => fail(CrStatus::ValidationError, err.to_string()),
    }
}

/// # Safety
/// `table` must be a live handle from `citerank_metrics_compute`.
#[no_mangle]
pub unsafe extern "C" fn citerank_metrics_len(table: *const CrMetricTable) -> usize {
    table.as_ref().map_or(0, |t| t.inner.len())
}

/// University name of the `index`-th program as a newly allocated string
/// (free with `citerank_string_free`). Returns NULL when out of range.
///
/// # Safety
/// `table` must be a live handle from `citerank_metrics_compute`.
#[no_mangle]
pub unsafe extern "C" fn citerank_metrics_university(
    table: *const CrMetricTable,
    index: usize,
) -> *mut c_char {
    let Some(table) = table.as_ref() else {
        return std::ptr::null_mut();
    };
    let Some(v) = table.inner.get(index) else {
        return std::ptr::null_mut();
    };
    CString::new(v.university.clone())
        .map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Look up one measure (`m10`, `g10`, `p10`, `c10`..`c90`) of the
/// `index`-th program.
///
/// # Safety
/// `table` must be a live handle; `name` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn citerank_metrics_measure(
    table: *const CrMetricTable,
    index: usize,
    name: *const c_char,
    out: *mut f64,
) -> CrStatus {
    if name.is_null() || out.is_null() {
        return fail(CrStatus::NullArgument, "name/out pointer is null");
    }
    let Some(table) = table.as_ref() else {
        return fail(CrStatus::NullArgument, "table handle is null");
    };
    let Some(v) = table.inner.get(index) else {
        return fail(
            CrStatus::IndexOutOfRange,
            format!("index {index} >= {}", table.inner.len()),
        );
    };
    let Ok(name) = CStr::from_ptr(name).to_str() else {
        return fail(CrStatus::InvalidUtf8, "measure name is not valid UTF-8");
    };
    match v.measure(name) {
        Some(value) => {
            *out = value;
            CrStatus::Ok
        }
        None => fail(CrStatus::MissingMeasure, format!("no measure {name:?}")),
    }
}

/// # Safety
/// `table` must come from `citerank_metrics_compute` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn citerank_metrics_free(table: *mut CrMetricTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// The published four-term scoring model.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn citerank_model_published(out: *mut *mut CrModel) -> CrStatus {
    if out.is_null() {
        return fail(CrStatus::NullArgument, "out pointer is null");
    }
    *out = Box::into_raw(Box::new(CrModel {
        inner: LinearModel::published(),
    }));
    CrStatus::Ok
}

/// Load a fitted model from its JSON serialization.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn citerank_model_from_json(
    data: *const u8,
    len: usize,
    out: *mut *mut CrModel,
) -> CrStatus {
    if out.is_null() {
        return fail(CrStatus::NullArgument, "out pointer is null");
    }
    let Some(bytes) = bytes_from(data, len) else {
        return fail(CrStatus::NullArgument, "data pointer is null");
    };
    match model_from_json(bytes) {
        Ok(model) => {
            *out = Box::into_raw(Box::new(CrModel {
                inner: model.model,
            }));
            CrStatus::Ok
        }
        Err(err) => fail(CrStatus::ParseError, err.to_string()),
    }
}

/// Score the `index`-th program of a metric table.
///
/// # Safety
/// `model` and `table` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn citerank_model_score(
    model: *const CrModel,
    table: *const CrMetricTable,
    index: usize,
    out: *mut f64,
) -> CrStatus {
    if out.is_null() {
        return fail(CrStatus::NullArgument, "out pointer is null");
    }
    let (Some(model), Some(table)) = (model.as_ref(), table.as_ref()) else {
        return fail(CrStatus::NullArgument, "model/table handle is null");
    };
    let Some(v) = table.inner.get(index) else {
        return fail(
            CrStatus::IndexOutOfRange,
            format!("index {index} >= {}", table.inner.len()),
        );
    };
    match model.inner.score(v) {
        Ok(score) => {
            *out = score;
            CrStatus::Ok
        }
        Err(err) => fail(CrStatus::MissingMeasure, err.to_string()),
    }
}

/// # Safety
/// `model` must come from a citerank constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn citerank_model_free(model: *mut CrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Citations of the 10th most-cited paper; 0 when fewer than ten entries.
///
/// # Safety
/// `citations` must point to `len` readable u32 values (may be NULL when
/// `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn citerank_derive_t10(citations: *const u32, len: usize) -> u32 {
    if len == 0 {
        return 0;
    }
    if citations.is_null() {
        return 0;
    }
    harvest::derive_t10(slice::from_raw_parts(citations, len))
}

/// Canonicalize a faculty name. The result must be freed with
/// `citerank_string_free`.
///
/// # Safety
/// `raw` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn citerank_normalize_name(
    raw: *const c_char,
    out: *mut *mut c_char,
) -> CrStatus {
    if raw.is_null() || out.is_null() {
        return fail(CrStatus::NullArgument, "raw/out pointer is null");
    }
    let Ok(raw) = CStr::from_ptr(raw).to_str() else {
        return fail(CrStatus::InvalidUtf8, "name is not valid UTF-8");
    };
    match normalize_name(raw) {
        Ok(canonical) => match CString::new(canonical) {
            Ok(s) => {
                *out = s.into_raw();
                CrStatus::Ok
            }
            Err(_) => fail(CrStatus::ValidationError, "canonical name contains NUL"),
        },
        Err(err) => fail(CrStatus::ValidationError, err.to_string()),
    }
}

/// Release a string allocated by this library.
///
/// # Safety
/// `s` must have been returned by a citerank function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn citerank_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn correlation(
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
    compute: impl Fn(&[f64], &[f64]) -> Result<f64, analytics::AnalyticsError>,
) -> CrStatus {
    if x.is_null() || y.is_null() || out.is_null() {
        return fail(CrStatus::NullArgument, "x/y/out pointer is null");
    }
    let xs = slice::from_raw_parts(x, len);
    let ys = slice::from_raw_parts(y, len);
    match compute(xs, ys) {
        Ok(value) => {
            *out = value;
            CrStatus::Ok
        }
        Err(err) => fail(CrStatus::DegenerateInput, err.to_string()),
    }
}

/// Sample Pearson correlation of two equal-length series.
///
/// # Safety
/// `x` and `y` must point to `len` readable f64 values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn citerank_pearson(
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> CrStatus {
    correlation(x, y, len, out, analytics::pearson)
}

/// Spearman rank correlation (midranks for ties).
///
/// # Safety
/// `x` and `y` must point to `len` readable f64 values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn citerank_spearman(
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> CrStatus {
    correlation(x, y, len, out, analytics::spearman)
}

/// Coefficient of determination of `pred` against `actual`.
///
/// # Safety
/// `pred` and `actual` must point to `len` readable f64 values; `out` must
/// be valid.
#[no_mangle]
pub unsafe extern "C" fn citerank_r_squared(
    pred: *const f64,
    actual: *const f64,
    len: usize,
    out: *mut f64,
) -> CrStatus {
    correlation(pred, actual, len, out, analytics::r_squared)
}
