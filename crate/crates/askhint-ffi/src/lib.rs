//! C ABI over the askhint core.
//!
//! Conventions: functions return an [`AskhintStatus`] code (or a nullable
//! pointer) and record a human-readable message retrievable with
//! `askhint_last_error_message`. Handles (`AskhintPool`,
//! `AskhintCompactSet`, `AskhintVerdict`) are opaque; free them with their
//! `_free` functions. Strings returned as `char*` are owned by the caller
//! and released with `askhint_string_free`. No call panics across the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use askhint::compression::{load_compact_set, CompactPromptSet};
use askhint::evaluation::compute_auc;
use askhint::inference::{
    parse_verdict, render_askhint_prompt, sample_frame_indices, AnswerFormat, Decision,
    ParseStatus, Verdict,
};
use askhint::pool::{load_pool, render_full_pool_prompt, PromptPool};

/// Status codes returned by fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AskhintStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Utf8 = 3,
    ParseError = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn askhint_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn askhint_version_string() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by an askhint function that
/// documents caller-owned strings, or null.
#[no_mangle]
pub unsafe extern "C" fn askhint_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, AskhintStatus> {
    if ptr.is_null() {
        set_last_error(&format!("{name} is null"));
        return Err(AskhintStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error(&format!("{name} is not valid UTF-8"));
        AskhintStatus::Utf8
    })
}

fn owned_c_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

fn guard<F: FnOnce() -> AskhintStatus>(body: F) -> AskhintStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            AskhintStatus::Panic
        }
    }
}

// ---------------------------------------------------------------------------
// AUC

/// ROC-AUC of `scores` against binary `labels` (1 = abnormal), tied pairs
/// credited 0.5. Fails with `INVALID_ARGUMENT` unless both label values
/// occur.
///
/// # Safety
/// `scores` and `labels` must point to `len` readable elements; `out_auc`
/// must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn askhint_compute_auc(
    scores: *const f64,
    labels: *const u8,
    len: usize,
    out_auc: *mut f64,
) -> AskhintStatus {
    if scores.is_null() || labels.is_null() || out_auc.is_null() {
        set_last_error("scores, labels and out_auc must be non-null");
        return AskhintStatus::NullPointer;
    }
    let scores = std::slice::from_raw_parts(scores, len);
    let labels = std::slice::from_raw_parts(labels, len);
    guard(|| match compute_auc(scores, labels) {
        Ok(value) => {
            *out_auc = value;
            AskhintStatus::Ok
        }
        Err(e) => {
            set_last_error(&e.to_string());
            AskhintStatus::InvalidArgument
        }
    })
}

// ---------------------------------------------------------------------------
// frame sampling

/// Samples frame indices for a stored sequence of `n_frames` frames. Pass
/// `fps_native <= 0` or `duration_s <= 0` when unknown. Writes up to
/// `capacity` indices into `out_indices` and the true count into `out_len`;
/// fails with `INVALID_ARGUMENT` when the capacity is too small (use
/// `max_frames` as a safe capacity).
///
/// # Safety
/// `out_indices` must point to `capacity` writable elements; `out_len` must
/// be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn askhint_sample_frame_indices(
    n_frames: usize,
    fps_native: f64,
    duration_s: f64,
    max_frames: usize,
    out_indices: *mut usize,
    capacity: usize,
    out_len: *mut usize,
) -> AskhintStatus {
    if out_indices.is_null() || out_len.is_null() {
        set_last_error("out_indices and out_len must be non-null");
        return AskhintStatus::NullPointer;
    }
    if max_frames == 0 {
        set_last_error("max_frames must be at least 1");
        return AskhintStatus::InvalidArgument;
    }
    guard(|| {
        let fps = (fps_native > 0.0).then_some(fps_native);
        let duration = (duration_s > 0.0).then_some(duration_s);
        let indices = sample_frame_indices(n_frames, fps, duration, max_frames);
        if indices.len() > capacity {
            set_last_error(&format!(
                "capacity {capacity} too small for {} indices",
                indices.len()
            ));
            return AskhintStatus::InvalidArgument;
        }
        let out = std::slice::from_raw_parts_mut(out_indices, capacity);
        out[..indices.len()].copy_from_slice(&indices);
        *out_len = indices.len();
        AskhintStatus::Ok
    })
}

// ---------------------------------------------------------------------------
// verdict parsing

/// Opaque parsed verdict.
pub struct AskhintVerdict {
    inner: Verdict,
}

/// Answer grammar selector for `askhint_parse_verdict`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AskhintAnswerFormat {
    Structured = 0,
    JsonLabel = 1,
}

/// Parses one model reply. Never fails on content: unparseable text yields
/// a verdict with `ASKHINT_PARSE_STATUS_FAILED`. Returns null only for
/// invalid pointers/UTF-8. Free with `askhint_verdict_free`.
///
/// # Safety
/// `video_id` and `text` must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn askhint_parse_verdict(
    video_id: *const c_char,
    text: *const c_char,
    format: AskhintAnswerFormat,
) -> *mut AskhintVerdict {
    let Ok(video_id) = str_arg(video_id, "video_id") else {
        return std::ptr::null_mut();
    };
    let Ok(text) = str_arg(text, "text") else {
        return std::ptr::null_mut();
    };
    let format = match format {
        AskhintAnswerFormat::Structured => AnswerFormat::Structured,
        AskhintAnswerFormat::JsonLabel => AnswerFormat::JsonLabel,
    };
    match catch_unwind(|| parse_verdict(video_id, text, format)) {
        Ok(inner) => Box::into_raw(Box::new(AskhintVerdict { inner })),
        Err(_) => {
            set_last_error("internal panic");
            std::ptr::null_mut()
        }
    }
}

/// Decision values: 0 normal, 1 abnormal.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AskhintDecision {
    Normal = 0,
    Abnormal = 1,
}

/// Parse status values: 0 clean, 1 recovered, 2 failed.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AskhintParseStatus {
    Clean = 0,
    Recovered = 1,
    Failed = 2,
}

/// # Safety
/// `verdict` must come from `askhint_parse_verdict` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn askhint_verdict_decision(verdict: *const AskhintVerdict) -> AskhintDecision {
    match verdict.as_ref().map(|v| v.inner.decision) {
        Some(Decision::Abnormal) => AskhintDecision::Abnormal,
        _ => AskhintDecision::Normal,
    }
}

/// Anomaly score in [0, 1]; 0 for a null handle.
///
/// # Safety
/// `verdict` must come from `askhint_parse_verdict` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn askhint_verdict_score(verdict: *const AskhintVerdict) -> f64 {
    verdict.as_ref().map_or(0.0, |v| v.inner.score)
}

/// # Safety
/// `verdict` must come from `askhint_parse_verdict` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn askhint_verdict_parse_status(
    verdict: *const AskhintVerdict,
) -> AskhintParseStatus {
    match verdict.as_ref().map(|v| v.inner.parse_status) {
        Some(ParseStatus::Clean) => AskhintParseStatus::Clean,
        Some(ParseStatus::Recovered) => AskhintParseStatus::Recovered,
        _ => AskhintParseStatus::Failed,
    }
}

/// Group name for abnormal verdicts, or null when absent. Caller frees with
/// `askhint_string_free`.
///
/// # Safety
/// `verdict` must come from `askhint_parse_verdict` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn askhint_verdict_group(verdict: *const AskhintVerdict) -> *mut c_char {
    match verdict.as_ref().and_then(|v| v.inner.group.as_deref()) {
        Some(group) => owned_c_string(group),
        None => std::ptr::null_mut(),
    }
}

/// Rationale text (possibly empty). Caller frees with `askhint_string_free`.
///
/// # Safety
/// `verdict` must come from `askhint_parse_verdict` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn askhint_verdict_rationale(verdict: *const AskhintVerdict) -> *mut c_char {
    match verdict.as_ref() {
        Some(v) => owned_c_string(&v.inner.rationale),
        None => std::ptr::null_mut(),
    }
}

/// # Safety
/// `verdict` must come from `askhint_parse_verdict`; double-free is UB.
#[no_mangle]
pub unsafe extern "C" fn askhint_verdict_free(verdict: *mut AskhintVerdict) {
    if !verdict.is_null() {
        drop(Box::from_raw(verdict));
    }
}

// ---------------------------------------------------------------------------
// prompt pool

/// Opaque class-wise guiding-question pool.
pub struct AskhintPool {
    inner: PromptPool,
}

/// Parses the line-oriented pool format (`## Class` headers, one question
/// per line). Null on failure; see `askhint_last_error_message`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn askhint_pool_load(text: *const c_char) -> *mut AskhintPool {
    let Ok(text) = str_arg(text, "text") else {
        return std::ptr::null_mut();
    };
    match catch_unwind(|| load_pool(text)) {
        Ok(Ok(inner)) => Box::into_raw(Box::new(AskhintPool { inner })),
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_last_error("internal panic");
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `pool` must come from `askhint_pool_load` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn askhint_pool_class_count(pool: *const AskhintPool) -> usize {
    pool.as_ref().map_or(0, |p| p.inner.entries.len())
}

/// # Safety
/// `pool` must come from `askhint_pool_load` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn askhint_pool_question_count(pool: *const AskhintPool) -> usize {
    pool.as_ref().map_or(0, |p| p.inner.total_questions())
}

/// Renders the monolithic full-pool baseline prompt (strict raw-JSON output
/// schema). Caller frees with `askhint_string_free`.
///
/// # Safety
/// `pool` must come from `askhint_pool_load` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn askhint_pool_full_prompt(pool: *const AskhintPool) -> *mut c_char {
    match pool.as_ref() {
        Some(p) => owned_c_string(&render_full_pool_prompt(&p.inner)),
        None => {
            set_last_error("pool is null");
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `pool` must come from `askhint_pool_load`; double-free is UB.
#[no_mangle]
pub unsafe extern "C" fn askhint_pool_free(pool: *mut AskhintPool) {
    if !pool.is_null() {
        drop(Box::from_raw(pool));
    }
}

// ---------------------------------------------------------------------------
// compact prompt set

/// Opaque compact grouped question set.
pub struct AskhintCompactSet {
    inner: CompactPromptSet,
}

/// Parses the canonical compact-set format (`## Group` headers with an
/// optional `@classes:` line). Null on failure.
///
/// # Safety
/// `text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn askhint_compact_set_load(text: *const c_char) -> *mut AskhintCompactSet {
    let Ok(text) = str_arg(text, "text") else {
        return std::ptr::null_mut();
    };
    match catch_unwind(|| load_compact_set(text)) {
        Ok(Ok(inner)) => Box::into_raw(Box::new(AskhintCompactSet { inner })),
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_last_error("internal panic");
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `set` must come from `askhint_compact_set_load` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn askhint_compact_set_group_count(set: *const AskhintCompactSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.groups.len())
}

/// # Safety
/// `set` must come from `askhint_compact_set_load` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn askhint_compact_set_question_count(
    set: *const AskhintCompactSet,
) -> usize {
    set.as_ref().map_or(0, |s| s.inner.total_questions())
}

/// Renders the structured two-task inference prompt for this set. Caller
/// frees with `askhint_string_free`.
///
/// # Safety
/// `set` must come from `askhint_compact_set_load` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn askhint_compact_set_render_prompt(
    set: *const AskhintCompactSet,
) -> *mut c_char {
    match set.as_ref() {
        Some(s) => owned_c_string(&render_askhint_prompt(&s.inner)),
        None => {
            set_last_error("set is null");
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `set` must come from `askhint_compact_set_load`; double-free is UB.
#[no_mangle]
pub unsafe extern "C" fn askhint_compact_set_free(set: *mut AskhintCompactSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}
