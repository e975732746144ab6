//! C ABI over the pmots library: load or parse a scenario, run the search,
//! read the resulting front.
//!
//! All handles are opaque; every fallible call returns a [`PmotsStatus`] and
//! leaves a human-readable message retrievable with [`pmots_last_error`].
//! Strings returned by this library must be released with
//! [`pmots_string_free`], handles with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use pmots::commands::{run_scenario, RunArtifacts};
use pmots::export::to_csv;
use pmots::scenario::ScenarioFile;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmotsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidScenario = 3,
    RuntimeError = 4,
    IndexOutOfRange = 5,
    BufferTooSmall = 6,
    IoError = 7,
}

/// Opaque parsed-and-validated scenario.
pub struct PmotsScenario {
    file: ScenarioFile,
}

/// Opaque finished run: criteria names and the non-dominated front.
pub struct PmotsRun {
    artifacts: RunArtifacts,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = CString::new(message.into().replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Copy of the message from the most recent failure on this thread, or null.
/// The caller owns the returned string.
#[no_mangle]
pub extern "C" fn pmots_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(text) => text.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `text` must be a pointer previously returned by a `pmots_*` function and
/// not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn pmots_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

unsafe fn read_c_str<'a>(pointer: *const c_char) -> Result<&'a str, PmotsStatus> {
    if pointer.is_null() {
        set_error("null string argument");
        return Err(PmotsStatus::NullArgument);
    }
    CStr::from_ptr(pointer).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        PmotsStatus::InvalidUtf8
    })
}

fn scenario_from_text(text: &str, out: *mut *mut PmotsScenario) -> PmotsStatus {
    match ScenarioFile::parse(text) {
        Ok(file) => {
            clear_error();
            let handle = Box::new(PmotsScenario { file });
            unsafe { *out = Box::into_raw(handle) };
            PmotsStatus::Ok
        }
        Err(error) => {
            set_error(error.to_string());
            PmotsStatus::InvalidScenario
        }
    }
}

/// Parses a scenario from TOML text into a new handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pmots_scenario_parse(
    text: *const c_char,
    out: *mut *mut PmotsScenario,
) -> PmotsStatus {
    if out.is_null() {
        set_error("null output pointer");
        return PmotsStatus::NullArgument;
    }
    let text = match read_c_str(text) {
        Ok(text) => text,
        Err(status) => return status,
    };
    scenario_from_text(text, out)
}

/// Reads and parses a scenario file into a new handle.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pmots_scenario_load(
    path: *const c_char,
    out: *mut *mut PmotsScenario,
) -> PmotsStatus {
    if out.is_null() {
        set_error("null output pointer");
        return PmotsStatus::NullArgument;
    }
    let path = match read_c_str(path) {
        Ok(path) => path,
        Err(status) => return status,
    };
    match std::fs::read_to_string(Path::new(path)) {
        Ok(text) => scenario_from_text(&text, out),
        Err(error) => {
            set_error(format!("cannot read {path}: {error}"));
            PmotsStatus::IoError
        }
    }
}

/// Scenario seed (0 when the handle is null).
///
/// # Safety
/// `scenario` must be a live handle from this library, or null.
#[no_mangle]
pub unsafe extern "C" fn pmots_scenario_seed(scenario: *const PmotsScenario) -> u64 {
    match scenario.as_ref() {
        Some(handle) => handle.file.seed,
        None => 0,
    }
}

/// Overrides the scenario seed.
///
/// # Safety
/// `scenario` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn pmots_scenario_set_seed(
    scenario: *mut PmotsScenario,
    seed: u64,
) -> PmotsStatus {
    match scenario.as_mut() {
        Some(handle) => {
            handle.file.seed = seed;
            clear_error();
            PmotsStatus::Ok
        }
        None => {
            set_error("null scenario handle");
            PmotsStatus::NullArgument
        }
    }
}

/// Releases a scenario handle.
///
/// # Safety
/// `scenario` must be a live handle from this library, or null. It must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pmots_scenario_free(scenario: *mut PmotsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs the search described by `scenario` and returns a run handle.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pmots_run(
    scenario: *const PmotsScenario,
    out: *mut *mut PmotsRun,
) -> PmotsStatus {
    if out.is_null() {
        set_error("null output pointer");
        return PmotsStatus::NullArgument;
    }
    let Some(handle) = scenario.as_ref() else {
        set_error("null scenario handle");
        return PmotsStatus::NullArgument;
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| run_scenario(&handle.file)));
    match outcome {
        Ok(Ok(artifacts)) => {
            clear_error();
            *out = Box::into_raw(Box::new(PmotsRun { artifacts }));
            PmotsStatus::Ok
        }
        Ok(Err(error)) => {
            set_error(error.to_string());
            PmotsStatus::RuntimeError
        }
        Err(_) => {
            set_error("internal panic during the run");
            PmotsStatus::RuntimeError
        }
    }
}

/// Releases a run handle.
///
/// # Safety
/// `run` must be a live handle from this library, or null. It must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pmots_run_free(run: *mut PmotsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of solutions on the front (0 for a null handle).
///
/// # Safety
/// `run` must be a live handle from this library, or null.
#[no_mangle]
pub unsafe extern "C" fn pmots_run_front_len(run: *const PmotsRun) -> usize {
    run.as_ref().map_or(0, |r| r.artifacts.rows.len())
}

/// Number of criteria per solution (0 for a null handle).
///
/// # Safety
/// `run` must be a live handle from this library, or null.
#[no_mangle]
pub unsafe extern "C" fn pmots_run_criteria_count(run: *const PmotsRun) -> usize {
    run.as_ref().map_or(0, |r| r.artifacts.criteria.len())
}

/// Total neighbor evaluations performed by the search.
///
/// # Safety
/// `run` must be a live handle from this library, or null.
#[no_mangle]
pub unsafe extern "C" fn pmots_run_total_evaluations(run: *const PmotsRun) -> u64 {
    run.as_ref().map_or(0, |r| {
        r.artifacts.total_evaluations + r.artifacts.initial_evaluations
    })
}

/// Identifier of the front row at `index`.
///
/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pmots_run_row_id(
    run: *const PmotsRun,
    index: usize,
    out: *mut u64,
) -> PmotsStatus {
    let Some(handle) = run.as_ref() else {
        set_error("null run handle");
        return PmotsStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output pointer");
        return PmotsStatus::NullArgument;
    }
    match handle.artifacts.rows.get(index) {
        Some(row) => {
            clear_error();
            *out = row.id;
            PmotsStatus::Ok
        }
        None => {
            set_error(format!("row {index} out of range"));
            PmotsStatus::IndexOutOfRange
        }
    }
}

/// Copies the criterion values of the front row at `index` into `buffer`
/// (`buffer_len` must be at least the criteria count).
///
/// # Safety
/// `run` must be a live handle and `buffer` must point to at least
/// `buffer_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pmots_run_row_objectives(
    run: *const PmotsRun,
    index: usize,
    buffer: *mut f64,
    buffer_len: usize,
) -> PmotsStatus {
    let Some(handle) = run.as_ref() else {
        set_error("null run handle");
        return PmotsStatus::NullArgument;
    };
    if buffer.is_null() {
        set_error("null buffer");
        return PmotsStatus::NullArgument;
    }
    let Some(row) = handle.artifacts.rows.get(index) else {
        set_error(format!("row {index} out of range"));
        return PmotsStatus::IndexOutOfRange;
    };
    if buffer_len < row.objectives.len() {
        set_error(format!(
            "buffer holds {buffer_len} values, {} required",
            row.objectives.len()
        ));
        return PmotsStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(row.objectives.as_ptr(), buffer, row.objectives.len());
    clear_error();
    PmotsStatus::Ok
}

fn owned_c_string(text: &str) -> *mut c_char {
    CString::new(text.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

/// Textual encoding of the front row at `index`; null on error. The caller
/// owns the returned string.
///
/// # Safety
/// `run` must be a live handle from this library, or null.
#[no_mangle]
pub unsafe extern "C" fn pmots_run_row_encoding(run: *const PmotsRun, index: usize) -> *mut c_char {
    let Some(handle) = run.as_ref() else {
        set_error("null run handle");
        return std::ptr::null_mut();
    };
    match handle.artifacts.rows.get(index) {
        Some(row) => {
            clear_error();
            owned_c_string(&row.encoding)
        }
        None => {
            set_error(format!("row {index} out of range"));
            std::ptr::null_mut()
        }
    }
}

/// Name of the criterion at `index`; null on error. The caller owns the
/// returned string.
///
/// # Safety
/// `run` must be a live handle from this library, or null.
#[no_mangle]
pub unsafe extern "C" fn pmots_run_criterion_name(
    run: *const PmotsRun,
    index: usize,
) -> *mut c_char {
    let Some(handle) = run.as_ref() else {
        set_error("null run handle");
        return std::ptr::null_mut();
    };
    match handle.artifacts.criteria.get(index) {
        Some(name) => {
            clear_error();
            owned_c_string(name)
        }
        None => {
            set_error(format!("criterion {index} out of range"));
            std::ptr::null_mut()
        }
    }
}

/// Writes the front as CSV (the same schema the CLI exports) to `path`.
///
/// # Safety
/// `run` must be a live handle and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pmots_run_write_csv(
    run: *const PmotsRun,
    path: *const c_char,
) -> PmotsStatus {
    let Some(handle) = run.as_ref() else {
        set_error("null run handle");
        return PmotsStatus::NullArgument;
    };
    let path = match read_c_str(path) {
        Ok(path) => path,
        Err(status) => return status,
    };
    let text = to_csv(&handle.artifacts.criteria, &handle.artifacts.rows);
    match std::fs::write(path, text) {
        Ok(()) => {
            clear_error();
            PmotsStatus::Ok
        }
        Err(error) => {
            set_error(format!("cannot write {path}: {error}"));
            PmotsStatus::IoError
        }
    }
}
