//! C interface to the webqa ranker.
//!
//! Handles are opaque and owned by the caller, who releases them with the matching `_free`
//! function. Every fallible call returns a [`WebqaStatus`]; on failure the message is
//! available from [`webqa_last_error`] on the same thread. Strings returned through out
//! parameters are released with [`webqa_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use webqa::annotate::{EmbeddingTable, HeuristicAnnotator};
use webqa::corpus::{load_dataset, parse_record, Example};
use webqa::eval::f1_for_example;
use webqa::model::Model;
use webqa::pipeline::{annotate_example, predict};
use webqa::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WebqaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Version = 5,
    InvalidArgument = 6,
    Internal = 7,
    Panic = 8,
}

/// A trained model plus the word vectors used at prediction time.
pub struct WebqaModel {
    model: Model,
    embeddings: EmbeddingTable,
}

/// Examples loaded from a dataset file.
pub struct WebqaDataset {
    examples: Vec<Example>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(WebqaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => WebqaStatus::Io,
            Error::Record { .. } | Error::Format { .. } | Error::DuplicateId(_) => {
                WebqaStatus::Parse
            }
            Error::Version { .. } => WebqaStatus::Version,
            Error::Config(_) | Error::UnknownTemplate { .. } | Error::DimensionMismatch { .. } => {
                WebqaStatus::InvalidArgument
            }
            _ => WebqaStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> WebqaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            WebqaStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            WebqaStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(WebqaStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(WebqaStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn out_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s)
        .map_err(|_| Failure(WebqaStatus::Internal, "output contains NUL".into()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn null_out<T>(out: *mut T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure(WebqaStatus::NullPointer, format!("{what} is NULL")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn webqa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn webqa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn webqa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a model file and, when `embeddings_path` is not NULL, a word-vector file.
///
/// # Safety
/// Paths must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn webqa_model_load(
    model_path: *const c_char,
    embeddings_path: *const c_char,
    out: *mut *mut WebqaModel,
) -> WebqaStatus {
    guard(|| {
        null_out(out, "out")?;
        let model = Model::load(text(model_path, "model_path")?)?;
        let embeddings = if embeddings_path.is_null() {
            EmbeddingTable::default()
        } else {
            EmbeddingTable::load(text(embeddings_path, "embeddings_path")?, None)?
        };
        *out = Box::into_raw(Box::new(WebqaModel { model, embeddings }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`webqa_model_load`] and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn webqa_model_free(model: *mut WebqaModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of features in the model's index.
///
/// # Safety
/// `model` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn webqa_model_feature_count(model: *const WebqaModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.index.len())
}

/// Predicts the answer set for one dataset record given as JSON
/// (`{"id", "question", "answers", "snippets"}`) and writes the prediction record as JSON
/// (`{"id", "answers", "scores", "ranking"}`) to `out`.
///
/// # Safety
/// `model` must be a live handle; `record_json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn webqa_model_predict_json(
    model: *const WebqaModel,
    record_json: *const c_char,
    margin: f64,
    out: *mut *mut c_char,
) -> WebqaStatus {
    guard(|| {
        null_out(out, "out")?;
        let m = model
            .as_ref()
            .ok_or_else(|| Failure(WebqaStatus::NullPointer, "model is NULL".into()))?;
        if !(margin.is_finite() && margin >= 0.0) {
            return Err(Failure(
                WebqaStatus::InvalidArgument,
                format!("margin must be >= 0, got {margin}"),
            ));
        }
        let example = parse_record(text(record_json, "record_json")?, 1)?;
        let annotated = annotate_example(&example, &HeuristicAnnotator::default())?;
        let mut preds = predict(
            &m.model,
            std::slice::from_ref(&annotated),
            &m.embeddings,
            margin,
        )?;
        let record = preds.pop().expect("one prediction per example");
        out_string(
            serde_json::to_string(&record).expect("records serialize"),
            out,
        )
    })
}

/// Loads a line-delimited dataset file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn webqa_dataset_load(
    path: *const c_char,
    out: *mut *mut WebqaDataset,
) -> WebqaStatus {
    guard(|| {
        null_out(out, "out")?;
        let examples = load_dataset(Path::new(text(path, "path")?))?;
        *out = Box::into_raw(Box::new(WebqaDataset { examples }));
        Ok(())
    })
}

/// # Safety
/// `dataset` must come from [`webqa_dataset_load`] and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn webqa_dataset_free(dataset: *mut WebqaDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// `dataset` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn webqa_dataset_len(dataset: *const WebqaDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.examples.len())
}

/// Predicts every example of `dataset` and writes a JSON array of prediction records.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn webqa_model_predict_dataset(
    model: *const WebqaModel,
    dataset: *const WebqaDataset,
    margin: f64,
    out: *mut *mut c_char,
) -> WebqaStatus {
    guard(|| {
        null_out(out, "out")?;
        let m = model
            .as_ref()
            .ok_or_else(|| Failure(WebqaStatus::NullPointer, "model is NULL".into()))?;
        let d = dataset
            .as_ref()
            .ok_or_else(|| Failure(WebqaStatus::NullPointer, "dataset is NULL".into()))?;
        if !(margin.is_finite() && margin >= 0.0) {
            return Err(Failure(
                WebqaStatus::InvalidArgument,
                format!("margin must be >= 0, got {margin}"),
            ));
        }
        let annotated = webqa::pipeline::annotate_all(&d.examples, &HeuristicAnnotator::default())?;
        let preds = predict(&m.model, &annotated, &m.embeddings, margin)?;
        out_string(
            serde_json::to_string(&preds).expect("records serialize"),
            out,
        )
    })
}

/// Set F1 between two JSON arrays of answer strings.
///
/// # Safety
/// Both strings must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn webqa_f1(
    predicted_json: *const c_char,
    gold_json: *const c_char,
    out: *mut f64,
) -> WebqaStatus {
    guard(|| {
        null_out(out, "out")?;
        let parse = |s: &str, what: &str| {
            serde_json::from_str::<Vec<String>>(s)
                .map_err(|e| Failure(WebqaStatus::Parse, format!("{what}: {e}")))
        };
        let predicted = parse(text(predicted_json, "predicted_json")?, "predicted_json")?;
        let gold = parse(text(gold_json, "gold_json")?, "gold_json")?;
        *out = f1_for_example(&predicted, &gold, None);
        Ok(())
    })
}
