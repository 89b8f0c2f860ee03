//! C ABI over the nearmiss library: opaque handles, integer status
//! codes, and a thread-local last-error message. Every returned string
//! is NUL-terminated UTF-8 owned by this library; release it with
//! `nm_string_free`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::c_char;

use nearmiss::allen::{classify, AllenRelation, Interval};
use nearmiss::contrast::{contrast, rank, select_far, select_near, MissKind, SimilarityMetric};
use nearmiss::error::Error;
use nearmiss::explain::{
    propositionalize_sequence, propositionalize_trace, trace, FeatureSet, Origin,
};
use nearmiss::learner::{learn, LearnerConfig};
use nearmiss::logic::{theory_covers, FactSet, Theory};
use nearmiss::sequence::{Dataset, Ident, Mode, SequenceRecord};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmStatus {
    NmOk = 0,
    NmNullPointer = 1,
    NmInvalidUtf8 = 2,
    NmDataError = 3,
    NmLogicError = 4,
    NmLearnError = 5,
    NmSimilarityError = 6,
    NmGenerateError = 7,
    NmUnknownTarget = 8,
    NmPanic = 9,
}

/// Event representation mode.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmMode {
    NmAttributes = 0,
    NmRelations = 1,
}

/// Similarity metric over feature sets.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmMetric {
    NmJaccard = 0,
    NmOverlap = 1,
}

/// Feature origin for explanations.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmBasis {
    NmTrace = 0,
    NmFullBk = 1,
}

/// Contrast example choice.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmMiss {
    NmNear = 0,
    NmFar = 1,
}

/// Allen relation between two half-open intervals, in canonical tag
/// order.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmAllenRelation {
    NmBefore = 0,
    NmMeets = 1,
    NmOverlaps = 2,
    NmStarts = 3,
    NmDuring = 4,
    NmFinishes = 5,
    NmEquals = 6,
    NmAfter = 7,
    NmMetBy = 8,
    NmOverlappedBy = 9,
    NmStartedBy = 10,
    NmFinishedBy = 11,
    NmContains = 12,
}

impl From<AllenRelation> for NmAllenRelation {
    fn from(relation: AllenRelation) -> Self {
        match relation {
            AllenRelation::Before => NmAllenRelation::NmBefore,
            AllenRelation::Meets => NmAllenRelation::NmMeets,
            AllenRelation::Overlaps => NmAllenRelation::NmOverlaps,
            AllenRelation::Starts => NmAllenRelation::NmStarts,
            AllenRelation::During => NmAllenRelation::NmDuring,
            AllenRelation::Finishes => NmAllenRelation::NmFinishes,
            AllenRelation::Equals => NmAllenRelation::NmEquals,
            AllenRelation::After => NmAllenRelation::NmAfter,
            AllenRelation::MetBy => NmAllenRelation::NmMetBy,
            AllenRelation::OverlappedBy => NmAllenRelation::NmOverlappedBy,
            AllenRelation::StartedBy => NmAllenRelation::NmStartedBy,
            AllenRelation::FinishedBy => NmAllenRelation::NmFinishedBy,
            AllenRelation::Contains => NmAllenRelation::NmContains,
        }
    }
}

/// Opaque parsed dataset handle.
pub struct NmDataset {
    inner: Dataset,
}

/// Opaque learned or parsed theory handle.
pub struct NmTheory {
    inner: Theory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL stripped");
    });
}

fn status_of(error: &Error) -> NmStatus {
    match error {
        Error::Data(_) => NmStatus::NmDataError,
        Error::Logic(_) => NmStatus::NmLogicError,
        Error::Learn(_) => NmStatus::NmLearnError,
        Error::Similarity(_) => NmStatus::NmSimilarityError,
        Error::Generate(_) => NmStatus::NmGenerateError,
        Error::UnknownTarget(_) => NmStatus::NmUnknownTarget,
        Error::Io(_) => NmStatus::NmDataError,
    }
}

fn fail(error: Error) -> NmStatus {
    set_error(&error.to_string());
    status_of(&error)
}

/// Runs a closure, converting panics and errors into status codes.
fn guarded(body: impl FnOnce() -> Result<(), NmStatus>) -> NmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => NmStatus::NmOk,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            NmStatus::NmPanic
        }
    }
}

/// Reads a required C string argument.
///
/// # Safety
/// `pointer` must be NULL or a valid NUL-terminated string.
unsafe fn read_str<'a>(pointer: *const c_char) -> Result<&'a str, NmStatus> {
    if pointer.is_null() {
        set_error("null pointer argument");
        return Err(NmStatus::NmNullPointer);
    }
    CStr::from_ptr(pointer).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        NmStatus::NmInvalidUtf8
    })
}

fn require<'a, T>(pointer: *const T) -> Result<&'a T, NmStatus> {
    if pointer.is_null() {
        set_error("null pointer argument");
        return Err(NmStatus::NmNullPointer);
    }
    Ok(unsafe { &*pointer })
}

fn require_out<'a, T>(pointer: *mut T) -> Result<&'a mut T, NmStatus> {
    if pointer.is_null() {
        set_error("null out-pointer");
        return Err(NmStatus::NmNullPointer);
    }
    Ok(unsafe { &mut *pointer })
}

fn give_string(out: &mut *mut c_char, content: String) {
    let owned = CString::new(content.replace('\0', " ")).expect("NUL stripped");
    *out = owned.into_raw();
}

fn mode_of(mode: NmMode) -> Mode {
    match mode {
        NmMode::NmAttributes => Mode::Attributes,
        NmMode::NmRelations => Mode::Relations,
    }
}

fn config_of(mode: NmMode) -> LearnerConfig {
    match mode {
        NmMode::NmAttributes => LearnerConfig::attributes(),
        NmMode::NmRelations => LearnerConfig::relations(),
    }
}

/// Message for the most recent error on this thread; owned by the
/// library, valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `pointer` must be NULL or a string obtained from this library,
/// released at most once.
#[no_mangle]
pub unsafe extern "C" fn nm_string_free(pointer: *mut c_char) {
    if !pointer.is_null() {
        drop(CString::from_raw(pointer));
    }
}

/// Parses and validates a dataset from JSON.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid
/// out-pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_dataset_parse(
    json: *const c_char,
    out: *mut *mut NmDataset,
) -> NmStatus {
    guarded(|| {
        let out = require_out(out)?;
        let text = read_str(json)?;
        let dataset = Dataset::parse(text).map_err(|e| fail(e.into()))?;
        *out = Box::into_raw(Box::new(NmDataset { inner: dataset }));
        Ok(())
    })
}

/// Releases a dataset handle. NULL is ignored.
///
/// # Safety
/// `dataset` must be NULL or a handle from this library, released at
/// most once.
#[no_mangle]
pub unsafe extern "C" fn nm_dataset_free(dataset: *mut NmDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Number of sequences in the dataset.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nm_dataset_sequence_count(
    dataset: *const NmDataset,
    out: *mut u64,
) -> NmStatus {
    guarded(|| {
        let out = require_out(out)?;
        let dataset = require(dataset)?;
        *out = dataset.inner.sequences.len() as u64;
        Ok(())
    })
}

/// Renders the dataset as ground facts, one per line.
///
/// # Safety
/// Pointers must be valid; free the result with `nm_string_free`.
#[no_mangle]
pub unsafe extern "C" fn nm_dataset_export_facts(
    dataset: *const NmDataset,
    mode: NmMode,
    out: *mut *mut c_char,
) -> NmStatus {
    guarded(|| {
        let out = require_out(out)?;
        let dataset = require(dataset)?;
        give_string(
            out,
            dataset.inner.export_background_knowledge(mode_of(mode)),
        );
        Ok(())
    })
}

/// Classifies two half-open intervals.
///
/// # Safety
/// `out` must be a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_allen_classify(
    first_on: u64,
    first_off: u64,
    second_on: u64,
    second_off: u64,
    out: *mut NmAllenRelation,
) -> NmStatus {
    guarded(|| {
        let out = require_out(out)?;
        let first = Interval::new(first_on, first_off).map_err(|e| fail(e.into()))?;
        let second = Interval::new(second_on, second_off).map_err(|e| fail(e.into()))?;
        *out = classify(first, second).into();
        Ok(())
    })
}

/// Learns a theory for `class` with the mode's default settings.
///
/// # Safety
/// Pointers must be valid; free the result with `nm_theory_free`.
#[no_mangle]
pub unsafe extern "C" fn nm_learn(
    dataset: *const NmDataset,
    class: *const c_char,
    mode: NmMode,
    out: *mut *mut NmTheory,
) -> NmStatus {
    guarded(|| {
        let out = require_out(out)?;
        let dataset = require(dataset)?;
        let class = Ident::new(read_str(class)?).map_err(|e| fail(e.into()))?;
        let outcome =
            learn(&dataset.inner, &class, &config_of(mode)).map_err(|e| fail(e.into()))?;
        *out = Box::into_raw(Box::new(NmTheory {
            inner: outcome.theory,
        }));
        Ok(())
    })
}

/// Parses a theory from its text form.
///
/// # Safety
/// Pointers must be valid; free the result with `nm_theory_free`.
#[no_mangle]
pub unsafe extern "C" fn nm_theory_parse(text: *const c_char, out: *mut *mut NmTheory) -> NmStatus {
    guarded(|| {
        let out = require_out(out)?;
        let text = read_str(text)?;
        let theory = Theory::parse(text).map_err(|e| fail(e.into()))?;
        *out = Box::into_raw(Box::new(NmTheory { inner: theory }));
        Ok(())
    })
}

/// Renders a theory, one clause per line.
///
/// # Safety
/// Pointers must be valid; free the result with `nm_string_free`.
#[no_mangle]
pub unsafe extern "C" fn nm_theory_render(
    theory: *const NmTheory,
    out: *mut *mut c_char,
) -> NmStatus {
    guarded(|| {
        let out = require_out(out)?;
        let theory = require(theory)?;
        give_string(out, theory.inner.render());
        Ok(())
    })
}

/// Releases a theory handle. NULL is ignored.
///
/// # Safety
/// `theory` must be NULL or a handle from this library, released at
/// most once.
#[no_mangle]
pub unsafe extern "C" fn nm_theory_free(theory: *mut NmTheory) {
    if !theory.is_null() {
        drop(Box::from_raw(theory));
    }
}

/// Whether the theory covers the identified sequence, using the
/// theory's own mode via the facts built for `mode`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nm_theory_covers(
    theory: *const NmTheory,
    dataset: *const NmDataset,
    sequence_id: *const c_char,
    mode: NmMode,
    out: *mut bool,
) -> NmStatus {
    guarded(|| {
        let out = require_out(out)?;
        let theory = require(theory)?;
        let dataset = require(dataset)?;
        let id = Ident::new(read_str(sequence_id)?).map_err(|e| fail(e.into()))?;
        let sequence = dataset
            .inner
            .sequence(&id)
            .ok_or_else(|| fail(Error::UnknownTarget(id.to_string())))?;
        let config = config_of(mode);
        let facts = FactSet::for_mode(sequence, mode_of(mode), &config.relation_config);
        *out = !theory_covers(&theory.inner, &facts).is_empty();
        Ok(())
    })
}

fn explain_json(
    dataset: &Dataset,
    target: &str,
    mode: Mode,
    metric: SimilarityMetric,
    basis: Origin,
    miss: MissKind,
) -> Result<String, Error> {
    let target_id = Ident::new(target)?;
    let target_sequence = dataset
        .sequence(&target_id)
        .ok_or_else(|| Error::UnknownTarget(target_id.to_string()))?;
    let config = match mode {
        Mode::Attributes => LearnerConfig::attributes(),
        Mode::Relations => LearnerConfig::relations(),
    };
    let mut theories = std::collections::BTreeMap::new();
    for class in &dataset.classes {
        theories.insert(class.clone(), learn(dataset, class, &config)?.theory);
    }
    let features = |sequence: &SequenceRecord| -> FeatureSet {
        match basis {
            Origin::FullBk => propositionalize_sequence(sequence, mode, &config.relation_config),
            Origin::Trace => {
                let facts = FactSet::for_mode(sequence, mode, &config.relation_config);
                propositionalize_trace(&trace(&theories[&sequence.label], &facts), mode)
            }
        }
    };
    let target_features = features(target_sequence);
    let pool: Vec<(&Ident, FeatureSet)> = dataset
        .sequences
        .iter()
        .filter(|s| s.label != target_sequence.label)
        .map(|s| (&s.id, features(s)))
        .collect();
    let pool_refs: Vec<&FeatureSet> = pool.iter().map(|(_, f)| f).collect();
    let ranking = rank(&target_features, &pool_refs, metric)?;
    let selected = match miss {
        MissKind::Near => select_near(&ranking),
        MissKind::Far => select_far(&ranking),
    };
    let mut rendered = Vec::new();
    for miss_id in &selected {
        let miss_features = pool
            .iter()
            .find(|(id, _)| *id == miss_id)
            .map(|(_, f)| f)
            .expect("selected miss comes from the pool");
        rendered.push(contrast(&target_features, miss_features, miss, metric)?.to_json());
    }
    Ok(format!("[{}]", rendered.join(",")))
}

/// Explains `target` contrastively; writes a JSON array with one
/// explanation per selected miss (empty when no near miss exists).
///
/// # Safety
/// Pointers must be valid; free the result with `nm_string_free`.
#[no_mangle]
pub unsafe extern "C" fn nm_explain(
    dataset: *const NmDataset,
    target: *const c_char,
    mode: NmMode,
    metric: NmMetric,
    basis: NmBasis,
    miss: NmMiss,
    out: *mut *mut c_char,
) -> NmStatus {
    guarded(|| {
        let out = require_out(out)?;
        let dataset = require(dataset)?;
        let target = read_str(target)?;
        let metric = match metric {
            NmMetric::NmJaccard => SimilarityMetric::Jaccard,
            NmMetric::NmOverlap => SimilarityMetric::Overlap,
        };
        let basis = match basis {
            NmBasis::NmTrace => Origin::Trace,
            NmBasis::NmFullBk => Origin::FullBk,
        };
        let miss = match miss {
            NmMiss::NmNear => MissKind::Near,
            NmMiss::NmFar => MissKind::Far,
        };
        let json = explain_json(&dataset.inner, target, mode_of(mode), metric, basis, miss)
            .map_err(fail)?;
        give_string(out, json);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::ptr;

    fn sample_json() -> CString {
        let dataset = nearmiss::harness::generator::generate(
            &nearmiss::harness::generator::GeneratorConfig {
                class_counts: [
                    (Ident::new("pain").unwrap(), 4),
                    (Ident::new("disgust").unwrap(), 4),
                ]
                .into_iter()
                .collect(),
                seed: 5,
                ..Default::default()
            },
        )
        .unwrap();
        CString::new(dataset.render()).unwrap()
    }

    fn parse_sample() -> *mut NmDataset {
        let json = sample_json();
        let mut handle: *mut NmDataset = ptr::null_mut();
        let status = unsafe { nm_dataset_parse(json.as_ptr(), &mut handle) };
        assert_eq!(status, NmStatus::NmOk);
        assert!(!handle.is_null());
        handle
    }

    #[test]
    fn parse_learn_render_free_round_trip() {
        let dataset = parse_sample();
        let mut count = 0u64;
        assert_eq!(
            unsafe { nm_dataset_sequence_count(dataset, &mut count) },
            NmStatus::NmOk
        );
        assert_eq!(count, 8);

        let class = CString::new("pain").unwrap();
        let mut theory: *mut NmTheory = ptr::null_mut();
        let status =
            unsafe { nm_learn(dataset, class.as_ptr(), NmMode::NmAttributes, &mut theory) };
        assert_eq!(status, NmStatus::NmOk);

        let mut text: *mut c_char = ptr::null_mut();
        assert_eq!(
            unsafe { nm_theory_render(theory, &mut text) },
            NmStatus::NmOk
        );
        let rendered = unsafe { CStr::from_ptr(text) }
            .to_str()
            .unwrap()
            .to_string();
        assert!(rendered.starts_with("pain(S)"), "{rendered}");

        let mut reparsed: *mut NmTheory = ptr::null_mut();
        assert_eq!(
            unsafe { nm_theory_parse(text, &mut reparsed) },
            NmStatus::NmOk
        );

        let first = CString::new("s5").unwrap();
        let mut covered = false;
        assert_eq!(
            unsafe {
                nm_theory_covers(
                    reparsed,
                    dataset,
                    first.as_ptr(),
                    NmMode::NmAttributes,
                    &mut covered,
                )
            },
            NmStatus::NmOk
        );
        assert!(covered);

        unsafe {
            nm_string_free(text);
            nm_theory_free(theory);
            nm_theory_free(reparsed);
            nm_dataset_free(dataset);
        }
    }

    #[test]
    fn malformed_json_reports_data_error() {
        let json = CString::new("{\"classes\": []}").unwrap();
        let mut handle: *mut NmDataset = ptr::null_mut();
        let status = unsafe { nm_dataset_parse(json.as_ptr(), &mut handle) };
        assert_eq!(status, NmStatus::NmDataError);
        assert!(handle.is_null());
        let message = unsafe { CStr::from_ptr(nm_last_error_message()) }
            .to_str()
            .unwrap();
        assert!(!message.is_empty());
    }

    #[test]
    fn null_arguments_are_rejected() {
        let mut handle: *mut NmDataset = ptr::null_mut();
        assert_eq!(
            unsafe { nm_dataset_parse(ptr::null(), &mut handle) },
            NmStatus::NmNullPointer
        );
        let json = sample_json();
        assert_eq!(
            unsafe { nm_dataset_parse(json.as_ptr(), ptr::null_mut()) },
            NmStatus::NmNullPointer
        );
    }

    #[test]
    fn allen_classification_matches_library() {
        let mut relation = NmAllenRelation::NmBefore;
        assert_eq!(
            unsafe { nm_allen_classify(1, 4, 2, 6, &mut relation) },
            NmStatus::NmOk
        );
        assert_eq!(relation, NmAllenRelation::NmOverlaps);
        assert_eq!(
            unsafe { nm_allen_classify(3, 3, 0, 1, &mut relation) },
            NmStatus::NmDataError
        );
    }

    #[test]
    fn explain_returns_json_array() {
        let dataset = parse_sample();
        let target = CString::new("s5").unwrap();
        let mut text: *mut c_char = ptr::null_mut();
        let status = unsafe {
            nm_explain(
                dataset,
                target.as_ptr(),
                NmMode::NmAttributes,
                NmMetric::NmJaccard,
                NmBasis::NmTrace,
                NmMiss::NmNear,
                &mut text,
            )
        };
        assert_eq!(status, NmStatus::NmOk);
        let json = unsafe { CStr::from_ptr(text) }.to_str().unwrap();
        assert!(json.starts_with('['), "{json}");
        let parsed: serde_json::Value = serde_json::from_str(json).unwrap();
        assert!(parsed.is_array());
        unsafe {
            nm_string_free(text);
            nm_dataset_free(dataset);
        }
    }

    #[test]
    fn unknown_target_has_dedicated_status() {
        let dataset = parse_sample();
        let target = CString::new("s999").unwrap();
        let mut text: *mut c_char = ptr::null_mut();
        let status = unsafe {
            nm_explain(
                dataset,
                target.as_ptr(),
                NmMode::NmAttributes,
                NmMetric::NmJaccard,
                NmBasis::NmTrace,
                NmMiss::NmNear,
                &mut text,
            )
        };
        assert_eq!(status, NmStatus::NmUnknownTarget);
        unsafe { nm_dataset_free(dataset) };
    }
}
