//! C ABI for `dualscore`.
//!
//! Evaluation sets live behind an opaque [`DsEvalSet`] handle. Every fallible
//! call returns a [`DsStatus`] and writes results through out-pointers; on
//! failure the message is kept per thread and read back with
//! [`dualscore_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use dualscore::dataset::Population;
use dualscore::detection::{aupr, auroc, fpr_at_95_tpr};
use dualscore::ingest::load_scores;
use dualscore::scoring::{energy, msp};
use dualscore::synth::{ID_CHANNEL, OOD_CHANNEL};
use dualscore::{best_f1_single, channel_aurc, DoubleSweep, Error, EvalSet, GridSpec, ThresholdGrid};

/// Opaque evaluation set.
pub struct DsEvalSet {
    inner: EvalSet,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    SchemaError = 4,
    IoError = 5,
    EmptySet = 6,
    EmptyIdPopulation = 7,
    UnknownChannel = 8,
    NonFiniteScore = 9,
    EmptySide = 10,
    Failed = 11,
    Panic = 12,
}

pub const DS_ORIGIN_ID: u8 = 0;
pub const DS_ORIGIN_OOD: u8 = 1;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<Vec<u8>>) {
    let text = CString::new(message).unwrap_or_else(|_| c"error message contained a NUL byte".into());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn status_of(err: &Error) -> DsStatus {
    match err.kind() {
        "ParseError" => DsStatus::ParseError,
        "SchemaError" | "MixedSchema" | "MissingCorrectness" | "UnexpectedCorrectness" => DsStatus::SchemaError,
        "IoError" => DsStatus::IoError,
        "EmptySet" => DsStatus::EmptySet,
        "EmptyIdPopulation" => DsStatus::EmptyIdPopulation,
        "UnknownChannel" => DsStatus::UnknownChannel,
        "NonFiniteScore" => DsStatus::NonFiniteScore,
        "EmptySide" => DsStatus::EmptySide,
        "InvalidArgument" | "InvalidConfig" | "NonPositiveTemperature" => DsStatus::InvalidArgument,
        _ => DsStatus::Failed,
    }
}

struct Fail(DsStatus, String);

impl From<Error> for Fail {
    fn from(err: Error) -> Self {
        Fail(status_of(&err), err.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DsStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            DsStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            DsStatus::Panic
        }
    }
}

unsafe fn set_ref<'a>(set: *const DsEvalSet) -> Result<&'a EvalSet, Fail> {
    set.as_ref().map(|s| &s.inner).ok_or_else(|| null("set"))
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(DsStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn array<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or NULL after a
/// successful one. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dualscore_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dualscore_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a set with channels `s_id` and `s_ood` from parallel arrays.
///
/// `origin[i]` is `DS_ORIGIN_ID` or `DS_ORIGIN_OOD`; `correct[i]` is read
/// for ID samples only (nonzero = correct).
///
/// # Safety
/// Every array must hold `n` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dualscore_evalset_from_arrays(
    n: usize,
    origin: *const u8,
    correct: *const u8,
    s_id: *const f64,
    s_ood: *const f64,
    out: *mut *mut DsEvalSet,
) -> DsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let origin = array(origin, n, "origin")?;
        let correct = array(correct, n, "correct")?;
        let s_id = array(s_id, n, "s_id")?;
        let s_ood = array(s_ood, n, "s_ood")?;
        let populations = origin
            .iter()
            .zip(correct)
            .enumerate()
            .map(|(i, (&o, &c))| match o {
                DS_ORIGIN_ID if c != 0 => Ok(Population::IdCorrect),
                DS_ORIGIN_ID => Ok(Population::IdWrong),
                DS_ORIGIN_OOD => Ok(Population::Ood),
                other => Err(Fail(
                    DsStatus::InvalidArgument,
                    format!("origin[{i}] = {other}, expected 0 (id) or 1 (ood)"),
                )),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let inner = EvalSet::from_columns(
            (0..n).map(|i| i.to_string()).collect(),
            populations,
            vec![
                (ID_CHANNEL.to_string(), s_id.to_vec()),
                (OOD_CHANNEL.to_string(), s_ood.to_vec()),
            ],
        )?;
        out.write(Box::into_raw(Box::new(DsEvalSet { inner })));
        Ok(())
    })
}

/// Loads a scores CSV (`sample_id,domain,correct,<channels...>`).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dualscore_evalset_load(path: *const c_char, out: *mut *mut DsEvalSet) -> DsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = load_scores(text(path, "path")?)?;
        out.write(Box::into_raw(Box::new(DsEvalSet { inner })));
        Ok(())
    })
}

/// Releases a set. NULL is ignored.
///
/// # Safety
/// `set` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn dualscore_evalset_free(set: *mut DsEvalSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of samples, or 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dualscore_evalset_len(set: *const DsEvalSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.len())
}

/// Number of ID samples, or 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dualscore_evalset_n_id(set: *const DsEvalSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.n_id())
}

/// Number of OOD samples, or 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dualscore_evalset_n_ood(set: *const DsEvalSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.n_ood())
}

unsafe fn sweep(set: *const DsEvalSet, id: *const c_char, ood: *const c_char, t_grid: usize) -> Result<DoubleSweep, Fail> {
    let set = set_ref(set)?;
    let (id, ood) = (text(id, "id_channel")?, text(ood, "ood_channel")?);
    let grid = ThresholdGrid::build(set, id, ood, GridSpec::from_count(t_grid), true)?;
    Ok(DoubleSweep::new(set, id, ood, grid)?)
}

/// DS-F1 over a `t_grid` quantile grid per channel (0 = every distinct
/// value) plus sentinels, with the maximizing pair.
///
/// # Safety
/// `set` must be a live handle, channel names NUL-terminated, out-pointers
/// writable. `tau_id`/`tau_ood` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn dualscore_ds_f1(
    set: *const DsEvalSet,
    id_channel: *const c_char,
    ood_channel: *const c_char,
    t_grid: usize,
    value: *mut f64,
    tau_id: *mut f64,
    tau_ood: *mut f64,
) -> DsStatus {
    guard(|| {
        let best = sweep(set, id_channel, ood_channel, t_grid)?.best_f1();
        write(value, best.value, "value")?;
        if !tau_id.is_null() {
            tau_id.write(best.pair.tau_id);
        }
        if !tau_ood.is_null() {
            tau_ood.write(best.pair.tau_ood);
        }
        Ok(())
    })
}

/// DS-AURC with `k_bins` coverage bins.
///
/// # Safety
/// As for [`dualscore_ds_f1`]; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dualscore_ds_aurc(
    set: *const DsEvalSet,
    id_channel: *const c_char,
    ood_channel: *const c_char,
    t_grid: usize,
    k_bins: usize,
    value: *mut f64,
) -> DsStatus {
    guard(|| {
        let curve = sweep(set, id_channel, ood_channel, t_grid)?.binned_risk(k_bins)?;
        write(value, curve.area(), "value")
    })
}

/// Best single-threshold F1 of one channel and its threshold.
///
/// # Safety
/// `set` must be a live handle, `channel` NUL-terminated, `value` writable;
/// `tau` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn dualscore_single_f1(
    set: *const DsEvalSet,
    channel: *const c_char,
    t_grid: usize,
    value: *mut f64,
    tau: *mut f64,
) -> DsStatus {
    guard(|| {
        let set = set_ref(set)?;
        let channel = text(channel, "channel")?;
        let axis = GridSpec::from_count(t_grid).axis(set.channel(channel)?, true)?;
        let (f1, threshold) = best_f1_single(set, channel, &axis)?;
        write(value, f1, "value")?;
        if !tau.is_null() {
            tau.write(threshold);
        }
        Ok(())
    })
}

/// Single-channel AURC with `k_bins` coverage bins.
///
/// # Safety
/// `set` must be a live handle, `channel` NUL-terminated, `value` writable.
#[no_mangle]
pub unsafe extern "C" fn dualscore_single_aurc(
    set: *const DsEvalSet,
    channel: *const c_char,
    t_grid: usize,
    k_bins: usize,
    value: *mut f64,
) -> DsStatus {
    guard(|| {
        let set = set_ref(set)?;
        let channel = text(channel, "channel")?;
        let axis = GridSpec::from_count(t_grid).axis(set.channel(channel)?, true)?;
        write(value, channel_aurc(set, channel, &axis, k_bins)?, "value")
    })
}

unsafe fn detection(
    set: *const DsEvalSet,
    channel: *const c_char,
    value: *mut f64,
    metric: fn(&[f64], &[f64]) -> dualscore::Result<f64>,
) -> DsStatus {
    guard(|| {
        let (id, ood) = set_ref(set)?.split_channel(text(channel, "channel")?)?;
        write(value, metric(&id, &ood)?, "value")
    })
}

/// AUROC of ID (positive) against OOD on one channel.
///
/// # Safety
/// `set` must be a live handle, `channel` NUL-terminated, `value` writable.
#[no_mangle]
pub unsafe extern "C" fn dualscore_auroc(set: *const DsEvalSet, channel: *const c_char, value: *mut f64) -> DsStatus {
    detection(set, channel, value, auroc)
}

/// OOD acceptance rate at 95% ID recall.
///
/// # Safety
/// As for [`dualscore_auroc`].
#[no_mangle]
pub unsafe extern "C" fn dualscore_fpr_at_95_tpr(
    set: *const DsEvalSet,
    channel: *const c_char,
    value: *mut f64,
) -> DsStatus {
    detection(set, channel, value, fpr_at_95_tpr)
}

/// Average precision with ID as the positive class.
///
/// # Safety
/// As for [`dualscore_auroc`].
#[no_mangle]
pub unsafe extern "C" fn dualscore_aupr(set: *const DsEvalSet, channel: *const c_char, value: *mut f64) -> DsStatus {
    detection(set, channel, value, aupr)
}

/// Maximum softmax probability of one logit vector.
///
/// # Safety
/// `logits` must hold `n_classes` readable values; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dualscore_msp(logits: *const f64, n_classes: usize, value: *mut f64) -> DsStatus {
    guard(|| {
        let z = array(logits, n_classes, "logits")?;
        if z.is_empty() {
            return Err(Fail(DsStatus::InvalidArgument, "n_classes must be positive".into()));
        }
        write(value, msp(z), "value")
    })
}

/// `T * logsumexp(z / T)` of one logit vector.
///
/// # Safety
/// As for [`dualscore_msp`].
#[no_mangle]
pub unsafe extern "C" fn dualscore_energy(
    logits: *const f64,
    n_classes: usize,
    temperature: f64,
    value: *mut f64,
) -> DsStatus {
    guard(|| {
        let z = array(logits, n_classes, "logits")?;
        if z.is_empty() {
            return Err(Fail(DsStatus::InvalidArgument, "n_classes must be positive".into()));
        }
        write(value, energy(z, temperature)?, "value")
    })
}
