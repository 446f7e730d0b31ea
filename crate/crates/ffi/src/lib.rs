//! C ABI over the `twogen` library.
//!
//! Objects cross the boundary as opaque handles owned by the caller and released with the
//! matching `*_free`. Every entry point returns a [`TwogenStatus`]; on failure the message is
//! available from [`twogen_last_error`] on the same thread until the next call.

use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use twogen::field::{FieldElement, FieldError, FieldSpec};
use twogen::geometry::{free_test, Verdict};
use twogen::pipeline::{run_triple, PipelineError, RunConfig, TripleOutcome};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwogenStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    FieldError = 4,
    SearchError = 5,
    PipelineError = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwogenVerdict {
    ProvedFree = 0,
    Inconclusive = 1,
}

/// Run settings.
pub struct TwogenConfig(RunConfig);
/// The field `Q(cos 2pi/p, cos 2pi/q)` with its power basis.
pub struct TwogenField(FieldSpec);
/// Stage counts and survivors of one triple.
pub struct TwogenOutcome(TripleOutcome);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(TwogenStatus, String);

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        Failure(TwogenStatus::FieldError, e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let status = match e {
            PipelineError::Field(_) => TwogenStatus::FieldError,
            PipelineError::Search(_) | PipelineError::Linked(_) => TwogenStatus::SearchError,
            _ => TwogenStatus::PipelineError,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: Option<String>) {
    let c = msg.map(|m| CString::new(m.replace('\0', " ")).expect("interior nuls removed"));
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TwogenStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(None);
            TwogenStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(Some(msg));
            status
        }
        Err(_) => {
            set_error(Some("internal panic".into()));
            TwogenStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(TwogenStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TwogenStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn twogen_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default settings.
#[no_mangle]
pub extern "C" fn twogen_config_new() -> *mut TwogenConfig {
    Box::into_raw(Box::new(TwogenConfig(RunConfig::default())))
}

/// Sets one `key = value` setting; the config is left unchanged when the result is invalid.
///
/// # Safety
/// `cfg` must come from [`twogen_config_new`]; `key` and `value` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn twogen_config_set(cfg: *mut TwogenConfig, key: *const c_char, value: *const c_char) -> TwogenStatus {
    guard(|| {
        let cfg = out_ptr(cfg, "config")?;
        let (key, value) = (text(key, "key")?, text(value, "value")?);
        let bad = |e: twogen::pipeline::ConfigError| Failure(TwogenStatus::InvalidArgument, e.to_string());
        let mut next = cfg.0.clone();
        next.set(key, value).map_err(bad)?;
        next.validate().map_err(bad)?;
        cfg.0 = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from [`twogen_config_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn twogen_config_free(cfg: *mut TwogenConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn twogen_field_new(p: u32, q: u32, out: *mut *mut TwogenField) -> TwogenStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(TwogenField(FieldSpec::new(p, q)?)));
        Ok(())
    })
}

/// Degree of the field over `Q`; 0 for a null handle.
///
/// # Safety
/// `field` must come from [`twogen_field_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn twogen_field_degree(field: *const TwogenField) -> usize {
    field.as_ref().map_or(0, |f| f.0.mu())
}

/// Image of the element with power-basis coordinates `coords[0..len]` at real place `place`.
///
/// # Safety
/// `coords` must point to `len` integers; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn twogen_field_embed(
    field: *const TwogenField,
    coords: *const i64,
    len: usize,
    place: usize,
    out: *mut f64,
) -> TwogenStatus {
    guard(|| {
        let f = &borrow(field, "field")?.0;
        let out = out_ptr(out, "out")?;
        if coords.is_null() {
            return Err(null("coords"));
        }
        if len != f.mu() || place >= f.mu() {
            return Err(Failure(TwogenStatus::OutOfRange, format!("need {} coordinates and place < {}", f.mu(), f.mu())));
        }
        let x = FieldElement(std::slice::from_raw_parts(coords, len).to_vec());
        *out = f.embed(&x, place);
        Ok(())
    })
}

/// # Safety
/// `field` must come from [`twogen_field_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn twogen_field_free(field: *mut TwogenField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Runs one `(p, q, r)` triple through every filter.
///
/// # Safety
/// `cfg` may be null for defaults; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn twogen_run_triple(
    cfg: *const TwogenConfig,
    p: u32,
    q: u32,
    r: u32,
    out: *mut *mut TwogenOutcome,
) -> TwogenStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let default = RunConfig::default();
        let cfg = cfg.as_ref().map_or(&default, |c| &c.0);
        *out = Box::into_raw(Box::new(TwogenOutcome(run_triple(cfg, p, q, r)?)));
        Ok(())
    })
}

/// Count recorded at the named stage.
///
/// # Safety
/// `outcome` must come from [`twogen_run_triple`]; `stage` nul-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn twogen_outcome_stage_count(
    outcome: *const TwogenOutcome,
    stage: *const c_char,
    out: *mut usize,
) -> TwogenStatus {
    guard(|| {
        let o = &borrow(outcome, "outcome")?.0;
        let stage = text(stage, "stage")?;
        *out_ptr(out, "out")? = o
            .count(stage)
            .ok_or_else(|| Failure(TwogenStatus::InvalidArgument, format!("no stage named {stage:?}")))?;
        Ok(())
    })
}

/// Number of non-real survivors; 0 for a null handle.
///
/// # Safety
/// `outcome` must come from [`twogen_run_triple`] or be null.
#[no_mangle]
pub unsafe extern "C" fn twogen_outcome_survivor_count(outcome: *const TwogenOutcome) -> usize {
    outcome.as_ref().map_or(0, |o| o.0.survivors.len())
}

/// Parameter of survivor `index`.
///
/// # Safety
/// `outcome` must come from [`twogen_run_triple`]; `re` and `im` valid.
#[no_mangle]
pub unsafe extern "C" fn twogen_outcome_survivor_gamma(
    outcome: *const TwogenOutcome,
    index: usize,
    re: *mut f64,
    im: *mut f64,
) -> TwogenStatus {
    guard(|| {
        let o = &borrow(outcome, "outcome")?.0;
        let s = o
            .survivors
            .get(index)
            .ok_or_else(|| Failure(TwogenStatus::OutOfRange, format!("survivor {index} of {}", o.survivors.len())))?;
        *out_ptr(re, "re")? = s.gamma.re;
        *out_ptr(im, "im")? = s.gamma.im;
        Ok(())
    })
}

/// Outcome as a JSON document; release with [`twogen_string_free`]. Null on failure.
///
/// # Safety
/// `outcome` must come from [`twogen_run_triple`] or be null.
#[no_mangle]
pub unsafe extern "C" fn twogen_outcome_to_json(outcome: *const TwogenOutcome) -> *mut c_char {
    let mut s = ptr::null_mut();
    guard(|| {
        let o = &borrow(outcome, "outcome")?.0;
        let json = serde_json::to_string(o).map_err(|e| Failure(TwogenStatus::PipelineError, e.to_string()))?;
        s = CString::new(json).expect("JSON has no nul bytes").into_raw();
        Ok(())
    });
    s
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn twogen_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `outcome` must come from [`twogen_run_triple`] or be null.
#[no_mangle]
pub unsafe extern "C" fn twogen_outcome_free(outcome: *mut TwogenOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// Free-product tests up to `max_level` for the pair with parameter `re + i im`.
///
/// # Safety
/// `verdict` and `level` must be valid.
#[no_mangle]
pub unsafe extern "C" fn twogen_free_test(
    p: u32,
    q: u32,
    re: f64,
    im: f64,
    max_level: u8,
    verdict: *mut TwogenVerdict,
    level: *mut u8,
) -> TwogenStatus {
    guard(|| {
        if !(re.is_finite() && im.is_finite()) || p < 2 || q < 2 {
            return Err(Failure(TwogenStatus::InvalidArgument, "orders must be >= 2 and gamma finite".into()));
        }
        let o = free_test(p, q, Complex64::new(re, im), max_level);
        *out_ptr(verdict, "verdict")? = match o.verdict {
            Verdict::ProvedFree => TwogenVerdict::ProvedFree,
            Verdict::Inconclusive => TwogenVerdict::Inconclusive,
        };
        *out_ptr(level, "level")? = o.level;
        Ok(())
    })
}
