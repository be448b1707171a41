//! C ABI for geodiff.
//!
//! Every fallible function returns a [`GeodiffStatus`]; on failure the
//! message is available from [`geodiff_last_error_message`] on the same
//! thread. Handles and strings returned to the caller are released with the
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use geodiff::availability::{classify_page, InstallMarkers, Verdict};
use geodiff::features::{extract_features, FeatureSet, LibraryPrefixCatalog};
use geodiff::geotwins::{self, Thresholds};
use geodiff::json::to_canonical_string;
use geodiff::similarity::{self, Feature, SimilarityReport};
use geodiff::stats;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodiffStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidParameter = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodiffVerdict {
    Available = 0,
    Unavailable = 1,
    Delisted = 2,
}

impl From<Verdict> for GeodiffVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Available => GeodiffVerdict::Available,
            Verdict::Unavailable => GeodiffVerdict::Unavailable,
            Verdict::Delisted => GeodiffVerdict::Delisted,
        }
    }
}

/// Opaque feature set of one APK.
pub struct GeodiffFeatureSet {
    inner: FeatureSet,
}

/// Opaque similarity report of one pair.
pub struct GeodiffReport {
    inner: SimilarityReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(GeodiffStatus, String);

impl Failure {
    fn new(status: GeodiffStatus, err: impl std::fmt::Display) -> Self {
        Failure(status, err.to_string())
    }
}

fn error_chain(err: &dyn std::error::Error) -> String {
    let mut text = err.to_string();
    let mut source = err.source();
    while let Some(s) = source {
        text.push_str(": ");
        text.push_str(&s.to_string());
        source = s.source();
    }
    text
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting failures and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GeodiffStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GeodiffStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            GeodiffStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(GeodiffStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(GeodiffStatus::InvalidUtf8, e))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(GeodiffStatus::NullArgument, "null handle"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(GeodiffStatus::NullArgument, "null output pointer"));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure::new(GeodiffStatus::Parse, e))
}

/// Message of the last failed call on this thread, or NULL. Free with
/// [`geodiff_string_free`].
#[no_mangle]
pub extern "C" fn geodiff_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn geodiff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Opens an APK and extracts its features with the bundled library catalog.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodiff_features_from_apk(
    path: *const c_char,
    out: *mut *mut GeodiffFeatureSet,
) -> GeodiffStatus {
    guard(|| {
        let path = str_arg(path)?;
        let archive = geodiff::open_apk(Path::new(path)).map_err(|e| {
            let status = match e {
                geodiff::ApkError::Io { .. } => GeodiffStatus::Io,
                _ => GeodiffStatus::Parse,
            };
            Failure(status, error_chain(&e))
        })?;
        let inner = extract_features(&archive, &LibraryPrefixCatalog::bundled());
        write_out(out, Box::into_raw(Box::new(GeodiffFeatureSet { inner })))
    })
}

/// Parses a feature set from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodiff_features_from_json(
    json: *const c_char,
    out: *mut *mut GeodiffFeatureSet,
) -> GeodiffStatus {
    guard(|| {
        let inner: FeatureSet =
            serde_json::from_str(str_arg(json)?).map_err(|e| Failure::new(GeodiffStatus::Parse, e))?;
        write_out(out, Box::into_raw(Box::new(GeodiffFeatureSet { inner })))
    })
}

/// Canonical JSON of a feature set.
///
/// # Safety
/// `features` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodiff_features_to_json(
    features: *const GeodiffFeatureSet,
    out: *mut *mut c_char,
) -> GeodiffStatus {
    guard(|| {
        let f = ref_arg(features)?;
        let text = to_canonical_string(&f.inner).map_err(|e| Failure::new(GeodiffStatus::Parse, e))?;
        write_out(out, into_c_string(text)?)
    })
}

/// # Safety
/// `features` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn geodiff_features_free(features: *mut GeodiffFeatureSet) {
    if !features.is_null() {
        drop(Box::from_raw(features));
    }
}

/// # Safety
/// `left` and `right` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodiff_compare(
    left: *const GeodiffFeatureSet,
    right: *const GeodiffFeatureSet,
    out: *mut *mut GeodiffReport,
) -> GeodiffStatus {
    guard(|| {
        let inner = similarity::compare(&ref_arg(left)?.inner, &ref_arg(right)?.inner);
        write_out(out, Box::into_raw(Box::new(GeodiffReport { inner })))
    })
}

/// Overall score of a report.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodiff_report_overall(report: *const GeodiffReport, out: *mut f64) -> GeodiffStatus {
    guard(|| write_out(out, ref_arg(report)?.inner.overall))
}

/// Score of feature `index`, in the order permissions, components,
/// certificates, third-party libraries, native libraries, URLs, files,
/// smali files.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodiff_report_feature_score(
    report: *const GeodiffReport,
    index: u32,
    out: *mut f64,
) -> GeodiffStatus {
    guard(|| {
        let r = ref_arg(report)?;
        let feature = Feature::ALL
            .get(index as usize)
            .ok_or_else(|| Failure::new(GeodiffStatus::InvalidParameter, format!("no feature {index}")))?;
        let score = r.inner.score(*feature).expect("reports carry every feature");
        write_out(out, score)
    })
}

/// Canonical JSON of a report.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodiff_report_to_json(report: *const GeodiffReport, out: *mut *mut c_char) -> GeodiffStatus {
    guard(|| {
        let text = to_canonical_string(&ref_arg(report)?.inner).map_err(|e| Failure::new(GeodiffStatus::Parse, e))?;
        write_out(out, into_c_string(text)?)
    })
}

/// # Safety
/// `report` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn geodiff_report_free(report: *mut GeodiffReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[no_mangle]
pub extern "C" fn geodiff_hamming(a: u64, b: u64) -> u32 {
    geotwins::hamming(a, b)
}

/// # Safety
/// `a` and `b` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodiff_normalized_levenshtein(
    a: *const c_char,
    b: *const c_char,
    out: *mut f64,
) -> GeodiffStatus {
    guard(|| write_out(out, geotwins::normalized_levenshtein(str_arg(a)?, str_arg(b)?)))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodiff_sample_size(
    population: u64,
    confidence: f64,
    margin: f64,
    proportion: f64,
    out: *mut u64,
) -> GeodiffStatus {
    guard(|| {
        let n = stats::sample_size(population, confidence, margin, proportion)
            .map_err(|e| Failure::new(GeodiffStatus::InvalidParameter, e))?;
        write_out(out, n)
    })
}

/// dHash of an image file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodiff_dhash_file(path: *const c_char, out: *mut u64) -> GeodiffStatus {
    guard(|| {
        let hash = geotwins::dhash_file(Path::new(str_arg(path)?)).map_err(|e| Failure::new(GeodiffStatus::Parse, e))?;
        write_out(out, hash)
    })
}

/// Classifies a store page with the bundled install markers.
///
/// # Safety
/// `body` must point to `len` readable bytes (it may be NULL when `len` is
/// 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodiff_classify_page(
    status: u16,
    body: *const u8,
    len: usize,
    out: *mut GeodiffVerdict,
) -> GeodiffStatus {
    guard(|| {
        let body = match (body.is_null(), len) {
            (_, 0) => &[][..],
            (true, _) => return Err(Failure::new(GeodiffStatus::NullArgument, "null body with non-zero length")),
            (false, n) => std::slice::from_raw_parts(body, n),
        };
        write_out(out, classify_page(status, body, &InstallMarkers::bundled()).verdict.into())
    })
}

/// Mines a JSON-lines catalog file and returns the admitted pairs as JSON
/// lines.
///
/// # Safety
/// `catalog_path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodiff_mine_catalog(
    catalog_path: *const c_char,
    hamming_max: u32,
    nld_max: f64,
    out: *mut *mut c_char,
) -> GeodiffStatus {
    guard(|| {
        let path = Path::new(str_arg(catalog_path)?);
        let catalog = geotwins::load_catalog(path).map_err(|e| {
            let status = match e {
                geotwins::GeoError::Io { .. } => GeodiffStatus::Io,
                _ => GeodiffStatus::Parse,
            };
            Failure(status, error_chain(&e))
        })?;
        let pairs = geotwins::find_candidates(&catalog, Thresholds { hamming_max, nld_max });
        let mut text = String::new();
        for p in &pairs {
            text.push_str(&to_canonical_string(p).map_err(|e| Failure::new(GeodiffStatus::Parse, e))?);
            text.push('\n');
        }
        write_out(out, into_c_string(text)?)
    })
}
