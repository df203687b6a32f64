//! C ABI over `scb-core`.
//!
//! Every fallible function returns an [`ScbStatus`]; on failure a message is
//! available from [`scb_last_error`] on the same thread. Objects are opaque
//! handles created by `*_new` style functions and released with the matching
//! `*_free`. Complex data crosses the boundary as separate real and
//! imaginary `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use scb_core::config::{self, Mode, RunConfig};
use scb_core::rx::RangeProfile;
use scb_core::zc::{self, CodeSet, ZcParams};
use scb_core::{Complex64, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScbStatus {
    Ok = 0,
    NullPointer = 1,
    /// An argument violates a documented precondition.
    InvalidArgument = 2,
    /// A configuration could not be parsed.
    Config = 3,
    /// Output buffer too small; the required length is reported where possible.
    BufferTooSmall = 4,
    Io = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

/// Receive mode selector for [`scb_simulate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScbMode {
    Multi = 0,
    Single = 1,
    Subcarrier = 2,
}

impl From<ScbMode> for Mode {
    fn from(m: ScbMode) -> Self {
        match m {
            ScbMode::Multi => Mode::Multi,
            ScbMode::Single => Mode::Single,
            ScbMode::Subcarrier => Mode::Subcarrier,
        }
    }
}

/// Opaque set of spectrally placed Zadoff-Chu codes.
pub struct ScbCodeSet(CodeSet);

/// Opaque run configuration.
pub struct ScbConfig(RunConfig);

/// Opaque per-beam range profiles produced by a simulation.
pub struct ScbProfiles(Vec<RangeProfile>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: ScbStatus, msg: impl Into<String>) -> ScbStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> ScbStatus {
    let status = match e {
        Error::Config(_) => ScbStatus::Config,
        Error::Io(_) | Error::Csv(_) => ScbStatus::Io,
        _ => ScbStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> ScbStatus) -> ScbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(ScbStatus::Internal, "internal panic"),
    }
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, ScbStatus> {
    if s.is_null() {
        return Err(fail(ScbStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(ScbStatus::InvalidArgument, "string is not valid UTF-8"))
}

unsafe fn write_complex(values: &[Complex64], re: *mut f64, im: *mut f64, cap: usize) -> ScbStatus {
    if re.is_null() || im.is_null() {
        return fail(ScbStatus::NullPointer, "null output buffer");
    }
    if cap < values.len() {
        return fail(
            ScbStatus::BufferTooSmall,
            format!("need {} elements, buffer holds {cap}", values.len()),
        );
    }
    for (i, v) in values.iter().enumerate() {
        *re.add(i) = v.re;
        *im.add(i) = v.im;
    }
    ScbStatus::Ok
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn scb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn scb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Writes the `n_zc` samples of the Zadoff-Chu sequence with seed `q`.
///
/// # Safety
/// `re` and `im` must point to at least `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn scb_zc_generate(
    q: u64,
    n_zc: u64,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> ScbStatus {
    guard(|| match ZcParams::new(q, n_zc) {
        Ok(p) => write_complex(zc::generate_zc(p).samples(), re, im, cap),
        Err(e) => from_error(e),
    })
}

/// Largest aperiodic autocorrelation side peak over the zero-lag peak.
///
/// # Safety
/// `re` and `im` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scb_side_peak_ratio(
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut f64,
) -> ScbStatus {
    guard(|| {
        if re.is_null() || im.is_null() || out.is_null() {
            return fail(ScbStatus::NullPointer, "null pointer argument");
        }
        let re = std::slice::from_raw_parts(re, len);
        let im = std::slice::from_raw_parts(im, len);
        let s: Vec<Complex64> = re
            .iter()
            .zip(im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        match zc::side_peak_ratio(&s) {
            Ok(r) => {
                *out = r;
                ScbStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Builds `n_codes` full-band codes of prime length `n_zc` in `n` bins.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle to be
/// released with [`scb_code_set_free`].
#[no_mangle]
pub unsafe extern "C" fn scb_code_set_new(
    n_zc: u64,
    n_codes: usize,
    n: usize,
    out: *mut *mut ScbCodeSet,
) -> ScbStatus {
    guard(|| {
        if out.is_null() {
            return fail(ScbStatus::NullPointer, "null output handle");
        }
        match zc::build_code_set(n_zc, n_codes, n) {
            Ok(set) => {
                *out = Box::into_raw(Box::new(ScbCodeSet(set)));
                ScbStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of codes in the set (0 for a null handle).
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scb_code_set_len(set: *const ScbCodeSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// Seed of code `index`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scb_code_set_seed(
    set: *const ScbCodeSet,
    index: usize,
    out: *mut u64,
) -> ScbStatus {
    guard(|| {
        let (Some(set), false) = (set.as_ref(), out.is_null()) else {
            return fail(ScbStatus::NullPointer, "null pointer argument");
        };
        match set.0.codes.get(index) {
            Some(c) => {
                *out = c.seed;
                ScbStatus::Ok
            }
            None => fail(
                ScbStatus::InvalidArgument,
                format!("code index {index} out of range"),
            ),
        }
    })
}

/// Copies the `n` time-domain samples of code `index`.
///
/// # Safety
/// `set` must be a live handle; `re` and `im` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn scb_code_set_samples(
    set: *const ScbCodeSet,
    index: usize,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> ScbStatus {
    guard(|| {
        let Some(set) = set.as_ref() else {
            return fail(ScbStatus::NullPointer, "null code set");
        };
        match set.0.codes.get(index) {
            Some(c) => write_complex(&c.samples, re, im, cap),
            None => fail(
                ScbStatus::InvalidArgument,
                format!("code index {index} out of range"),
            ),
        }
    })
}

/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn scb_code_set_free(set: *mut ScbCodeSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Parses a TOML run configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scb_config_from_toml(
    toml: *const c_char,
    out: *mut *mut ScbConfig,
) -> ScbStatus {
    guard(|| {
        if out.is_null() {
            return fail(ScbStatus::NullPointer, "null output handle");
        }
        let src = match c_str(toml) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match RunConfig::from_toml(src) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(ScbConfig(cfg)));
                ScbStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Loads one of the shipped presets by name (for example "figure8").
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scb_config_preset(
    name: *const c_char,
    out: *mut *mut ScbConfig,
) -> ScbStatus {
    guard(|| {
        if out.is_null() {
            return fail(ScbStatus::NullPointer, "null output handle");
        }
        let name = match c_str(name) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match config::preset(name) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(ScbConfig(cfg)));
                ScbStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Overrides the noise seed of a configuration.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn scb_config_set_noise_seed(cfg: *mut ScbConfig, seed: u64) -> ScbStatus {
    guard(|| match cfg.as_mut() {
        Some(c) => {
            c.0.scenario.noise_seed = seed;
            ScbStatus::Ok
        }
        None => fail(ScbStatus::NullPointer, "null config"),
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn scb_config_free(cfg: *mut ScbConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs transmit, propagation and receive processing for the configured
/// system and scenario, producing one range profile per beam.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scb_simulate(
    cfg: *const ScbConfig,
    mode: ScbMode,
    out: *mut *mut ScbProfiles,
) -> ScbStatus {
    guard(|| {
        let (Some(cfg), false) = (cfg.as_ref(), out.is_null()) else {
            return fail(ScbStatus::NullPointer, "null pointer argument");
        };
        let sys = &cfg.0.system;
        let result = cfg.0.scenario.scenario(sys.k_window).and_then(|s| {
            s.check_window(sys.n, sys.fs_hz)?;
            scb_core::experiments::run_mode(sys, &s, mode.into(), None)
        });
        match result {
            Ok(p) => {
                *out = Box::into_raw(Box::new(ScbProfiles(p)));
                ScbStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of beams (0 for a null handle).
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scb_profiles_count(p: *const ScbProfiles) -> usize {
    p.as_ref().map_or(0, |p| p.0.len())
}

/// Bins per profile (0 for a null or empty handle).
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scb_profiles_bins(p: *const ScbProfiles) -> usize {
    p.as_ref()
        .and_then(|p| p.0.first())
        .map_or(0, |p| p.magnitudes.len())
}

/// Metres per profile bin (0 for a null or empty handle).
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scb_profiles_bin_to_meters(p: *const ScbProfiles) -> f64 {
    p.as_ref()
        .and_then(|p| p.0.first())
        .map_or(0.0, |p| p.bin_to_meters)
}

/// Copies the magnitudes of beam `index` and reports its steering angle.
///
/// # Safety
/// `p` must be a live handle, `theta_deg` writable (or null) and
/// `magnitudes` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn scb_profiles_get(
    p: *const ScbProfiles,
    index: usize,
    theta_deg: *mut f64,
    magnitudes: *mut f64,
    cap: usize,
) -> ScbStatus {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), magnitudes.is_null()) else {
            return fail(ScbStatus::NullPointer, "null pointer argument");
        };
        let Some(profile) = p.0.get(index) else {
            return fail(
                ScbStatus::InvalidArgument,
                format!("beam index {index} out of range"),
            );
        };
        if cap < profile.magnitudes.len() {
            return fail(
                ScbStatus::BufferTooSmall,
                format!(
                    "need {} elements, buffer holds {cap}",
                    profile.magnitudes.len()
                ),
            );
        }
        ptr::copy_nonoverlapping(
            profile.magnitudes.as_ptr(),
            magnitudes,
            profile.magnitudes.len(),
        );
        if !theta_deg.is_null() {
            *theta_deg = profile.beam_theta;
        }
        ScbStatus::Ok
    })
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn scb_profiles_free(p: *mut ScbProfiles) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}
