//! C interface to `cdregion`.
//!
//! Objects are passed as opaque handles created by `*_from_json` or `*_new`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`CdStatus`]; on failure, [`cd_last_error`] describes the
//! problem. Strings are NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cdregion::channel::{vars, ChannelError, DEFAULT_JOINT_CAP};
use cdregion::config::{ChannelFile, SchemeFile};
use cdregion::estimation::min_distortion;
use cdregion::region::{eliminate, evaluate_bounds, BoundSet, RegionPolytope};
use cdregion::search::{best_rate, SearchConfig, SearchError};
use cdregion::simulator::{run, SimConfig, SimError, SimParams};
use cdregion::{build_joint, validate, ChannelSpec, SchemeSpec};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Malformed JSON, invalid UTF-8, or a channel/scheme/config that fails
    /// validation.
    Invalid = 2,
    /// A tensor, codebook or search space exceeds its cap.
    Capacity = 3,
    /// No feasible result exists.
    Empty = 4,
    /// The caller's buffer is too short; the required length was written.
    BufferTooSmall = 5,
    /// An internal error; the library state is still usable.
    Internal = 6,
}

/// Number of entries in a bound vector.
pub const CD_BOUND_COUNT: usize = 15;

pub struct CdChannel(ChannelSpec);

pub struct CdScheme(SchemeSpec);

pub struct CdRegion {
    bounds: BoundSet,
    polytope: RegionPolytope,
    distortion: f64,
}

/// Summary of one simulation run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CdSimSummary {
    pub n: usize,
    pub trials: usize,
    pub message_errors: usize,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_distortion: f64,
    /// Standard error of `mean_distortion`.
    pub distortion_stderr: f64,
}

/// Best scheme found by a rate search.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CdBestRate {
    pub objective: f64,
    pub rates: [f64; 3],
    pub distortion: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("no interior NUL"));
}

struct Fail(CdStatus, String);

impl Fail {
    fn invalid(m: impl ToString) -> Self {
        Fail(CdStatus::Invalid, m.to_string())
    }
}

impl From<ChannelError> for Fail {
    fn from(e: ChannelError) -> Self {
        match e {
            ChannelError::Capacity { .. } => Fail(CdStatus::Capacity, e.to_string()),
            other => Fail::invalid(other),
        }
    }
}

impl From<cdregion::prob::ProbError> for Fail {
    fn from(e: cdregion::prob::ProbError) -> Self {
        Fail::invalid(e)
    }
}

impl From<cdregion::config::ConfigError> for Fail {
    fn from(e: cdregion::config::ConfigError) -> Self {
        Fail::invalid(e)
    }
}

impl From<SearchError> for Fail {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Channel(c) => c.into(),
            SearchError::Empty { .. } => Fail(CdStatus::Empty, e.to_string()),
            other => Fail::invalid(other),
        }
    }
}

impl From<SimError> for Fail {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Channel(c) => c.into(),
            SimError::Capacity { .. } => Fail(CdStatus::Capacity, e.to_string()),
            other => Fail::invalid(other),
        }
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CdStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CdStatus::Internal
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(CdStatus::NullArgument, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    non_null(p, name)?;
    CStr::from_ptr(p).to_str().map_err(|_| Fail::invalid(format!("`{name}` is not UTF-8")))
}

fn cap_or_default(cap: usize) -> usize {
    if cap == 0 {
        DEFAULT_JOINT_CAP
    } else {
        cap
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a channel document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_channel_from_json(json: *const c_char, out: *mut *mut CdChannel) -> CdStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let spec = ChannelFile::from_json(text(json, "json")?)?.to_spec()?;
        *out = Box::into_raw(Box::new(CdChannel(spec)));
        Ok(())
    })
}

/// # Safety
/// `channel` must be null or a handle from [`cd_channel_from_json`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn cd_channel_free(channel: *mut CdChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Parses a scheme document against `channel`.
///
/// # Safety
/// `channel` must be a live handle, `json` a NUL-terminated string and `out`
/// a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_scheme_from_json(
    channel: *const CdChannel,
    json: *const c_char,
    out: *mut *mut CdScheme,
) -> CdStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        non_null(channel, "channel")?;
        let spec = SchemeFile::from_json(text(json, "json")?)?.to_spec(&(*channel).0)?;
        *out = Box::into_raw(Box::new(CdScheme(spec)));
        Ok(())
    })
}

/// # Safety
/// `scheme` must be null or a live handle from [`cd_scheme_from_json`].
#[no_mangle]
pub unsafe extern "C" fn cd_scheme_free(scheme: *mut CdScheme) {
    if !scheme.is_null() {
        drop(Box::from_raw(scheme));
    }
}

/// Counts the structural violations of a channel/scheme pair; the first one
/// is available through [`cd_last_error`].
///
/// # Safety
/// Handles must be live and `violations` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_validate(
    channel: *const CdChannel,
    scheme: *const CdScheme,
    violations: *mut usize,
) -> CdStatus {
    let mut first = String::new();
    let status = guard(|| {
        non_null(channel, "channel")?;
        non_null(scheme, "scheme")?;
        non_null(violations, "violations")?;
        let v = validate(&(*channel).0, &(*scheme).0);
        *violations = v.len();
        if let Some(x) = v.first() {
            first = x.to_string();
        }
        Ok(())
    });
    if !first.is_empty() {
        set_error(first);
    }
    status
}

/// Evaluates the region of a scheme. `joint_cap` bounds the joint tensor
/// size; zero selects the default.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_region_new(
    channel: *const CdChannel,
    scheme: *const CdScheme,
    joint_cap: usize,
    out: *mut *mut CdRegion,
) -> CdStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        non_null(channel, "channel")?;
        non_null(scheme, "scheme")?;
        let (c, s) = (&(*channel).0, &(*scheme).0);
        let joint = build_joint(c, s, cap_or_default(joint_cap))?;
        let bounds = evaluate_bounds(&joint)?;
        let polytope = eliminate(&bounds);
        let distortion = min_distortion(&joint, c, &vars::OMEGA_Z)?;
        *out = Box::into_raw(Box::new(CdRegion { bounds, polytope, distortion }));
        Ok(())
    })
}

/// # Safety
/// `region` must be null or a live handle from [`cd_region_new`].
#[no_mangle]
pub unsafe extern "C" fn cd_region_free(region: *mut CdRegion) {
    if !region.is_null() {
        drop(Box::from_raw(region));
    }
}

/// Copies the [`CD_BOUND_COUNT`] information bounds, in the order common,
/// feedback1, feedback2, coop1, coop2, coop_sum, private1, private2,
/// private_sum, desc1, desc2, desc_sum, refine1, refine2, refine_sum.
///
/// # Safety
/// `region` must be live and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_region_bounds(region: *const CdRegion, out: *mut f64, len: usize) -> CdStatus {
    guard(|| {
        non_null(region, "region")?;
        non_null(out, "out")?;
        if len < CD_BOUND_COUNT {
            return Err(Fail(CdStatus::BufferTooSmall, format!("need {CD_BOUND_COUNT} entries")));
        }
        ptr::copy_nonoverlapping((*region).bounds.as_array().as_ptr(), out, CD_BOUND_COUNT);
        Ok(())
    })
}

/// Expected distortion of the optimal estimator from all auxiliaries and
/// the receiver output.
///
/// # Safety
/// `region` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_region_distortion(region: *const CdRegion, out: *mut f64) -> CdStatus {
    guard(|| {
        non_null(region, "region")?;
        non_null(out, "out")?;
        *out = (*region).distortion;
        Ok(())
    })
}

/// Writes the polytope vertices as `(R0, R1, R2)` triples. `count` receives
/// the number of vertices; when `len < 3 * count` nothing else is written
/// and [`CdStatus::BufferTooSmall`] is returned. `out` may be null to query
/// the count.
///
/// # Safety
/// `region` must be live, `count` writable and `out` null or sized `len`.
#[no_mangle]
pub unsafe extern "C" fn cd_region_vertices(
    region: *const CdRegion,
    out: *mut f64,
    len: usize,
    count: *mut usize,
) -> CdStatus {
    guard(|| {
        non_null(region, "region")?;
        non_null(count, "count")?;
        let v = (*region).polytope.vertices();
        *count = v.len();
        if out.is_null() {
            return Ok(());
        }
        if len < 3 * v.len() {
            return Err(Fail(CdStatus::BufferTooSmall, format!("need {} entries", 3 * v.len())));
        }
        for (k, t) in v.iter().enumerate() {
            ptr::copy_nonoverlapping(t.as_ptr(), out.add(3 * k), 3);
        }
        Ok(())
    })
}

/// Whether `(r0, r1, r2)` lies in the region.
///
/// # Safety
/// `region` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_region_contains(
    region: *const CdRegion,
    r0: f64,
    r1: f64,
    r2: f64,
    out: *mut bool,
) -> CdStatus {
    guard(|| {
        non_null(region, "region")?;
        non_null(out, "out")?;
        *out = (*region).polytope.contains([r0, r1, r2]);
        Ok(())
    })
}

/// Minimal expected distortion estimating the state from `count` named
/// variables. `joint_cap` of zero selects the default.
///
/// # Safety
/// Handles must be live, `names` must point to `count` NUL-terminated
/// strings and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cd_min_distortion(
    channel: *const CdChannel,
    scheme: *const CdScheme,
    names: *const *const c_char,
    count: usize,
    joint_cap: usize,
    out: *mut f64,
) -> CdStatus {
    guard(|| {
        non_null(channel, "channel")?;
        non_null(scheme, "scheme")?;
        non_null(out, "out")?;
        if count > 0 {
            non_null(names, "names")?;
        }
        let mut cond = Vec::with_capacity(count);
        for k in 0..count {
            cond.push(text(*names.add(k), "names")?.to_string());
        }
        let (c, s) = (&(*channel).0, &(*scheme).0);
        let joint = build_joint(c, s, cap_or_default(joint_cap))?;
        *out = min_distortion(&joint, c, &cond)?;
        Ok(())
    })
}

/// Searches for the best scheme on `channel` under the JSON search settings
/// (an empty object selects the defaults).
///
/// # Safety
/// `channel` must be live, `config_json` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_best_rate(
    channel: *const CdChannel,
    config_json: *const c_char,
    out: *mut CdBestRate,
) -> CdStatus {
    guard(|| {
        non_null(channel, "channel")?;
        non_null(out, "out")?;
        let config: SearchConfig = serde_json::from_str(text(config_json, "config_json")?).map_err(Fail::invalid)?;
        let best = best_rate(&(*channel).0, &config)?;
        *out = CdBestRate { objective: best.objective, rates: best.rates.as_array(), distortion: best.distortion };
        Ok(())
    })
}

/// Runs the coding simulator with the JSON simulation settings.
///
/// # Safety
/// Handles must be live, `params_json` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cd_simulate(
    channel: *const CdChannel,
    scheme: *const CdScheme,
    params_json: *const c_char,
    out: *mut CdSimSummary,
) -> CdStatus {
    guard(|| {
        non_null(channel, "channel")?;
        non_null(scheme, "scheme")?;
        non_null(out, "out")?;
        let params: SimParams = serde_json::from_str(text(params_json, "params_json")?).map_err(Fail::invalid)?;
        let config = SimConfig { channel: (*channel).0.clone(), scheme: (*scheme).0.clone(), params };
        let r = run(&config)?;
        *out = CdSimSummary {
            n: r.n,
            trials: r.trials,
            message_errors: r.message_errors,
            error_rate: r.error_rate,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            mean_distortion: r.mean_distortion,
            distortion_stderr: r.stderr,
        };
        Ok(())
    })
}
