//! C ABI over the `ebmc` library.
//!
//! Instances live behind an opaque `EbmcInstance` handle. Every fallible call
//! returns an `EbmcStatus`; on failure `ebmc_last_error` describes the cause
//! for the calling thread. Profiles cross the boundary as one byte per lake
//! (nonzero = selected).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use ebmc::dynamics::{self, DynamicsConfig, RunRecord};
use ebmc::game::{self, PneCertificate};
use ebmc::instance_io::{self, GenParams};
use ebmc::{Error, Instance, StrategyProfile, UtilityKind};

/// Opaque instance handle.
pub struct EbmcInstance {
    inner: Instance,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbmcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidInstance = 3,
    FormatError = 4,
    IoError = 5,
    TooLarge = 6,
    SolverError = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbmcUtilityKind {
    Selfish = 0,
    Altruistic = 1,
}

impl From<EbmcUtilityKind> for UtilityKind {
    fn from(k: EbmcUtilityKind) -> Self {
        match k {
            EbmcUtilityKind::Selfish => UtilityKind::Selfish,
            EbmcUtilityKind::Altruistic => UtilityKind::Altruistic,
        }
    }
}

/// Settings for the equilibrium searches. Fill with `ebmc_run_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EbmcRunOptions {
    pub t_max: usize,
    pub init_max: usize,
    pub seed: u64,
    /// Seconds for ZR or the bounded model in BR-plus; zero, negative or
    /// non-finite means no limit.
    pub time_limit_s: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EbmcRunResult {
    pub pne_found: bool,
    /// Potential of the returned equilibrium; 0 when none was found.
    pub phi: i64,
    pub rounds: usize,
    pub cycle_detected: bool,
    pub cuts_added: usize,
    pub timed_out: bool,
    pub elapsed_s: f64,
}

/// Outcome of an equilibrium check.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EbmcSeparation {
    pub is_pne: bool,
    /// First county with a strictly improving move (valid when `!is_pne`).
    pub county: usize,
    pub gain: i64,
}

struct Failure(EbmcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::PartitionViolation(_) | Error::InvalidInstance(_) => EbmcStatus::InvalidInstance,
            Error::InvalidParams(_) => EbmcStatus::InvalidArgument,
            Error::InvalidModel(_) => EbmcStatus::SolverError,
            Error::TooLarge { .. } => EbmcStatus::TooLarge,
            Error::Format { .. } => EbmcStatus::FormatError,
            Error::Io(_) => EbmcStatus::IoError,
        };
        Failure(status, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Outcome>(f: F) -> EbmcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EbmcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {}", msg));
            EbmcStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(EbmcStatus::NullPointer, "null pointer argument".into())
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure(EbmcStatus::InvalidArgument, msg.into())
}

unsafe fn instance_ref<'a>(p: *const EbmcInstance) -> Result<&'a Instance, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or_else(null)
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| bad("string argument is not valid UTF-8"))
}

unsafe fn profile_arg(
    inst: &Instance,
    flags: *const u8,
    len: usize,
) -> Result<Option<StrategyProfile>, Failure> {
    if flags.is_null() {
        return Ok(None);
    }
    if len != inst.num_lakes() {
        return Err(bad(format!(
            "profile has {} entries for {} lakes",
            len,
            inst.num_lakes()
        )));
    }
    let s = std::slice::from_raw_parts(flags, len);
    Ok(Some(StrategyProfile::from_flags(
        s.iter().map(|&b| b != 0).collect(),
    )))
}

unsafe fn required_profile(
    inst: &Instance,
    flags: *const u8,
    len: usize,
) -> Result<StrategyProfile, Failure> {
    profile_arg(inst, flags, len)?.ok_or_else(null)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn publish(inst: Instance, out: *mut *mut EbmcInstance) -> Outcome {
    write_out(out, Box::into_raw(Box::new(EbmcInstance { inner: inst })))
}

/// Message of the calling thread's last failure, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ebmc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ebmc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebmc_instance_from_json(
    json: *const c_char,
    out: *mut *mut EbmcInstance,
) -> EbmcStatus {
    guard(|| publish(instance_io::from_json_str(str_arg(json)?)?, out))
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebmc_instance_load(
    path: *const c_char,
    out: *mut *mut EbmcInstance,
) -> EbmcStatus {
    guard(|| publish(instance_io::load_instance(str_arg(path)?)?, out))
}

/// Bundled instance: "fig2", "k1ce" or "k2ce".
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebmc_instance_builtin(
    name: *const c_char,
    out: *mut *mut EbmcInstance,
) -> EbmcStatus {
    guard(|| {
        let name = str_arg(name)?;
        let inst = ebmc::fixtures::by_name(name)
            .ok_or_else(|| bad(format!("no bundled instance named `{}`", name)))?;
        publish(inst, out)
    })
}

/// Random instance with the default deletion ratio and traffic range.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebmc_instance_generate(
    num_counties: usize,
    lakes_per_county: usize,
    num_ais_types: usize,
    budget_ratio: f64,
    seed: u64,
    out: *mut *mut EbmcInstance,
) -> EbmcStatus {
    guard(|| {
        let p = GenParams::new(num_counties, lakes_per_county, num_ais_types, budget_ratio, seed);
        publish(instance_io::generate(&p)?, out)
    })
}

/// # Safety
/// `inst` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ebmc_instance_free(inst: *mut EbmcInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// JSON text of the instance; release with `ebmc_string_free`.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebmc_instance_to_json(
    inst: *const EbmcInstance,
    out: *mut *mut c_char,
) -> EbmcStatus {
    guard(|| {
        let text = instance_io::to_json_string(instance_ref(inst)?);
        let c = CString::new(text).map_err(|_| bad("instance JSON contains NUL"))?;
        write_out(out, c.into_raw())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ebmc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ebmc_instance_num_lakes(inst: *const EbmcInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.num_lakes())
}

/// # Safety
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ebmc_instance_num_counties(inst: *const EbmcInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.num_counties())
}

/// # Safety
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ebmc_instance_num_arcs(inst: *const EbmcInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.num_arcs())
}

/// Budget of county `county`.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ebmc_county_budget(
    inst: *const EbmcInstance,
    county: usize,
    out: *mut usize,
) -> EbmcStatus {
    guard(|| {
        let inst = instance_ref(inst)?;
        if county >= inst.num_counties() {
            return Err(bad(format!("county {} out of range", county)));
        }
        write_out(out, inst.county(county).budget)
    })
}

/// Total covered weight of a profile.
///
/// # Safety
/// `profile` must point to `len` bytes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ebmc_phi(
    inst: *const EbmcInstance,
    profile: *const u8,
    len: usize,
    out: *mut i64,
) -> EbmcStatus {
    guard(|| {
        let inst = instance_ref(inst)?;
        let x = required_profile(inst, profile, len)?;
        write_out(out, game::phi(inst, &x))
    })
}

/// Utility of county `county` under a profile.
///
/// # Safety
/// `profile` must point to `len` bytes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ebmc_utility(
    inst: *const EbmcInstance,
    kind: EbmcUtilityKind,
    county: usize,
    profile: *const u8,
    len: usize,
    out: *mut i64,
) -> EbmcStatus {
    guard(|| {
        let inst = instance_ref(inst)?;
        if county >= inst.num_counties() {
            return Err(bad(format!("county {} out of range", county)));
        }
        let x = required_profile(inst, profile, len)?;
        write_out(out, game::utility(inst, kind.into(), county, &x))
    })
}

/// Equilibrium check of a budget-feasible profile.
///
/// # Safety
/// `profile` must point to `len` bytes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ebmc_check_separation(
    inst: *const EbmcInstance,
    kind: EbmcUtilityKind,
    profile: *const u8,
    len: usize,
    out: *mut EbmcSeparation,
) -> EbmcStatus {
    guard(|| {
        let inst = instance_ref(inst)?;
        let x = required_profile(inst, profile, len)?;
        if !x.is_feasible(inst) {
            return Err(bad("profile exceeds a county budget"));
        }
        let sep = match game::check_separation(inst, kind.into(), &x)? {
            PneCertificate::IsPne => EbmcSeparation {
                is_pne: true,
                ..Default::default()
            },
            PneCertificate::Deviation(d) => EbmcSeparation {
                is_pne: false,
                county: d.county,
                gain: d.gain,
            },
        };
        write_out(out, sep)
    })
}

#[no_mangle]
pub extern "C" fn ebmc_run_options_default() -> EbmcRunOptions {
    let d = DynamicsConfig::default();
    EbmcRunOptions {
        t_max: d.t_max,
        init_max: d.init_max,
        seed: d.seed,
        time_limit_s: 0.0,
    }
}

fn config_from(opts: Option<&EbmcRunOptions>) -> DynamicsConfig {
    let o = opts.copied().unwrap_or_else(|| ebmc_run_options_default());
    let limit = (o.time_limit_s > 0.0)
        .then(|| Duration::try_from_secs_f64(o.time_limit_s).ok())
        .flatten();
    DynamicsConfig {
        t_max: o.t_max,
        init_max: o.init_max,
        seed: o.seed,
        zr_time_limit: limit,
        bounded_time_limit: limit,
        zr_cut_all_deviations: false,
    }
}

unsafe fn report(
    inst: &Instance,
    rec: &RunRecord,
    out: *mut EbmcRunResult,
    profile_out: *mut u8,
) -> Outcome {
    let res = EbmcRunResult {
        pne_found: rec.pne_found,
        phi: rec.phi.unwrap_or(0),
        rounds: rec.rounds,
        cycle_detected: rec.cycle_detected,
        cuts_added: rec.cuts_added,
        timed_out: rec.timed_out,
        elapsed_s: rec.elapsed.as_secs_f64(),
    };
    write_out(out, res)?;
    if !profile_out.is_null() {
        let dst = std::slice::from_raw_parts_mut(profile_out, inst.num_lakes());
        dst.fill(0);
        if let Some(p) = &rec.profile {
            for i in p.selected() {
                dst[i] = 1;
            }
        }
    }
    Ok(())
}

/// Which search `run` dispatches to.
#[derive(Clone, Copy)]
enum Search {
    Brs,
    BrPlus,
    Zr,
}

unsafe fn run(
    search: Search,
    inst: *const EbmcInstance,
    init: *const u8,
    len: usize,
    opts: *const EbmcRunOptions,
    out: *mut EbmcRunResult,
    profile_out: *mut u8,
) -> EbmcStatus {
    guard(|| {
        let inst = instance_ref(inst)?;
        let start = profile_arg(inst, init, len)?;
        let config = config_from(opts.as_ref());
        let zero = || StrategyProfile::zeros(inst.num_lakes());
        let rec = match search {
            Search::Brs => dynamics::brs_free(inst, &start.unwrap_or_else(zero), &config)?.record,
            Search::BrPlus => {
                dynamics::br_plus(inst, &start.unwrap_or_else(zero), &config)?.record
            }
            Search::Zr => dynamics::zr(inst, start.as_ref(), &config)?.record,
        };
        report(inst, &rec, out, profile_out)
    })
}

/// Best-response dynamics from `init` (NULL for all zeros). When not NULL,
/// `profile_out` receives `num_lakes` bytes of the equilibrium found.
///
/// # Safety
/// `init` must be NULL or point to `len` bytes; `opts` NULL or valid; `out`
/// valid; `profile_out` NULL or writable for `num_lakes` bytes.
#[no_mangle]
pub unsafe extern "C" fn ebmc_brs(
    inst: *const EbmcInstance,
    init: *const u8,
    len: usize,
    opts: *const EbmcRunOptions,
    out: *mut EbmcRunResult,
    profile_out: *mut u8,
) -> EbmcStatus {
    run(Search::Brs, inst, init, len, opts, out, profile_out)
}

/// BR-plus from `init` (NULL for all zeros).
///
/// # Safety
/// Same contract as `ebmc_brs`.
#[no_mangle]
pub unsafe extern "C" fn ebmc_br_plus(
    inst: *const EbmcInstance,
    init: *const u8,
    len: usize,
    opts: *const EbmcRunOptions,
    out: *mut EbmcRunResult,
    profile_out: *mut u8,
) -> EbmcStatus {
    run(Search::BrPlus, inst, init, len, opts, out, profile_out)
}

/// Cutting-plane search for the best equilibrium; `warm_start` may be NULL.
///
/// # Safety
/// Same contract as `ebmc_brs`.
#[no_mangle]
pub unsafe extern "C" fn ebmc_zr(
    inst: *const EbmcInstance,
    warm_start: *const u8,
    len: usize,
    opts: *const EbmcRunOptions,
    out: *mut EbmcRunResult,
    profile_out: *mut u8,
) -> EbmcStatus {
    run(Search::Zr, inst, warm_start, len, opts, out, profile_out)
}
