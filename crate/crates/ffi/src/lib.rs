//! C ABI for `rpz`.
//!
//! Every fallible call returns an [`RpzStatus`]; results go through out
//! pointers. Objects are opaque handles released by their `_free` function.
//! The message of the last failure on the calling thread is available from
//! [`rpz_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rpz::ensembles::{sample_polynomial, CoefficientLaw, SeedSpec};
use rpz::mc::{self, ExperimentConfig, ExperimentOutput};
use rpz::profiles::{CoefficientProfile, PhaseClass};
use rpz::roots::{polynomial_zeros, RootConfig, ZeroSet};
use rpz::scaling::{make_window, ScalingWindow};
use rpz::theory::{self, SelfInversiveMoments};
use rpz::{Complex64, Error};

/// Status codes; 0 is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RpzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    MagnitudeOutOfRange = 4,
    DegreeTooSmall = 5,
    Numerical = 6,
    Io = 7,
    Json = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Phase of the zero process near the unit circle.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RpzPhase {
    Liquid = 0,
    WeakCrystalline = 1,
    StrongCrystalline = 2,
}

impl From<PhaseClass> for RpzPhase {
    fn from(p: PhaseClass) -> Self {
        match p {
            PhaseClass::Liquid => RpzPhase::Liquid,
            PhaseClass::WeakCrystalline => RpzPhase::WeakCrystalline,
            PhaseClass::StrongCrystalline => RpzPhase::StrongCrystalline,
        }
    }
}

/// A coefficient profile `b(k) = sigma k^alpha l(k)`.
pub struct RpzProfile(CoefficientProfile);

/// Scaling window `z = r_n exp(u / n + i psi)`.
pub struct RpzWindow(ScalingWindow);

/// Zeros of one sampled polynomial.
pub struct RpzZeroSet(ZeroSet);

/// A finished Monte Carlo run.
pub struct RpzExperiment {
    output: ExperimentOutput,
    summary: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn code(e: &Error) -> RpzStatus {
    match e {
        Error::InvalidInput(_) => RpzStatus::InvalidInput,
        Error::Domain(_) => RpzStatus::Domain,
        Error::MagnitudeOutOfRange(_) => RpzStatus::MagnitudeOutOfRange,
        Error::DegreeTooSmall { .. } => RpzStatus::DegreeTooSmall,
        Error::Numerical(_) => RpzStatus::Numerical,
        Error::Io(_) => RpzStatus::Io,
        Error::Json(_) => RpzStatus::Json,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (RpzStatus, String)>) -> RpzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RpzStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside rpz".into());
            RpzStatus::Panic
        }
    }
}

fn lift<T>(r: rpz::Result<T>) -> Result<T, (RpzStatus, String)> {
    r.map_err(|e| (code(&e), e.to_string()))
}

fn null(what: &str) -> (RpzStatus, String) {
    (RpzStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (RpzStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (RpzStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (RpzStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), (RpzStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rpz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to fit).
/// Returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rpz_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Parses a profile literal such as `alpha=-2,slow=const:1,sigma=1`.
///
/// # Safety
/// `literal` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpz_profile_parse(
    literal: *const c_char,
    out: *mut *mut RpzProfile,
) -> RpzStatus {
    guard(|| {
        let s = str_arg(literal, "literal")?;
        let p: CoefficientProfile = lift(s.parse())?;
        write(out, Box::into_raw(Box::new(RpzProfile(p))), "out")
    })
}

/// # Safety
/// `p` must come from [`rpz_profile_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rpz_profile_free(p: *mut RpzProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live profile handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpz_profile_phase(p: *const RpzProfile, out: *mut RpzPhase) -> RpzStatus {
    guard(|| {
        let p = handle(p, "profile")?;
        write(out, p.0.phase().into(), "out")
    })
}

/// Builds the scaling window at degree `n` and angle `psi` in `[0, 2 pi)`.
///
/// # Safety
/// `p` must be a live profile handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpz_window_new(
    p: *const RpzProfile,
    n: usize,
    psi: f64,
    out: *mut *mut RpzWindow,
) -> RpzStatus {
    guard(|| {
        let p = handle(p, "profile")?;
        let w = lift(make_window(&p.0, n, psi))?;
        write(out, Box::into_raw(Box::new(RpzWindow(w))), "out")
    })
}

/// # Safety
/// `w` must come from [`rpz_window_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rpz_window_free(w: *mut RpzWindow) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Radius `r_n`, normalizer `c_n` and the Lambert-W quantity `a_n`; any out pointer may be null.
///
/// # Safety
/// `w` must be a live window handle.
#[no_mangle]
pub unsafe extern "C" fn rpz_window_params(
    w: *const RpzWindow,
    radius: *mut f64,
    normalizer: *mut f64,
    a_value: *mut f64,
) -> RpzStatus {
    guard(|| {
        let w = &handle(w, "window")?.0;
        for (out, v) in [
            (radius, w.radius),
            (normalizer, w.normalizer),
            (a_value, w.a_value),
        ] {
            if !out.is_null() {
                out.write(v);
            }
        }
        Ok(())
    })
}

/// Maps window coordinates `u` to `z`.
///
/// # Safety
/// `w` must be a live window handle; both out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpz_window_to_z(
    w: *const RpzWindow,
    u_re: f64,
    u_im: f64,
    z_re: *mut f64,
    z_im: *mut f64,
) -> RpzStatus {
    guard(|| {
        let z = handle(w, "window")?.0.to_window(Complex64::new(u_re, u_im));
        write(z_re, z.re, "z_re")?;
        write(z_im, z.im, "z_im")
    })
}

/// Maps `z` back to window coordinates.
///
/// # Safety
/// `w` must be a live window handle; both out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpz_window_to_u(
    w: *const RpzWindow,
    z_re: f64,
    z_im: f64,
    u_re: *mut f64,
    u_im: *mut f64,
) -> RpzStatus {
    guard(|| {
        let u = handle(w, "window")?
            .0
            .from_window(Complex64::new(z_re, z_im));
        write(u_re, u.re, "u_re")?;
        write(u_im, u.im, "u_im")
    })
}

/// Samples `P_n` with coefficient law `law` (e.g. `icn:1`, `rademacher`) and computes its zeros.
///
/// # Safety
/// `p` must be a live profile handle, `law` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rpz_sample_zeros(
    p: *const RpzProfile,
    law: *const c_char,
    n: usize,
    master_seed: u64,
    stream: u64,
    out: *mut *mut RpzZeroSet,
) -> RpzStatus {
    guard(|| {
        let p = handle(p, "profile")?;
        let law: CoefficientLaw = lift(str_arg(law, "law")?.parse())?;
        let poly = lift(sample_polynomial(
            &p.0,
            &law,
            n,
            SeedSpec::new(master_seed, stream),
        ))?;
        let zs = lift(polynomial_zeros(&poly, &RootConfig::default()))?;
        write(out, Box::into_raw(Box::new(RpzZeroSet(zs))), "out")
    })
}

/// # Safety
/// `z` must come from [`rpz_sample_zeros`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rpz_zero_set_free(z: *mut RpzZeroSet) {
    if !z.is_null() {
        drop(Box::from_raw(z));
    }
}

/// Number of zeros, or 0 for a null handle.
///
/// # Safety
/// `z` must be null or a live zero-set handle.
#[no_mangle]
pub unsafe extern "C" fn rpz_zero_set_len(z: *const RpzZeroSet) -> usize {
    z.as_ref().map_or(0, |z| z.0.zeros.len())
}

/// Copies up to `len` zeros into `re` and `im`; `written` receives the count.
///
/// # Safety
/// `z` must be a live handle; `re` and `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rpz_zero_set_copy(
    z: *const RpzZeroSet,
    re: *mut f64,
    im: *mut f64,
    len: usize,
    written: *mut usize,
) -> RpzStatus {
    guard(|| {
        let zs = &handle(z, "zero set")?.0;
        if re.is_null() || im.is_null() {
            return Err(null("output array"));
        }
        let n = zs.zeros.len().min(len);
        for (i, v) in zs.zeros.iter().take(n).enumerate() {
            re.add(i).write(v.re);
            im.add(i).write(v.im);
        }
        if !written.is_null() {
            written.write(n);
        }
        if n < zs.zeros.len() {
            return Err((
                RpzStatus::BufferTooSmall,
                format!("{} zeros, buffer holds {len}", zs.zeros.len()),
            ));
        }
        Ok(())
    })
}

/// Whether every zero met the residual bound.
///
/// # Safety
/// `z` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rpz_zero_set_converged(z: *const RpzZeroSet, out: *mut bool) -> RpzStatus {
    guard(|| {
        let zs = &handle(z, "zero set")?.0;
        write(out, zs.all_converged(), "out")
    })
}

/// Zero intensity of the liquid limit at window coordinate `s`, `alpha > -1/2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpz_rho1(alpha: f64, s: f64, out: *mut f64) -> RpzStatus {
    guard(|| {
        let v = lift(theory::rho1(alpha, Complex64::new(s, 0.0)))?;
        write(out, v, "out")
    })
}

/// Exact expected fraction of zeros of the self-inversive `K_m` on the unit circle.
///
/// # Safety
/// `p` must be a live profile handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rpz_si_fraction(
    p: *const RpzProfile,
    m: usize,
    out: *mut f64,
) -> RpzStatus {
    guard(|| {
        let p = handle(p, "profile")?;
        let mom = lift(SelfInversiveMoments::new(&p.0, m))?;
        write(out, lift(theory::si_fraction_from_moments(&mom))?, "out")
    })
}

/// Runs an experiment from its JSON config on `threads` workers (0 = all cores).
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rpz_experiment_run(
    config_json: *const c_char,
    threads: usize,
    out: *mut *mut RpzExperiment,
) -> RpzStatus {
    guard(|| {
        let cfg = lift(ExperimentConfig::from_json(str_arg(
            config_json,
            "config_json",
        )?))?;
        let output = lift(mc::run_with_threads(&cfg, (threads > 0).then_some(threads)))?;
        let summary = CString::new(lift(output.summary.to_json())?)
            .map_err(|e| (RpzStatus::Json, e.to_string()))?;
        write(
            out,
            Box::into_raw(Box::new(RpzExperiment { output, summary })),
            "out",
        )
    })
}

/// # Safety
/// `e` must come from [`rpz_experiment_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rpz_experiment_free(e: *mut RpzExperiment) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Summary JSON, owned by the handle and valid until it is freed; null for a null handle.
///
/// # Safety
/// `e` must be null or a live experiment handle.
#[no_mangle]
pub unsafe extern "C" fn rpz_experiment_summary(e: *const RpzExperiment) -> *const c_char {
    e.as_ref().map_or(ptr::null(), |e| e.summary.as_ptr())
}

/// Mean, standard error and z-score of the named statistic; `z` is NaN when there is no theory value.
///
/// # Safety
/// `e` must be a live handle, `name` a NUL-terminated string; out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn rpz_experiment_statistic(
    e: *const RpzExperiment,
    name: *const c_char,
    mean: *mut f64,
    se: *mut f64,
    z: *mut f64,
) -> RpzStatus {
    guard(|| {
        let e = handle(e, "experiment")?;
        let name = str_arg(name, "name")?;
        let s = e.output.summary.statistic(name).ok_or_else(|| {
            (
                RpzStatus::InvalidInput,
                format!("no statistic named '{name}'"),
            )
        })?;
        for (out, v) in [(mean, s.mean), (se, s.se), (z, s.z.unwrap_or(f64::NAN))] {
            if !out.is_null() {
                out.write(v);
            }
        }
        Ok(())
    })
}
