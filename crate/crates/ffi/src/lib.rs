//! C ABI over the pairscat library.
//!
//! Conventions:
//! - Every fallible function returns a `PairscatStatus`; results come back
//!   through out-pointers that are written only on success.
//! - On failure the thread-local last error holds a message, readable with
//!   `pairscat_last_error_message` until the next failing call on the
//!   same thread.
//! - Handles (`PairscatTmx`, `PairscatAmplitudes`) are opaque; free them with
//!   the matching `*_free` function. Freeing NULL is a no-op.
//! - Panics never cross the boundary; they surface as `PAIRSCAT_STATUS_PANIC`.
//!
//! Units are cm⁻¹, Å and radians; cross sections are in Å².

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use pairscat::basis::{CollisionSpec, MolState};
use pairscat::constants::Constants;
use pairscat::entangle::{decompose_product, ProductPrep};
use pairscat::tmx::{synthesize_unitary, SynthOptions, TMatrixSet};
use pairscat::xsec::{amplitude_set, control_metric, AmplitudeSet, FinalChannel, InitialSpec, Route};
use pairscat::Error;

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PairscatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Numerical = 4,
    Config = 5,
    Parse = 6,
    Io = 7,
    MissingEntries = 8,
    Invariant = 9,
    Panic = 10,
}

impl From<&Error> for PairscatStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => PairscatStatus::Domain,
            Error::Numerical(_) => PairscatStatus::Numerical,
            Error::Config(_) => PairscatStatus::Config,
            Error::Parse { .. } => PairscatStatus::Parse,
            Error::Io { .. } => PairscatStatus::Io,
            Error::MissingEntries(_) => PairscatStatus::MissingEntries,
            Error::Invariant(_) => PairscatStatus::Invariant,
        }
    }
}

/// Single-molecule state |j m v⟩.
#[repr(C)]
#[derive(Copy, Clone, Debug)]
pub struct PairscatState {
    pub j: i32,
    pub m: i32,
    pub v: i32,
}

/// Final molecule-pair levels (j1 v1)(j2 v2); projections are summed.
#[repr(C)]
#[derive(Copy, Clone, Debug)]
pub struct PairscatFinal {
    pub j1: i32,
    pub v1: i32,
    pub j2: i32,
    pub v2: i32,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PairscatInitialKind {
    /// (|ab⟩ + |ba⟩)/√2
    Plus = 0,
    /// (|ab⟩ − |ba⟩)/√2
    Minus = 1,
    /// The unentangled pair |ab⟩.
    Pair = 2,
    /// cos α|ab⟩ + e^{iβ} sin α|ba⟩; uses `alpha` and `beta`.
    Entangled = 3,
}

#[repr(C)]
#[derive(Copy, Clone, Debug)]
pub struct PairscatInitial {
    pub kind: PairscatInitialKind,
    pub alpha: f64,
    pub beta: f64,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PairscatRoute {
    Incoming = 0,
    Outgoing = 1,
    /// Closed form for (4,0) → (2,2) only.
    Reduced = 2,
}

/// Product preparation split into an entangled part and two satellites.
#[repr(C)]
#[derive(Copy, Clone, Debug, Default)]
pub struct PairscatDecomposition {
    pub y: f64,
    pub alpha: f64,
    pub beta: f64,
    pub global_phase: f64,
    pub satellite1_re: f64,
    pub satellite1_im: f64,
    pub satellite2_re: f64,
    pub satellite2_im: f64,
}

/// Opaque T-matrix set.
pub struct PairscatTmx(TMatrixSet);

/// Opaque amplitude set for one (initial, final) choice.
pub struct PairscatAmplitudes(AmplitudeSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<(PairscatStatus, CString)>> = const { RefCell::new(None) };
}

struct Failure(PairscatStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure((&e).into(), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PairscatStatus::NullPointer, format!("{what} is NULL"))
}

fn set_error(status: PairscatStatus, msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some((status, c)));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PairscatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PairscatStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(status, msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(PairscatStatus::Panic, format!("internal panic: {msg}"));
            PairscatStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be NULL or point to a NUL-terminated string.
unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PairscatStatus::InvalidUtf8, "path is not valid UTF-8".into()))?;
    Ok(Path::new(s))
}

/// # Safety
/// `p` must be NULL or valid for writes of one `T`.
unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// # Safety
/// `p` must be NULL or a live handle from this library.
unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn state(s: PairscatState) -> Result<MolState, Failure> {
    let m = MolState::new(s.j, s.m, s.v);
    m.validate()?;
    Ok(m)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pairscat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Status of the last failing call on this thread, or OK if none.
#[no_mangle]
pub extern "C" fn pairscat_last_error_code() -> PairscatStatus {
    LAST_ERROR.with(|e| e.borrow().as_ref().map(|x| x.0).unwrap_or(PairscatStatus::Ok))
}

/// Message of the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call or `pairscat_clear_error` on
/// the same thread.
#[no_mangle]
pub extern "C" fn pairscat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map(|x| x.1.as_ptr()).unwrap_or(std::ptr::null()))
}

#[no_mangle]
pub extern "C" fn pairscat_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Loads a T-matrix file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pairscat_tmx_load(path: *const c_char, out: *mut *mut PairscatTmx) -> PairscatStatus {
    guard(|| {
        let set = TMatrixSet::load(path_arg(path)?)?;
        write_out(out, Box::into_raw(Box::new(PairscatTmx(set))), "out")
    })
}

/// Seeded random unitary H₂ + H₂ set (para levels, v = 0) for testing.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pairscat_tmx_synthesize(
    e_k: f64,
    a: PairscatState,
    b: PairscatState,
    j_max: i32,
    big_j_max: i32,
    seed: u64,
    exchange_symmetric: bool,
    out: *mut *mut PairscatTmx,
) -> PairscatStatus {
    guard(|| {
        let spec = CollisionSpec::h2_h2(e_k, [state(a)?, state(b)?], j_max, big_j_max, &Constants::default());
        spec.validate()?;
        let set = synthesize_unitary(&spec, seed, SynthOptions { exchange_symmetric, real: false })?;
        write_out(out, Box::into_raw(Box::new(PairscatTmx(set))), "out")
    })
}

/// # Safety
/// `tmx` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pairscat_tmx_save(tmx: *const PairscatTmx, path: *const c_char) -> PairscatStatus {
    guard(|| Ok(handle(tmx, "tmx")?.0.save(path_arg(path)?)?))
}

/// Number of stored T entries.
///
/// # Safety
/// `tmx` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pairscat_tmx_len(tmx: *const PairscatTmx, out: *mut usize) -> PairscatStatus {
    guard(|| write_out(out, handle(tmx, "tmx")?.0.len(), "out"))
}

/// Collision (kinetic) energy of the set, cm⁻¹.
///
/// # Safety
/// `tmx` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pairscat_tmx_collision_energy(tmx: *const PairscatTmx, out: *mut f64) -> PairscatStatus {
    guard(|| write_out(out, handle(tmx, "tmx")?.0.header.e_k, "out"))
}

/// # Safety
/// `tmx` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pairscat_tmx_free(tmx: *mut PairscatTmx) {
    if !tmx.is_null() {
        drop(Box::from_raw(tmx));
    }
}

/// Builds the partial-wave amplitudes for the initial pair (a, b) and a
/// final level pair. The result does not borrow `tmx`.
///
/// # Safety
/// `tmx` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pairscat_amplitudes_new(
    tmx: *const PairscatTmx,
    a: PairscatState,
    b: PairscatState,
    initial: PairscatInitial,
    final_levels: PairscatFinal,
    route: PairscatRoute,
    out: *mut *mut PairscatAmplitudes,
) -> PairscatStatus {
    guard(|| {
        let set = &handle(tmx, "tmx")?.0;
        let init = match initial.kind {
            PairscatInitialKind::Plus => InitialSpec::Plus,
            PairscatInitialKind::Minus => InitialSpec::Minus,
            PairscatInitialKind::Pair => InitialSpec::Pair,
            PairscatInitialKind::Entangled => InitialSpec::Entangled { alpha: initial.alpha, beta: initial.beta },
        };
        let route = match route {
            PairscatRoute::Incoming => Route::Incoming,
            PairscatRoute::Outgoing => Route::Outgoing,
            PairscatRoute::Reduced => Route::Reduced,
        };
        let fin = FinalChannel::new(final_levels.j1, final_levels.v1, final_levels.j2, final_levels.v2);
        let amps = amplitude_set(set, state(a)?, state(b)?, init, fin, route)?;
        write_out(out, Box::into_raw(Box::new(PairscatAmplitudes(amps))), "out")
    })
}

/// σ(θ) in Å²/sr.
///
/// # Safety
/// `amps` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pairscat_amplitudes_sigma(
    amps: *const PairscatAmplitudes,
    theta: f64,
    out: *mut f64,
) -> PairscatStatus {
    guard(|| {
        let a = handle(amps, "amps")?;
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Failure(PairscatStatus::Domain, format!("theta {theta} outside [0, pi]")));
        }
        write_out(out, a.0.sigma(theta), "out")
    })
}

/// σ(θᵢ) for `n` angles.
///
/// # Safety
/// `thetas` must be valid for `n` reads and `out` for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn pairscat_amplitudes_sigma_grid(
    amps: *const PairscatAmplitudes,
    thetas: *const f64,
    n: usize,
    out: *mut f64,
) -> PairscatStatus {
    guard(|| {
        let a = handle(amps, "amps")?;
        if n == 0 {
            return Ok(());
        }
        if thetas.is_null() || out.is_null() {
            return Err(null("thetas or out"));
        }
        let th = std::slice::from_raw_parts(thetas, n);
        if let Some(bad) = th.iter().find(|t| !(0.0..=std::f64::consts::PI).contains(*t)) {
            return Err(Failure(PairscatStatus::Domain, format!("theta {bad} outside [0, pi]")));
        }
        let dst = std::slice::from_raw_parts_mut(out, n);
        for (d, &t) in dst.iter_mut().zip(th) {
            *d = a.0.sigma(t);
        }
        Ok(())
    })
}

/// Integral cross section (Å²) from the partial-wave coefficients.
///
/// # Safety
/// `amps` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pairscat_amplitudes_total(amps: *const PairscatAmplitudes, out: *mut f64) -> PairscatStatus {
    guard(|| write_out(out, handle(amps, "amps")?.0.total_analytic(), "out"))
}

/// # Safety
/// `amps` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pairscat_amplitudes_free(amps: *mut PairscatAmplitudes) {
    if !amps.is_null() {
        drop(Box::from_raw(amps));
    }
}

/// d_c = |100(σ⁺ − σ⁻)/σ_ref| in percent.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pairscat_control_metric(
    sigma_plus: f64,
    sigma_minus: f64,
    sigma_ref: f64,
    out: *mut f64,
) -> PairscatStatus {
    guard(|| write_out(out, control_metric(sigma_plus, sigma_minus, sigma_ref)?, "out"))
}

/// Splits (cos α₁|a⟩ + e^{iβ₁} sin α₁|b⟩)(cos α₂|a⟩ + e^{iβ₂} sin α₂|b⟩).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pairscat_decompose(
    alpha1: f64,
    beta1: f64,
    alpha2: f64,
    beta2: f64,
    out: *mut PairscatDecomposition,
) -> PairscatStatus {
    guard(|| {
        let d = decompose_product(&ProductPrep { alpha1, beta1, alpha2, beta2 })?;
        let r = PairscatDecomposition {
            y: d.y,
            alpha: d.alpha,
            beta: d.beta,
            global_phase: d.global_phase,
            satellite1_re: d.satellite1.re,
            satellite1_im: d.satellite1.im,
            satellite2_re: d.satellite2.re,
            satellite2_im: d.satellite2.im,
        };
        write_out(out, r, "out")
    })
}
