//! C ABI over the `majorana` crate.
//!
//! States and constellations cross the boundary as opaque handles owned by
//! the caller and released with the matching `*_free`. Every call returns a
//! [`MajStatus`]; on failure a message is kept per thread and can be read
//! with [`maj_last_error_message`]. Complex numbers are passed as
//! interleaved `(re, im)` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use majorana::dynamics::{self, Builtin, HamiltonianSpec};
use majorana::multipoles::state_quantumness;
use majorana::state::fidelity;
use majorana::{io, kings, Constellation, Error, SpinLabel, SpinState, StellarOptions, C64};

/// Result of every exported call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MajStatus {
    Ok = 0,
    InvalidInput = 1,
    LabelMismatch = 2,
    Range = 3,
    NonConvergence = 4,
    Degenerate = 5,
    StepUnderflow = 6,
    Io = 7,
    NullPointer = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Spin Hamiltonians available without passing a matrix.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MajBuiltin {
    Sz = 0,
    Sz2 = 1,
    Sx = 2,
    Sy = 3,
}

/// Opaque normalized spin state.
pub struct MajState(SpinState);

/// Opaque constellation of 2S stars.
pub struct MajConstellation(Constellation);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> MajStatus {
    match e {
        Error::InvalidInput(_) | Error::Json(_) => MajStatus::InvalidInput,
        Error::LabelMismatch(..) => MajStatus::LabelMismatch,
        Error::Range { .. } => MajStatus::Range,
        Error::NonConvergence(_) => MajStatus::NonConvergence,
        Error::DegenerateConstellation(_) => MajStatus::Degenerate,
        Error::StepUnderflow { .. } => MajStatus::StepUnderflow,
        Error::Io(_) => MajStatus::Io,
    }
}

enum Fail {
    Lib(Error),
    Status(MajStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn null() -> Fail {
    Fail::Status(MajStatus::NullPointer, "null pointer argument".into())
}

fn guard<F: FnOnce() -> Result<MajStatus, Fail>>(f: F) -> MajStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            MajStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn put_box<T>(out: *mut *mut T, value: T) -> Result<MajStatus, Fail> {
    put(out, Box::into_raw(Box::new(value)))?;
    Ok(MajStatus::Ok)
}

unsafe fn complex_slice(data: *const f64, count: usize) -> Result<Vec<C64>, Fail> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if data.is_null() {
        return Err(null());
    }
    let raw = std::slice::from_raw_parts(data, 2 * count);
    Ok(raw.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect())
}

unsafe fn write_doubles(values: &[f64], out: *mut f64, len: usize) -> Result<MajStatus, Fail> {
    if len < values.len() {
        return Err(Fail::Status(
            MajStatus::BufferTooSmall,
            format!("buffer holds {len} doubles, {} needed", values.len()),
        ));
    }
    if values.is_empty() {
        return Ok(MajStatus::Ok);
    }
    if out.is_null() {
        return Err(null());
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(MajStatus::Ok)
}

unsafe fn write_string(
    s: &str,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> Result<MajStatus, Fail> {
    let bytes = s.as_bytes();
    if !needed.is_null() {
        needed.write(bytes.len() + 1);
    }
    if len < bytes.len() + 1 {
        return Err(Fail::Status(
            MajStatus::BufferTooSmall,
            format!("buffer holds {len} bytes, {} needed", bytes.len() + 1),
        ));
    }
    if buf.is_null() {
        return Err(null());
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
    buf.add(bytes.len()).write(0);
    Ok(MajStatus::Ok)
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail::Status(MajStatus::InvalidInput, "string is not UTF-8".into()))
}

fn flatten(zs: &[C64]) -> Vec<f64> {
    zs.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Copies the calling thread's last error message (NUL terminated).
/// `needed` (optional) receives the required size in bytes.
///
/// # Safety
/// `buf` must point to `len` writable bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn maj_last_error_message(
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> MajStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    guard(|| write_string(&msg, buf, len, needed))
}

/// Builds a state from `2 S + 1` interleaved amplitudes, ordered by
/// `m = -S .. S`; the vector is normalized.
///
/// # Safety
/// `amplitudes` must hold `2 * (two_s + 1)` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maj_state_new(
    two_s: u32,
    amplitudes: *const f64,
    count: usize,
    out: *mut *mut MajState,
) -> MajStatus {
    guard(|| {
        let amps = complex_slice(amplitudes, count)?;
        put_box(out, MajState(SpinState::new(SpinLabel::new(two_s), amps)?))
    })
}

/// Coherent state whose 2S-fold star sits at `-1 / (re + i im)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maj_state_coherent(
    two_s: u32,
    re: f64,
    im: f64,
    out: *mut *mut MajState,
) -> MajStatus {
    guard(|| {
        if !re.is_finite() || !im.is_finite() {
            return Err(Fail::Status(
                MajStatus::InvalidInput,
                "coherent label must be finite".into(),
            ));
        }
        put_box(
            out,
            MajState(majorana::coherent_state(
                SpinLabel::new(two_s),
                C64::new(re, im).into(),
            )),
        )
    })
}

/// `(|S,S> - |S,-S>) / sqrt 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maj_state_noon(two_s: u32, out: *mut *mut MajState) -> MajStatus {
    guard(|| put_box(out, MajState(majorana::noon_state(SpinLabel::new(two_s))?)))
}

/// Parses `{"twoS": n, "amplitudes": [[re, im], ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maj_state_from_json(
    json: *const c_char,
    out: *mut *mut MajState,
) -> MajStatus {
    guard(|| put_box(out, MajState(io::state_from_json(read_str(json)?)?)))
}

/// Writes the state's JSON form into `buf`.
///
/// # Safety
/// `state` must be a live handle, `buf` must hold `len` bytes, `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn maj_state_to_json(
    state: *const MajState,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> MajStatus {
    guard(|| write_string(&io::state_to_json(&deref(state)?.0), buf, len, needed))
}

/// Releases a state; null is ignored.
///
/// # Safety
/// `state` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn maj_state_free(state: *mut MajState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn maj_state_two_s(state: *const MajState, out: *mut u32) -> MajStatus {
    guard(|| {
        put(out, deref(state)?.0.label().two_s())?;
        Ok(MajStatus::Ok)
    })
}

/// Copies the `2 S + 1` amplitudes as interleaved doubles.
///
/// # Safety
/// `state` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn maj_state_amplitudes(
    state: *const MajState,
    out: *mut f64,
    len: usize,
) -> MajStatus {
    guard(|| write_doubles(&flatten(deref(state)?.0.amplitudes()), out, len))
}

/// `|<a|b>|^2`.
///
/// # Safety
/// Both handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn maj_fidelity(
    a: *const MajState,
    b: *const MajState,
    out: *mut f64,
) -> MajStatus {
    guard(|| {
        put(out, fidelity(&deref(a)?.0, &deref(b)?.0)?)?;
        Ok(MajStatus::Ok)
    })
}

/// Cumulative multipole strength `A_M`.
///
/// # Safety
/// `state` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn maj_quantumness(
    state: *const MajState,
    m: u32,
    out: *mut f64,
) -> MajStatus {
    guard(|| {
        put(out, state_quantumness(&deref(state)?.0, m)?)?;
        Ok(MajStatus::Ok)
    })
}

/// Husimi function at polar angle `theta`, azimuth `phi`.
///
/// # Safety
/// `state` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn maj_husimi_q(
    state: *const MajState,
    theta: f64,
    phi: f64,
    out: *mut f64,
) -> MajStatus {
    guard(|| {
        let p = majorana::SpherePoint::new(theta, phi);
        put(out, majorana::husimi_q(&deref(state)?.0, p))?;
        Ok(MajStatus::Ok)
    })
}

/// Evolves under `coupling * builtin` for time `t` (exactly, by
/// diagonalization) into a new state.
///
/// # Safety
/// `state` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn maj_evolve_builtin(
    state: *const MajState,
    builtin: MajBuiltin,
    coupling: f64,
    t: f64,
    out: *mut *mut MajState,
) -> MajStatus {
    guard(|| {
        let s = &deref(state)?.0;
        if !coupling.is_finite() || !t.is_finite() {
            return Err(Fail::Status(
                MajStatus::InvalidInput,
                "coupling and t must be finite".into(),
            ));
        }
        let which = match builtin {
            MajBuiltin::Sz => Builtin::Sz,
            MajBuiltin::Sz2 => Builtin::Sz2,
            MajBuiltin::Sx => Builtin::Sx,
            MajBuiltin::Sy => Builtin::Sy,
        };
        let h = HamiltonianSpec::builtin(s.label(), which, coupling);
        put_box(out, MajState(dynamics::evolve_exact(s, &h, t)?))
    })
}

/// Stars of a state.
///
/// # Safety
/// `state` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn maj_state_to_constellation(
    state: *const MajState,
    out: *mut *mut MajConstellation,
) -> MajStatus {
    guard(|| {
        let c = majorana::constellation_from_state(&deref(state)?.0, &StellarOptions::default())?;
        put_box(out, MajConstellation(c))
    })
}

/// Constellation from `finite_count` interleaved chart roots plus stars at
/// infinity; the total must be 2S.
///
/// # Safety
/// `roots` must hold `2 * finite_count` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn maj_constellation_from_roots(
    two_s: u32,
    roots: *const f64,
    finite_count: usize,
    infinity_count: usize,
    out: *mut *mut MajConstellation,
) -> MajStatus {
    guard(|| {
        let zs = complex_slice(roots, finite_count)?;
        put_box(
            out,
            MajConstellation(Constellation::new(
                SpinLabel::new(two_s),
                zs,
                infinity_count,
            )?),
        )
    })
}

/// State (canonical phase) whose stars are `c`.
///
/// # Safety
/// `c` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn maj_constellation_to_state(
    c: *const MajConstellation,
    out: *mut *mut MajState,
) -> MajStatus {
    guard(|| {
        put_box(
            out,
            MajState(majorana::state_from_constellation(&deref(c)?.0)),
        )
    })
}

/// # Safety
/// `c` must be live; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn maj_constellation_counts(
    c: *const MajConstellation,
    finite: *mut usize,
    infinity: *mut usize,
) -> MajStatus {
    guard(|| {
        let c = &deref(c)?.0;
        put(finite, c.finite_roots().len())?;
        put(infinity, c.infinity_count())?;
        Ok(MajStatus::Ok)
    })
}

/// Finite roots as interleaved doubles.
///
/// # Safety
/// `c` must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn maj_constellation_roots(
    c: *const MajConstellation,
    out: *mut f64,
    len: usize,
) -> MajStatus {
    guard(|| write_doubles(&flatten(deref(c)?.0.finite_roots()), out, len))
}

/// All 2S stars as `(theta, phi)` pairs; stars at infinity are `(pi, 0)`.
///
/// # Safety
/// `c` must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn maj_constellation_angles(
    c: *const MajConstellation,
    out: *mut f64,
    len: usize,
) -> MajStatus {
    guard(|| {
        let values: Vec<f64> = deref(c)?
            .0
            .points()
            .iter()
            .flat_map(|p| [p.theta(), p.phi()])
            .collect();
        write_doubles(&values, out, len)
    })
}

/// Releases a constellation; null is ignored.
///
/// # Safety
/// `c` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn maj_constellation_free(c: *mut MajConstellation) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Multi-start minimization of `A_M` over 2S-star constellations.
///
/// The best constellation and its objective are written even when no
/// restart converged; the status is then `MAJ_STATUS_NON_CONVERGENCE`.
///
/// # Safety
/// Both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn maj_kings_minimize(
    two_s: u32,
    m: u32,
    restarts: usize,
    seed: u64,
    out: *mut *mut MajConstellation,
    objective: *mut f64,
) -> MajStatus {
    guard(|| {
        if out.is_null() || objective.is_null() {
            return Err(null());
        }
        let config = kings::SearchConfig {
            m,
            restarts,
            seed,
            ..Default::default()
        };
        let king = kings::minimize(SpinLabel::new(two_s), &config)?;
        put(objective, king.objective)?;
        let converged = king.converged();
        put_box(out, MajConstellation(king.constellation))?;
        if converged {
            Ok(MajStatus::Ok)
        } else {
            set_error("no restart met the convergence tolerances".into());
            Ok(MajStatus::NonConvergence)
        }
    })
}
