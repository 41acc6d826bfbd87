//! C ABI for the mclink simulator.
//!
//! The interface follows the usual opaque-handle pattern: create a
//! `McLinkSim` from a TOML config (file or string), adjust seed/trials,
//! run experiments into an output directory, destroy the handle. Every
//! function returns a status code; the detailed message of the most recent
//! failure on the calling thread is available through
//! `mclink_last_error_message`.
//!
//! The header is generated by cbindgen at build time into
//! `include/mclink.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use mclink::error::Error;
use mclink::sim::{
    run_complexity, run_link, run_papr, run_psd, sweep, ResolvedConfig, SimConfig, SweepAxis,
};
use mclink::waveform::WaveformKind;

/// Status codes returned by every API function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McLinkStatus {
    Ok = 0,
    NullArgument = 1,
    ConfigError = 2,
    NumericalError = 3,
    IoError = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// Experiment sweep axes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McLinkSweepAxis {
    Snr = 0,
    Antennas = 1,
}

/// Waveform selector for the direct complexity query.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McLinkWaveform {
    Ofdm = 0,
    Scfdma = 1,
    Gfdm = 2,
    Fbmc = 3,
}

impl From<McLinkWaveform> for WaveformKind {
    fn from(w: McLinkWaveform) -> Self {
        match w {
            McLinkWaveform::Ofdm => WaveformKind::Ofdm,
            McLinkWaveform::Scfdma => WaveformKind::Scfdma,
            McLinkWaveform::Gfdm => WaveformKind::Gfdm,
            McLinkWaveform::Fbmc => WaveformKind::Fbmc,
        }
    }
}

/// Opaque simulator handle.
pub struct McLinkSim {
    cfg: ResolvedConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_last_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(e: &Error) -> McLinkStatus {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) => McLinkStatus::ConfigError,
        Error::Io(_) => McLinkStatus::IoError,
        _ if e.is_numerical() => McLinkStatus::NumericalError,
        _ => McLinkStatus::ConfigError,
    }
}

fn fail(e: Error) -> McLinkStatus {
    let s = status_of(&e);
    set_last_error(&e.to_string());
    s
}

/// Runs a closure, translating errors and panics into status codes.
fn guarded(f: impl FnOnce() -> Result<(), Error>) -> McLinkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => McLinkStatus::Ok,
        Ok(Err(e)) => fail(e),
        Err(_) => {
            set_last_error("internal panic");
            McLinkStatus::Panic
        }
    }
}

unsafe fn cstr<'a>(p: *const c_char) -> Result<&'a str, McLinkStatus> {
    if p.is_null() {
        set_last_error("null pointer argument");
        return Err(McLinkStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_last_error("argument is not valid UTF-8");
        McLinkStatus::InvalidUtf8
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mclink_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the most recent error message on this thread into `buf`
/// (truncated to `len - 1` bytes, always NUL-terminated). Returns the
/// full message length in bytes.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes, or be null.
#[no_mangle]
pub unsafe extern "C" fn mclink_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

fn new_sim(text: &str, out: *mut *mut McLinkSim) -> McLinkStatus {
    let cfg: SimConfig = match toml::from_str(text) {
        Ok(c) => c,
        Err(e) => return fail(Error::Config(format!("bad config: {e}"))),
    };
    match cfg.resolve() {
        Ok(resolved) => {
            unsafe {
                *out = Box::into_raw(Box::new(McLinkSim { cfg: resolved }));
            }
            McLinkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Creates a simulator from a TOML configuration string.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mclink_sim_new_from_toml(
    config_toml: *const c_char,
    out: *mut *mut McLinkSim,
) -> McLinkStatus {
    if out.is_null() {
        set_last_error("null output pointer");
        return McLinkStatus::NullArgument;
    }
    let text = match cstr(config_toml) {
        Ok(t) => t,
        Err(s) => return s,
    };
    new_sim(text, out)
}

/// Creates a simulator from a TOML configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mclink_sim_new_from_file(
    path: *const c_char,
    out: *mut *mut McLinkSim,
) -> McLinkStatus {
    if out.is_null() {
        set_last_error("null output pointer");
        return McLinkStatus::NullArgument;
    }
    let path = match cstr(path) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(Error::Config(format!("cannot read {path}: {e}"))),
    };
    new_sim(&text, out)
}

/// Destroys a simulator handle. A null handle is a no-op.
///
/// # Safety
/// `sim` must be a pointer previously returned by a constructor, or null.
#[no_mangle]
pub unsafe extern "C" fn mclink_sim_free(sim: *mut McLinkSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Overrides the master seed.
///
/// # Safety
/// `sim` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn mclink_sim_set_seed(sim: *mut McLinkSim, seed: u64) -> McLinkStatus {
    if sim.is_null() {
        set_last_error("null handle");
        return McLinkStatus::NullArgument;
    }
    let sim = &mut *sim;
    sim.cfg = sim.cfg.with_seed(seed);
    McLinkStatus::Ok
}

/// Overrides the trial count.
///
/// # Safety
/// `sim` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn mclink_sim_set_trials(sim: *mut McLinkSim, trials: u64) -> McLinkStatus {
    if sim.is_null() || trials == 0 {
        set_last_error("null handle or zero trials");
        return McLinkStatus::NullArgument;
    }
    let sim = &mut *sim;
    sim.cfg = sim.cfg.with_trials(trials);
    McLinkStatus::Ok
}

unsafe fn run_into(
    sim: *mut McLinkSim,
    out_dir: *const c_char,
    f: impl FnOnce(&ResolvedConfig, &Path) -> Result<(), Error>,
) -> McLinkStatus {
    if sim.is_null() {
        set_last_error("null handle");
        return McLinkStatus::NullArgument;
    }
    let dir = match cstr(out_dir) {
        Ok(d) => d.to_string(),
        Err(s) => return s,
    };
    let cfg = (*sim).cfg.clone();
    guarded(move || f(&cfg, Path::new(&dir)))
}

/// Monte-Carlo link run; writes errors.csv plus manifest into `out_dir`.
///
/// # Safety
/// `sim` must be a valid handle and `out_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mclink_sim_run_link(
    sim: *mut McLinkSim,
    out_dir: *const c_char,
) -> McLinkStatus {
    run_into(sim, out_dir, |cfg, dir| run_link(cfg, dir).map(|_| ()))
}

/// PAPR experiment. When `ccdf_threshold_out` is non-null it receives the
/// PAPR threshold (dB) at exceedance probability 1e-3.
///
/// # Safety
/// `sim` must be a valid handle and `out_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mclink_sim_run_papr(
    sim: *mut McLinkSim,
    out_dir: *const c_char,
    ccdf_threshold_out: *mut f64,
) -> McLinkStatus {
    run_into(sim, out_dir, |cfg, dir| {
        let rec = run_papr(cfg, dir)?;
        if !ccdf_threshold_out.is_null() {
            *ccdf_threshold_out = rec.threshold_at(1e-3)?;
        }
        Ok(())
    })
}

/// PSD experiment. When `oob_ratio_out` is non-null it receives the
/// out-of-band leakage ratio in dB.
///
/// # Safety
/// `sim` must be a valid handle and `out_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mclink_sim_run_psd(
    sim: *mut McLinkSim,
    out_dir: *const c_char,
    oob_ratio_out: *mut f64,
) -> McLinkStatus {
    run_into(sim, out_dir, |cfg, dir| {
        let rec = run_psd(cfg, dir)?;
        if !oob_ratio_out.is_null() {
            *oob_ratio_out = mclink::metrics::oob_ratio(&rec)?;
        }
        Ok(())
    })
}

/// Analytic complexity counts; writes complexity.csv.
///
/// # Safety
/// `sim` must be a valid handle and `out_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mclink_sim_run_complexity(
    sim: *mut McLinkSim,
    out_dir: *const c_char,
) -> McLinkStatus {
    run_into(sim, out_dir, run_complexity)
}

/// Sweep over SNR points or antenna counts; writes merged errors.csv.
///
/// # Safety
/// `sim` must be a valid handle and `out_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mclink_sim_sweep(
    sim: *mut McLinkSim,
    out_dir: *const c_char,
    axis: McLinkSweepAxis,
) -> McLinkStatus {
    let axis = match axis {
        McLinkSweepAxis::Snr => SweepAxis::Snr,
        McLinkSweepAxis::Antennas => SweepAxis::Antennas,
    };
    run_into(sim, out_dir, move |cfg, dir| {
        sweep(cfg, dir, axis).map(|_| ())
    })
}

/// Total complex-multiplication count for detecting one frame; no handle
/// required.
///
/// # Safety
/// `total_out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mclink_complexity_total(
    waveform: McLinkWaveform,
    b: usize,
    u: usize,
    k: usize,
    m: usize,
    total_out: *mut f64,
) -> McLinkStatus {
    if total_out.is_null() {
        set_last_error("null output pointer");
        return McLinkStatus::NullArgument;
    }
    *total_out = mclink::metrics::complexity_count(waveform.into(), b, u, k, m).total();
    McLinkStatus::Ok
}
