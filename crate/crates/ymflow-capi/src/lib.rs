//! C interface: opaque handles, integer status codes, and a thread-local
//! error message.  Handles are plain heap boxes; they may be passed between
//! threads but individual handles are not synchronized.  Pointers returned
//! by `ymf_config_emit` and `ymf_run_final_checkpoint` are owned by the
//! caller and released with `ymf_string_free`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use libc::{c_char, c_double, c_int, c_uint, size_t};

use ymflow::checkpoint::Checkpoint;
use ymflow::config::{config_hash, emit_config, parse_config, RunConfig};
use ymflow::dec::Calculus;
use ymflow::fields::curvature;
use ymflow::observables::{wilson_loop, Loop};
use ymflow::runner::{resume_run, run_from_config, RunOutcome};
use ymflow::{Error, Field};

/// Parsed and validated run configuration.
#[allow(non_camel_case_types)]
pub struct ymf_config(RunConfig);

/// A finished run: per-step series, verdicts, output locations.
#[allow(non_camel_case_types)]
pub struct ymf_run(RunOutcome);

/// A connection one-form, typically loaded back from a checkpoint.
#[allow(non_camel_case_types)]
pub struct ymf_field(Field);

#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[allow(non_camel_case_types)]
pub enum ymf_status {
    YMF_OK = 0,
    /// Malformed argument, config violation, or structural mismatch.
    YMF_ERR_INVALID = 1,
    /// The stepper could not complete a step.
    YMF_ERR_STEP = 2,
    /// Unreadable or mismatched checkpoint data.
    YMF_ERR_CHECKPOINT = 3,
    YMF_ERR_IO = 4,
    /// A required pointer argument was null.
    YMF_ERR_NULL = 5,
    /// A string argument was not valid UTF-8.
    YMF_ERR_UTF8 = 6,
    /// A panic was caught at the boundary; state may be inconsistent.
    YMF_ERR_INTERNAL = 7,
}

use ymf_status::*;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap());
}

fn fail(err: &Error) -> ymf_status {
    set_error(&err.to_string());
    match err {
        Error::Structural(_) | Error::InvalidArgument(_) | Error::InvalidConfig(_) => {
            YMF_ERR_INVALID
        }
        Error::StepFailure { .. } => YMF_ERR_STEP,
        Error::Checkpoint(_) => YMF_ERR_CHECKPOINT,
        Error::Io(_) => YMF_ERR_IO,
    }
}

fn null_arg(what: &str) -> ymf_status {
    set_error(&format!("{what}: null pointer"));
    YMF_ERR_NULL
}

/// Fences panics off from the C caller.
fn guarded(f: impl FnOnce() -> ymf_status) -> ymf_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            YMF_ERR_INTERNAL
        }
    }
}

unsafe fn utf8_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, ymf_status> {
    if p.is_null() {
        return Err(null_arg(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(&format!("{what}: not valid UTF-8"));
        YMF_ERR_UTF8
    })
}

fn owned_cstring(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap().into_raw()
}

/// ABI revision of this header; bumped on any breaking change.
#[no_mangle]
pub extern "C" fn ymf_abi_version() -> c_uint {
    1
}

/// Message for the most recent failure on the calling thread.  The pointer
/// stays valid until the next failing call from the same thread.
#[no_mangle]
pub extern "C" fn ymf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.  Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ymf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses config text into a new handle.  On failure `*out` is untouched
/// and `ymf_last_error` lists every violation.
#[no_mangle]
pub unsafe extern "C" fn ymf_config_parse(
    text: *const c_char,
    out: *mut *mut ymf_config,
) -> ymf_status {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let text = match utf8_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_config(text) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(ymf_config(cfg)));
                YMF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Reads and parses a config file.
#[no_mangle]
pub unsafe extern "C" fn ymf_config_read(
    path: *const c_char,
    out: *mut *mut ymf_config,
) -> ymf_status {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let path = match utf8_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return fail(&Error::Io(e)),
        };
        match parse_config(&text) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(ymf_config(cfg)));
                YMF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Canonical text form of a config; reparsing it yields an equal config.
/// Returns null only for a null handle.  Free with `ymf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ymf_config_emit(cfg: *const ymf_config) -> *mut c_char {
    if cfg.is_null() {
        null_arg("cfg");
        return std::ptr::null_mut();
    }
    owned_cstring(emit_config(&(*cfg).0))
}

/// FNV-1a hash of the canonical text; zero only for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ymf_config_hash64(cfg: *const ymf_config) -> u64 {
    if cfg.is_null() {
        null_arg("cfg");
        return 0;
    }
    config_hash(&(*cfg).0)
}

/// Redirects the run output directory without retyping the whole config.
#[no_mangle]
pub unsafe extern "C" fn ymf_config_set_output_dir(
    cfg: *mut ymf_config,
    dir: *const c_char,
) -> ymf_status {
    guarded(|| {
        if cfg.is_null() {
            return null_arg("cfg");
        }
        match utf8_arg(dir, "dir") {
            Ok(d) => {
                (*cfg).0.output.dir = d.to_string();
                YMF_OK
            }
            Err(s) => s,
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ymf_config_free(cfg: *mut ymf_config) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Executes a configured run end to end, writing series, verdicts and
/// checkpoints under the configured output directory.
#[no_mangle]
pub unsafe extern "C" fn ymf_run_execute(
    cfg: *const ymf_config,
    out: *mut *mut ymf_run,
) -> ymf_status {
    guarded(|| {
        if cfg.is_null() {
            return null_arg("cfg");
        }
        if out.is_null() {
            return null_arg("out");
        }
        match run_from_config(&(*cfg).0) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(ymf_run(r)));
                YMF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Continues a checkpointed run.  A negative `t_end` keeps the configured
/// end time; nonzero `force` skips the embedded config hash check.
#[no_mangle]
pub unsafe extern "C" fn ymf_run_resume(
    checkpoint: *const c_char,
    t_end: c_double,
    force: c_int,
    out: *mut *mut ymf_run,
) -> ymf_status {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let path = match utf8_arg(checkpoint, "checkpoint") {
            Ok(p) => PathBuf::from(p),
            Err(s) => return s,
        };
        let until = if t_end < 0.0 { None } else { Some(t_end) };
        match resume_run(&path, until, force != 0) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(ymf_run(r)));
                YMF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// One when every verdict of the run passed, zero otherwise.
#[no_mangle]
pub unsafe extern "C" fn ymf_run_all_pass(run: *const ymf_run) -> c_int {
    if run.is_null() {
        null_arg("run");
        return 0;
    }
    c_int::from((*run).0.all_pass())
}

#[no_mangle]
pub unsafe extern "C" fn ymf_run_steps(run: *const ymf_run) -> u64 {
    if run.is_null() {
        null_arg("run");
        return 0;
    }
    (*run).0.record.total_steps
}

/// Final integration time actually reached.
#[no_mangle]
pub unsafe extern "C" fn ymf_run_time(run: *const ymf_run) -> c_double {
    if run.is_null() {
        null_arg("run");
        return -1.0;
    }
    (*run).0.record.series.last().map_or(0.0, |r| r.0)
}

/// Number of recorded series rows: one per step plus the final time.
#[no_mangle]
pub unsafe extern "C" fn ymf_run_series_len(run: *const ymf_run) -> size_t {
    if run.is_null() {
        null_arg("run");
        return 0;
    }
    (*run).0.record.series.len()
}

/// Copies row `i` of the series: time, curvature energy, dissipation and
/// the curvature sup norm.  Null output slots are skipped.
#[no_mangle]
pub unsafe extern "C" fn ymf_run_series_sample(
    run: *const ymf_run,
    i: size_t,
    t: *mut c_double,
    energy: *mut c_double,
    dissipation: *mut c_double,
    sup_curvature: *mut c_double,
) -> ymf_status {
    if run.is_null() {
        return null_arg("run");
    }
    let series = &(*run).0.record.series;
    let Some(row) = series.get(i) else {
        set_error(&format!("series row {i} out of range 0..{}", series.len()));
        return YMF_ERR_INVALID;
    };
    for (slot, value) in [(t, row.0), (energy, row.1), (dissipation, row.2), (sup_curvature, row.3)]
    {
        if !slot.is_null() {
            *slot = value;
        }
    }
    YMF_OK
}

/// Path of the final checkpoint written by the run.  Free with
/// `ymf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ymf_run_final_checkpoint(run: *const ymf_run) -> *mut c_char {
    if run.is_null() {
        null_arg("run");
        return std::ptr::null_mut();
    }
    owned_cstring((*run).0.final_checkpoint.display().to_string())
}

#[no_mangle]
pub unsafe extern "C" fn ymf_run_free(run: *mut ymf_run) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Loads the connection a checkpoint represents.  Smoothed checkpoints are
/// mapped back through their stored gauge, so the result always lives on
/// the original trajectory.
#[no_mangle]
pub unsafe extern "C" fn ymf_field_load(
    path: *const c_char,
    out: *mut *mut ymf_field,
) -> ymf_status {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let path = match utf8_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let load = || -> Result<Field, Error> { Checkpoint::read(Path::new(path))?.connection() };
        match load() {
            Ok(a) => {
                *out = Box::into_raw(Box::new(ymf_field(a)));
                YMF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// L2 norm of the connection; negative only for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ymf_field_l2_norm(field: *const ymf_field) -> c_double {
    if field.is_null() {
        null_arg("field");
        return -1.0;
    }
    (*field).0.l2_norm()
}

/// Squared L2 norm of the curvature of the connection.
#[no_mangle]
pub unsafe extern "C" fn ymf_field_energy(
    field: *const ymf_field,
    out: *mut c_double,
) -> ymf_status {
    guarded(|| {
        if field.is_null() {
            return null_arg("field");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let a = &(*field).0;
        let energy = || -> Result<f64, Error> {
            let calc = Calculus::new(a.grid, a.bc)?;
            Ok(curvature(a, &calc)?.l2_norm_sq())
        };
        match energy() {
            Ok(e) => {
                *out = e;
                YMF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Wilson trace around the axis-aligned rectangle spanned from `corner`
/// (three coordinates) by `len0` along `axis0` and `len1` along `axis1`,
/// discretized in sub-segments of length at most `subdiv`.
#[no_mangle]
pub unsafe extern "C" fn ymf_field_wilson_rect(
    field: *const ymf_field,
    axis0: c_uint,
    axis1: c_uint,
    corner: *const c_double,
    len0: c_double,
    len1: c_double,
    subdiv: c_double,
    re: *mut c_double,
    im: *mut c_double,
) -> ymf_status {
    guarded(|| {
        if field.is_null() {
            return null_arg("field");
        }
        if corner.is_null() {
            return null_arg("corner");
        }
        if re.is_null() || im.is_null() {
            return null_arg("re/im");
        }
        let a = &(*field).0;
        let corner = [*corner, *corner.add(1), *corner.add(2)];
        let trace = || -> Result<(f64, f64), Error> {
            let gamma = Loop::rectangle(
                "rect",
                (axis0 as usize, axis1 as usize),
                corner,
                (len0, len1),
                subdiv,
            )?;
            gamma.validate_in(&a.grid)?;
            wilson_loop(a, &gamma)
        };
        match trace() {
            Ok((wr, wi)) => {
                *re = wr;
                *im = wi;
                YMF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ymf_field_free(field: *mut ymf_field) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}
