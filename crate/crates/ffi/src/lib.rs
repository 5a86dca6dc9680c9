//! C ABI for the norm laboratory. Handles are opaque pointers created and
//! destroyed here; every fallible call returns an `RnStatus` and leaves a
//! message retrievable with `rn_last_error` on the same thread. Output
//! buffers are caller-allocated.

// Every entry point null-checks its pointers and returns RnStatus; the
// remaining validity requirements are the usual C caller contract.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::PathBuf;

use rinorm::dist::{Distribution, RngStream};
use rinorm::experiment::{run_to_dir, ExperimentConfig, RiLit, SeqLit};
use rinorm::montecarlo::{estimate_lhs, rhs_eval_with, McConfig};
use rinorm::norms::{RiNormSpec, SeqNormSpec};
use rinorm::rearrange::Disjunctification;
use rinorm::Error;

/// Outcome of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RnStatus {
    Ok = 0,
    NullPointer = 1,
    Utf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Numeric = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap_or_default());
}

fn fail(status: RnStatus, msg: &str) -> RnStatus {
    set_error(msg);
    status
}

fn fail_with(err: &Error) -> RnStatus {
    let status = match err {
        Error::Config(_) | Error::UnknownExperiment(_) | Error::Json(_) => RnStatus::Parse,
        Error::InvalidParameter(_) | Error::LengthMismatch(..) | Error::TopMOutOfRange { .. } => {
            RnStatus::InvalidArgument
        }
        _ => RnStatus::Numeric,
    };
    fail(status, &err.to_string())
}

/// Message for the most recent failure on this thread. Valid until the
/// next failing call from the same thread.
#[no_mangle]
pub extern "C" fn rn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// Reads a NUL-terminated UTF-8 string argument.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, RnStatus> {
    if ptr.is_null() {
        return Err(fail(RnStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(RnStatus::Utf8, "argument is not valid UTF-8"))
}

macro_rules! out_param {
    ($ptr:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(r) => r,
            None => return fail(RnStatus::NullPointer, "null output pointer"),
        }
    };
}

macro_rules! handle {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => return fail(RnStatus::NullPointer, "null handle"),
        }
    };
}

/// A family of distributions (opaque).
pub struct RnFamily {
    dists: Vec<Distribution>,
}

/// A disjunctification of a family (opaque).
pub struct RnDisjoint {
    inner: Disjunctification,
}

/// A rearrangement-invariant function norm (opaque).
pub struct RnRiNorm {
    spec: RiNormSpec,
}

/// A symmetric sequence norm (opaque).
pub struct RnSeqNorm {
    spec: SeqNormSpec,
}

/// Parse a JSON array of distribution literals, e.g.
/// `[{"kind":"gaussian","sigma":1.0},{"kind":"uniform","b":1.0}]`.
#[no_mangle]
pub extern "C" fn rn_family_parse_json(
    json: *const c_char,
    out: *mut *mut RnFamily,
) -> RnStatus {
    let out = out_param!(out);
    let text = match unsafe { read_str(json) } {
        Ok(t) => t,
        Err(s) => return s,
    };
    let dists: Vec<Distribution> = match serde_json::from_str(text) {
        Ok(d) => d,
        Err(e) => return fail(RnStatus::Parse, &format!("bad family JSON: {e}")),
    };
    if dists.is_empty() {
        return fail(RnStatus::InvalidArgument, "family must be nonempty");
    }
    for d in &dists {
        if let Err(e) = d.validate() {
            return fail_with(&e);
        }
    }
    *out = Box::into_raw(Box::new(RnFamily { dists }));
    RnStatus::Ok
}

#[no_mangle]
pub extern "C" fn rn_family_len(family: *const RnFamily) -> usize {
    unsafe { family.as_ref() }.map_or(0, |f| f.dists.len())
}

#[no_mangle]
pub extern "C" fn rn_family_free(family: *mut RnFamily) {
    if !family.is_null() {
        drop(unsafe { Box::from_raw(family) });
    }
}

/// P(|X_index| > t).
#[no_mangle]
pub extern "C" fn rn_family_survival(
    family: *const RnFamily,
    index: usize,
    t: f64,
    out: *mut f64,
) -> RnStatus {
    let out = out_param!(out);
    let fam = handle!(family);
    let Some(d) = fam.dists.get(index) else {
        return fail(RnStatus::InvalidArgument, "member index out of range");
    };
    if !(t >= 0.0) {
        return fail(RnStatus::InvalidArgument, "survival needs t >= 0");
    }
    *out = d.survival(t);
    RnStatus::Ok
}

/// Q(u) = inf{t : S(t) <= u} for u in (0,1).
#[no_mangle]
pub extern "C" fn rn_family_quantile(
    family: *const RnFamily,
    index: usize,
    u: f64,
    out: *mut f64,
) -> RnStatus {
    let out = out_param!(out);
    let fam = handle!(family);
    let Some(d) = fam.dists.get(index) else {
        return fail(RnStatus::InvalidArgument, "member index out of range");
    };
    if !(u > 0.0 && u < 1.0) {
        return fail(RnStatus::InvalidArgument, "quantile needs u in (0,1)");
    }
    *out = d.quantile(u);
    RnStatus::Ok
}

/// Fill `out[0..count]` with seeded inverse-transform draws of member
/// `index`. Identical (seed, stream) reproduces the same values.
#[no_mangle]
pub extern "C" fn rn_family_sample(
    family: *const RnFamily,
    index: usize,
    seed: u64,
    stream: u64,
    count: usize,
    out: *mut f64,
) -> RnStatus {
    if out.is_null() {
        return fail(RnStatus::NullPointer, "null output buffer");
    }
    let fam = handle!(family);
    let Some(d) = fam.dists.get(index) else {
        return fail(RnStatus::InvalidArgument, "member index out of range");
    };
    if count == 0 {
        return fail(RnStatus::InvalidArgument, "count must be >= 1");
    }
    let mut rng = RngStream::new(seed, stream);
    let buf = unsafe { std::slice::from_raw_parts_mut(out, count) };
    for slot in buf {
        *slot = d.draw(&mut rng);
    }
    RnStatus::Ok
}

/// Parse a function-norm literal, e.g. `{"ri":"lorentz","p":2,"q":1}`.
#[no_mangle]
pub extern "C" fn rn_ri_norm_parse_json(
    json: *const c_char,
    out: *mut *mut RnRiNorm,
) -> RnStatus {
    let out = out_param!(out);
    let text = match unsafe { read_str(json) } {
        Ok(t) => t,
        Err(s) => return s,
    };
    let lit: RiLit = match serde_json::from_str(text) {
        Ok(l) => l,
        Err(e) => return fail(RnStatus::Parse, &format!("bad ri norm JSON: {e}")),
    };
    match lit.to_spec() {
        Ok(spec) => {
            *out = Box::into_raw(Box::new(RnRiNorm { spec }));
            RnStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

#[no_mangle]
pub extern "C" fn rn_ri_norm_free(norm: *mut RnRiNorm) {
    if !norm.is_null() {
        drop(unsafe { Box::from_raw(norm) });
    }
}

/// Parse a sequence-norm literal, e.g. `{"seq":"top_m","m":4}`.
#[no_mangle]
pub extern "C" fn rn_seq_norm_parse_json(
    json: *const c_char,
    out: *mut *mut RnSeqNorm,
) -> RnStatus {
    let out = out_param!(out);
    let text = match unsafe { read_str(json) } {
        Ok(t) => t,
        Err(s) => return s,
    };
    let lit: SeqLit = match serde_json::from_str(text) {
        Ok(l) => l,
        Err(e) => return fail(RnStatus::Parse, &format!("bad seq norm JSON: {e}")),
    };
    match lit.to_spec() {
        Ok(spec) => {
            *out = Box::into_raw(Box::new(RnSeqNorm { spec }));
            RnStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

#[no_mangle]
pub extern "C" fn rn_seq_norm_free(norm: *mut RnSeqNorm) {
    if !norm.is_null() {
        drop(unsafe { Box::from_raw(norm) });
    }
}

/// Sequence norm of `values[0..len]` (empty input gives 0).
#[no_mangle]
pub extern "C" fn rn_seq_norm_eval(
    norm: *const RnSeqNorm,
    values: *const f64,
    len: usize,
    out: *mut f64,
) -> RnStatus {
    let out = out_param!(out);
    let norm = handle!(norm);
    if len > 0 && values.is_null() {
        return fail(RnStatus::NullPointer, "null values buffer");
    }
    let slice = if len == 0 {
        &[][..]
    } else {
        unsafe { std::slice::from_raw_parts(values, len) }
    };
    if slice.iter().any(|v| !v.is_finite()) {
        return fail(RnStatus::InvalidArgument, "values must be finite");
    }
    *out = norm.spec.eval(slice);
    RnStatus::Ok
}

/// Build the disjunctification Y of the family on [0, n].
#[no_mangle]
pub extern "C" fn rn_disjoint_new(
    family: *const RnFamily,
    out: *mut *mut RnDisjoint,
) -> RnStatus {
    let out = out_param!(out);
    let fam = handle!(family);
    match Disjunctification::new(fam.dists.clone()) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(RnDisjoint { inner }));
            RnStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

#[no_mangle]
pub extern "C" fn rn_disjoint_free(d: *mut RnDisjoint) {
    if !d.is_null() {
        drop(unsafe { Box::from_raw(d) });
    }
}

/// Y(t) for t in (0, n].
#[no_mangle]
pub extern "C" fn rn_disjoint_eval(d: *const RnDisjoint, t: f64, out: *mut f64) -> RnStatus {
    let out = out_param!(out);
    let d = handle!(d);
    match d.inner.eval_y(t) {
        Ok(v) => {
            *out = v;
            RnStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

/// \int_a^b Y for 0 <= a < b <= n.
#[no_mangle]
pub extern "C" fn rn_disjoint_integral(
    d: *const RnDisjoint,
    a: f64,
    b: f64,
    out: *mut f64,
) -> RnStatus {
    let out = out_param!(out);
    let d = handle!(d);
    match d.inner.integral(a, b) {
        Ok(v) => {
            *out = v;
            RnStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

/// Fill `out[0..len]` with (Y(1), ..., Y(len)); `len` must equal the
/// family size.
#[no_mangle]
pub extern "C" fn rn_disjoint_at_integers(
    d: *const RnDisjoint,
    out: *mut f64,
    len: usize,
) -> RnStatus {
    if out.is_null() {
        return fail(RnStatus::NullPointer, "null output buffer");
    }
    let d = handle!(d);
    if len != d.inner.n() {
        return fail(
            RnStatus::InvalidArgument,
            "buffer length must equal the family size",
        );
    }
    let values = d.inner.at_integers();
    unsafe { std::slice::from_raw_parts_mut(out, len) }.copy_from_slice(values);
    RnStatus::Ok
}

/// The deterministic disjoint-sum side: M-norm of Y on [0,1] plus N-norm
/// of the integer samples.
#[no_mangle]
pub extern "C" fn rn_rhs_eval(
    d: *const RnDisjoint,
    seq: *const RnSeqNorm,
    ri: *const RnRiNorm,
    out: *mut f64,
) -> RnStatus {
    let out = out_param!(out);
    let d = handle!(d);
    let seq = handle!(seq);
    let ri = handle!(ri);
    match rhs_eval_with(&d.inner, &seq.spec, &ri.spec) {
        Ok(v) => {
            *out = v;
            RnStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

/// Seeded Monte Carlo estimate of the M-norm of the N-norm of the family.
/// Writes the estimate and its across-batch standard error.
#[no_mangle]
pub extern "C" fn rn_estimate_lhs(
    family: *const RnFamily,
    seq: *const RnSeqNorm,
    ri: *const RnRiNorm,
    samples_per_batch: usize,
    batches: usize,
    seed: u64,
    out_value: *mut f64,
    out_stderr: *mut f64,
) -> RnStatus {
    let out_value = out_param!(out_value);
    let out_stderr = out_param!(out_stderr);
    let fam = handle!(family);
    let seq = handle!(seq);
    let ri = handle!(ri);
    let cfg = McConfig::new(samples_per_batch, batches, seed);
    match estimate_lhs(&fam.dists, &seq.spec, &ri.spec, &cfg) {
        Ok(est) => {
            *out_value = est.value;
            *out_stderr = est.stderr;
            RnStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

/// Run an experiment from a JSON config string, writing results.csv and
/// summary.json into `out_dir`. Returns the CLI exit-code contract:
/// 0 all pass, 1 numeric failure, 2 config error.
#[no_mangle]
pub extern "C" fn rn_run_experiment_json(
    config_json: *const c_char,
    out_dir: *const c_char,
) -> i32 {
    let text = match unsafe { read_str(config_json) } {
        Ok(t) => t,
        Err(_) => return 2,
    };
    let dir = match unsafe { read_str(out_dir) } {
        Ok(t) => PathBuf::from(t),
        Err(_) => return 2,
    };
    let cfg: ExperimentConfig = match serde_json::from_str(text) {
        Ok(c) => c,
        Err(e) => {
            set_error(&format!("malformed config: {e}"));
            return 2;
        }
    };
    if let Err(e) = cfg.validate() {
        set_error(&e.to_string());
        return 2;
    }
    match run_to_dir(&cfg, &dir) {
        Ok(art) if art.pass => 0,
        Ok(art) => {
            set_error(&art.failing_rows.join("; "));
            1
        }
        Err(e @ (Error::UnknownExperiment(_) | Error::Config(_) | Error::Json(_))) => {
            set_error(&e.to_string());
            2
        }
        Err(e) => {
            set_error(&e.to_string());
            1
        }
    }
}
