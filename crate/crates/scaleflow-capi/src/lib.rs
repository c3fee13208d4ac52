//! C ABI for the scaleflow toolkit.
//!
//! Conventions:
//! * every object is an opaque handle created by an `_new` function and
//!   released by the matching `_free`;
//! * every fallible call returns an [`SfStatus`]; outputs are written
//!   through pointers only on `Ok`;
//! * the last error message of the calling thread is available through
//!   [`sf_last_error_message`];
//! * complex coefficient blocks are interleaved `re, im` pairs, mode-major
//!   (mode -N first), component-minor — the layout of
//!   `scaleflow::loops::FourierPath`.
//!
//! The header `include/scaleflow.h` is generated by cbindgen at build time.

// Every exported function null-checks its pointers before dereferencing;
// what remains (validity of non-null pointers, exclusive access for _free)
// is the usual C-ABI caller contract, stated in the per-function docs.
// The safe declarations keep in-process callers and tests direct.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::os::raw::c_char;

use scaleflow::catalog::{Catalog, ModelConfig};
use scaleflow::error::Error;
use scaleflow::fields::FieldSpec;
use scaleflow::flow::{self, DerivPolicy, FlowConfig, Trajectory};
use scaleflow::loops::{Boundary, FourierPath};
use scaleflow::scale::{ScaleVector, SignMap, WeightFn};

// ---------------------------------------------------------------------------
// status codes and error reporting
// ---------------------------------------------------------------------------

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Precondition = 4,
    Validation = 5,
    Unsupported = 6,
    Singular = 7,
    BlowUp = 8,
    Io = 9,
    Internal = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|slot| {
        let mut bytes = msg.as_bytes().to_vec();
        bytes.push(0);
        *slot.borrow_mut() = bytes;
    });
}

fn fail(status: SfStatus, msg: &str) -> SfStatus {
    set_error(msg);
    status
}

fn from_error(err: &Error) -> SfStatus {
    let status = match err {
        Error::Config(_) | Error::Toml(_) | Error::Json(_) => SfStatus::Config,
        Error::Precondition(_) => SfStatus::Precondition,
        Error::Validation(_) => SfStatus::Validation,
        Error::Unsupported(_) => SfStatus::Unsupported,
        Error::Singular(_) => SfStatus::Singular,
        Error::BlowUp { .. } => SfStatus::BlowUp,
        Error::Io(_) => SfStatus::Io,
    };
    set_error(&err.to_string());
    status
}

/// Copy the calling thread's last error message (NUL-terminated) into
/// `buffer`; returns the number of bytes the full message needs.
#[no_mangle]
pub extern "C" fn sf_last_error_message(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let bytes = slot.borrow();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buffer, n);
                *buffer.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Static version string of the library.
#[no_mangle]
pub extern "C" fn sf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ---------------------------------------------------------------------------
// opaque handle types
// ---------------------------------------------------------------------------

pub struct SfWeight(WeightFn);
pub struct SfScaleVector(ScaleVector);
pub struct SfPath(FourierPath);
pub struct SfField {
    spec: FieldSpec,
    descriptor: serde_json::Value,
}
pub struct SfTrajectory(Trajectory);

/// Sign map kinds for the fundamental operator.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum SfSign {
    Plus = 0,
    Minus = 1,
    FloerPeriodic = 2,
    FloerLagrangian = 3,
}

/// Basis family of a path.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum SfBoundary {
    Periodic = 0,
    Lagrangian = 1,
}

// the release functions are written out one by one: the header generator
// reads the source without expanding macros

/// Release a weight handle; a null pointer is a no-op.
#[no_mangle]
pub extern "C" fn sf_weight_free(handle: *mut SfWeight) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Release a scale-vector handle; a null pointer is a no-op.
#[no_mangle]
pub extern "C" fn sf_scale_vector_free(handle: *mut SfScaleVector) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Release a path handle; a null pointer is a no-op.
#[no_mangle]
pub extern "C" fn sf_path_free(handle: *mut SfPath) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Release a field handle; a null pointer is a no-op.
#[no_mangle]
pub extern "C" fn sf_field_free(handle: *mut SfField) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Release a trajectory handle; a null pointer is a no-op.
#[no_mangle]
pub extern "C" fn sf_trajectory_free(handle: *mut SfTrajectory) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> SfStatus {
    if out.is_null() {
        return fail(SfStatus::NullPointer, "output handle pointer is null");
    }
    *out = Box::into_raw(Box::new(value));
    SfStatus::Ok
}

macro_rules! require {
    ($ptr:expr, $what:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => return fail(SfStatus::NullPointer, concat!($what, " handle is null")),
        }
    };
}

// ---------------------------------------------------------------------------
// weights and scale vectors
// ---------------------------------------------------------------------------

/// f(nu) = nu^exponent, exponent > 0.
#[no_mangle]
pub extern "C" fn sf_weight_power_new(exponent: f64, out: *mut *mut SfWeight) -> SfStatus {
    match WeightFn::power(exponent) {
        Ok(w) => unsafe { write_out(out, SfWeight(w)) },
        Err(e) => from_error(&e),
    }
}

/// The loop-model weight for complex dimension n.
#[no_mangle]
pub extern "C" fn sf_weight_floer_periodic_new(n: usize, out: *mut *mut SfWeight) -> SfStatus {
    match WeightFn::floer_periodic(n) {
        Ok(w) => unsafe { write_out(out, SfWeight(w)) },
        Err(e) => from_error(&e),
    }
}

/// f(nu), nu >= 1.
#[no_mangle]
pub extern "C" fn sf_weight_eval(weight: *const SfWeight, nu: u64, out: *mut f64) -> SfStatus {
    let weight = require!(weight, "weight");
    if nu == 0 {
        return fail(SfStatus::InvalidArgument, "scale indices start at 1");
    }
    if out.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    unsafe { *out = weight.0.eval(nu) };
    SfStatus::Ok
}

/// Build a scale vector from parallel (index, value) arrays.
#[no_mangle]
pub extern "C" fn sf_scale_vector_new(
    weight: *const SfWeight,
    indices: *const u64,
    values: *const f64,
    len: usize,
    out: *mut *mut SfScaleVector,
) -> SfStatus {
    let weight = require!(weight, "weight");
    if len > 0 && (indices.is_null() || values.is_null()) {
        return fail(SfStatus::NullPointer, "coefficient arrays are null");
    }
    let pairs: Vec<(u64, f64)> = (0..len)
        .map(|i| unsafe { (*indices.add(i), *values.add(i)) })
        .collect();
    match ScaleVector::new(weight.0.clone(), pairs) {
        Ok(v) => unsafe { write_out(out, SfScaleVector(v)) },
        Err(e) => from_error(&e),
    }
}

#[no_mangle]
pub extern "C" fn sf_scale_vector_level_norm(
    vector: *const SfScaleVector,
    level: i32,
    out: *mut f64,
) -> SfStatus {
    let vector = require!(vector, "scale vector");
    if out.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    unsafe { *out = vector.0.level_norm(level) };
    SfStatus::Ok
}

#[no_mangle]
pub extern "C" fn sf_scale_vector_tail_norm(
    vector: *const SfScaleVector,
    cut: u64,
    level: i32,
    out: *mut f64,
) -> SfStatus {
    let vector = require!(vector, "scale vector");
    if out.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    unsafe { *out = vector.0.tail_norm(cut, level) };
    SfStatus::Ok
}

fn sign_map(sign: SfSign, n: usize) -> SignMap {
    match sign {
        SfSign::Plus => SignMap::Plus,
        SfSign::Minus => SignMap::Minus,
        SfSign::FloerPeriodic => SignMap::FloerPeriodic { n },
        SfSign::FloerLagrangian => SignMap::FloerLagrangian { n },
    }
}

/// Apply the fundamental operator (or its coefficient-wise inverse).
#[no_mangle]
pub extern "C" fn sf_scale_vector_fundamental(
    vector: *const SfScaleVector,
    sign: SfSign,
    n: usize,
    invert: bool,
    out: *mut *mut SfScaleVector,
) -> SfStatus {
    let vector = require!(vector, "scale vector");
    if matches!(sign, SfSign::FloerPeriodic | SfSign::FloerLagrangian) && n == 0 {
        return fail(SfStatus::InvalidArgument, "floer sign maps need n >= 1");
    }
    let zeta = sign_map(sign, n);
    let result = if invert {
        vector.0.fundamental_invert(&zeta)
    } else {
        vector.0.fundamental_apply(&zeta)
    };
    unsafe { write_out(out, SfScaleVector(result)) }
}

/// A(x) = 1/2 sum zeta sqrt(f) x^2.
#[no_mangle]
pub extern "C" fn sf_scale_vector_quadratic_action(
    vector: *const SfScaleVector,
    sign: SfSign,
    n: usize,
    out: *mut f64,
) -> SfStatus {
    let vector = require!(vector, "scale vector");
    if out.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    unsafe { *out = vector.0.quadratic_action(&sign_map(sign, n)) };
    SfStatus::Ok
}

// ---------------------------------------------------------------------------
// paths
// ---------------------------------------------------------------------------

fn boundary(b: SfBoundary) -> Boundary {
    match b {
        SfBoundary::Periodic => Boundary::Periodic,
        SfBoundary::Lagrangian => Boundary::Lagrangian,
    }
}

/// Build a path from an interleaved coefficient block of length
/// `2 * (2*order + 1) * n` (re, im per coefficient; mode -order first).
#[no_mangle]
pub extern "C" fn sf_path_new(
    n: usize,
    basis: SfBoundary,
    order: usize,
    coeffs: *const f64,
    len: usize,
    out: *mut *mut SfPath,
) -> SfStatus {
    let expected = 2 * (2 * order + 1) * n;
    if len != expected {
        return fail(
            SfStatus::InvalidArgument,
            &format!("coefficient block must have length {expected}, got {len}"),
        );
    }
    if coeffs.is_null() {
        return fail(SfStatus::NullPointer, "coefficient pointer is null");
    }
    let complex: Vec<num_complex::Complex64> = (0..expected / 2)
        .map(|i| unsafe { num_complex::Complex64::new(*coeffs.add(2 * i), *coeffs.add(2 * i + 1)) })
        .collect();
    match FourierPath::new(n, boundary(basis), order, complex) {
        Ok(p) => unsafe { write_out(out, SfPath(p)) },
        Err(e) => from_error(&e),
    }
}

#[no_mangle]
pub extern "C" fn sf_path_order(path: *const SfPath, out: *mut usize) -> SfStatus {
    let path = require!(path, "path");
    if out.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    unsafe { *out = path.0.order() };
    SfStatus::Ok
}

#[no_mangle]
pub extern "C" fn sf_path_dim(path: *const SfPath, out: *mut usize) -> SfStatus {
    let path = require!(path, "path");
    if out.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    unsafe { *out = path.0.dim() };
    SfStatus::Ok
}

/// Copy the interleaved coefficient block; the required length is always
/// written through `written`.
#[no_mangle]
pub extern "C" fn sf_path_coeffs(
    path: *const SfPath,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> SfStatus {
    let path = require!(path, "path");
    let needed = 2 * path.0.coeffs().len();
    if written.is_null() {
        return fail(SfStatus::NullPointer, "written pointer is null");
    }
    unsafe { *written = needed };
    if buffer.is_null() || capacity < needed {
        return fail(
            SfStatus::InvalidArgument,
            "buffer too small for coefficient block",
        );
    }
    for (i, z) in path.0.coeffs().iter().enumerate() {
        unsafe {
            *buffer.add(2 * i) = z.re;
            *buffer.add(2 * i + 1) = z.im;
        }
    }
    SfStatus::Ok
}

#[no_mangle]
pub extern "C" fn sf_path_sobolev_norm(path: *const SfPath, level: i32, out: *mut f64) -> SfStatus {
    let path = require!(path, "path");
    if out.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    unsafe { *out = path.0.sobolev_norm(level) };
    SfStatus::Ok
}

/// The diagonal operator with multiplier (2 pi j + 1/2) resp. (pi j + 1/2).
#[no_mangle]
pub extern "C" fn sf_path_floer_fundamental(
    path: *const SfPath,
    out: *mut *mut SfPath,
) -> SfStatus {
    let path = require!(path, "path");
    unsafe { write_out(out, SfPath(path.0.floer_fundamental())) }
}

/// x(t) -> x(t - tau); loops only.
#[no_mangle]
pub extern "C" fn sf_path_time_shift(
    path: *const SfPath,
    tau: f64,
    out: *mut *mut SfPath,
) -> SfStatus {
    let path = require!(path, "path");
    match path.0.time_shift(tau) {
        Ok(p) => unsafe { write_out(out, SfPath(p)) },
        Err(e) => from_error(&e),
    }
}

/// Double a boundary path to its reflection-symmetric loop.
#[no_mangle]
pub extern "C" fn sf_path_reflect_to_loop(path: *const SfPath, out: *mut *mut SfPath) -> SfStatus {
    let path = require!(path, "path");
    match scaleflow::loops::reflect_to_loop(&path.0) {
        Ok(p) => unsafe { write_out(out, SfPath(p)) },
        Err(e) => from_error(&e),
    }
}

/// Restrict a reflection-symmetric loop back to a boundary path.
#[no_mangle]
pub extern "C" fn sf_path_restrict_to_path(
    path: *const SfPath,
    tolerance: f64,
    out: *mut *mut SfPath,
) -> SfStatus {
    let path = require!(path, "path");
    match scaleflow::loops::restrict_to_path(&path.0, tolerance) {
        Ok(p) => unsafe { write_out(out, SfPath(p)) },
        Err(e) => from_error(&e),
    }
}

// ---------------------------------------------------------------------------
// fields, flow, energy
// ---------------------------------------------------------------------------

/// Build a field from a JSON model descriptor, e.g.
/// `{"n":1,"field":{"kind":"quadratic","gamma":1.0}}` (the same catalog and
/// shape as the scenario files).
#[no_mangle]
pub extern "C" fn sf_field_from_json(
    descriptor: *const c_char,
    out: *mut *mut SfField,
) -> SfStatus {
    if descriptor.is_null() {
        return fail(SfStatus::NullPointer, "descriptor string is null");
    }
    let raw = unsafe { std::ffi::CStr::from_ptr(descriptor) };
    let Ok(text) = raw.to_str() else {
        return fail(SfStatus::InvalidArgument, "descriptor is not valid UTF-8");
    };
    let model: ModelConfig = match serde_json::from_str(text) {
        Ok(m) => m,
        Err(e) => return fail(SfStatus::Config, &format!("bad model descriptor: {e}")),
    };
    let catalog = Catalog::builtin();
    match catalog.build_field(&model) {
        Ok(spec) => {
            let descriptor = model.field.to_json();
            unsafe { write_out(out, SfField { spec, descriptor }) }
        }
        Err(e) => from_error(&e),
    }
}

/// V(x), truncated to the order of x.
#[no_mangle]
pub extern "C" fn sf_field_eval(
    field: *const SfField,
    path: *const SfPath,
    out: *mut *mut SfPath,
) -> SfStatus {
    let field = require!(field, "field");
    let path = require!(path, "path");
    match scaleflow::fields::vf_eval(&field.spec, &path.0) {
        Ok(p) => unsafe { write_out(out, SfPath(p)) },
        Err(e) => from_error(&e),
    }
}

/// Diagonal rate of the field on mode j (complex for delay terms).
#[no_mangle]
pub extern "C" fn sf_field_linear_multiplier(
    field: *const SfField,
    mode: i64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> SfStatus {
    let field = require!(field, "field");
    if out_re.is_null() || out_im.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    let m = field.spec.linear_multiplier(mode);
    unsafe {
        *out_re = m.re;
        *out_im = m.im;
    }
    SfStatus::Ok
}

/// Integrate the truncated flow through x0 on [-t_half, t_half]: the stiff
/// exponential integrator when `rtol <= 0`, the adaptive embedded pair
/// otherwise.  Escaping the ceiling returns `BlowUp`.
#[no_mangle]
pub extern "C" fn sf_integrate(
    field: *const SfField,
    x0: *const SfPath,
    t_half: f64,
    samples: usize,
    step: f64,
    ceiling: f64,
    rtol: f64,
    out: *mut *mut SfTrajectory,
) -> SfStatus {
    let field = require!(field, "field");
    let x0 = require!(x0, "initial path");
    let cfg = if rtol > 0.0 {
        let mut c = FlowConfig::adaptive(rtol, ceiling);
        c.step = step;
        c
    } else {
        FlowConfig::etd(step, ceiling)
    };
    match flow::integrate(&field.spec, &x0.0, t_half, samples, &cfg) {
        Ok(w) => unsafe { write_out(out, SfTrajectory(w)) },
        Err(e) => from_error(&e),
    }
}

#[no_mangle]
pub extern "C" fn sf_trajectory_samples(
    trajectory: *const SfTrajectory,
    out: *mut usize,
) -> SfStatus {
    let trajectory = require!(trajectory, "trajectory");
    if out.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    unsafe { *out = trajectory.0.samples() };
    SfStatus::Ok
}

/// Copy of the state at grid index i.
#[no_mangle]
pub extern "C" fn sf_trajectory_state(
    trajectory: *const SfTrajectory,
    index: usize,
    out: *mut *mut SfPath,
) -> SfStatus {
    let trajectory = require!(trajectory, "trajectory");
    if index >= trajectory.0.samples() {
        return fail(SfStatus::InvalidArgument, "state index out of range");
    }
    unsafe { write_out(out, SfPath(trajectory.0.state(index).clone())) }
}

/// Max interior defect || ds w - V(w) ||_0 by independent differencing.
#[no_mangle]
pub extern "C" fn sf_trajectory_residual(
    field: *const SfField,
    trajectory: *const SfTrajectory,
    out: *mut f64,
) -> SfStatus {
    let field = require!(field, "field");
    let trajectory = require!(trajectory, "trajectory");
    if out.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    match flow::residual(&field.spec, &trajectory.0) {
        Ok(r) => {
            unsafe { *out = r };
            SfStatus::Ok
        }
        Err(e) => from_error(&e),
    }
}

/// Action drop and flow energy of an elementary trajectory.
#[no_mangle]
pub extern "C" fn sf_energy_identity(
    field: *const SfField,
    trajectory: *const SfTrajectory,
    out_action_drop: *mut f64,
    out_energy: *mut f64,
) -> SfStatus {
    let field = require!(field, "field");
    let trajectory = require!(trajectory, "trajectory");
    if out_action_drop.is_null() || out_energy.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    let w = trajectory.0.clone().with_policy(DerivPolicy::FromField);
    match flow::energy_identity_check(&field.spec, &w) {
        Ok(report) => {
            unsafe {
                *out_action_drop = report.action_drop;
                *out_energy = report.energy;
            }
            SfStatus::Ok
        }
        Err(e) => from_error(&e),
    }
}

/// Serialize a trajectory to the JSON-lines wire format (header record with
/// the field descriptor, one state per line).  The required byte length,
/// including the NUL, is always written through `written`; call with a null
/// buffer to size it.
#[no_mangle]
pub extern "C" fn sf_trajectory_to_jsonl(
    field: *const SfField,
    trajectory: *const SfTrajectory,
    buffer: *mut c_char,
    capacity: usize,
    written: *mut usize,
) -> SfStatus {
    let field = require!(field, "field");
    let trajectory = require!(trajectory, "trajectory");
    if written.is_null() {
        return fail(SfStatus::NullPointer, "written pointer is null");
    }
    let mut bytes = Vec::new();
    if let Err(e) = flow::write_trajectory(&mut bytes, &trajectory.0, field.descriptor.clone()) {
        return from_error(&e);
    }
    unsafe { *written = bytes.len() + 1 };
    if buffer.is_null() || capacity < bytes.len() + 1 {
        return fail(
            SfStatus::InvalidArgument,
            "buffer too small for serialized trajectory",
        );
    }
    unsafe {
        std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buffer, bytes.len());
        *buffer.add(bytes.len()) = 0;
    }
    SfStatus::Ok
}
