//! C ABI for `gradshift`.
//!
//! Every fallible function returns a [`GsStatus`]. On failure, the message is
//! available from [`gs_last_error`] on the same thread. Handles are opaque and
//! must be released with their matching `*_free` function. Strings returned
//! through `char **` out-parameters are owned by the caller and released with
//! [`gs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gradshift::io::{circuit_from_json, resolve_operator, to_json};
use gradshift::rules::{apply_chain, build_rule, RuleMethod, ShiftRule};
use gradshift::sampling::estimate_derivative;
use gradshift::spectral::{analyze, GapSet, HermitianOperator};
use gradshift::{Circuit, Error};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    NonHermitian = 5,
    ConvergenceFailure = 6,
    EmptyGapSet = 7,
    Singular = 8,
    DegenerateStencil = 9,
    InsufficientStencils = 10,
    ShiftSelectionFailure = 11,
    DimensionMismatch = 12,
    GapMismatch = 13,
    OutOfRange = 14,
    Internal = 15,
    Panic = 16,
}

/// Hermitian operator handle.
pub struct GsOperator(HermitianOperator);

/// Shift rule handle.
pub struct GsRule(ShiftRule);

/// Prepared circuit handle.
pub struct GsCircuit(Circuit);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: GsStatus,
    message: String,
}

impl Failure {
    fn new(status: GsStatus, message: impl Into<String>) -> Self {
        Failure { status, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::NonHermitianInput { .. } => GsStatus::NonHermitian,
            Error::ConvergenceFailure { .. } => GsStatus::ConvergenceFailure,
            Error::EmptyGapSet => GsStatus::EmptyGapSet,
            Error::ShiftSelectionFailure { .. } => GsStatus::ShiftSelectionFailure,
            Error::SingularSystem(_)
            | Error::SingularShift { .. }
            | Error::SingularShiftPair(..)
            | Error::SingularStencil(_) => GsStatus::Singular,
            Error::DegenerateStencil(..) => GsStatus::DegenerateStencil,
            Error::InsufficientStencils { .. } => GsStatus::InsufficientStencils,
            Error::DimensionMismatch(_) => GsStatus::DimensionMismatch,
            Error::GapMismatch { .. } => GsStatus::GapMismatch,
            Error::InvalidPauliCharacter(_) | Error::InvalidArgument(_) => GsStatus::InvalidArgument,
            Error::Parse(_) => GsStatus::Parse,
            Error::Internal(_) => GsStatus::Internal,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            GsStatus::Ok
        }
        Ok(Err(f)) => {
            set_last_error(&f.message);
            f.status
        }
        Err(_) => {
            set_last_error("panic inside gradshift");
            GsStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::new(GsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure::new(GsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn read_slice<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(Failure::new(GsStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(GsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(GsStatus::NullPointer, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), Failure> {
    let c = CString::new(text).map_err(|_| Failure::new(GsStatus::Internal, "string contains NUL"))?;
    write_out(out, c.into_raw())
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next `gs_*` call on this thread.
#[no_mangle]
pub extern "C" fn gs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from a `char **` out-parameter of this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds an operator from a catalog name (`"fsim:theta"`, `"pauli:XZ"`, ...),
/// inline generator JSON, or a path to a generator JSON file.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_operator_new(spec: *const c_char, out: *mut *mut GsOperator) -> GsStatus {
    guard(|| {
        let spec = read_str(spec, "spec")?;
        write_out(out, Box::into_raw(Box::new(GsOperator(resolve_operator(spec)?))))
    })
}

/// Hilbert-space dimension of the operator, or 0 for NULL.
///
/// # Safety
/// `op` must be NULL or a live operator handle.
#[no_mangle]
pub unsafe extern "C" fn gs_operator_dim(op: *const GsOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.dim())
}

/// Writes eigenvalues, gaps and multiplicities as a JSON object.
///
/// # Safety
/// `op` must be a live operator handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_operator_analyze_json(op: *const GsOperator, out_json: *mut *mut c_char) -> GsStatus {
    guard(|| {
        let op = handle(op, "operator")?;
        write_string(out_json, to_json(&analyze(&op.0)?)?)
    })
}

/// Copies up to `capacity` unique gaps into `buffer` and stores the total
/// count in `out_len`. Pass `capacity = 0` to query the count.
///
/// # Safety
/// `buffer` must hold `capacity` doubles; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_operator_gaps(
    op: *const GsOperator,
    buffer: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> GsStatus {
    guard(|| {
        let op = handle(op, "operator")?;
        let gaps = analyze(&op.0)?.gaps;
        if capacity > 0 {
            if buffer.is_null() {
                return Err(Failure::new(GsStatus::NullPointer, "buffer is null"));
            }
            let n = capacity.min(gaps.len());
            ptr::copy_nonoverlapping(gaps.as_ptr(), buffer, n);
        }
        write_out(out_len, gaps.len())
    })
}

/// # Safety
/// `op` must be NULL or a handle from [`gs_operator_new`], not freed before.
#[no_mangle]
pub unsafe extern "C" fn gs_operator_free(op: *mut GsOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Builds a rule. `method` is a method name such as `"symmetric"` or
/// `"closed-s2"`. `shifts` may be NULL for the default stencil. `x` is used
/// only when `has_x` is true and is required by point-dependent methods.
///
/// # Safety
/// `gaps` must hold `n_gaps` doubles and `shifts` `n_shifts` doubles (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn gs_rule_build(
    method: *const c_char,
    gaps: *const f64,
    n_gaps: usize,
    shifts: *const f64,
    n_shifts: usize,
    has_x: bool,
    x: f64,
    out: *mut *mut GsRule,
) -> GsStatus {
    guard(|| {
        let method: RuleMethod = read_str(method, "method")?.parse()?;
        let gaps = GapSet::from_values(read_slice(gaps, n_gaps, "gaps")?)?;
        let shifts = if shifts.is_null() { None } else { Some(read_slice(shifts, n_shifts, "shifts")?) };
        let rule = build_rule(method, &gaps, shifts, has_x.then_some(x))?;
        write_out(out, Box::into_raw(Box::new(GsRule(rule))))
    })
}

/// Parses a rule from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_rule_from_json(json: *const c_char, out: *mut *mut GsRule) -> GsStatus {
    guard(|| {
        let rule: ShiftRule = serde_json::from_str(read_str(json, "json")?).map_err(Error::from)?;
        write_out(out, Box::into_raw(Box::new(GsRule(rule))))
    })
}

/// # Safety
/// `rule` must be a live rule handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_rule_to_json(rule: *const GsRule, out_json: *mut *mut c_char) -> GsStatus {
    guard(|| write_string(out_json, to_json(&handle(rule, "rule")?.0)?))
}

/// Number of terms, or 0 for NULL.
///
/// # Safety
/// `rule` must be NULL or a live rule handle.
#[no_mangle]
pub unsafe extern "C" fn gs_rule_len(rule: *const GsRule) -> usize {
    rule.as_ref().map_or(0, |r| r.0.terms.len())
}

/// Shift and stored weight of term `index` (the chain factor is not applied).
///
/// # Safety
/// `rule` must be a live rule handle; `shift` and `weight` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_rule_term(
    rule: *const GsRule,
    index: usize,
    shift: *mut f64,
    weight: *mut f64,
) -> GsStatus {
    guard(|| {
        let rule = handle(rule, "rule")?;
        let term = rule.0.terms.get(index).ok_or_else(|| {
            Failure::new(GsStatus::OutOfRange, format!("term {index} out of range (len {})", rule.0.terms.len()))
        })?;
        write_out(shift, term.shift)?;
        write_out(weight, term.weight)
    })
}

/// # Safety
/// `rule` must be a live rule handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_rule_condition_number(rule: *const GsRule, out: *mut f64) -> GsStatus {
    guard(|| write_out(out, handle(rule, "rule")?.0.condition_number))
}

/// # Safety
/// `rule` must be a live rule handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_rule_chain_factor(rule: *const GsRule, out: *mut f64) -> GsStatus {
    guard(|| write_out(out, handle(rule, "rule")?.0.chain_factor))
}

/// New rule with its chain factor multiplied by `dphi_dx`.
///
/// # Safety
/// `rule` must be a live rule handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_rule_apply_chain(rule: *const GsRule, dphi_dx: f64, out: *mut *mut GsRule) -> GsStatus {
    guard(|| {
        if !dphi_dx.is_finite() {
            return Err(Failure::new(GsStatus::InvalidArgument, "dphi_dx must be finite"));
        }
        let chained = apply_chain(&handle(rule, "rule")?.0, dphi_dx);
        write_out(out, Box::into_raw(Box::new(GsRule(chained))))
    })
}

/// # Safety
/// `rule` must be NULL or a handle from this library, not freed before.
#[no_mangle]
pub unsafe extern "C" fn gs_rule_free(rule: *mut GsRule) {
    if !rule.is_null() {
        drop(Box::from_raw(rule));
    }
}

/// Parses and prepares a circuit from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_circuit_from_json(json: *const c_char, out: *mut *mut GsCircuit) -> GsStatus {
    guard(|| {
        let circuit = circuit_from_json(read_str(json, "json")?)?.prepare()?;
        write_out(out, Box::into_raw(Box::new(GsCircuit(circuit))))
    })
}

/// Dimension of the circuit, or 0 for NULL.
///
/// # Safety
/// `circuit` must be NULL or a live circuit handle.
#[no_mangle]
pub unsafe extern "C" fn gs_circuit_dim(circuit: *const GsCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.0.dim())
}

/// # Safety
/// `circuit` must be a live circuit handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_circuit_expectation(circuit: *const GsCircuit, x: f64, out: *mut f64) -> GsStatus {
    guard(|| write_out(out, handle(circuit, "circuit")?.0.expectation(x)?))
}

/// Analytic derivative, including the circuit's chain factor.
///
/// # Safety
/// `circuit` must be a live circuit handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_circuit_exact_derivative(circuit: *const GsCircuit, x: f64, out: *mut f64) -> GsStatus {
    guard(|| write_out(out, handle(circuit, "circuit")?.0.exact_derivative(x)?))
}

/// Noise-free rule evaluation. Fails with `GapMismatch` when the rule does
/// not cover every generator gap.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_circuit_evaluate_rule(
    circuit: *const GsCircuit,
    rule: *const GsRule,
    x: f64,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        let circuit = handle(circuit, "circuit")?;
        let rule = handle(rule, "rule")?;
        write_out(out, circuit.0.evaluate_rule(x, &rule.0)?)
    })
}

/// Finite-shot derivative estimate. The value goes to `out_value`; if
/// `out_json` is not NULL, the full estimate is written there as JSON.
///
/// # Safety
/// Handles must be live; `out_value` must be writable; `out_json` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn gs_circuit_estimate_derivative(
    circuit: *const GsCircuit,
    rule: *const GsRule,
    x: f64,
    shots_per_term: u64,
    seed: u64,
    out_value: *mut f64,
    out_json: *mut *mut c_char,
) -> GsStatus {
    guard(|| {
        let circuit = handle(circuit, "circuit")?;
        let rule = handle(rule, "rule")?;
        let estimate = estimate_derivative(&circuit.0, x, &rule.0, shots_per_term, seed)?;
        write_out(out_value, estimate.value)?;
        if !out_json.is_null() {
            write_string(out_json, to_json(&estimate)?)?;
        }
        Ok(())
    })
}

/// # Safety
/// `circuit` must be NULL or a handle from this library, not freed before.
#[no_mangle]
pub unsafe extern "C" fn gs_circuit_free(circuit: *mut GsCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}
