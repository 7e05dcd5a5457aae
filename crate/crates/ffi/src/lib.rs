//! C ABI for `queuetion`.
//!
//! Instances live behind an opaque [`QtInstance`] handle. Every function
//! returns a [`QtStatus`]; on failure a message is kept per thread and can be
//! read with [`qt_last_error_message`]. Participant indices and positions are
//! 0-based. Instances read from JSON with only exact numbers are computed in
//! rational arithmetic and converted to `double` at the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use queuetion::bounds::revenue_bounds;
use queuetion::equilibrium::is_equilibrium_with_order;
use queuetion::io::{bounds_json, Arithmetic, RawInstance};
use queuetion::mechanisms::{outcome, rank_by_bids};
use queuetion::model::{smith_order, total_weighted_waiting};
use queuetion::oracle::OracleLimits;
use queuetion::{BidProfile, Error, ErrorClass, Exact, Instance, MechanismKind, QueueOrder, Scalar};

/// Status codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed JSON or text that is not valid UTF-8.
    Parse = 2,
    /// Parameters or bids that fail validation.
    Invalid = 3,
    /// Internal inconsistency or a panic caught at the boundary.
    Internal = 4,
    /// Instance too large for the requested computation.
    SizeLimit = 5,
    /// An output buffer is shorter than the instance.
    BufferTooSmall = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtMechanism {
    Vcg = 0,
    Gsp = 1,
}

impl From<QtMechanism> for MechanismKind {
    fn from(m: QtMechanism) -> Self {
        match m {
            QtMechanism::Vcg => MechanismKind::Vcg,
            QtMechanism::Gsp => MechanismKind::Gsp,
        }
    }
}

/// Opaque instance handle.
pub struct QtInstance {
    float: Instance<f64>,
    exact: Option<Instance<Exact>>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn fail(status: QtStatus, message: impl Into<String>) -> QtStatus {
    set_error(message.into());
    status
}

fn from_error(err: Error) -> QtStatus {
    let status = match err.class() {
        ErrorClass::Parse => QtStatus::Parse,
        ErrorClass::Validation => QtStatus::Invalid,
        ErrorClass::Internal => QtStatus::Internal,
        ErrorClass::SizeLimit => QtStatus::SizeLimit,
    };
    fail(status, err.to_string())
}

/// Run `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), QtStatus>) -> QtStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QtStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(QtStatus::Internal, "panic inside queuetion"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, QtStatus>;
}

impl<T> OrStatus<T> for queuetion::Result<T> {
    fn or_status(self) -> Result<T, QtStatus> {
        self.map_err(from_error)
    }
}

unsafe fn handle<'a>(inst: *const QtInstance) -> Result<&'a QtInstance, QtStatus> {
    inst.as_ref().ok_or_else(|| fail(QtStatus::NullPointer, "instance handle is null"))
}

unsafe fn input<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], QtStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(fail(QtStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn output<'a, T>(data: *mut T, cap: usize, need: usize, what: &str) -> Result<&'a mut [T], QtStatus> {
    if need == 0 {
        return Ok(&mut []);
    }
    if data.is_null() {
        return Err(fail(QtStatus::NullPointer, format!("{what} is null")));
    }
    if cap < need {
        return Err(fail(QtStatus::BufferTooSmall, format!("{what} holds {cap}, need {need}")));
    }
    Ok(slice::from_raw_parts_mut(data, need))
}

unsafe fn out_ptr<'a, T>(data: *mut T, what: &str) -> Result<&'a mut T, QtStatus> {
    data.as_mut().ok_or_else(|| fail(QtStatus::NullPointer, format!("{what} is null")))
}

fn check_len(inst: &QtInstance, len: usize, what: &str) -> Result<(), QtStatus> {
    if len != inst.float.len() {
        return Err(fail(
            QtStatus::Invalid,
            format!("{what} has {len} entries, instance has {}", inst.float.len()),
        ));
    }
    Ok(())
}

/// Build an instance from service times `t` and values of time `w`; ids are
/// `P1..Pn`.
///
/// # Safety
/// `t` and `w` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qt_instance_new(
    t: *const f64,
    w: *const f64,
    n: usize,
    out: *mut *mut QtInstance,
) -> QtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let t = input(t, n, "t")?;
        let w = input(w, n, "w")?;
        let raw = (0..n).map(|i| (format!("P{}", i + 1), t[i], w[i]));
        let float = Instance::new(raw).or_status()?;
        *out = Box::into_raw(Box::new(QtInstance { float, exact: None }));
        Ok(())
    })
}

/// Build an instance from instance-file JSON. Exact arithmetic is used when
/// every number in the document is exact.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qt_instance_from_json(json: *const c_char, out: *mut *mut QtInstance) -> QtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(fail(QtStatus::NullPointer, "json is null"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| fail(QtStatus::Parse, "json is not valid UTF-8"))?;
        let raw = RawInstance::from_json_str(text).or_status()?;
        let exact = if Arithmetic::Auto.resolve(raw.literals()) {
            Some(raw.to_instance::<Exact>().or_status()?)
        } else {
            None
        };
        let float = raw.to_instance::<f64>().or_status()?;
        *out = Box::into_raw(Box::new(QtInstance { float, exact }));
        Ok(())
    })
}

/// # Safety
/// `inst` must come from a constructor in this library and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qt_instance_free(inst: *mut QtInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qt_instance_len(inst: *const QtInstance, out: *mut usize) -> QtStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(inst)?.float.len();
        Ok(())
    })
}

/// Write the efficient order (participant indices, front first) to `order`.
///
/// # Safety
/// `inst` must be a live handle; `order` must hold `cap` writable entries.
#[no_mangle]
pub unsafe extern "C" fn qt_smith_order(inst: *const QtInstance, order: *mut usize, cap: usize) -> QtStatus {
    guard(|| {
        let inst = handle(inst)?;
        let ord = match &inst.exact {
            Some(e) => smith_order(e),
            None => smith_order(&inst.float),
        };
        output(order, cap, ord.len(), "order")?.copy_from_slice(ord.as_slice());
        Ok(())
    })
}

/// Total weighted waiting time of `order`.
///
/// # Safety
/// `inst` must be a live handle; `order` must hold `n` entries; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn qt_total_weighted_waiting(
    inst: *const QtInstance,
    order: *const usize,
    n: usize,
    out: *mut f64,
) -> QtStatus {
    guard(|| {
        let inst = handle(inst)?;
        let out = out_ptr(out, "out")?;
        check_len(inst, n, "order")?;
        let ord = QueueOrder::new(input(order, n, "order")?.to_vec()).or_status()?;
        *out = match &inst.exact {
            Some(e) => total_weighted_waiting(e, &ord).or_status()?.to_f64(),
            None => total_weighted_waiting(&inst.float, &ord).or_status()?,
        };
        Ok(())
    })
}

fn to_bids<T: Scalar>(bids: &[f64]) -> Result<Vec<T>, QtStatus> {
    bids.iter()
        .map(|&b| T::from_literal(&queuetion::numeric::Literal::Float(b)).or_status())
        .collect()
}

struct RunResult {
    payments: Vec<f64>,
    revenue: f64,
}

fn run_mechanism<T: Scalar>(inst: &Instance<T>, kind: MechanismKind, bids: &[f64]) -> Result<RunResult, QtStatus> {
    let profile = BidProfile::new(kind, to_bids::<T>(bids)?).or_status()?;
    let out = outcome(inst, &profile).or_status()?;
    Ok(RunResult {
        payments: out.payments.iter().map(Scalar::to_f64).collect(),
        revenue: out.revenue.to_f64(),
    })
}

/// Run a mechanism. `bids[i]` is participant `i`'s bid; `payments[i]`
/// receives their payment. Ties are broken by lower index.
///
/// # Safety
/// `inst` must be a live handle; `bids` must hold `n` entries, `payments`
/// `n` writable entries (or be null), `revenue` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn qt_run(
    inst: *const QtInstance,
    mechanism: QtMechanism,
    bids: *const f64,
    n: usize,
    payments: *mut f64,
    revenue: *mut f64,
) -> QtStatus {
    guard(|| {
        let inst = handle(inst)?;
        check_len(inst, n, "bids")?;
        let bids = input(bids, n, "bids")?;
        let result = match &inst.exact {
            Some(e) => run_mechanism(e, mechanism.into(), bids)?,
            None => run_mechanism(&inst.float, mechanism.into(), bids)?,
        };
        if !payments.is_null() {
            output(payments, n, n, "payments")?.copy_from_slice(&result.payments);
        }
        if let Some(r) = revenue.as_mut() {
            *r = result.revenue;
        }
        Ok(())
    })
}

fn equilibrium<T: Scalar>(inst: &Instance<T>, kind: MechanismKind, bids: &[f64]) -> Result<bool, QtStatus> {
    let bids = to_bids::<T>(bids)?;
    let profile = BidProfile::new(kind, bids).or_status()?;
    let order = rank_by_bids(profile.bids());
    Ok(is_equilibrium_with_order(kind, inst, profile.bids(), &order, &T::default_tolerance()))
}

/// Whether the bids form a Nash equilibrium under the index tie-break.
///
/// # Safety
/// `inst` must be a live handle; `bids` must hold `n` entries; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qt_is_equilibrium(
    inst: *const QtInstance,
    mechanism: QtMechanism,
    bids: *const f64,
    n: usize,
    out: *mut bool,
) -> QtStatus {
    guard(|| {
        let inst = handle(inst)?;
        let out = out_ptr(out, "out")?;
        check_len(inst, n, "bids")?;
        let bids = input(bids, n, "bids")?;
        *out = match &inst.exact {
            Some(e) => equilibrium(e, mechanism.into(), bids)?,
            None => equilibrium(&inst.float, mechanism.into(), bids)?,
        };
        Ok(())
    })
}

/// Lower and upper equilibrium revenue bounds. The GSP lower bound is
/// exhaustive and fails with `SizeLimit` on large instances.
///
/// # Safety
/// `inst` must be a live handle; `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qt_revenue_bounds(
    inst: *const QtInstance,
    mechanism: QtMechanism,
    lower: *mut f64,
    upper: *mut f64,
) -> QtStatus {
    guard(|| {
        let inst = handle(inst)?;
        let lower = out_ptr(lower, "lower")?;
        let upper = out_ptr(upper, "upper")?;
        let limits = OracleLimits::from_env();
        let (lo, hi) = match &inst.exact {
            Some(e) => {
                let b = revenue_bounds(e, mechanism.into(), &limits).or_status()?;
                (b.lower.revenue.to_f64(), b.upper.revenue.to_f64())
            }
            None => {
                let b = revenue_bounds(&inst.float, mechanism.into(), &limits).or_status()?;
                (b.lower.revenue, b.upper.revenue)
            }
        };
        *lower = lo;
        *upper = hi;
        Ok(())
    })
}

/// Bounds report as JSON, with witnesses, in the same shape as the command
/// line `bounds` output. Exact instances report exact values. Release the
/// string with [`qt_string_free`].
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qt_revenue_bounds_json(
    inst: *const QtInstance,
    mechanism: QtMechanism,
    out: *mut *mut c_char,
) -> QtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let inst = handle(inst)?;
        let limits = OracleLimits::from_env();
        let json = match &inst.exact {
            Some(e) => bounds_json(e, &revenue_bounds(e, mechanism.into(), &limits).or_status()?),
            None => bounds_json(&inst.float, &revenue_bounds(&inst.float, mechanism.into(), &limits).or_status()?),
        };
        let text = CString::new(json.to_string()).map_err(|_| fail(QtStatus::Internal, "nul byte in JSON"))?;
        *out = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn qt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failure on this thread, or null if the last call
/// succeeded. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn qt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}
