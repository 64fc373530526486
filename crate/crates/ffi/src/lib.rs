//! C ABI over `qscc`.
//!
//! Objects cross the boundary as opaque heap handles released with the
//! matching `*_free` function. Every fallible call returns a [`QsccStatus`];
//! on failure the message is available from [`qscc_last_error`] on the same
//! thread. Complex numbers are passed as interleaved `(re, im)` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qscc::algebra::{build_function_algebra, fixture};
use qscc::cocycle::{matrix_element, Generator, StepFunction, StepFunctionFile};
use qscc::convolution::{OperatorMap, OperatorMapFile, ConvolutionSemigroup};
use qscc::generators::{check_structure_map, gns_construct};
use qscc::harness::{run_report, simulate_compound_poisson, Battery, RunConfig};
use qscc::linalg::{c, CVector};
use qscc::{Bialgebra, CayleyTable, Element, Error, Tolerances};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsccStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Io = 3,
    Parse = 4,
    AxiomViolation = 5,
    DimensionMismatch = 6,
    SourceMismatch = 7,
    NumericalFailure = 8,
    Panic = 9,
}

pub struct QsccBialgebra {
    inner: Bialgebra,
}

/// An operator map; functionals are the `1 × 1` case.
pub struct QsccOperatorMap {
    inner: OperatorMap,
}

pub struct QsccStepFunction {
    inner: StepFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let cleaned = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(cleaned).unwrap_or_default());
}

fn status_of(err: &Error) -> QsccStatus {
    match err {
        Error::Io(_) => QsccStatus::Io,
        Error::Json(_) | Error::Parse(_) => QsccStatus::Parse,
        Error::AxiomViolation { .. } => QsccStatus::AxiomViolation,
        Error::DimensionMismatch { .. } | Error::NoiseDimensionMismatch { .. } => QsccStatus::DimensionMismatch,
        Error::SourceMismatch => QsccStatus::SourceMismatch,
        Error::InvalidInput(_) | Error::InvalidTable(_) | Error::NotAGroup(_) => QsccStatus::InvalidInput,
        _ => QsccStatus::NumericalFailure,
    }
}

fn guard(f: impl FnOnce() -> Result<(), QsccFailure>) -> QsccStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            QsccStatus::Ok
        }
        Ok(Err(QsccFailure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside qscc");
            QsccStatus::Panic
        }
    }
}

struct QsccFailure(QsccStatus, String);

impl From<Error> for QsccFailure {
    fn from(e: Error) -> Self {
        QsccFailure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> QsccFailure {
    QsccFailure(QsccStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, QsccFailure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| QsccFailure(QsccStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, QsccFailure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T, what: &str) -> Result<(), QsccFailure> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn element_arg(b: &Bialgebra, coords: *const f64, len: usize) -> Result<Element, QsccFailure> {
    if coords.is_null() {
        return Err(null("coords"));
    }
    if len != b.dim() {
        return Err(Error::DimensionMismatch {
            what: "element coordinates",
            expected: b.dim(),
            found: len,
        }
        .into());
    }
    let raw = std::slice::from_raw_parts(coords, 2 * len);
    Ok(b.element(CVector::from_iterator(len, raw.chunks(2).map(|p| c(p[0], p[1]))))?)
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `qscc_*` call on this thread.
#[no_mangle]
pub extern "C" fn qscc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from a `qscc_*` function returning an owned string, or be null.
#[no_mangle]
pub unsafe extern "C" fn qscc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads and validates a bialgebra file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qscc_bialgebra_load(path: *const c_char, out: *mut *mut QsccBialgebra) -> QsccStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let inner = Bialgebra::load(path, &Tolerances::default())?;
        write_out(out, QsccBialgebra { inner }, "out")
    })
}

/// Parses and validates a bialgebra from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qscc_bialgebra_from_json(json: *const c_char, out: *mut *mut QsccBialgebra) -> QsccStatus {
    guard(|| {
        let json = str_arg(json, "json")?;
        let inner = Bialgebra::from_json(json, &Tolerances::default())?;
        write_out(out, QsccBialgebra { inner }, "out")
    })
}

/// A bundled fixture such as `"c_z3"` or `"cg_s3"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qscc_bialgebra_fixture(name: *const c_char, out: *mut *mut QsccBialgebra) -> QsccStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        write_out(out, QsccBialgebra { inner: fixture(name)? }, "out")
    })
}

/// # Safety
/// `b` must come from a `qscc_bialgebra_*` constructor, or be null.
#[no_mangle]
pub unsafe extern "C" fn qscc_bialgebra_free(b: *mut QsccBialgebra) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `b` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qscc_bialgebra_dim(b: *const QsccBialgebra) -> usize {
    b.as_ref().map_or(0, |b| b.inner.dim())
}

/// Writes the 64 hex digits of the content hash plus a NUL into `buf`.
///
/// # Safety
/// `b` must be a live handle; `buf` must hold at least 65 bytes.
#[no_mangle]
pub unsafe extern "C" fn qscc_bialgebra_fingerprint(b: *const QsccBialgebra, buf: *mut c_char) -> QsccStatus {
    guard(|| {
        let b = ref_arg(b, "bialgebra")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let hex = b.inner.fingerprint().hex();
        ptr::copy_nonoverlapping(hex.as_ptr().cast::<c_char>(), buf, hex.len());
        *buf.add(hex.len()) = 0;
        Ok(())
    })
}

/// Parses an operator-map file against `b`.
///
/// # Safety
/// `b` must be a live handle, `json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qscc_map_from_json(
    b: *const QsccBialgebra,
    json: *const c_char,
    out: *mut *mut QsccOperatorMap,
) -> QsccStatus {
    guard(|| {
        let b = ref_arg(b, "bialgebra")?;
        let file: OperatorMapFile = serde_json::from_str(str_arg(json, "json")?).map_err(Error::from)?;
        write_out(out, QsccOperatorMap { inner: file.into_map(&b.inner)? }, "out")
    })
}

/// Serializes a map; release the string with [`qscc_string_free`].
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qscc_map_to_json(m: *const QsccOperatorMap, out: *mut *mut c_char) -> QsccStatus {
    guard(|| {
        let m = ref_arg(m, "map")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = serde_json::to_string(&m.inner.to_file()).map_err(Error::from)?;
        *out = CString::new(text).map_err(|e| QsccFailure(QsccStatus::Parse, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `m` must come from a `qscc_*` constructor, or be null.
#[no_mangle]
pub unsafe extern "C" fn qscc_map_free(m: *mut QsccOperatorMap) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Row count of the map's values, or 0 for a null handle.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qscc_map_rows(m: *const QsccOperatorMap) -> usize {
    m.as_ref().map_or(0, |m| m.inner.rows())
}

/// Parses a step function `[[t_end, [[re, im], ...]], ...]`.
///
/// # Safety
/// `json` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qscc_step_function_from_json(
    json: *const c_char,
    out: *mut *mut QsccStepFunction,
) -> QsccStatus {
    guard(|| {
        let file: StepFunctionFile = serde_json::from_str(str_arg(json, "json")?).map_err(Error::from)?;
        write_out(out, QsccStepFunction { inner: file.into_step_function()? }, "out")
    })
}

/// # Safety
/// `f` must come from [`qscc_step_function_from_json`], or be null.
#[no_mangle]
pub unsafe extern "C" fn qscc_step_function_free(f: *mut QsccStepFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// `λ_t(x)` for the convolution semigroup generated by the functional `gamma`.
/// `coords` holds `2·len` interleaved doubles; the value goes to `out[0..2]`.
///
/// # Safety
/// Handles must be live; `coords` must hold `2·len` doubles and `out` 2.
#[no_mangle]
pub unsafe extern "C" fn qscc_semigroup_eval(
    b: *const QsccBialgebra,
    gamma: *const QsccOperatorMap,
    t: f64,
    coords: *const f64,
    len: usize,
    out: *mut f64,
) -> QsccStatus {
    guard(|| {
        let b = &ref_arg(b, "bialgebra")?.inner;
        let gamma = &ref_arg(gamma, "functional")?.inner;
        let x = element_arg(b, coords, len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = ConvolutionSemigroup::new(b, gamma.clone())?.eval(t, &x);
        *out = v.re;
        *out.add(1) = v.im;
        Ok(())
    })
}

/// `⟨ε(f′), l_t(x) ε(f)⟩` for the cocycle generated by `phi`.
///
/// # Safety
/// Handles must be live; `coords` must hold `2·len` doubles and `out` 2.
#[no_mangle]
pub unsafe extern "C" fn qscc_matrix_element(
    b: *const QsccBialgebra,
    phi: *const QsccOperatorMap,
    coords: *const f64,
    len: usize,
    f: *const QsccStepFunction,
    fp: *const QsccStepFunction,
    t: f64,
    out: *mut f64,
) -> QsccStatus {
    guard(|| {
        let b = &ref_arg(b, "bialgebra")?.inner;
        let phi = Generator::new(ref_arg(phi, "generator")?.inner.clone())?;
        let x = element_arg(b, coords, len)?;
        let f = &ref_arg(f, "f")?.inner;
        let fp = &ref_arg(fp, "fp")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = matrix_element(b, &phi, &x, f, fp, t)?;
        *out = v.re;
        *out.add(1) = v.im;
        Ok(())
    })
}

/// Largest residual of the ε-structure relation, reality and `φ(1) = 0`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qscc_structure_residual(
    b: *const QsccBialgebra,
    phi: *const QsccOperatorMap,
    out: *mut f64,
) -> QsccStatus {
    guard(|| {
        let b = &ref_arg(b, "bialgebra")?.inner;
        let phi = Generator::new(ref_arg(phi, "generator")?.inner.clone())?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = check_structure_map(b, &phi)?.max();
        Ok(())
    })
}

/// GNS reconstruction: writes the generator handle and its noise dimension.
///
/// # Safety
/// Handles must be live; `out` and `noise_dim` writable.
#[no_mangle]
pub unsafe extern "C" fn qscc_gns(
    b: *const QsccBialgebra,
    gamma: *const QsccOperatorMap,
    out: *mut *mut QsccOperatorMap,
    noise_dim: *mut usize,
) -> QsccStatus {
    guard(|| {
        let b = &ref_arg(b, "bialgebra")?.inner;
        let gamma = &ref_arg(gamma, "functional")?.inner;
        if noise_dim.is_null() {
            return Err(null("noise_dim"));
        }
        let (triple, generator) = gns_construct(b, gamma, None)?;
        *noise_dim = triple.n;
        write_out(out, QsccOperatorMap { inner: generator.into_map() }, "out")
    })
}

/// Compound-Poisson Monte Carlo on a named group (`"z<n>"`, `"s3"`, `"d4"`).
/// `mu` and `out_freqs` hold one entry per group element.
///
/// # Safety
/// `group` must be NUL-terminated; `mu` and `out_freqs` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn qscc_montecarlo(
    group: *const c_char,
    rate: f64,
    mu: *const f64,
    n: usize,
    t: f64,
    samples: usize,
    seed: u64,
    out_freqs: *mut f64,
) -> QsccStatus {
    guard(|| {
        let table = CayleyTable::named(str_arg(group, "group")?)?;
        if mu.is_null() || out_freqs.is_null() {
            return Err(null("mu or out_freqs"));
        }
        if n != table.order() {
            return Err(Error::DimensionMismatch {
                what: "jump law",
                expected: table.order(),
                found: n,
            }
            .into());
        }
        let mu = std::slice::from_raw_parts(mu, n);
        let law = simulate_compound_poisson(&table, rate, mu, t, samples, seed)?;
        std::slice::from_raw_parts_mut(out_freqs, n).copy_from_slice(&law.frequencies);
        Ok(())
    })
}

/// Reference law `λ_t(δ_g)` of the same process from the convolution semigroup.
///
/// # Safety
/// As [`qscc_montecarlo`].
#[no_mangle]
pub unsafe extern "C" fn qscc_compound_poisson_law(
    group: *const c_char,
    rate: f64,
    mu: *const f64,
    n: usize,
    t: f64,
    out_law: *mut f64,
) -> QsccStatus {
    guard(|| {
        let table = CayleyTable::named(str_arg(group, "group")?)?;
        if mu.is_null() || out_law.is_null() {
            return Err(null("mu or out_law"));
        }
        let b = build_function_algebra(&table)?;
        let law = qscc::harness::compound_poisson_law(&b, rate, std::slice::from_raw_parts(mu, n), t)?;
        std::slice::from_raw_parts_mut(out_law, n).copy_from_slice(&law);
        Ok(())
    })
}

/// Runs a named battery and writes the JSON report to `out_path`.
/// `passed` receives 1 if every case passed, else 0.
///
/// # Safety
/// Strings must be NUL-terminated and `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn qscc_run_report(
    battery: *const c_char,
    seed: u64,
    samples: usize,
    cases: usize,
    out_path: *const c_char,
    passed: *mut i32,
) -> QsccStatus {
    guard(|| {
        let battery: Battery = str_arg(battery, "battery")?.parse()?;
        let out = str_arg(out_path, "out_path")?;
        if passed.is_null() {
            return Err(null("passed"));
        }
        let config = RunConfig {
            seed,
            n_samples: samples,
            cases,
            out: Some(out.into()),
            ..RunConfig::default()
        };
        *passed = i32::from(run_report(&config, battery)?.passed);
        Ok(())
    })
}
