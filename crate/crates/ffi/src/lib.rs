//! C interface to `gse-tail`.
//!
//! Distributions live behind an opaque `GseHandle`. Every fallible call
//! returns a `GseStatus`; on failure the message is available from
//! `gse_last_error` on the same thread until the next failing call.
//! Output buffers are caller-allocated: `n` doubles for vectors, `n*n`
//! (row-major) for matrices.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gse_tail::distributions::{GseDistribution, RootConvention, VarMethod};
use gse_tail::generators::GeneratorFamily;
use nalgebra::DMatrix;
use gse_tail::risk_measures::{self, TailRequest};
use gse_tail::skewing::{SkewKind, SkewingFunction};
use gse_tail::tail_engine::IntegrationConfig;
use gse_tail::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GseStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Parameter = 3,
    Dimension = 4,
    NotPositiveDefinite = 5,
    Numeric = 6,
    DegenerateTail = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GseFamily {
    Normal = 0,
    StudentT = 1,
    Logistic = 2,
    Laplace = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GseSkew {
    Half = 0,
    NormalCdf = 1,
    StudentTCdf = 2,
    LogisticCdf = 3,
    LaplaceCdf = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GseRoot {
    Symmetric = 0,
    Cholesky = 1,
}

/// Distribution parameters. `sigma` is row-major `n*n`; `gamma` may be
/// null for half skewing. `dof` is read for the Student-t family and
/// `skew_dof` for Student-t cdf skewing.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GseSpec {
    pub n: usize,
    pub family: GseFamily,
    pub dof: f64,
    pub skew: GseSkew,
    pub skew_dof: f64,
    pub root: GseRoot,
    pub mu: *const f64,
    pub sigma: *const f64,
    pub gamma: *const f64,
}

/// Opaque distribution handle.
pub struct GseHandle {
    dist: GseDistribution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GseStatus {
    match e {
        Error::Domain(_) | Error::Config(_) | Error::MethodUnavailable(_) => GseStatus::Domain,
        Error::Parameter(_) => GseStatus::Parameter,
        Error::Dimension { .. } => GseStatus::Dimension,
        Error::NotPositiveDefinite(_) => GseStatus::NotPositiveDefinite,
        Error::DegenerateTail(_) | Error::InsufficientTailMass { .. } => GseStatus::DegenerateTail,
        Error::Integration(_) | Error::NonFinite { .. } | Error::RootFinding(_) => GseStatus::Numeric,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> GseStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GseStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            GseStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            GseStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a>(h: *const GseHandle) -> Result<&'a GseHandle, Failure> {
    h.as_ref().ok_or(Failure::Null("handle"))
}

unsafe fn build(spec: &GseSpec) -> Result<GseDistribution, Failure> {
    let n = spec.n;
    if n == 0 || n > 10 {
        return Err(Error::Domain(format!("dimension must be between 1 and 10, got {n}")).into());
    }
    let mu = slice(spec.mu, n, "mu")?.to_vec();
    let sigma = DMatrix::from_row_slice(n, n, slice(spec.sigma, n * n, "sigma")?);
    let family = match spec.family {
        GseFamily::Normal => GeneratorFamily::Normal,
        GseFamily::StudentT => GeneratorFamily::student_t(spec.dof)?,
        GseFamily::Logistic => GeneratorFamily::Logistic,
        GseFamily::Laplace => GeneratorFamily::Laplace,
    };
    let kind = match spec.skew {
        GseSkew::Half => SkewKind::Half,
        GseSkew::NormalCdf => SkewKind::NormalCdf,
        GseSkew::StudentTCdf => SkewKind::student_t(spec.skew_dof)?,
        GseSkew::LogisticCdf => SkewKind::LogisticCdf,
        GseSkew::LaplaceCdf => SkewKind::LaplaceCdf,
    };
    let gamma = if spec.gamma.is_null() && kind == SkewKind::Half {
        vec![0.0; n]
    } else {
        slice(spec.gamma, n, "gamma")?.to_vec()
    };
    let root = match spec.root {
        GseRoot::Symmetric => RootConvention::Symmetric,
        GseRoot::Cholesky => RootConvention::Cholesky,
    };
    Ok(GseDistribution::new(mu, sigma, family, SkewingFunction::new(kind, gamma), root)?)
}

/// Creates a distribution. On success `*out` owns a handle that must be
/// released with `gse_distribution_free`.
///
/// # Safety
/// `spec` must point to a valid `GseSpec` whose arrays hold the documented
/// number of elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gse_distribution_new(spec: *const GseSpec, out: *mut *mut GseHandle) -> GseStatus {
    guard(|| {
        let spec = spec.as_ref().ok_or(Failure::Null("spec"))?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let dist = build(spec)?;
        *out = Box::into_raw(Box::new(GseHandle { dist }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must come from `gse_distribution_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gse_distribution_free(h: *mut GseHandle) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Dimension of the distribution, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gse_distribution_dim(h: *const GseHandle) -> usize {
    h.as_ref().map_or(0, |h| h.dist.dim())
}

/// Density at `y` (`n` doubles).
///
/// # Safety
/// `h` must be a live handle, `y` must hold `n` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gse_pdf(h: *const GseHandle, y: *const f64, out: *mut f64) -> GseStatus {
    guard(|| {
        let h = handle(h)?;
        let y = slice(y, h.dist.dim(), "y")?;
        let o = out_slice(out, 1, "out")?;
        o[0] = h.dist.pdf(y)?;
        Ok(())
    })
}

/// VaR at level `q` of margin `k` (zero-based), by the default method.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gse_marginal_var(h: *const GseHandle, k: usize, q: f64, out: *mut f64) -> GseStatus {
    guard(|| {
        let h = handle(h)?;
        let o = out_slice(out, 1, "out")?;
        let method: VarMethod = h.dist.default_var_method();
        o[0] = h.dist.marginal_var(k, q, method)?.value;
        Ok(())
    })
}

fn request(q: &[f64]) -> TailRequest {
    TailRequest::quantiles(q.to_vec()).with_integration(IntegrationConfig::default())
}

/// MTCE at quantile levels `q` (`n` doubles) into `out` (`n` doubles).
///
/// # Safety
/// `h` must be a live handle; `q` and `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn gse_mtce(h: *const GseHandle, q: *const f64, out: *mut f64) -> GseStatus {
    guard(|| {
        let h = handle(h)?;
        let n = h.dist.dim();
        let q = slice(q, n, "q")?;
        let o = out_slice(out, n, "out")?;
        let m = risk_measures::mtce(&h.dist, &request(q))?;
        for (dst, e) in o.iter_mut().zip(m) {
            *dst = e.value;
        }
        Ok(())
    })
}

unsafe fn matrix_call(
    h: *const GseHandle,
    q: *const f64,
    out: *mut f64,
    corr: bool,
) -> GseStatus {
    guard(|| {
        let h = handle(h)?;
        let n = h.dist.dim();
        let q = slice(q, n, "q")?;
        let o = out_slice(out, n * n, "out")?;
        let m = risk_measures::mtcov(&h.dist, &request(q))?;
        let m = if corr { risk_measures::mtcorr_estimate(&m)? } else { m };
        for i in 0..n {
            for j in 0..n {
                o[i * n + j] = m[i][j].value;
            }
        }
        Ok(())
    })
}

/// MTCov at quantile levels `q` into `out` (`n*n`, row-major).
///
/// # Safety
/// `h` must be a live handle; `q` must hold `n` doubles and `out` `n*n`.
#[no_mangle]
pub unsafe extern "C" fn gse_mtcov(h: *const GseHandle, q: *const f64, out: *mut f64) -> GseStatus {
    matrix_call(h, q, out, false)
}

/// MTCorr at quantile levels `q` into `out` (`n*n`, row-major).
///
/// # Safety
/// As for `gse_mtcov`.
#[no_mangle]
pub unsafe extern "C" fn gse_mtcorr(h: *const GseHandle, q: *const f64, out: *mut f64) -> GseStatus {
    matrix_call(h, q, out, true)
}

/// Tail variance of a univariate distribution at level `q`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gse_tv(h: *const GseHandle, q: f64, out: *mut f64) -> GseStatus {
    guard(|| {
        let h = handle(h)?;
        let o = out_slice(out, 1, "out")?;
        o[0] = risk_measures::tv(&h.dist, q, &IntegrationConfig::default())?.value;
        Ok(())
    })
}

/// Message of the last failure on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gse_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn gse_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
