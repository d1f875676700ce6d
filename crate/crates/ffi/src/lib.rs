//! C ABI for the isoquad library.
//!
//! Every fallible function returns an [`IsoquadStatus`]. On failure the message is kept per thread
//! and can be read with [`isoquad_last_error`]. Objects are opaque handles created by `*_new`,
//! `isoquad_trace` or `isoquad_search` and released with the matching `*_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use isoquad::continuation::{self, Curve, Difference, Method, Param, TraceConfig};
use isoquad::search::{self, SearchConfig, SearchResult};
use isoquad::{charpoly_with_gradient, Discretization, Error, Quadrilateral, Scheme};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoquadStatus {
    Ok = 0,
    InvalidQuadrilateral = 1,
    DegenerateJacobian = 2,
    NonPositiveFactor = 3,
    KappaOutOfRange = 4,
    FdRequiresUniformGrid = 5,
    ComplexSpectrum = 6,
    BifurcationDetected = 7,
    InvalidStep = 8,
    InvalidArgument = 9,
    NullPointer = 10,
    OutOfRange = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoquadScheme {
    Fd = 0,
    Sp = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoquadMethod {
    Exact = 0,
    FiniteDifference = 1,
}

/// Shape parameter index: 0 alpha, 1 beta, 2 gamma, 3 delta.
pub type IsoquadParam = u32;

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IsoquadTraceConfig {
    pub explicit_param: IsoquadParam,
    pub t_half: f64,
    pub steps: usize,
    pub method: IsoquadMethod,
    pub fd_increment: f64,
    /// Nonzero selects central differences for the fd method.
    pub central_difference: u8,
    pub singular_tol: f64,
    pub scheme: IsoquadScheme,
    pub kappa: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IsoquadSearchConfig {
    pub l: f64,
    pub h: f64,
    pub epsilon: f64,
    pub scheme: IsoquadScheme,
    pub kappa: f64,
    pub area_prefilter: u8,
    pub area_tol: f64,
    /// 0 evaluates sequentially; negative uses the default thread pool.
    pub threads: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IsoquadTracePoint {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub c: f64,
    pub residual_norm: f64,
    pub det_jacobian: f64,
    pub truncated: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IsoquadCandidate {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub c: f64,
    pub lambdas: [f64; 4],
    pub err: f64,
    pub area: f64,
    pub perimeter: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IsoquadSearchStats {
    pub enumerated: usize,
    pub evaluated: usize,
    pub invalid: usize,
    pub complex_spectrum: usize,
    pub prefiltered: usize,
    pub accepted: usize,
    pub distinct_spectra: usize,
    pub share_area: usize,
    pub share_perimeter: usize,
}

pub struct IsoquadQuad(Quadrilateral);

pub struct IsoquadCurve {
    curve: Curve,
    flags: Vec<bool>,
}

pub struct IsoquadSearch(SearchResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IsoquadStatus {
    match e {
        Error::InvalidQuadrilateral { .. } => IsoquadStatus::InvalidQuadrilateral,
        Error::DegenerateJacobian { .. } => IsoquadStatus::DegenerateJacobian,
        Error::NonPositiveFactor(_) => IsoquadStatus::NonPositiveFactor,
        Error::KappaOutOfRange(_) => IsoquadStatus::KappaOutOfRange,
        Error::FdRequiresUniformGrid(_) => IsoquadStatus::FdRequiresUniformGrid,
        Error::ComplexSpectrum { .. } => IsoquadStatus::ComplexSpectrum,
        Error::BifurcationDetected { .. } => IsoquadStatus::BifurcationDetected,
        Error::InvalidStep { .. } => IsoquadStatus::InvalidStep,
        Error::InvalidArgument(_) => IsoquadStatus::InvalidArgument,
    }
}

enum Fail {
    Core(Error),
    Null(&'static str),
    Range(usize, usize),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IsoquadStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => return IsoquadStatus::Ok,
        Ok(Err(Fail::Core(e))) => (status_of(&e), e.to_string()),
        Ok(Err(Fail::Null(name))) => (IsoquadStatus::NullPointer, format!("{name} is null")),
        Ok(Err(Fail::Range(i, n))) => (IsoquadStatus::OutOfRange, format!("index {i} out of range for length {n}")),
        Err(_) => (IsoquadStatus::Panic, "internal panic".to_string()),
    };
    set_error(msg);
    status
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

fn to_scheme(s: IsoquadScheme) -> Scheme {
    match s {
        IsoquadScheme::Fd => Scheme::Fd,
        IsoquadScheme::Sp => Scheme::Sp,
    }
}

fn param(p: IsoquadParam) -> Result<Param, Fail> {
    match p {
        0 => Ok(Param::Alpha),
        1 => Ok(Param::Beta),
        2 => Ok(Param::Gamma),
        3 => Ok(Param::Delta),
        _ => Err(Error::InvalidArgument(format!("explicit parameter index {p} not in 0..4")).into()),
    }
}

fn trace_config(c: &IsoquadTraceConfig) -> Result<TraceConfig, Fail> {
    Ok(TraceConfig {
        explicit_param: param(c.explicit_param)?,
        t_half: c.t_half,
        steps: c.steps,
        method: match c.method {
            IsoquadMethod::Exact => Method::Exact,
            IsoquadMethod::FiniteDifference => Method::Fd,
        },
        fd_increment: c.fd_increment,
        difference: if c.central_difference != 0 { Difference::Central } else { Difference::Forward },
        singular_tol: c.singular_tol,
        scheme: to_scheme(c.scheme),
        kappa: c.kappa,
    })
}

fn search_config(c: &IsoquadSearchConfig) -> SearchConfig {
    SearchConfig {
        l: c.l,
        h: c.h,
        epsilon: c.epsilon,
        scheme: to_scheme(c.scheme),
        kappa: c.kappa,
        area_prefilter: c.area_prefilter != 0,
        area_tol: c.area_tol,
        threads: usize::try_from(c.threads).ok(),
    }
}

/// Copies the calling thread's last error message into `buf` (NUL terminated, truncated to
/// `len`). Returns the full message length excluding the terminator, 0 when there is none.
#[no_mangle]
pub unsafe extern "C" fn isoquad_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

#[no_mangle]
pub extern "C" fn isoquad_trace_config_default() -> IsoquadTraceConfig {
    let d = TraceConfig::default();
    IsoquadTraceConfig {
        explicit_param: d.explicit_param.index() as u32,
        t_half: d.t_half,
        steps: d.steps,
        method: IsoquadMethod::Exact,
        fd_increment: d.fd_increment,
        central_difference: 0,
        singular_tol: d.singular_tol,
        scheme: IsoquadScheme::Sp,
        kappa: d.kappa,
    }
}

#[no_mangle]
pub extern "C" fn isoquad_search_config_default() -> IsoquadSearchConfig {
    let d = SearchConfig::default();
    IsoquadSearchConfig {
        l: d.l,
        h: d.h,
        epsilon: d.epsilon,
        scheme: IsoquadScheme::Sp,
        kappa: d.kappa,
        area_prefilter: 0,
        area_tol: d.area_tol,
        threads: -1,
    }
}

/// Validates and wraps V3 = (alpha, beta), V4 = (gamma, delta).
#[no_mangle]
pub unsafe extern "C" fn isoquad_quad_new(
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    quad: *mut *mut IsoquadQuad,
) -> IsoquadStatus {
    guard(|| {
        let slot = out(quad, "quad")?;
        let q = Quadrilateral::new(alpha, beta, gamma, delta);
        q.validate()?;
        *slot = Box::into_raw(Box::new(IsoquadQuad(q)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn isoquad_quad_free(quad: *mut IsoquadQuad) {
    if !quad.is_null() {
        drop(Box::from_raw(quad));
    }
}

/// Area and perimeter; either output may be null.
#[no_mangle]
pub unsafe extern "C" fn isoquad_quad_measures(
    quad: *const IsoquadQuad,
    area: *mut f64,
    perimeter: *mut f64,
) -> IsoquadStatus {
    guard(|| {
        let q = &deref(quad, "quad")?.0;
        if let Some(a) = area.as_mut() {
            *a = q.area();
        }
        if let Some(p) = perimeter.as_mut() {
            *p = q.perimeter();
        }
        Ok(())
    })
}

/// Ascending eigenvalues into `lambdas[4]`.
#[no_mangle]
pub unsafe extern "C" fn isoquad_eigenvalues(
    quad: *const IsoquadQuad,
    scheme: IsoquadScheme,
    kappa: f64,
    lambdas: *mut f64,
) -> IsoquadStatus {
    guard(|| {
        let q = &deref(quad, "quad")?.0;
        if lambdas.is_null() {
            return Err(Fail::Null("lambdas"));
        }
        let l = Discretization::new(to_scheme(scheme), kappa)?.eigenvalues(q)?;
        ptr::copy_nonoverlapping(l.as_ptr(), lambdas, 4);
        Ok(())
    })
}

/// `xi[k] = e_{4-k}(lambda)` into `xi[4]`; when `grad` is not null it receives the 4x4 row-major
/// gradient `d xi[k] / d (alpha, beta, gamma, delta)`.
#[no_mangle]
pub unsafe extern "C" fn isoquad_invariants(
    quad: *const IsoquadQuad,
    scheme: IsoquadScheme,
    kappa: f64,
    xi: *mut f64,
    grad: *mut f64,
) -> IsoquadStatus {
    guard(|| {
        let q = &deref(quad, "quad")?.0;
        if xi.is_null() {
            return Err(Fail::Null("xi"));
        }
        let g = charpoly_with_gradient(q, to_scheme(scheme), kappa)?;
        ptr::copy_nonoverlapping(g.xi.as_ptr(), xi, 4);
        if !grad.is_null() {
            for (k, row) in g.grad.iter().enumerate() {
                ptr::copy_nonoverlapping(row.as_ptr(), grad.add(4 * k), 4);
            }
        }
        Ok(())
    })
}

/// Traces the isospectral curve through `quad`. A curve that stops early at a singular point is
/// still returned as a success; see [`isoquad_curve_truncated`].
#[no_mangle]
pub unsafe extern "C" fn isoquad_trace(
    quad: *const IsoquadQuad,
    config: *const IsoquadTraceConfig,
    curve: *mut *mut IsoquadCurve,
) -> IsoquadStatus {
    guard(|| {
        let q = &deref(quad, "quad")?.0;
        let cfg = trace_config(deref(config, "config")?)?;
        let slot = out(curve, "curve")?;
        let c = continuation::trace(q, &cfg)?;
        let flags = c.truncation_flags();
        *slot = Box::into_raw(Box::new(IsoquadCurve { curve: c, flags }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn isoquad_curve_free(curve: *mut IsoquadCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Number of points; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn isoquad_curve_len(curve: *const IsoquadCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.curve.points.len())
}

/// Index of t = 0 in the ascending point list.
#[no_mangle]
pub unsafe extern "C" fn isoquad_curve_start_index(curve: *const IsoquadCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.curve.start_index())
}

/// 1 when either branch stopped early, 0 otherwise (and for a null handle).
#[no_mangle]
pub unsafe extern "C" fn isoquad_curve_truncated(curve: *const IsoquadCurve) -> u8 {
    curve.as_ref().map_or(0, |c| c.curve.is_truncated() as u8)
}

#[no_mangle]
pub unsafe extern "C" fn isoquad_curve_get(
    curve: *const IsoquadCurve,
    index: usize,
    point: *mut IsoquadTracePoint,
) -> IsoquadStatus {
    guard(|| {
        let c = deref(curve, "curve")?;
        let slot = out(point, "point")?;
        let n = c.curve.points.len();
        let p = c.curve.points.get(index).ok_or(Fail::Range(index, n))?;
        let cp = p.point;
        *slot = IsoquadTracePoint {
            t: p.t,
            alpha: cp.alpha,
            beta: cp.beta,
            gamma: cp.gamma,
            delta: cp.delta,
            c: cp.c,
            residual_norm: p.residual_norm,
            det_jacobian: p.scaled_det,
            truncated: c.flags[index] as u8,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn isoquad_search(
    star: *const IsoquadQuad,
    config: *const IsoquadSearchConfig,
    result: *mut *mut IsoquadSearch,
) -> IsoquadStatus {
    guard(|| {
        let q = &deref(star, "star")?.0;
        let cfg = search_config(deref(config, "config")?);
        let slot = out(result, "result")?;
        let r = search::run_search(q, &cfg)?;
        *slot = Box::into_raw(Box::new(IsoquadSearch(r)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn isoquad_search_free(result: *mut IsoquadSearch) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of accepted candidates; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn isoquad_search_len(result: *const IsoquadSearch) -> usize {
    result.as_ref().map_or(0, |r| r.0.candidates.len())
}

#[no_mangle]
pub unsafe extern "C" fn isoquad_search_get(
    result: *const IsoquadSearch,
    index: usize,
    candidate: *mut IsoquadCandidate,
) -> IsoquadStatus {
    guard(|| {
        let r = &deref(result, "result")?.0;
        let slot = out(candidate, "candidate")?;
        let n = r.candidates.len();
        let c = r.candidates.get(index).ok_or(Fail::Range(index, n))?;
        *slot = IsoquadCandidate {
            alpha: c.quad.alpha,
            beta: c.quad.beta,
            gamma: c.quad.gamma,
            delta: c.quad.delta,
            c: c.c,
            lambdas: c.lambdas,
            err: c.err,
            area: c.area,
            perimeter: c.perimeter,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn isoquad_search_stats(
    result: *const IsoquadSearch,
    stats: *mut IsoquadSearchStats,
) -> IsoquadStatus {
    guard(|| {
        let s = &deref(result, "result")?.0.stats;
        *out(stats, "stats")? = IsoquadSearchStats {
            enumerated: s.enumerated,
            evaluated: s.evaluated,
            invalid: s.invalid,
            complex_spectrum: s.complex_spectrum,
            prefiltered: s.prefiltered,
            accepted: s.accepted,
            distinct_spectra: s.distinct_spectra,
            share_area: s.share_area,
            share_perimeter: s.share_perimeter,
        };
        Ok(())
    })
}
