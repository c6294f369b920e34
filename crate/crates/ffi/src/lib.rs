//! C ABI over `ballseries`.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free`. Every fallible call returns a [`BsStatus`]; on failure
//! `bs_last_error_message` describes the error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ballseries::config::GroupConfig;
use ballseries::constants::c_ball;
use ballseries::geometry::{
    apply_automorphism, bergman_kernel_power, build_elliptic, build_rotation, build_translation, hyperbolic_distance,
    jacobian, pairing, BallAutomorphism, BallPoint, KernelContext,
};
use ballseries::poincare::{enumerate, theta_scalar, GroupTruncation};
use ballseries::quadrature::QuadratureConfig;
use ballseries::submanifold::{example_by_name, i1_cr_ball, i1_pairing, Chart};
use ballseries::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    OutsideBall = 4,
    NotInGroup = 5,
    Numerical = 6,
    Convergence = 7,
    TruncationOverflow = 8,
    Representation = 9,
    Precondition = 10,
    Config = 11,
    Panic = 12,
}

pub struct BsPoint(BallPoint);

pub struct BsAutomorphism(BallAutomorphism);

pub struct BsTruncation(GroupTruncation);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BsStatus {
    match e {
        Error::DimensionMismatch { .. } => BsStatus::DimensionMismatch,
        Error::OutsideBall { .. } => BsStatus::OutsideBall,
        Error::InvalidArgument(_) => BsStatus::InvalidArgument,
        Error::NotInGroup(_) => BsStatus::NotInGroup,
        Error::SingularMap(_) | Error::NumericalDomain(_) | Error::DegeneratePhase(_) | Error::UndefinedResidual(_) => {
            BsStatus::Numerical
        }
        Error::Convergence { .. } => BsStatus::Convergence,
        Error::TruncationOverflow { .. } => BsStatus::TruncationOverflow,
        Error::InconsistentRepresentation(_) => BsStatus::Representation,
        Error::Precondition(_) => BsStatus::Precondition,
        Error::Config(_) => BsStatus::Config,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BsStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            BsStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic");
            BsStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument(format!("{what} is not UTF-8"))))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bs_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Creates a point of `B^n` from `n` real and `n` imaginary parts.
///
/// # Safety
/// `re` and `im` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bs_point_new(re: *const f64, im: *const f64, n: usize, out: *mut *mut BsPoint) -> BsStatus {
    guard(|| {
        let re = slice(re, n, "re")?;
        let im = slice(im, n, "im")?;
        let coords = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let p = BallPoint::new(coords)?;
        put(out, Box::into_raw(Box::new(BsPoint(p))), "out")
    })
}

/// # Safety
/// `p` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn bs_point_free(p: *mut BsPoint) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Complex dimension, 0 for a null handle.
///
/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bs_point_dim(p: *const BsPoint) -> usize {
    p.as_ref().map_or(0, |p| p.0.dim())
}

/// Copies the coordinates into `re` and `im`, each of length `n`.
///
/// # Safety
/// `p` must be a live handle; `re` and `im` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn bs_point_coords(p: *const BsPoint, re: *mut f64, im: *mut f64, n: usize) -> BsStatus {
    guard(|| {
        let p = get(p, "point")?;
        if n != p.0.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.0.dim(),
                got: n,
            }
            .into());
        }
        if re.is_null() || im.is_null() {
            return Err(Failure::Null("re/im"));
        }
        for (j, c) in p.0.coords().iter().enumerate() {
            re.add(j).write(c.re);
            im.add(j).write(c.im);
        }
        Ok(())
    })
}

/// `<z, w> = sum z_j conj(w_j) - 1`.
///
/// # Safety
/// Handles must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn bs_pairing(
    z: *const BsPoint,
    w: *const BsPoint,
    out_re: *mut f64,
    out_im: *mut f64,
) -> BsStatus {
    guard(|| {
        let v = pairing(&get(z, "z")?.0, &get(w, "w")?.0)?;
        put(out_re, v.re, "out_re")?;
        put(out_im, v.im, "out_im")
    })
}

/// `K(z, w)^k`.
///
/// # Safety
/// Handles must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn bs_kernel_power(
    z: *const BsPoint,
    w: *const BsPoint,
    k: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> BsStatus {
    guard(|| {
        let z = &get(z, "z")?.0;
        let ctx = KernelContext::new(z.dim(), k)?;
        let v = bergman_kernel_power(z, &get(w, "w")?.0, &ctx)?;
        put(out_re, v.re, "out_re")?;
        put(out_im, v.im, "out_im")
    })
}

/// Bergman distance.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bs_distance(z: *const BsPoint, w: *const BsPoint, out: *mut f64) -> BsStatus {
    guard(|| {
        let d = hyperbolic_distance(&get(z, "z")?.0, &get(w, "w")?.0)?;
        put(out, d, "out")
    })
}

unsafe fn new_automorphism(
    out: *mut *mut BsAutomorphism,
    build: impl FnOnce() -> ballseries::Result<BallAutomorphism>,
) -> BsStatus {
    guard(|| {
        let g = build()?;
        put(out, Box::into_raw(Box::new(BsAutomorphism(g))), "out")
    })
}

/// Automorphism of `B^n` from an `(n+1) x (n+1)` row-major matrix in `SU(n,1)`.
///
/// # Safety
/// `re` and `im` must hold `(n+1)^2` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bs_automorphism_from_matrix(
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut *mut BsAutomorphism,
) -> BsStatus {
    let size = n + 1;
    let (re, im) = match (slice(re, size * size, "re"), slice(im, size * size, "im")) {
        (Ok(a), Ok(b)) => (a, b),
        _ => {
            set_error("null pointer: re/im");
            return BsStatus::NullPointer;
        }
    };
    new_automorphism(out, || {
        BallAutomorphism::new(DMatrix::from_fn(size, size, |r, c| {
            Complex64::new(re[r * size + c], im[r * size + c])
        }))
    })
}

/// Boost of `B^1` taking 0 to `a`.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bs_automorphism_translation(
    a_re: f64,
    a_im: f64,
    out: *mut *mut BsAutomorphism,
) -> BsStatus {
    new_automorphism(out, || build_translation(Complex64::new(a_re, a_im)))
}

/// Rotation `z -> e^{i theta} z` of `B^1`.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bs_automorphism_rotation(theta: f64, out: *mut *mut BsAutomorphism) -> BsStatus {
    new_automorphism(out, || Ok(build_rotation(theta)))
}

/// Rotation by `theta` about `fix` in `B^1`.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bs_automorphism_elliptic(
    fix_re: f64,
    fix_im: f64,
    theta: f64,
    out: *mut *mut BsAutomorphism,
) -> BsStatus {
    new_automorphism(out, || build_elliptic(Complex64::new(fix_re, fix_im), theta))
}

/// `a . b`, acting as `b` first.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bs_automorphism_compose(
    a: *const BsAutomorphism,
    b: *const BsAutomorphism,
    out: *mut *mut BsAutomorphism,
) -> BsStatus {
    guard(|| {
        let a = &get(a, "a")?.0;
        let b = &get(b, "b")?.0;
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            }
            .into());
        }
        put(out, Box::into_raw(Box::new(BsAutomorphism(a.compose(b)))), "out")
    })
}

/// # Safety
/// Handle must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bs_automorphism_inverse(
    g: *const BsAutomorphism,
    out: *mut *mut BsAutomorphism,
) -> BsStatus {
    guard(|| {
        let inv = get(g, "g")?.0.inverse();
        put(out, Box::into_raw(Box::new(BsAutomorphism(inv))), "out")
    })
}

/// # Safety
/// `g` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn bs_automorphism_free(g: *mut BsAutomorphism) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// `gamma(z)` as a new point handle.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bs_automorphism_apply(
    g: *const BsAutomorphism,
    z: *const BsPoint,
    out: *mut *mut BsPoint,
) -> BsStatus {
    guard(|| {
        let w = apply_automorphism(&get(g, "g")?.0, &get(z, "z")?.0)?;
        put(out, Box::into_raw(Box::new(BsPoint(w))), "out")
    })
}

/// Complex Jacobian determinant `J(gamma, z)`.
///
/// # Safety
/// Handles must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn bs_automorphism_jacobian(
    g: *const BsAutomorphism,
    z: *const BsPoint,
    out_re: *mut f64,
    out_im: *mut f64,
) -> BsStatus {
    guard(|| {
        let j = jacobian(&get(g, "g")?.0, &get(z, "z")?.0)?;
        put(out_re, j.re, "out_re")?;
        put(out_im, j.im, "out_im")
    })
}

/// `c(B^n, k)` and its natural log.
///
/// # Safety
/// Outputs writable; `out_value` may be null.
#[no_mangle]
pub unsafe extern "C" fn bs_c_ball(n: usize, k: u32, out_value: *mut f64, out_log: *mut f64) -> BsStatus {
    guard(|| {
        let c = c_ball(n, k)?;
        if !out_value.is_null() {
            out_value.write(c.value());
        }
        put(out_log, c.value_log, "out_log")
    })
}

/// `I_1(k)` for a worked example (`segment`, `circle`, `disc`,
/// `segment_disc`, `cr_ball`); pass NaN for `beta` when unused.
///
/// # Safety
/// `example` must be a NUL-terminated string; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn bs_example_i1(
    example: *const c_char,
    n: usize,
    alpha: f64,
    beta: f64,
    k: u32,
    rel_tol: f64,
    out_value: *mut f64,
    out_rel_err: *mut f64,
) -> BsStatus {
    guard(|| {
        let name = text(example, "example")?;
        let beta = (!beta.is_nan()).then_some(beta);
        let ex = example_by_name(name, n, alpha, beta)?;
        let ctx = KernelContext::new(ex.x.ambient_dim(), k)?;
        let quad = QuadratureConfig::adaptive(rel_tol);
        quad.validate()?;
        let r = match ex.x.chart() {
            Chart::CrHemiball { alpha } => i1_cr_ball(*alpha, &ctx, &quad)?,
            _ => i1_pairing(&ex.x, &ex.y, &ctx, &quad)?,
        };
        put(out_value, r.value, "out_value")?;
        put(out_rel_err, r.est_rel_err, "out_rel_err")
    })
}

/// Enumerates a group (built-in name or JSON file) up to word length `radius`.
///
/// # Safety
/// `group` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bs_truncation_new(
    group: *const c_char,
    radius: usize,
    cap: usize,
    out: *mut *mut BsTruncation,
) -> BsStatus {
    guard(|| {
        let (spec, rep) = GroupConfig::load(text(group, "group")?)?.build()?;
        let t = enumerate(&spec, &rep, radius, cap)?;
        put(out, Box::into_raw(Box::new(BsTruncation(t))), "out")
    })
}

/// Number of elements, 0 for a null handle.
///
/// # Safety
/// `t` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bs_truncation_len(t: *const BsTruncation) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// # Safety
/// `t` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn bs_truncation_free(t: *mut BsTruncation) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Truncated scalar Poincare series `sum (K(gamma z, p) J(gamma, z))^k`.
///
/// # Safety
/// Handles must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn bs_theta_scalar(
    t: *const BsTruncation,
    p: *const BsPoint,
    z: *const BsPoint,
    k: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> BsStatus {
    guard(|| {
        let t = &get(t, "truncation")?.0;
        let ctx = KernelContext::for_series(t.dim(), k)?;
        let v = theta_scalar(&get(p, "p")?.0, &get(z, "z")?.0, &ctx, t)?;
        put(out_re, v.re, "out_re")?;
        put(out_im, v.im, "out_im")
    })
}
