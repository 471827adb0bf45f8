//! C ABI for `switchstab`.
//!
//! Every fallible function returns an [`SsStatus`]; on failure a description
//! is available from [`ss_last_error_message`] on the same thread. Objects are
//! exposed as opaque handles that the caller releases with the matching
//! `*_free` function. Member and word indices are 1-based, as in the Rust API.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use switchstab::criteria::{
    r2_criterion, rplus_criterion, CriterionVerdict, MixClassSpec, MixParams2, R2Case,
};
use switchstab::families::{family_point, growth_factor};
use switchstab::norm::{build_norm_with, Rate};
use switchstab::product::{regularity_index, stability_bounds_with, BoundsOptions};
use switchstab::{Error, MatrixClass, NormApprox, Vector, Verdict, Word};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    NonFinite = 4,
    IndexOutOfRange = 5,
    Domain = 6,
    BudgetExceeded = 7,
    Unconverged = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsVerdict {
    ProvenUnstable = 0,
    LikelyStable = 1,
    Inconclusive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsCriterionVerdict {
    Stable = 0,
    NotStable = 1,
}

/// Matching case of the 2×2 mixing criterion; `None` when not stable.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsR2Case {
    None = 0,
    A = 1,
    B = 2,
    C = 3,
    D = 4,
    E = 5,
}

/// Summary of a bounds computation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsBounds {
    pub depth: usize,
    pub best_upper: f64,
    pub best_lower: f64,
    pub products: u64,
    pub verdict: SsVerdict,
}

/// Opaque matrix class.
pub struct SsClass(MatrixClass);

/// Opaque truncated extremal norm.
pub struct SsNorm(NormApprox);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(SsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DimensionMismatch { .. } => SsStatus::DimensionMismatch,
            Error::NonFinite(_) => SsStatus::NonFinite,
            Error::IndexOutOfRange { .. } => SsStatus::IndexOutOfRange,
            Error::InvalidInput(_) => SsStatus::InvalidInput,
            Error::Domain(_) => SsStatus::Domain,
            Error::BudgetExceeded { .. } => SsStatus::BudgetExceeded,
            Error::Unconverged { .. } => SsStatus::Unconverged,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SsStatus::NullPointer, format!("{what} is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            SsStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn verdict(v: Verdict) -> SsVerdict {
    match v {
        Verdict::ProvenUnstable => SsVerdict::ProvenUnstable,
        Verdict::LikelyStable => SsVerdict::LikelyStable,
        Verdict::Inconclusive => SsVerdict::Inconclusive,
    }
}

fn criterion_verdict(v: CriterionVerdict) -> SsCriterionVerdict {
    match v {
        CriterionVerdict::Stable => SsCriterionVerdict::Stable,
        CriterionVerdict::NotStable => SsCriterionVerdict::NotStable,
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a class of `m` matrices of dimension `n` from `m·n·n` row-major
/// entries, member after member.
///
/// # Safety
/// `coords` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_class_new(
    m: usize,
    n: usize,
    coords: *const f64,
    len: usize,
    out_class: *mut *mut SsClass,
) -> SsStatus {
    guard(|| {
        let slot = out(out_class, "out_class")?;
        let coords = slice(coords, len, "coords")?;
        let class = MatrixClass::from_flat(m, n, coords)?;
        *slot = Box::into_raw(Box::new(SsClass(class)));
        Ok(())
    })
}

/// The two-member class `{G(t), H(t)}`.
///
/// # Safety
/// `out_class` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_class_family(t: f64, out_class: *mut *mut SsClass) -> SsStatus {
    guard(|| {
        let slot = out(out_class, "out_class")?;
        let class = family_point(t)?.class();
        *slot = Box::into_raw(Box::new(SsClass(class)));
        Ok(())
    })
}

/// # Safety
/// `class` must come from a constructor in this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ss_class_free(class: *mut SsClass) {
    if !class.is_null() {
        drop(Box::from_raw(class));
    }
}

/// Number of members and their dimension.
///
/// # Safety
/// `class` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_class_shape(
    class: *const SsClass,
    out_m: *mut usize,
    out_n: *mut usize,
) -> SsStatus {
    guard(|| {
        let class = class.as_ref().ok_or_else(|| null("class"))?;
        *out(out_m, "out_m")? = class.0.len();
        *out(out_n, "out_n")? = class.0.dim();
        Ok(())
    })
}

/// Exhaustive joint spectral bounds up to `depth`.
///
/// When `per_depth_len ≥ depth`, the per-depth upper and lower values are
/// copied into `upper_per_depth` and `lower_per_depth` (either may be NULL).
/// A nonzero `per_depth_len` smaller than `depth` is rejected.
///
/// # Safety
/// `class` must be a live handle, `out_bounds` writable and each non-NULL
/// buffer writable for `per_depth_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ss_stability_bounds(
    class: *const SsClass,
    depth: usize,
    tolerance: f64,
    budget: u64,
    out_bounds: *mut SsBounds,
    upper_per_depth: *mut f64,
    lower_per_depth: *mut f64,
    per_depth_len: usize,
) -> SsStatus {
    guard(|| {
        let class = class.as_ref().ok_or_else(|| null("class"))?;
        let slot = out(out_bounds, "out_bounds")?;
        if per_depth_len != 0 && per_depth_len < depth {
            return Err(Failure(
                SsStatus::BufferTooSmall,
                format!("per-depth buffers hold {per_depth_len} values, need {depth}"),
            ));
        }
        let opts = BoundsOptions::new(depth)
            .tolerance(tolerance)
            .budget(budget);
        let r = stability_bounds_with(&class.0, &opts)?;
        if per_depth_len != 0 {
            if !upper_per_depth.is_null() {
                ptr::copy_nonoverlapping(r.upper_per_depth.as_ptr(), upper_per_depth, depth);
            }
            if !lower_per_depth.is_null() {
                ptr::copy_nonoverlapping(r.lower_per_depth.as_ptr(), lower_per_depth, depth);
            }
        }
        *slot = SsBounds {
            depth: r.depth,
            best_upper: r.best_upper,
            best_lower: r.best_lower,
            products: r.products,
            verdict: verdict(r.verdict),
        };
        Ok(())
    })
}

/// Per-period growth of the periodic family word at `s_n`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_growth_factor(n: usize, out_value: *mut f64) -> SsStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        if n == 0 {
            return Err(Failure(
                SsStatus::Domain,
                "growth factor needs n ≥ 1".to_string(),
            ));
        }
        *slot = growth_factor(n);
        Ok(())
    })
}

/// Largest number of consecutive blocks, each using all `m` symbols, that
/// the word splits into.
///
/// # Safety
/// `indices` must point to `len` readable values; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_regularity_index(
    m: usize,
    indices: *const usize,
    len: usize,
    out_value: *mut usize,
) -> SsStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        let indices = slice(indices, len, "indices")?;
        if m == 0 {
            return Err(Failure(
                SsStatus::InvalidInput,
                "alphabet size must be positive".to_string(),
            ));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > m) {
            return Err(Error::IndexOutOfRange { index: bad, len: m }.into());
        }
        *slot = regularity_index(m, &Word::new(indices.to_vec()));
        Ok(())
    })
}

/// Exact criterion for the two-member mixing class with rows
/// `(a11, a12)` and `(a21, a22)`.
///
/// # Safety
/// Both out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_r2_criterion(
    a11: f64,
    a12: f64,
    a21: f64,
    a22: f64,
    tau: f64,
    out_verdict: *mut SsCriterionVerdict,
    out_case: *mut SsR2Case,
) -> SsStatus {
    guard(|| {
        let v = out(out_verdict, "out_verdict")?;
        let c = out(out_case, "out_case")?;
        if ![a11, a12, a21, a22, tau].iter().all(|x| x.is_finite()) || tau < 0.0 {
            return Err(Failure(
                SsStatus::InvalidInput,
                "coefficients must be finite and tau ≥ 0".to_string(),
            ));
        }
        let r = r2_criterion(&MixParams2::new(a11, a12, a21, a22), tau);
        *v = criterion_verdict(r.verdict);
        *c = match r.case {
            None => SsR2Case::None,
            Some(R2Case::A) => SsR2Case::A,
            Some(R2Case::B) => SsR2Case::B,
            Some(R2Case::C) => SsR2Case::C,
            Some(R2Case::D) => SsR2Case::D,
            Some(R2Case::E) => SsR2Case::E,
        };
        Ok(())
    })
}

/// Criterion for mixing classes with strictly positive coefficients, given as
/// an `n×n` row-major array.
///
/// # Safety
/// `coefficients` must point to `n·n` readable doubles; both out pointers
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_rplus_criterion(
    coefficients: *const f64,
    n: usize,
    tau: f64,
    out_verdict: *mut SsCriterionVerdict,
    out_perron_root: *mut f64,
) -> SsStatus {
    guard(|| {
        let v = out(out_verdict, "out_verdict")?;
        let root = out(out_perron_root, "out_perron_root")?;
        let flat = slice(coefficients, n.saturating_mul(n), "coefficients")?;
        let rows = flat.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        let r = rplus_criterion(&MixClassSpec::new(rows)?, tau)?;
        *v = criterion_verdict(r.verdict);
        *root = r.perron_root;
        Ok(())
    })
}

/// Builds the depth-`depth` truncated extremal norm with rate `q`. A `q` of
/// zero or below selects the rate automatically from product bounds.
///
/// # Safety
/// `class` must be a live handle and `out_norm` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_norm_build(
    class: *const SsClass,
    q: f64,
    depth: usize,
    out_norm: *mut *mut SsNorm,
) -> SsStatus {
    guard(|| {
        let class = class.as_ref().ok_or_else(|| null("class"))?;
        let slot = out(out_norm, "out_norm")?;
        let rate = if q > 0.0 { Rate::Fixed(q) } else { Rate::Auto };
        let na = build_norm_with(&class.0, rate, depth)?;
        *slot = Box::into_raw(Box::new(SsNorm(na)));
        Ok(())
    })
}

/// Rate `q` of a built norm.
///
/// # Safety
/// `norm` must be a live handle and `out_q` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_norm_rate(norm: *const SsNorm, out_q: *mut f64) -> SsStatus {
    guard(|| {
        let norm = norm.as_ref().ok_or_else(|| null("norm"))?;
        *out(out_q, "out_q")? = norm.0.q();
        Ok(())
    })
}

/// Norm of the vector `x` of length `len`.
///
/// # Safety
/// `norm` must be a live handle, `x` readable for `len` doubles and
/// `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_norm_evaluate(
    norm: *const SsNorm,
    x: *const f64,
    len: usize,
    out_value: *mut f64,
) -> SsStatus {
    guard(|| {
        let norm = norm.as_ref().ok_or_else(|| null("norm"))?;
        let slot = out(out_value, "out_value")?;
        let x = Vector::new(slice(x, len, "x")?.to_vec())?;
        *slot = norm.0.evaluate(&x)?;
        Ok(())
    })
}

/// # Safety
/// `norm` must come from [`ss_norm_build`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ss_norm_free(norm: *mut SsNorm) {
    if !norm.is_null() {
        drop(Box::from_raw(norm));
    }
}
