//! Exact criteria for mixing classes, where matrix `A_i` is the identity with
//! row `i` replaced by `(a_{i1}, …, a_{iN})`.
//!
//! For `N = 2` the criterion is a finite list of polynomial sign conditions on
//! `(a11, a12, a21, a22)`. For strictly positive coefficients of any size the
//! class is stable iff the Perron root of `(a_ij)` is at most 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::product::{stability_bounds, BoundsReport, MatrixClass, DEFAULT_TOLERANCE};

/// Slack used when comparing criterion verdicts with product bounds.
pub const CROSS_CHECK_TOL: f64 = 1e-6;
const PERRON_REL_TOL: f64 = 1e-13;
const PERRON_MAX_ITER: usize = 100_000;

/// Rows of the two 2×2 mixing matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixParams2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl MixParams2 {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        MixParams2 { a11, a12, a21, a22 }
    }

    pub fn spec(&self) -> MixClassSpec {
        MixClassSpec {
            rows: vec![vec![self.a11, self.a12], vec![self.a21, self.a22]],
        }
    }
}

/// Coefficient rows `(a_{i1}, …, a_{iN})` of an N-member mixing class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixClassSpec {
    pub rows: Vec<Vec<f64>>,
}

impl MixClassSpec {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let spec = MixClassSpec { rows };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let n = self.rows.len();
        if n == 0 {
            return Err(Error::invalid("mixing class needs at least one row"));
        }
        for row in &self.rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        if let Some(pos) = self.rows.iter().flatten().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// The coefficient matrix `(a_ij)`.
    pub fn coefficients(&self) -> Result<Mat> {
        Mat::from_rows(&self.rows)
    }

    /// `{A_1, …, A_N}`.
    pub fn class(&self) -> Result<MatrixClass> {
        let members = (1..=self.dim())
            .map(|i| mixing_matrix(self, i))
            .collect::<Result<Vec<_>>>()?;
        MatrixClass::new(members)
    }
}

/// Identity with row `i` (1-based) replaced by the `i`-th coefficient row.
pub fn mixing_matrix(spec: &MixClassSpec, i: usize) -> Result<Mat> {
    spec.validate()?;
    let n = spec.dim();
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();
    rows[i - 1] = spec.rows[i - 1].clone();
    Mat::from_rows(&rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionVerdict {
    Stable,
    NotStable,
}

impl std::fmt::Display for CriterionVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CriterionVerdict::Stable => "Stable",
            CriterionVerdict::NotStable => "NotStable",
        })
    }
}

/// The five alternative condition systems of the 2×2 criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum R2Case {
    /// `a11 = a22 = 1`, `a12 = a21 = 0`
    A,
    /// `a11 = 1`, `a12 = 0`, `a22 = −1`
    B,
    /// `a11 = −1`, `a21 = 0`, `a22 = 1`
    C,
    /// `a11 = a22 = −1`, `0 ≤ a12, a21 < 4`
    D,
    /// `|a11|, |a22| < 1`, `−(1−|a11|)(1−|a22|) ≤ a12·a21 ≤ (1−a11)(1−a22)`
    E,
}

impl R2Case {
    pub const ALL: [R2Case; 5] = [R2Case::A, R2Case::B, R2Case::C, R2Case::D, R2Case::E];

    /// Whether this case's relations hold, equalities within `tau` and
    /// inequalities widened by `tau`.
    pub fn holds(self, p: &MixParams2, tau: f64) -> bool {
        let eq = |x: f64, y: f64| (x - y).abs() <= tau;
        let lt = |x: f64, y: f64| x < y + tau;
        let le = |x: f64, y: f64| x <= y + tau;
        let MixParams2 { a11, a12, a21, a22 } = *p;
        match self {
            R2Case::A => eq(a11, 1.0) && eq(a12, 0.0) && eq(a21, 0.0) && eq(a22, 1.0),
            R2Case::B => eq(a11, 1.0) && eq(a12, 0.0) && eq(a22, -1.0),
            R2Case::C => eq(a11, -1.0) && eq(a21, 0.0) && eq(a22, 1.0),
            R2Case::D => {
                eq(a11, -1.0)
                    && eq(a22, -1.0)
                    && le(0.0, a12)
                    && le(0.0, a21)
                    && lt(a12, 4.0)
                    && lt(a21, 4.0)
            }
            R2Case::E => {
                let prod = a12 * a21;
                lt(a11.abs(), 1.0)
                    && lt(a22.abs(), 1.0)
                    && le(-(1.0 - a11.abs()) * (1.0 - a22.abs()), prod)
                    && le(prod, (1.0 - a11) * (1.0 - a22))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct R2Outcome {
    pub verdict: CriterionVerdict,
    /// First matching case in order a–e.
    pub case: Option<R2Case>,
}

/// Stable iff one of the cases a–e holds.
pub fn r2_criterion(p: &MixParams2, tau: f64) -> R2Outcome {
    match R2Case::ALL.into_iter().find(|c| c.holds(p, tau)) {
        Some(case) => R2Outcome {
            verdict: CriterionVerdict::Stable,
            case: Some(case),
        },
        None => R2Outcome {
            verdict: CriterionVerdict::NotStable,
            case: None,
        },
    }
}

/// Dominant eigenvalue of a matrix with strictly positive entries.
///
/// Power iteration bracketed by the Collatz–Wielandt bounds
/// `min_i (Ax)_i/x_i ≤ ρ ≤ max_i (Ax)_i/x_i`, which close geometrically.
pub fn perron_root(a: &Mat) -> Result<f64> {
    if let Some(pos) = a.as_slice().iter().position(|v| v.is_nan() || *v <= 0.0) {
        return Err(Error::invalid(format!(
            "Perron root needs strictly positive entries; entry {pos} is {}",
            a.as_slice()[pos]
        )));
    }
    let n = a.dim();
    let mut x = vec![1.0; n];
    for _ in 0..PERRON_MAX_ITER {
        let y = a.apply_slice(&x);
        let (lo, hi) = y
            .iter()
            .zip(&x)
            .map(|(yi, xi)| yi / xi)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
                (lo.min(r), hi.max(r))
            });
        if hi - lo <= PERRON_REL_TOL * hi {
            return Ok(0.5 * (lo + hi));
        }
        let top = y.iter().copied().fold(0.0, f64::max);
        x = y.into_iter().map(|v| v / top).collect();
    }
    Err(Error::Unconverged {
        iterations: PERRON_MAX_ITER,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RplusOutcome {
    pub verdict: CriterionVerdict,
    pub perron_root: f64,
}

/// Stable iff the Perron root of `(a_ij)` is at most `1 + tau`. All
/// coefficients must be strictly positive.
pub fn rplus_criterion(spec: &MixClassSpec, tau: f64) -> Result<RplusOutcome> {
    spec.validate()?;
    let root = perron_root(&spec.coefficients()?)?;
    let verdict = if root <= 1.0 + tau {
        CriterionVerdict::Stable
    } else {
        CriterionVerdict::NotStable
    };
    Ok(RplusOutcome {
        verdict,
        perron_root: root,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Agreement {
    /// Bounds are consistent with the verdict.
    Agree,
    /// `NotStable`, but no product up to this depth grows.
    NotWitnessed,
    /// `Stable`, yet some product has spectral radius above 1.
    Contradiction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub verdict: CriterionVerdict,
    pub agreement: Agreement,
    /// First depth at which the lower bound exceeds the expectation, if any.
    pub witness_depth: Option<usize>,
    pub bounds: BoundsReport,
}

/// Compares a criterion verdict with exhaustive product bounds up to `depth`.
pub fn cross_validate(
    class: &MatrixClass,
    verdict: CriterionVerdict,
    depth: usize,
) -> Result<CrossValidation> {
    let bounds = stability_bounds(class, depth, DEFAULT_TOLERANCE)?;
    let (agreement, witness_depth) = match verdict {
        CriterionVerdict::Stable => {
            let bad = bounds
                .lower_per_depth
                .iter()
                .position(|l| *l > 1.0 + CROSS_CHECK_TOL);
            match bad {
                Some(i) => (Agreement::Contradiction, Some(i + 1)),
                None => (Agreement::Agree, None),
            }
        }
        CriterionVerdict::NotStable => {
            let seen = bounds
                .lower_per_depth
                .iter()
                .position(|l| *l > 1.0 - CROSS_CHECK_TOL);
            match seen {
                Some(i) => (Agreement::Agree, Some(i + 1)),
                None => (Agreement::NotWitnessed, None),
            }
        }
    };
    Ok(CrossValidation {
        verdict,
        agreement,
        witness_depth,
        bounds,
    })
}

pub fn cross_validate_r2(p: &MixParams2, tau: f64, depth: usize) -> Result<CrossValidation> {
    let outcome = r2_criterion(p, tau);
    cross_validate(&p.spec().class()?, outcome.verdict, depth)
}

pub fn cross_validate_rplus(
    spec: &MixClassSpec,
    tau: f64,
    depth: usize,
) -> Result<CrossValidation> {
    let outcome = rplus_criterion(spec, tau)?;
    cross_validate(&spec.class()?, outcome.verdict, depth)
}
