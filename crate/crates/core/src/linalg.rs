//! Dense real square matrices and vectors.
//!
//! Matrices are small (the constructions of interest are 2×2), so storage is
//! a flat row-major `Vec<f64>`. Two-dimensional inputs get exact closed forms
//! for the operator norm and spectral radius; larger inputs use Jacobi sweeps
//! on the Gram matrix and normalized repeated squaring respectively.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of squarings in the N > 2 spectral radius iteration.
pub const MAX_SQUARINGS: usize = 60;
/// Relative stabilization threshold of the Gelfand estimate.
pub const SPECTRAL_RADIUS_TOL: f64 = 1e-9;
/// Off-diagonal Frobenius mass (relative to the whole matrix) at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense real square matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatRepr", into = "MatRepr")]
pub struct Mat {
    dim: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatRepr {
    dim: usize,
    entries: Vec<f64>,
}

impl TryFrom<MatRepr> for Mat {
    type Error = Error;

    fn try_from(r: MatRepr) -> Result<Self> {
        Mat::new(r.dim, r.entries)
    }
}

impl From<Mat> for MatRepr {
    fn from(m: Mat) -> Self {
        MatRepr {
            dim: m.dim,
            entries: m.data,
        }
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Mat {
    /// Builds a `dim × dim` matrix from row-major entries.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be at least 1"));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Mat { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Mat::new(dim, data)
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Mat { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        Mat {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry at row `i`, column `j` (zero-based).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks(self.dim)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Checked product `self · rhs`.
    pub fn mul(&self, rhs: &Mat) -> Result<Mat> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        let mut out = Mat::zeros(self.dim);
        self.mul_into(rhs, &mut out);
        Ok(out)
    }

    /// Writes `self · rhs` into `out`. All three must share a dimension.
    pub(crate) fn mul_into(&self, rhs: &Mat, out: &mut Mat) {
        let n = self.dim;
        debug_assert!(rhs.dim == n && out.dim == n);
        if n == 2 {
            let (a, b) = (&self.data, &rhs.data);
            out.data[0] = a[0] * b[0] + a[1] * b[2];
            out.data[1] = a[0] * b[1] + a[1] * b[3];
            out.data[2] = a[2] * b[0] + a[3] * b[2];
            out.data[3] = a[2] * b[1] + a[3] * b[3];
            return;
        }
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.data[i * n + k] * rhs.data[k * n + j];
                }
                out.data[i * n + j] = acc;
            }
        }
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub(crate) fn scale_in_place(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn transpose(&self) -> Mat {
        let n = self.dim;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Mat { dim: n, data }
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(Vector {
            data: self.apply_slice(x.as_slice()),
        })
    }

    pub(crate) fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Euclidean norm of `self · x` without allocating.
    pub(crate) fn apply_norm(&self, x: &[f64]) -> f64 {
        self.rows()
            .map(|row| {
                let v: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Euclidean-induced operator norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        match self.dim {
            1 => self.data[0].abs(),
            2 => {
                let [a, b, c, d] = [self.data[0], self.data[1], self.data[2], self.data[3]];
                // Gram matrix [[p, r], [r, s]] = AᵀA
                let p = a * a + c * c;
                let s = b * b + d * d;
                let r = a * b + c * d;
                let half_gap = 0.5 * (p - s);
                let top = 0.5 * (p + s) + half_gap.hypot(r);
                top.max(0.0).sqrt()
            }
            _ => {
                let gram = self.transpose().mul(self).expect("square");
                symmetric_eigenvalues(&gram)
                    .into_iter()
                    .fold(0.0, f64::max)
                    .max(0.0)
                    .sqrt()
            }
        }
    }

    /// Spectral radius: the largest eigenvalue modulus.
    ///
    /// Closed form for N ≤ 2. For N > 2 the Gelfand limit ‖A^(2^k)‖^(1/2^k)
    /// is followed through normalized squarings; failure to stabilize within
    /// [`MAX_SQUARINGS`] is reported as [`Error::Unconverged`].
    pub fn spectral_radius(&self) -> Result<f64> {
        match self.dim {
            1 => Ok(self.data[0].abs()),
            2 => Ok(spectral_radius_2x2(
                self.data[0],
                self.data[1],
                self.data[2],
                self.data[3],
            )),
            _ => self.spectral_radius_by_squaring(),
        }
    }

    fn spectral_radius_by_squaring(&self) -> Result<f64> {
        let mut b = self.clone();
        let mut scratch = Mat::zeros(self.dim);
        // A^(2^k) = exp(log_scale) · b
        let mut log_scale = 0.0f64;
        let mut prev: Option<f64> = None;
        for k in 0..=MAX_SQUARINGS {
            let f = b.frobenius_norm();
            if f == 0.0 {
                return Ok(0.0);
            }
            let estimate = ((log_scale + f.ln()) / 2f64.powi(k as i32)).exp();
            if let Some(p) = prev {
                if k >= 4 && (estimate - p).abs() <= SPECTRAL_RADIUS_TOL * estimate {
                    return Ok(estimate);
                }
            }
            prev = Some(estimate);
            if k == MAX_SQUARINGS {
                break;
            }
            b.scale_in_place(1.0 / f);
            log_scale = 2.0 * (log_scale + f.ln());
            b.mul_into(&b, &mut scratch);
            std::mem::swap(&mut b, &mut scratch);
        }
        Err(Error::Unconverged {
            iterations: MAX_SQUARINGS,
        })
    }
}

/// ρ of [[a, b], [c, d]] from the characteristic polynomial.
pub(crate) fn spectral_radius_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let half_trace = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    // discriminant of λ² − tr·λ + det, written to avoid cancellation
    let disc = half_gap * half_gap + b * c;
    if disc >= 0.0 {
        half_trace.abs() + disc.sqrt()
    } else {
        // complex pair: |λ|² = det
        (a * d - b * c).max(0.0).sqrt()
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn symmetric_eigenvalues(sym: &Mat) -> Vec<f64> {
    let n = sym.dim;
    let mut a = sym.data.clone();
    let total = sym.frobenius_norm();
    if total == 0.0 {
        return vec![0.0; n];
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Real state vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector {
    data: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(data: Vec<f64>) -> Result<Self> {
        Vector::new(data)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.data
    }
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("vector dimension must be at least 1"));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Vector { data })
    }

    pub fn zeros(dim: usize) -> Self {
        Vector {
            data: vec![0.0; dim],
        }
    }

    /// Standard basis vector `e_i` (zero-based `i`).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut data = vec![0.0; dim];
        data[i] = 1.0;
        Vector { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector {
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Vector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}
