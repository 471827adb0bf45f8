//! The two-parameter matrix families `G(t), H(t)` and `P(φ), R(φ)`, and
//! numerical checks of the identities that make `{G(t), H(t)}` switch between
//! exponentially stable (`t = sin(π/2n)`) and unstable (`t = sin(π/(2n+1))`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::product::{realize_word_scaled, MatrixClass, Word};

pub mod suite;

/// Largest admissible `|t|`; `√(1−t²)` degenerates at ±1.
pub const T_LIMIT: f64 = 1.0 - 1e-9;

/// `P(φ) = [[1, −tan φ], [0, 0]]`, a rank-one projector. Requires `|φ| < π/2`.
pub fn projector(phi: f64) -> Result<Mat> {
    if !phi.is_finite() || phi.abs() >= PI / 2.0 {
        return Err(Error::Domain(format!("P(φ) needs |φ| < π/2, got {phi}")));
    }
    Mat::new(2, vec![1.0, -phi.tan(), 0.0, 0.0])
}

/// `R(φ)`: rotation by the angle `2φ`.
pub fn rotation(phi: f64) -> Mat {
    let (s, c) = (2.0 * phi).sin_cos();
    Mat::new(2, vec![c, -s, s, c]).expect("finite rotation")
}

/// A point on the curve `t ↦ {G(t), H(t)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyPoint {
    pub t: f64,
    /// `arcsin t`
    pub phi: f64,
    pub g: Mat,
    pub h: Mat,
    /// `1 − t⁴`
    pub mu: f64,
}

/// Builds `G(t)` and `H(t)` from their defining entries.
pub fn family_point(t: f64) -> Result<FamilyPoint> {
    if !t.is_finite() || t.abs() > T_LIMIT {
        return Err(Error::Domain(format!(
            "family parameter needs |t| ≤ 1 − 1e-9, got {t}"
        )));
    }
    let mu = 1.0 - t.powi(4);
    let root = (1.0 - t * t).sqrt();
    let g = Mat::new(2, vec![mu, -mu * t / root, 0.0, 0.0])?;
    let diag = mu * (1.0 - 2.0 * t * t);
    let off = mu * 2.0 * t * root;
    let h = Mat::new(2, vec![diag, -off, off, diag])?;
    Ok(FamilyPoint {
        t,
        phi: t.asin(),
        g,
        h,
        mu,
    })
}

impl FamilyPoint {
    /// The class `{G(t), H(t)}`; `G` is member 1 and `H` member 2.
    pub fn class(&self) -> MatrixClass {
        MatrixClass::new(vec![self.g.clone(), self.h.clone()]).expect("2×2 pair")
    }
}

/// `t_n = sin(π/(2n))`. Only `n ≥ 2` is admissible for [`family_point`].
///
/// # Panics
/// If `n == 0`.
pub fn stable_parameter(n: usize) -> f64 {
    assert!(n >= 1, "stable_parameter needs n ≥ 1");
    (PI / (2 * n) as f64).sin()
}

/// `s_n = sin(π/(2n+1))`.
///
/// # Panics
/// If `n == 0`.
pub fn unstable_parameter(n: usize) -> f64 {
    assert!(n >= 1, "unstable_parameter needs n ≥ 1");
    (PI / (2 * n + 1) as f64).sin()
}

/// Scalar `λ` with `P Rᵐ P = λ P` at angle `phi`: `cos((2m+1)φ) / cos φ`.
pub fn pr_collapse_factor(m: usize, phi: f64) -> f64 {
    ((2 * m + 1) as f64 * phi).cos() / phi.cos()
}

/// `λ_{m,n}` at `φ = π/(2n)`.
pub fn collapse_factor(m: usize, n: usize) -> f64 {
    pr_collapse_factor(m, PI / (2 * n) as f64)
}

/// Entrywise residual between the multiplied-out `P Rᵐ P` and `λ·P`.
pub fn master_identity_residual(m: usize, phi: f64) -> Result<f64> {
    let p = projector(phi)?;
    let word = pr_word(m);
    let direct = realize_pr(&word, phi)?;
    Ok(direct.max_abs_diff(&p.scale(pr_collapse_factor(m, phi))))
}

/// `[P, R, …, R, P]` with `m` rotations, in application order.
pub fn pr_word(m: usize) -> Vec<PrFactor> {
    let mut w = Vec::with_capacity(m + 2);
    w.push(PrFactor::P);
    w.extend(std::iter::repeat(PrFactor::R).take(m));
    w.push(PrFactor::P);
    w
}

/// Factor of a word over `{P(φ), R(φ)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrFactor {
    P,
    R,
}

/// Direct product of a `{P, R}` word; `word[0]` acts first.
pub fn realize_pr(word: &[PrFactor], phi: f64) -> Result<Mat> {
    let class = MatrixClass::new(vec![projector(phi)?, rotation(phi)])?;
    let w = Word::new(
        word.iter()
            .map(|f| match f {
                PrFactor::P => 1,
                PrFactor::R => 2,
            })
            .collect(),
    );
    crate::product::realize_word(&class, &w)
}

/// `α · R^q · P^r · R^s` with `r ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub alpha: f64,
    pub q: usize,
    pub r: u8,
    pub s: usize,
}

impl NormalForm {
    pub const IDENTITY: NormalForm = NormalForm {
        alpha: 1.0,
        q: 0,
        r: 0,
        s: 0,
    };

    /// Absorbs one more factor applied after the current product.
    fn absorb(self, next: PrFactor, phi: f64) -> NormalForm {
        match (next, self.r) {
            (PrFactor::R, _) => NormalForm {
                q: self.q + 1,
                ..self
            },
            (PrFactor::P, 0) => NormalForm {
                alpha: self.alpha,
                q: 0,
                r: 1,
                s: self.q + self.s,
            },
            (PrFactor::P, _) => NormalForm {
                alpha: self.alpha * pr_collapse_factor(self.q, phi),
                q: 0,
                r: 1,
                s: self.s,
            },
        }
    }

    pub fn realize(&self, phi: f64) -> Result<Mat> {
        let left = rotation(self.q as f64 * phi);
        let right = rotation(self.s as f64 * phi);
        let core = if self.r == 1 {
            left.mul(&projector(phi)?)?
        } else {
            left
        };
        Ok(core.mul(&right)?.scale(self.alpha))
    }
}

/// Reduces a `{P, R}` word (`word[0]` acts first) at `φ = π/(2n)` to
/// `α Rᵠ Pʳ Rˢ` by absorbing factors one at a time.
pub fn normal_form(word: &[PrFactor], n: usize) -> Result<NormalForm> {
    if n < 2 {
        return Err(Error::Domain(format!("normal form needs n ≥ 2, got {n}")));
    }
    let phi = PI / (2 * n) as f64;
    Ok(word
        .iter()
        .fold(NormalForm::IDENTITY, |nf, &f| nf.absorb(f, phi)))
}

/// [`normal_form`] for an angle that must be of the form `π/(2n)`.
pub fn normal_form_at(word: &[PrFactor], phi: f64) -> Result<NormalForm> {
    let n = admissible_n(phi)?;
    normal_form(word, n)
}

fn admissible_n(phi: f64) -> Result<usize> {
    if !phi.is_finite() || phi <= 0.0 {
        return Err(Error::Domain(format!("angle must be π/(2n), got {phi}")));
    }
    let n = PI / (2.0 * phi);
    let rounded = n.round();
    if rounded < 2.0 || (n - rounded).abs() > 1e-9 * rounded {
        return Err(Error::Domain(format!(
            "angle must be π/(2n) with n ≥ 2, got {phi}"
        )));
    }
    Ok(rounded as usize)
}

/// `(1 − sin⁴(π/(2n+1)))^{n+2} / cos(π/(2n+1))`: the per-period growth of
/// `[G Hⁿ G]` at `t = s_n`.
pub fn growth_factor(n: usize) -> f64 {
    assert!(n >= 1, "growth_factor needs n ≥ 1");
    let x = PI / (2 * n + 1) as f64;
    let log_nu = (-x.sin().powi(4)).ln_1p();
    ((n + 2) as f64 * log_nu).exp() / x.cos()
}

/// Smallest `n ≤ limit` with `growth_factor(n) > 1`.
pub fn growth_threshold(limit: usize) -> Option<usize> {
    (1..=limit).find(|&n| growth_factor(n) > 1.0)
}

/// The periodic word `[G Hⁿ G]ⁱ` over the class `{G(s_n), H(s_n)}`.
pub fn divergent_word(n: usize, periods: usize) -> Result<Word> {
    if n < 2 || periods < 1 {
        return Err(Error::Domain(format!(
            "periodic word needs n ≥ 2 and i ≥ 1, got n={n}, i={periods}"
        )));
    }
    let mut block = Vec::with_capacity(n + 2);
    block.push(1);
    block.extend(std::iter::repeat(2).take(n));
    block.push(1);
    Ok(Word::new(block).repeat(periods))
}

/// `log ‖[G Hⁿ G]ⁱ‖` at `t = s_n` for `i = 1..=periods`, computed with running
/// normalization so large `i` cannot overflow.
pub fn periodic_log_norms(n: usize, periods: usize) -> Result<Vec<f64>> {
    let class = family_point(unstable_parameter(n))?.class();
    let block = divergent_word(n, 1)?;
    let mut out = Vec::with_capacity(periods);
    let mut unit = Mat::identity(2);
    let mut log_scale = 0.0;
    let (block_unit, block_log) = realize_word_scaled(&class, &block)?;
    for _ in 0..periods {
        unit = block_unit.mul(&unit)?;
        log_scale += block_log;
        let norm = unit.operator_norm();
        unit = unit.scale(1.0 / norm);
        log_scale += norm.ln();
        out.push(log_scale);
    }
    Ok(out)
}
