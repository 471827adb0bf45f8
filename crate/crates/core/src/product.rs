//! Matrix classes, switching words and product-based stability bounds.
//!
//! Word convention: `indices[k]` is the matrix applied at step `k + 1`, so a
//! word `[i₁, …, i_L]` realizes `A_{i_L} ⋯ A_{i₁}`. The rightmost factor acts
//! first, mirroring `A(n)A(n−1)⋯A(1)`. Indices are 1-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};

/// Default cap on realized products per enumeration.
pub const DEFAULT_BUDGET: u64 = 2_000_000;
/// Default verdict tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Ordered finite set `{A₁, …, A_M}` of square matrices sharing a dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixClass {
    members: Vec<Mat>,
}

impl MatrixClass {
    pub fn new(members: Vec<Mat>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::invalid("matrix class must have at least one member"))?;
        let dim = first.dim();
        if let Some(bad) = members.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(MatrixClass { members })
    }

    /// Builds a class from its point `(a_{111}, …, a_{MNN})` in `R^{M·N²}`.
    pub fn from_flat(m: usize, n: usize, coords: &[f64]) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::invalid("class needs m ≥ 1 and n ≥ 1"));
        }
        if coords.len() != m * n * n {
            return Err(Error::DimensionMismatch {
                expected: m * n * n,
                found: coords.len(),
            });
        }
        let members = coords
            .chunks(n * n)
            .map(|c| Mat::new(n, c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        MatrixClass::new(members)
    }

    /// The class as a point in `R^{M·N²}`, member by member, row-major.
    pub fn flatten(&self) -> Vec<f64> {
        self.members
            .iter()
            .flat_map(|m| m.as_slice().iter().copied())
            .collect()
    }

    /// Number of members `M`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Shared dimension `N`.
    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn members(&self) -> &[Mat] {
        &self.members
    }

    /// Member by 1-based index.
    pub fn member(&self, index: usize) -> Result<&Mat> {
        if index == 0 || index > self.members.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.members.len(),
            });
        }
        Ok(&self.members[index - 1])
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        for &i in w.indices() {
            self.member(i)?;
        }
        Ok(())
    }
}

/// Finite switching sequence; `indices[k]` acts at step `k + 1` (rightmost-first product).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(indices: Vec<usize>) -> Self {
        Word(indices)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self` followed by `later`; realizes `realize(later) · realize(self)`.
    pub fn then(&self, later: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&later.0);
        Word(v)
    }

    /// The word repeated `times` times.
    pub fn repeat(&self, times: usize) -> Word {
        Word(self.0.repeat(times))
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

/// Realizes `A_{w_L} ⋯ A_{w_1}`; the empty word gives the identity.
pub fn realize_word(class: &MatrixClass, w: &Word) -> Result<Mat> {
    class.check_word(w)?;
    let mut acc = Mat::identity(class.dim());
    let mut scratch = Mat::zeros(class.dim());
    for &i in w.indices() {
        class.members[i - 1].mul_into(&acc, &mut scratch);
        std::mem::swap(&mut acc, &mut scratch);
    }
    Ok(acc)
}

/// Realizes a word with running normalization.
///
/// Returns `(unit, log_scale)` with `realize_word(w) = exp(log_scale) · unit`
/// and `unit` of operator norm 1 (or the zero matrix with `log_scale = -∞`).
pub fn realize_word_scaled(class: &MatrixClass, w: &Word) -> Result<(Mat, f64)> {
    class.check_word(w)?;
    let mut acc = Mat::identity(class.dim());
    let mut scratch = Mat::zeros(class.dim());
    let mut log_scale = 0.0f64;
    for &i in w.indices() {
        class.members[i - 1].mul_into(&acc, &mut scratch);
        std::mem::swap(&mut acc, &mut scratch);
        let n = acc.operator_norm();
        if n == 0.0 {
            return Ok((Mat::zeros(class.dim()), f64::NEG_INFINITY));
        }
        acc.scale_in_place(1.0 / n);
        log_scale += n.ln();
    }
    Ok((acc, log_scale))
}

/// Classification of a bounds computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Some product has spectral radius above 1: products grow without bound.
    ProvenUnstable,
    /// A finite-depth norm bound lies below 1: exponential decay.
    LikelyStable,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::ProvenUnstable => "ProvenUnstable",
            Verdict::LikelyStable => "LikelyStable",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

impl Verdict {
    pub fn classify(best_lower: f64, best_upper: f64, tolerance: f64) -> Self {
        if best_lower > 1.0 + tolerance {
            Verdict::ProvenUnstable
        } else if best_upper < 1.0 - tolerance {
            Verdict::LikelyStable
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Per-depth joint spectral bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub depth: usize,
    /// `max_{|w|=n} ‖A_w‖^{1/n}` for `n = 1..=depth`.
    pub upper_per_depth: Vec<f64>,
    /// `max_{|w|=n} ρ(A_w)^{1/n}` for `n = 1..=depth`.
    pub lower_per_depth: Vec<f64>,
    pub best_upper: f64,
    pub best_lower: f64,
    pub witness_lower: Word,
    pub tolerance: f64,
    pub products: u64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsOptions {
    pub depth: usize,
    pub tolerance: f64,
    pub budget: u64,
}

impl BoundsOptions {
    pub fn new(depth: usize) -> Self {
        BoundsOptions {
            depth,
            tolerance: DEFAULT_TOLERANCE,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }
}

/// Number of products of lengths `1..=depth` over `m` symbols, failing once
/// the running total exceeds `budget`.
pub(crate) fn check_budget(m: usize, depth: usize, budget: u64) -> Result<u64> {
    let mut level: u128 = 1;
    let mut total: u128 = 0;
    for n in 1..=depth {
        level = level.saturating_mul(m as u128);
        total = total.saturating_add(level);
        if total > budget as u128 {
            return Err(Error::BudgetExceeded {
                depth: n,
                required: total,
                budget,
            });
        }
    }
    Ok(total as u64)
}

/// Exhaustive bounds over all words of length `1..=depth`.
pub fn stability_bounds(class: &MatrixClass, depth: usize, tolerance: f64) -> Result<BoundsReport> {
    stability_bounds_with(class, &BoundsOptions::new(depth).tolerance(tolerance))
}

/// [`stability_bounds`] with explicit options.
///
/// Products are realized depth-first by left-multiplying an accumulator, one
/// multiply per word. Every product contributes its norm to the upper bound.
/// The spectral radius is skipped when `‖A_w‖^{1/n}` cannot beat the current
/// depth-`n` lower value, since `ρ ≤ ‖·‖`; this pruning never changes a result.
pub fn stability_bounds_with(class: &MatrixClass, opts: &BoundsOptions) -> Result<BoundsReport> {
    if opts.depth == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    if opts.tolerance.is_nan() || opts.tolerance < 0.0 {
        return Err(Error::invalid("tolerance must be non-negative"));
    }
    let products = check_budget(class.len(), opts.depth, opts.budget)?;
    let depth = opts.depth;
    let m = class.len();
    let dim = class.dim();

    // norm and radius maxima stored as the raw (not yet rooted) values
    let mut upper_raw = vec![0.0f64; depth];
    let mut lower_root = vec![0.0f64; depth];
    let mut lower_witness: Vec<Option<Vec<usize>>> = vec![None; depth];

    let mut stack: Vec<Mat> = (0..=depth).map(|_| Mat::identity(dim)).collect();
    let mut path: Vec<usize> = Vec::with_capacity(depth);
    // next symbol to try at each level
    let mut next: Vec<usize> = vec![0; depth + 1];

    let mut level = 0usize;
    loop {
        if level == depth || next[level] == m {
            if level == 0 {
                break;
            }
            next[level] = 0;
            level -= 1;
            path.pop();
            continue;
        }
        let k = next[level];
        next[level] += 1;
        let (lo, hi) = stack.split_at_mut(level + 1);
        class.members[k].mul_into(&lo[level], &mut hi[0]);
        path.push(k + 1);
        let n = level + 1;
        let prod = &hi[0];

        let norm = prod.operator_norm();
        if norm > upper_raw[n - 1] || upper_raw[n - 1].is_nan() {
            upper_raw[n - 1] = norm;
        }
        let inv = 1.0 / n as f64;
        if norm.powf(inv) > lower_root[n - 1] || lower_witness[n - 1].is_none() {
            let rho = prod.spectral_radius()?.powf(inv);
            if rho > lower_root[n - 1] || lower_witness[n - 1].is_none() {
                lower_root[n - 1] = rho;
                lower_witness[n - 1] = Some(path.clone());
            }
        }
        level += 1;
    }

    let upper_per_depth: Vec<f64> = upper_raw
        .iter()
        .enumerate()
        .map(|(i, v)| v.powf(1.0 / (i + 1) as f64))
        .collect();
    let best_upper = upper_per_depth
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    // first depth attaining the maximum
    let mut best_idx = 0;
    for (i, v) in lower_root.iter().enumerate() {
        if *v > lower_root[best_idx] {
            best_idx = i;
        }
    }
    let best_lower = lower_root[best_idx];
    let witness_lower = Word(lower_witness[best_idx].clone().unwrap_or_default());

    Ok(BoundsReport {
        depth,
        upper_per_depth,
        lower_per_depth: lower_root,
        best_upper,
        best_lower,
        witness_lower,
        tolerance: opts.tolerance,
        products,
        verdict: Verdict::classify(best_lower, best_upper, opts.tolerance),
    })
}

/// Euclidean norms `|x(n)|`, `n = 0..=len(w)`, applying one matrix per step.
pub fn evaluate_trajectory(class: &MatrixClass, w: &Word, x0: &Vector) -> Result<Vec<f64>> {
    if x0.dim() != class.dim() {
        return Err(Error::DimensionMismatch {
            expected: class.dim(),
            found: x0.dim(),
        });
    }
    class.check_word(w)?;
    let mut x = x0.as_slice().to_vec();
    let mut out = Vec::with_capacity(w.len() + 1);
    out.push(x0.norm());
    for &i in w.indices() {
        x = class.members[i - 1].apply_slice(&x);
        out.push(x.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    Ok(out)
}

/// Largest `r` such that `w` splits into `r` consecutive blocks each containing
/// every symbol `1..=m`. Greedy: a block closes as soon as it is complete.
pub fn regularity_index(m: usize, w: &Word) -> usize {
    regularity_profile(m, w).last().copied().unwrap_or(0)
}

/// `r(n)` for every prefix length `n = 0..=len(w)`.
pub fn regularity_profile(m: usize, w: &Word) -> Vec<usize> {
    let mut out = Vec::with_capacity(w.len() + 1);
    out.push(0);
    if m == 0 {
        out.resize(w.len() + 1, 0);
        return out;
    }
    let mut seen = vec![false; m];
    let mut missing = m;
    let mut blocks = 0;
    for &i in w.indices() {
        if (1..=m).contains(&i) && !seen[i - 1] {
            seen[i - 1] = true;
            missing -= 1;
            if missing == 0 {
                blocks += 1;
                seen.iter_mut().for_each(|s| *s = false);
                missing = m;
            }
        }
        out.push(blocks);
    }
    out
}
