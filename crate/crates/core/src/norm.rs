//! Truncated extremal norm of a matrix class.
//!
//! For a rate `q` and depth `D` the norm is
//! `‖x‖_D = max_{0≤n≤D} q⁻ⁿ · max_{|w|=n} |A_w x|`, with `|·|` Euclidean.
//! Every member then satisfies `‖A_k x‖_{D−1} ≤ q ‖x‖_D` exactly, since
//! `A_w A_k` is again a product one level deeper. The untruncated inequality
//! `‖A_k x‖_D ≤ q ‖x‖_D` can fail at the top level and is only reported.

use std::collections::HashMap;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::product::{stability_bounds, MatrixClass, DEFAULT_BUDGET, DEFAULT_TOLERANCE};

/// Relative entrywise distance below which two products are merged.
pub const DEDUP_TOL: f64 = 1e-12;
/// Slack allowed in the contraction inequality.
pub const CONTRACTION_TOL: f64 = 1e-10;
/// Margin added to the bound-derived rate when `q = auto`.
pub const AUTO_RATE_MARGIN: f64 = 1e-6;
/// Random sphere points drawn by [`default_samples`].
pub const DEFAULT_SAMPLE_COUNT: usize = 1000;

/// Decay rate choice for [`build_norm_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rate {
    Fixed(f64),
    /// Best upper bound at half the depth, plus [`AUTO_RATE_MARGIN`].
    Auto,
}

impl FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Rate::Auto);
        }
        s.parse::<f64>()
            .map(Rate::Fixed)
            .map_err(|_| Error::invalid(format!("rate must be a number or \"auto\", got {s:?}")))
    }
}

/// Stored product levels of the truncated norm.
#[derive(Debug, Clone)]
pub struct NormApprox {
    class: MatrixClass,
    q: f64,
    levels: Vec<Vec<Mat>>,
}

/// Builds the depth-`depth` norm with rate `q ∈ (0, 1]`.
pub fn build_norm(class: &MatrixClass, q: f64, depth: usize) -> Result<NormApprox> {
    build_norm_budgeted(class, q, depth, DEFAULT_BUDGET)
}

pub fn build_norm_with(class: &MatrixClass, rate: Rate, depth: usize) -> Result<NormApprox> {
    let q = match rate {
        Rate::Fixed(q) => q,
        Rate::Auto => auto_rate(class, depth)?,
    };
    build_norm(class, q, depth)
}

/// Rate certified by a depth-`⌈D/2⌉` bounds run.
pub fn auto_rate(class: &MatrixClass, depth: usize) -> Result<f64> {
    let half = depth.div_ceil(2).max(1);
    let bounds = stability_bounds(class, half, DEFAULT_TOLERANCE)?;
    let q = bounds.best_upper + AUTO_RATE_MARGIN;
    if q > 1.0 {
        return Err(Error::Domain(format!(
            "no rate q ≤ 1 certified at depth {half}: best upper bound {}",
            bounds.best_upper
        )));
    }
    Ok(q)
}

pub fn build_norm_budgeted(
    class: &MatrixClass,
    q: f64,
    depth: usize,
    budget: u64,
) -> Result<NormApprox> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Domain(format!(
            "rate must satisfy 0 < q ≤ 1, got {q}"
        )));
    }
    let mut levels = vec![vec![Mat::identity(class.dim())]];
    let mut realized: u64 = 0;
    for n in 1..=depth {
        let prev = &levels[n - 1];
        let needed = (prev.len() * class.len()) as u64;
        realized = realized.saturating_add(needed);
        if realized > budget {
            return Err(Error::BudgetExceeded {
                depth: n,
                required: realized as u128,
                budget,
            });
        }
        let mut next = Vec::with_capacity(needed as usize);
        for b in prev {
            for a in class.members() {
                next.push(a.mul(b)?);
            }
        }
        levels.push(dedup(next));
    }
    Ok(NormApprox {
        class: class.clone(),
        q,
        levels,
    })
}

fn dedup(products: Vec<Mat>) -> Vec<Mat> {
    let scale = 1.0 + products.iter().map(Mat::max_abs).fold(0.0, f64::max);
    let tol = DEDUP_TOL * scale;
    if !tol.is_finite() {
        return products;
    }
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut kept: Vec<Mat> = Vec::new();
    for p in products {
        // products straddling a cell boundary stay duplicated; that only costs storage
        let key: Vec<i64> = p
            .as_slice()
            .iter()
            .map(|v| (v / tol).round() as i64)
            .collect();
        let bucket = buckets.entry(key).or_default();
        if bucket.iter().any(|&i| kept[i].max_abs_diff(&p) <= tol) {
            continue;
        }
        bucket.push(kept.len());
        kept.push(p);
    }
    kept
}

/// Outcome of [`NormApprox::verify_contraction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// 1-based member index.
    pub member: usize,
    pub q: f64,
    pub depth: usize,
    pub samples: usize,
    /// `max(‖A_k x‖_{D−1} − q‖x‖_D, 0)`; nonzero beyond tolerance is a bug.
    pub max_violation: f64,
    pub violations: usize,
    /// Same with the untruncated left side `‖A_k x‖_D`; informational.
    pub full_max_violation: f64,
    pub full_violations: usize,
}

impl ContractionReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

impl NormApprox {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn class(&self) -> &MatrixClass {
        &self.class
    }

    /// Deduplicated products of length `n`.
    pub fn level(&self, n: usize) -> &[Mat] {
        &self.levels[n]
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn evaluate(&self, x: &Vector) -> Result<f64> {
        self.evaluate_truncated(x, self.depth())
    }

    /// The norm using levels `0..=levels` only.
    pub fn evaluate_truncated(&self, x: &Vector, levels: usize) -> Result<f64> {
        if x.dim() != self.class.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.class.dim(),
                found: x.dim(),
            });
        }
        if levels > self.depth() {
            return Err(Error::invalid(format!(
                "truncation level {levels} exceeds depth {}",
                self.depth()
            )));
        }
        Ok(self.eval_slice(x.as_slice(), levels))
    }

    fn eval_slice(&self, x: &[f64], levels: usize) -> f64 {
        let inv_q = 1.0 / self.q;
        let mut weight = 1.0;
        let mut best = 0.0f64;
        for level in &self.levels[..=levels] {
            let m = level.iter().map(|b| b.apply_norm(x)).fold(0.0, f64::max);
            best = best.max(weight * m);
            weight *= inv_q;
        }
        best
    }

    /// `c` in `|x| ≤ ‖x‖ ≤ c |x|`: the largest `q⁻ⁿ ‖B‖` over stored products.
    pub fn bound_constant(&self) -> f64 {
        let inv_q = 1.0 / self.q;
        let mut weight = 1.0;
        let mut best = 0.0f64;
        for level in &self.levels {
            let m = level.iter().map(Mat::operator_norm).fold(0.0, f64::max);
            best = best.max(weight * m);
            weight *= inv_q;
        }
        best
    }

    /// Checks `‖A_k x‖_{D−1} ≤ q ‖x‖_D` on every sample (`member` is 1-based).
    pub fn verify_contraction(
        &self,
        member: usize,
        samples: &[Vector],
    ) -> Result<ContractionReport> {
        let depth = self.depth();
        if depth == 0 {
            return Err(Error::invalid("contraction check needs depth ≥ 1"));
        }
        let a = self.class.member(member)?;
        let mut report = ContractionReport {
            member,
            q: self.q,
            depth,
            samples: samples.len(),
            max_violation: 0.0,
            violations: 0,
            full_max_violation: 0.0,
            full_violations: 0,
        };
        for x in samples {
            let nx = self.evaluate(x)?;
            let ax = a.apply(x)?;
            let rhs = self.q * nx;
            let slack = CONTRACTION_TOL * rhs.max(1.0);
            let trunc = self.eval_slice(ax.as_slice(), depth - 1) - rhs;
            let full = self.eval_slice(ax.as_slice(), depth) - rhs;
            report.max_violation = report.max_violation.max(trunc);
            report.full_max_violation = report.full_max_violation.max(full);
            if trunc > slack {
                report.violations += 1;
            }
            if full > slack {
                report.full_violations += 1;
            }
        }
        Ok(report)
    }

    /// [`verify_contraction`](Self::verify_contraction) for every member.
    pub fn verify_all(&self, samples: &[Vector]) -> Result<Vec<ContractionReport>> {
        (1..=self.class.len())
            .map(|k| self.verify_contraction(k, samples))
            .collect()
    }
}

/// `DEFAULT_SAMPLE_COUNT` seeded uniform points on the unit sphere followed by `±e_i`.
pub fn default_samples(dim: usize, seed: u64) -> Vec<Vector> {
    sphere_samples(dim, DEFAULT_SAMPLE_COUNT, seed)
}

pub fn sphere_samples(dim: usize, count: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count + 2 * dim);
    while out.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            out.push(Vector::new(v.into_iter().map(|x| x / n).collect()).expect("finite"));
        }
    }
    for i in 0..dim {
        out.push(Vector::basis(dim, i));
        out.push(Vector::basis(dim, i).scale(-1.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{family_point, stable_parameter, unstable_parameter};
    use crate::product::realize_word;
    use crate::product::Word;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    fn scalar_class(s: f64) -> MatrixClass {
        MatrixClass::new(vec![Mat::identity(2).scale(s)]).unwrap()
    }

    fn v(a: f64, b: f64) -> Vector {
        Vector::new(vec![a, b]).unwrap()
    }

    // Independent re-enumeration: every word of length ≤ depth, no dedup.
    fn brute_norm(class: &MatrixClass, q: f64, depth: usize, x: &Vector) -> f64 {
        let m = class.len();
        let mut best = x.norm();
        for n in 1..=depth {
            for code in 0..m.pow(n as u32) {
                let mut c = code;
                let w: Vec<usize> = (0..n)
                    .map(|_| {
                        let s = c % m + 1;
                        c /= m;
                        s
                    })
                    .collect();
                let p = realize_word(class, &Word::new(w)).unwrap();
                best = best.max(q.powi(-(n as i32)) * p.apply(x).unwrap().norm());
            }
        }
        best
    }

    #[test]
    fn scalar_class_collapses_to_euclidean() {
        let na = build_norm(&scalar_class(0.5), 0.5, 4).unwrap();
        assert_eq!(na.level_sizes(), vec![1, 1, 1, 1, 1]);
        for x in [v(1.0, 0.0), v(-3.0, 4.0), v(0.2, 0.7)] {
            assert!((na.evaluate(&x).unwrap() - x.norm()).abs() < 1e-14);
        }
        assert_eq!(na.evaluate(&v(0.0, 0.0)).unwrap(), 0.0);
        let id = build_norm(&scalar_class(1.0), 1.0, 3).unwrap();
        assert!((id.evaluate(&v(3.0, 4.0)).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn stable_family_norm_is_sandwiched() {
        let class = family_point(stable_parameter(2)).unwrap().class();
        let na = build_norm(&class, 0.75, 6).unwrap();
        for x in sphere_samples(2, 200, 5) {
            let e = na.evaluate(&x).unwrap();
            assert!((1.0 - 1e-12..=SQRT_2 + 1e-12).contains(&e), "{e}");
        }
        let x = v(1.0, 0.0);
        let e = na.evaluate(&x).unwrap();
        assert!((1.0..=SQRT_2 + 1e-12).contains(&e));
        assert!((e - brute_norm(&class, 0.75, 6, &x)).abs() < 1e-12);
        assert!(na.bound_constant() <= SQRT_2 + 1e-12);
    }

    #[test]
    fn rejects_bad_rates_and_budget() {
        let c = scalar_class(0.5);
        assert!(matches!(build_norm(&c, 0.0, 2), Err(Error::Domain(_))));
        assert!(matches!(build_norm(&c, 1.5, 2), Err(Error::Domain(_))));
        assert!(build_norm(&c, f64::NAN, 2).is_err());
        let pair = family_point(0.3).unwrap().class();
        assert!(matches!(
            build_norm_budgeted(&pair, 0.9, 10, 100),
            Err(Error::BudgetExceeded { .. })
        ));
        assert_eq!("auto".parse::<Rate>().unwrap(), Rate::Auto);
        assert_eq!("0.5".parse::<Rate>().unwrap(), Rate::Fixed(0.5));
        assert!("fast".parse::<Rate>().is_err());
    }

    #[test]
    fn auto_rate_uses_bounds() {
        let c = scalar_class(0.5);
        let q = auto_rate(&c, 4).unwrap();
        assert!((q - 0.5 - 1e-6).abs() < 1e-12);
        let unstable = family_point(unstable_parameter(6)).unwrap().class();
        assert!(auto_rate(&unstable, 4).is_err());
    }

    #[test]
    fn contraction_examples() {
        let na = build_norm(&scalar_class(0.5), 0.5, 3).unwrap();
        let r = na.verify_contraction(1, &default_samples(2, 1)).unwrap();
        assert!(r.holds() && r.max_violation <= 1e-12);
        assert!(na.verify_contraction(2, &[]).is_err());
        assert!(build_norm(&scalar_class(0.5), 0.5, 0)
            .unwrap()
            .verify_contraction(1, &[])
            .is_err());

        let t3 = stable_parameter(3);
        let na = build_norm(&family_point(t3).unwrap().class(), 1.0 - t3.powi(4), 6).unwrap();
        for r in na.verify_all(&default_samples(2, 7)).unwrap() {
            assert!(r.holds(), "{r:?}");
            assert_eq!(r.samples, 1004);
        }
    }

    #[test]
    fn unstable_family_breaks_untruncated_contraction() {
        let class = family_point(unstable_parameter(6)).unwrap().class();
        let na = build_norm(&class, 0.999, 8).unwrap();
        let reports = na.verify_all(&default_samples(2, 3)).unwrap();
        assert!(reports.iter().all(ContractionReport::holds));
        assert!(reports.iter().map(|r| r.full_violations).sum::<usize>() > 0);
    }

    #[test]
    fn deeper_norm_dominates() {
        let class =
            MatrixClass::from_flat(2, 2, &[0.6, 0.5, -0.2, 0.4, 0.3, -0.7, 0.5, 0.1]).unwrap();
        let shallow = build_norm(&class, 0.9, 4).unwrap();
        let deep = build_norm(&class, 0.9, 5).unwrap();
        for x in sphere_samples(2, 100, 9) {
            assert!(deep.evaluate(&x).unwrap() >= shallow.evaluate(&x).unwrap() - 1e-12);
        }
    }

    #[test]
    fn dedup_keeps_distinct_products() {
        let class =
            MatrixClass::from_flat(2, 2, &[0.6, 0.5, -0.2, 0.4, 0.3, -0.7, 0.5, 0.1]).unwrap();
        let na = build_norm(&class, 0.9, 5).unwrap();
        assert_eq!(na.level_sizes(), vec![1, 2, 4, 8, 16, 32]);
        let x = v(0.3, -0.8);
        assert!((na.evaluate(&x).unwrap() - brute_norm(&class, 0.9, 5, &x)).abs() < 1e-12);
    }

    fn random_class() -> impl Strategy<Value = MatrixClass> {
        proptest::collection::vec(-1.0f64..1.0, 8)
            .prop_map(|c| MatrixClass::from_flat(2, 2, &c).unwrap())
    }

    fn vec2() -> impl Strategy<Value = Vector> {
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| v(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn norm_axioms(class in random_class(), x in vec2(), y in vec2(), lambda in -5.0f64..5.0) {
            let na = build_norm(&class, 0.8, 4).unwrap();
            let nx = na.evaluate(&x).unwrap();
            let ny = na.evaluate(&y).unwrap();
            let nxy = na.evaluate(&x.add(&y).unwrap()).unwrap();
            prop_assert!(nxy <= nx + ny + 1e-10 * (nx + ny).max(1.0));
            let nl = na.evaluate(&x.scale(lambda)).unwrap();
            prop_assert!((nl - lambda.abs() * nx).abs() <= 1e-10 * nx.max(1e-300) * lambda.abs().max(1.0));
            prop_assert!(nx >= x.norm() - 1e-15);
            prop_assert!(nx <= na.bound_constant() * x.norm() * (1.0 + 1e-12));
        }

        #[test]
        fn truncated_contraction_always_holds(class in random_class(), q in 0.3f64..1.0) {
            let na = build_norm(&class, q, 5).unwrap();
            for r in na.verify_all(&sphere_samples(2, 50, 1)).unwrap() {
                prop_assert!(r.holds(), "{:?}", r);
            }
        }
    }
}
