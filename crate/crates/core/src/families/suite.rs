//! Batch verification of every family identity, bound and growth claim.
//!
//! Each check reports its worst observed residual against a fixed tolerance.
//! `perturb` shifts the off-diagonal entry of every `P(φ)` and `G(t)` used on
//! the "multiplied out" side of a comparison, so a nonzero value must make the
//! suite fail.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    collapse_factor, divergent_word, family_point, growth_factor, growth_threshold, normal_form,
    periodic_log_norms, pr_collapse_factor, projector, rotation, stable_parameter,
    unstable_parameter, PrFactor,
};
use crate::error::Result;
use crate::linalg::Mat;
use crate::product::{realize_word, MatrixClass, Word};
use crate::DEFAULT_SEED;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Largest `n` for the odd-angle sign-flip check.
    pub n_max: usize,
    /// Longest `{P, R}` word enumerated exhaustively.
    pub word_len: usize,
    pub random_words: usize,
    pub random_len: usize,
    pub seed: u64,
    pub perturb: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n_max: 30,
            word_len: 14,
            random_words: 200,
            random_len: 500,
            seed: DEFAULT_SEED,
            perturb: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Largest residual (or offending value) seen.
    pub worst: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Tracks the worst residual of one check.
struct Tally {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    cases: usize,
    failures: usize,
    first_failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally {
            name,
            tolerance,
            worst: 0.0,
            cases: 0,
            failures: 0,
            first_failure: None,
        }
    }

    /// Records `value`; the case fails unless `value <= tolerance`.
    fn record(&mut self, value: f64, context: impl FnOnce() -> String) {
        self.cases += 1;
        if value > self.worst || value.is_nan() {
            self.worst = value;
        }
        if value.is_nan() || value > self.tolerance {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(context());
            }
        }
    }

    /// Records a pass/fail fact; the worst value is the failure count.
    fn flag(&mut self, ok: bool, context: impl FnOnce() -> String) {
        self.record(if ok { 0.0 } else { 1.0 }, context);
    }

    fn finish(self) -> CheckResult {
        let detail = match self.first_failure {
            Some(ctx) => format!(
                "{} of {} cases failed; first: {}",
                self.failures, self.cases, ctx
            ),
            None => format!("{} cases", self.cases),
        };
        CheckResult {
            name: self.name.to_string(),
            passed: self.failures == 0 && self.cases > 0,
            worst: self.worst,
            tolerance: self.tolerance,
            cases: self.cases,
            detail,
        }
    }
}

fn perturbed_projector(phi: f64, eps: f64) -> Result<Mat> {
    let p = projector(phi)?;
    Mat::new(2, vec![1.0, p.get(0, 1) + eps, 0.0, 0.0])
}

fn pr_class(phi: f64, eps: f64) -> Result<MatrixClass> {
    MatrixClass::new(vec![perturbed_projector(phi, eps)?, rotation(phi)])
}

fn pr_indices(word: &[PrFactor]) -> Word {
    Word::new(
        word.iter()
            .map(|f| match f {
                PrFactor::P => 1,
                PrFactor::R => 2,
            })
            .collect(),
    )
}

fn collapse_word(m: usize) -> Word {
    let mut w = vec![1];
    w.extend(std::iter::repeat(2).take(m));
    w.push(1);
    Word::new(w)
}

/// Runs every check. Errors only on internal construction failures.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let eps = config.perturb;
    let (family_bound, family_decay) = check_stable_family(config, eps)?;
    let checks = vec![
        check_collapse_identity(eps)?,
        check_odd_angle_flip(config.n_max, eps)?,
        check_even_angle_factors(),
        check_normal_forms(config.word_len, eps)?,
        family_bound,
        family_decay,
        check_growth_threshold(),
        check_periodic_growth()?,
        check_growth_asymptotics(),
        check_interleaving(),
        check_family_identity(eps)?,
    ];
    let checks: Vec<CheckResult> = checks.into_iter().flatten().collect();
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport {
        config: config.clone(),
        checks,
        passed,
    })
}

/// `P Rᵐ P = cos((2m+1)φ)/cos φ · P` for m = 0..=50 on a 200-point grid of (0, 1.4).
fn check_collapse_identity(eps: f64) -> Result<Vec<CheckResult>> {
    let mut tally = Tally::new("collapse_identity", 1e-10);
    for j in 1..=200 {
        let phi = 1.4 * j as f64 / 201.0;
        let class = pr_class(phi, eps)?;
        let p = projector(phi)?;
        for m in 0..=50 {
            let direct = realize_word(&class, &collapse_word(m))?;
            let res = direct.max_abs_diff(&p.scale(pr_collapse_factor(m, phi)));
            tally.record(res, || format!("m={m} phi={phi}"));
        }
    }
    Ok(vec![tally.finish()])
}

/// `P Rⁿ P = −sec φ · P` at `φ = π/(2n+1)`.
fn check_odd_angle_flip(n_max: usize, eps: f64) -> Result<Vec<CheckResult>> {
    let mut tally = Tally::new("odd_angle_flip", 1e-10);
    for n in 1..=n_max {
        let phi = PI / (2 * n + 1) as f64;
        let direct = realize_word(&pr_class(phi, eps)?, &collapse_word(n))?;
        let want = projector(phi)?.scale(-1.0 / phi.cos());
        tally.record(direct.max_abs_diff(&want), || format!("n={n}"));
    }
    Ok(vec![tally.finish()])
}

/// `|λ_{m+n,n}| = |λ_{m,n}|` and `|λ_{m,n}| ≤ 1` for n = 2..=10, m = 0..=30.
fn check_even_angle_factors() -> Vec<CheckResult> {
    let mut period = Tally::new("even_angle_period", 1e-12);
    let mut bound = Tally::new("even_angle_bound", 1e-12);
    for n in 2..=10 {
        for m in 0..=30 {
            let a = collapse_factor(m, n).abs();
            period.record((collapse_factor(m + n, n).abs() - a).abs(), || {
                format!("m={m} n={n}")
            });
            bound.record(a - 1.0, || format!("m={m} n={n}"));
        }
    }
    vec![period.finish(), bound.finish()]
}

/// Exhaustive `{P, R}` words at `φ = π/(2n)`, n ∈ {2, 3, 4}: the reduced form
/// reproduces the product, `|α| ≤ 1`, and every product norm is at most `|P|`.
fn check_normal_forms(max_len: usize, eps: f64) -> Result<Vec<CheckResult>> {
    let mut repro = Tally::new("normal_form_reproduces", 1e-10);
    let mut alpha = Tally::new("normal_form_alpha", 1e-12);
    let mut norm = Tally::new("word_norm_bound", 1e-10);
    for n in 2..=4usize {
        let phi = PI / (2 * n) as f64;
        let class = pr_class(phi, eps)?;
        let p_norm = projector(phi)?.operator_norm();
        for len in 0..=max_len {
            for code in 0u64..(1u64 << len) {
                let word: Vec<PrFactor> = (0..len)
                    .map(|b| {
                        if code >> b & 1 == 1 {
                            PrFactor::P
                        } else {
                            PrFactor::R
                        }
                    })
                    .collect();
                let nf = normal_form(&word, n)?;
                let direct = realize_word(&class, &pr_indices(&word))?;
                let ctx = || format!("n={n} len={len} code={code:#b}");
                repro.record(nf.realize(phi)?.max_abs_diff(&direct), ctx);
                alpha.record(nf.alpha.abs() - 1.0, ctx);
                norm.record(direct.operator_norm() - p_norm, ctx);
            }
        }
    }
    Ok(vec![repro.finish(), alpha.finish(), norm.finish()])
}

/// Random words over `{G(t_n), H(t_n)}`, n = 2..=6: every prefix obeys
/// `‖A_k⋯A_1‖ ≤ μ_nᵏ |P(π/2n)|` and the full product decays below 1e-30.
fn check_stable_family(
    config: &SuiteConfig,
    eps: f64,
) -> Result<(Vec<CheckResult>, Vec<CheckResult>)> {
    let mut bound = Tally::new("stable_family_bound", 1e-8);
    let mut decay = Tally::new("stable_family_decay", 1e-30);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for n in 2..=6usize {
        let fp = family_point(stable_parameter(n))?;
        let g = perturbed_projector(fp.phi, eps)?.scale(fp.mu);
        let class = MatrixClass::new(vec![g, fp.h.clone()])?;
        let p_norm = projector(PI / (2 * n) as f64)?.operator_norm();
        for wi in 0..config.random_words {
            let word: Vec<usize> = (0..config.random_len)
                .map(|_| rng.random_range(1..=2))
                .collect();
            let mut acc = Mat::identity(2);
            let mut worst_excess = f64::NEG_INFINITY;
            for (k, &i) in word.iter().enumerate() {
                acc = class.member(i)?.mul(&acc)?;
                let limit = fp.mu.powi(k as i32 + 1) * p_norm;
                worst_excess = worst_excess.max(acc.operator_norm() - limit);
            }
            bound.record(worst_excess, || format!("n={n} word={wi}"));
            decay.record(acc.operator_norm(), || format!("n={n} word={wi}"));
        }
    }
    Ok((vec![bound.finish()], vec![decay.finish()]))
}

/// `growth_factor(n) < 1` for n ≤ 5 and `> 1` for 6 ≤ n ≤ 200, with the
/// threshold located by search.
fn check_growth_threshold() -> Vec<CheckResult> {
    let mut tally = Tally::new("growth_threshold", 0.0);
    let threshold = growth_threshold(200);
    tally.flag(threshold == Some(6), || format!("threshold {threshold:?}"));
    if let Some(th) = threshold {
        for n in 1..=200 {
            let gf = growth_factor(n);
            tally.flag((n < th && gf < 1.0) || (n >= th && gf > 1.0), || {
                format!("n={n} factor={gf}")
            });
        }
    }
    vec![tally.finish()]
}

/// The norm of `[G Hⁿ G]ⁱ` grows by exactly `growth_factor(n)` per period.
fn check_periodic_growth() -> Result<Vec<CheckResult>> {
    let mut ratio = Tally::new("periodic_growth", 1e-6);
    let mut direct = Tally::new("periodic_word_norm", 1e-8);
    for n in 6..=12usize {
        let gf = growth_factor(n);
        let logs = periodic_log_norms(n, 12)?;
        for (i, pair) in logs.windows(2).enumerate() {
            let rel = ((pair[1] - pair[0]).exp() - gf).abs() / gf;
            ratio.record(rel, || format!("n={n} period={}", i + 2));
        }
        let class = family_point(unstable_parameter(n))?.class();
        for i in 1..=3 {
            let prod = realize_word(&class, &divergent_word(n, i)?)?;
            let floor = gf.powi(i as i32);
            direct.record((floor - prod.operator_norm()) / floor, || {
                format!("n={n} i={i}")
            });
        }
    }
    Ok(vec![ratio.finish(), direct.finish()])
}

/// `|growth_factor(n) − 1 − π²/(2(2n+1)²)| ≤ 8 (n+2) (π/(2n+1))⁴` for n = 20..=200.
fn check_growth_asymptotics() -> Vec<CheckResult> {
    let mut tally = Tally::new("growth_asymptotics", 0.0);
    for n in 20..=200usize {
        let x = PI / (2 * n + 1) as f64;
        let gap = (growth_factor(n) - 1.0 - x * x / 2.0).abs();
        let allowed = 8.0 * (n + 2) as f64 * x.powi(4);
        tally.record(gap - allowed, || {
            format!("n={n} gap={gap} allowed={allowed}")
        });
    }
    vec![tally.finish()]
}

/// `t_{n+1} < s_n < t_n` for n = 2..=100.
fn check_interleaving() -> Vec<CheckResult> {
    let mut tally = Tally::new("parameter_interleaving", 0.0);
    for n in 2..=100 {
        let (hi, mid, lo) = (
            stable_parameter(n),
            unstable_parameter(n),
            stable_parameter(n + 1),
        );
        tally.flag(lo < mid && mid < hi, || format!("n={n}"));
    }
    vec![tally.finish()]
}

/// `G(sin φ) = (1 − sin⁴φ) P(φ)` and `H(sin φ) = (1 − sin⁴φ) R(φ)` on a
/// 1000-point grid of (0, 0.99·π/2).
fn check_family_identity(eps: f64) -> Result<Vec<CheckResult>> {
    let mut tally = Tally::new("family_angle_identity", 1e-12);
    for j in 1..=1000 {
        let phi = 0.99 * (PI / 2.0) * j as f64 / 1001.0;
        let fp = family_point(phi.sin())?;
        let scale = 1.0 - phi.sin().powi(4);
        let g = Mat::new(2, vec![fp.g.get(0, 0), fp.g.get(0, 1) + eps, 0.0, 0.0])?;
        let res_g = g.max_abs_diff(&projector(phi)?.scale(scale));
        let res_h = fp.h.max_abs_diff(&rotation(phi).scale(scale));
        tally.record(res_g.max(res_h), || format!("phi={phi}"));
    }
    Ok(vec![tally.finish()])
}
