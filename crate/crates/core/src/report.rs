//! File formats and machine-readable reports shared by the CLI and bindings.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::criteria::{CrossValidation, R2Outcome, RplusOutcome};
use crate::error::{Error, Result};
use crate::families::suite::SuiteReport;
use crate::families::{divergent_word, family_point, stable_parameter, unstable_parameter};
use crate::norm::ContractionReport;
use crate::product::{realize_word, stability_bounds, BoundsReport, MatrixClass, Verdict, Word};

/// On-disk class: `m` members of dimension `n`, each a row-major entry list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassFile {
    pub m: usize,
    pub n: usize,
    pub matrices: Vec<Vec<f64>>,
}

impl ClassFile {
    pub fn from_class(class: &MatrixClass) -> Self {
        ClassFile {
            m: class.len(),
            n: class.dim(),
            matrices: class
                .members()
                .iter()
                .map(|a| a.as_slice().to_vec())
                .collect(),
        }
    }

    pub fn to_class(&self) -> Result<MatrixClass> {
        if self.matrices.len() != self.m {
            return Err(Error::invalid(format!(
                "class file declares m={} but lists {} matrices",
                self.m,
                self.matrices.len()
            )));
        }
        let coords: Vec<f64> = self.matrices.iter().flatten().copied().collect();
        MatrixClass::from_flat(self.m, self.n, &coords)
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed {what}: {e}")))
}

pub fn read_class_file(path: &Path) -> Result<MatrixClass> {
    parse_json::<ClassFile>(&read_text(path)?, "class file")?.to_class()
}

/// A word file holds a JSON array of 1-based member indices.
pub fn read_word_file(path: &Path) -> Result<Word> {
    let indices: Vec<usize> = parse_json(&read_text(path)?, "word file")?;
    Ok(Word::new(indices))
}

/// A coefficient file holds the rows `[[a11, …, a1N], …]` as JSON.
pub fn read_rows_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_json(&read_text(path)?, "coefficient file")
}

/// Which of the two interleaved parameter sequences a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    #[serde(rename = "t_n")]
    Stable,
    #[serde(rename = "s_n")]
    Unstable,
}

impl FamilyKind {
    pub fn label(self) -> &'static str {
        match self {
            FamilyKind::Stable => "t_n",
            FamilyKind::Unstable => "s_n",
        }
    }

    pub fn parameter(self, n: usize) -> f64 {
        match self {
            FamilyKind::Stable => stable_parameter(n),
            FamilyKind::Unstable => unstable_parameter(n),
        }
    }
}

/// Parses `t:n`, `s:n` or a plain number into a family parameter.
pub fn parse_family_spec(spec: &str) -> Result<f64> {
    let spec = spec.trim();
    let tagged = |rest: &str, min: usize| -> Result<usize> {
        let n: usize = rest
            .parse()
            .map_err(|_| Error::invalid(format!("bad family index in {spec:?}")))?;
        if n < min {
            return Err(Error::invalid(format!(
                "family index in {spec:?} must be at least {min}"
            )));
        }
        Ok(n)
    };
    if let Some(rest) = spec.strip_prefix("t:") {
        Ok(stable_parameter(tagged(rest, 2)?))
    } else if let Some(rest) = spec.strip_prefix("s:") {
        Ok(unstable_parameter(tagged(rest, 1)?))
    } else {
        spec.parse::<f64>()
            .ok()
            .filter(|t| t.is_finite())
            .ok_or_else(|| Error::invalid(format!("expected t:n, s:n or a number, got {spec:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub q: f64,
    pub depth: usize,
    pub level_sizes: Vec<usize>,
    pub bound_constant: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evaluated: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub contraction: Vec<ContractionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub m: usize,
    pub length: usize,
    pub index: usize,
    pub profile: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunResults {
    Bounds(BoundsReport),
    Suite(SuiteReport),
    Classification {
        rows: Vec<ClassificationRow>,
    },
    R2 {
        outcome: R2Outcome,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        cross_validation: Option<CrossValidation>,
    },
    Rplus {
        outcome: RplusOutcome,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        cross_validation: Option<CrossValidation>,
    },
    Norm(NormReport),
    Regularity(RegularityReport),
}

/// Envelope written by every CLI command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    /// Flattened member entries, `a_111 … a_MNN`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input_class: Option<ClassFile>,
    pub parameters: serde_json::Value,
    pub results: RunResults,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_secs: Option<f64>,
}

impl RunReport {
    pub fn new(command: Vec<String>, parameters: serde_json::Value, results: RunResults) -> Self {
        RunReport {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            input_class: None,
            parameters,
            results,
            wall_time_secs: None,
        }
    }

    pub fn with_class(mut self, class: &MatrixClass) -> Self {
        self.input_class = Some(ClassFile::from_class(class));
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid(format!("serialization failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text, "run report")
    }
}

/// One classified parameter value along the family curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub n: usize,
    pub kind: FamilyKind,
    pub t_value: f64,
    pub verdict: Verdict,
    pub best_lower: f64,
    pub best_upper: f64,
}

/// Classifies `t_2, s_2, t_3, s_3, …, t_{n_max}, s_{n_max}, t_{n_max+1}`.
///
/// Exhaustive search only sees instability witnesses of length up to `depth`,
/// while the growing products at `s_n` get longer with `n`. The lower bound of
/// each `s_n` row therefore also includes `ρ(G Hⁿ G)^{1/(n+2)}`, a valid lower
/// bound for the joint spectral radius at any length.
pub fn classify_family(
    n_max: usize,
    depth: usize,
    tolerance: f64,
) -> Result<Vec<ClassificationRow>> {
    if n_max < 2 {
        return Err(Error::invalid("n-max must be at least 2"));
    }
    let mut points = Vec::with_capacity(2 * n_max);
    for n in 2..=n_max {
        points.push((n, FamilyKind::Stable));
        points.push((n, FamilyKind::Unstable));
    }
    points.push((n_max + 1, FamilyKind::Stable));

    let mut rows = Vec::with_capacity(points.len());
    for (n, kind) in points {
        let t = kind.parameter(n);
        let class = family_point(t)?.class();
        let bounds = stability_bounds(&class, depth, tolerance)?;
        let mut best_lower = bounds.best_lower;
        if kind == FamilyKind::Unstable {
            let w = divergent_word(n, 1)?;
            let rho = realize_word(&class, &w)?.spectral_radius()?;
            best_lower = best_lower.max(rho.powf(1.0 / w.len() as f64));
        }
        rows.push(ClassificationRow {
            n,
            kind,
            t_value: t,
            verdict: Verdict::classify(best_lower, bounds.best_upper, tolerance),
            best_lower,
            best_upper: bounds.best_upper,
        });
    }
    Ok(rows)
}

/// Writes rows as CSV with 17 significant digits for every real column.
pub fn write_classification_csv<W: Write>(rows: &[ClassificationRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::invalid(format!("CSV write failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "kind",
        "t_value",
        "verdict",
        "best_lower",
        "best_upper",
    ])
    .map_err(io)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.kind.label().to_string(),
            format!("{:.16e}", r.t_value),
            r.verdict.to_string(),
            format!("{:.16e}", r.best_lower),
            format!("{:.16e}", r.best_upper),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::invalid(format!("CSV write failed: {e}")))
}
