use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use switchstab::criteria::{
    cross_validate_r2, cross_validate_rplus, r2_criterion, rplus_criterion, MixClassSpec,
    MixParams2,
};
use switchstab::families::family_point;
use switchstab::families::suite::{run_suite, SuiteConfig};
use switchstab::norm::{build_norm_with, default_samples, Rate};
use switchstab::product::{
    regularity_profile, stability_bounds_with, BoundsOptions, DEFAULT_BUDGET, DEFAULT_TOLERANCE,
};
use switchstab::report::{
    classify_family, parse_family_spec, read_class_file, read_rows_file, read_word_file,
    write_classification_csv, NormReport, RegularityReport, RunReport, RunResults,
};
use switchstab::{Error, MatrixClass, Vector, DEFAULT_SEED};

const EXIT_SUITE_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "switchstab",
    version,
    about = "Absolute stability analysis of switched linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Omit wall-clock timing so identical runs give identical output.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Joint spectral bounds by exhaustive product enumeration.
    Bounds {
        #[command(flatten)]
        input: ClassInput,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Maximum number of products to realize.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Numerical verification suite for the rank-one/rotation family.
    #[command(name = "verify-appendix")]
    VerifySuite {
        #[arg(long, default_value_t = 30)]
        n_max: usize,
        #[arg(long, default_value_t = 14)]
        word_len: usize,
        #[arg(long, default_value_t = 200)]
        random_words: usize,
        #[arg(long, default_value_t = 500)]
        random_len: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Perturb the rank-one generator to exercise failure detection.
        #[arg(long, default_value_t = 0.0, hide = true)]
        perturb: f64,
    },
    /// Classify t_n and s_n along the family curve (CSV).
    #[command(name = "figure1")]
    Classify {
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Exact criteria for mixing classes.
    Criterion {
        /// Coefficients a11 a12 a21 a22 of a two-member mixing class.
        #[arg(long, num_args = 4, allow_negative_numbers = true, value_names = ["A11", "A12", "A21", "A22"], conflicts_with = "rplus", required_unless_present = "rplus")]
        r2: Option<Vec<f64>>,
        /// JSON file of positive coefficient rows.
        #[arg(long)]
        rplus: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        /// Also compare against product bounds up to this depth.
        #[arg(long)]
        cross_depth: Option<usize>,
    },
    /// Build, evaluate and verify a truncated extremal norm.
    Norm {
        #[command(flatten)]
        input: ClassInput,
        /// Decay rate: a number in (0, 1] or "auto".
        #[arg(long, default_value = "auto")]
        q: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Comma-separated vector to evaluate.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        evaluate: Option<Vec<f64>>,
        /// Check the contraction inequality on seeded sphere samples.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Regularity index of a switching word.
    Regularity {
        /// Alphabet size.
        #[arg(long)]
        m: usize,
        /// JSON array of 1-based indices.
        word: PathBuf,
    },
}

#[derive(Args)]
struct ClassInput {
    /// Class file: {"m": M, "n": N, "matrices": [[row-major entries], ...]}.
    #[arg(conflicts_with = "t", required_unless_present = "t")]
    class: Option<PathBuf>,
    /// Family class {G(t), H(t)}: "t:n", "s:n" or a number.
    #[arg(long)]
    t: Option<String>,
}

impl ClassInput {
    fn load(&self) -> Result<(MatrixClass, serde_json::Value), Error> {
        match (&self.class, &self.t) {
            (Some(path), _) => Ok((read_class_file(path)?, json!(path.display().to_string()))),
            (None, Some(spec)) => {
                let t = parse_family_spec(spec)?;
                Ok((family_point(t)?.class(), json!({ "family": spec, "t": t })))
            }
            (None, None) => Err(Error::InvalidInput("no class given".into())),
        }
    }
}

enum Output {
    Report(Box<RunReport>, bool),
    Text(String),
}

fn run(cli: &Cli, argv: Vec<String>) -> Result<Output, Error> {
    let report = |params, results, class: Option<&MatrixClass>| {
        let r = RunReport::new(argv.clone(), params, results);
        match class {
            Some(c) => r.with_class(c),
            None => r,
        }
    };
    Ok(match &cli.command {
        Command::Bounds {
            input,
            depth,
            tolerance,
            budget,
        } => {
            let (class, source) = input.load()?;
            let opts = BoundsOptions::new(*depth)
                .tolerance(*tolerance)
                .budget(*budget);
            let bounds = stability_bounds_with(&class, &opts)?;
            let params = json!({ "source": source, "depth": depth, "tolerance": tolerance, "budget": budget });
            Output::Report(
                Box::new(report(params, RunResults::Bounds(bounds), Some(&class))),
                true,
            )
        }
        Command::VerifySuite {
            n_max,
            word_len,
            random_words,
            random_len,
            seed,
            perturb,
        } => {
            let config = SuiteConfig {
                n_max: *n_max,
                word_len: *word_len,
                random_words: *random_words,
                random_len: *random_len,
                seed: *seed,
                perturb: *perturb,
            };
            let suite = run_suite(&config)?;
            let passed = suite.passed;
            let params = serde_json::to_value(&config).expect("plain config");
            Output::Report(
                Box::new(report(params, RunResults::Suite(suite), None)),
                passed,
            )
        }
        Command::Classify {
            n_max,
            depth,
            tolerance,
        } => {
            let rows = classify_family(*n_max, *depth, *tolerance)?;
            let mut buf = Vec::new();
            write_classification_csv(&rows, &mut buf)?;
            Output::Text(String::from_utf8(buf).expect("CSV is UTF-8"))
        }
        Command::Criterion {
            r2,
            rplus,
            tau,
            cross_depth,
        } => {
            if tau.is_nan() || *tau < 0.0 {
                return Err(Error::InvalidInput("tau must be non-negative".into()));
            }
            if let Some(c) = r2 {
                let p = MixParams2::new(c[0], c[1], c[2], c[3]);
                let class = p.spec().class()?;
                let outcome = r2_criterion(&p, *tau);
                let cross_validation = cross_depth
                    .map(|d| cross_validate_r2(&p, *tau, d))
                    .transpose()?;
                let params = json!({ "r2": c, "tau": tau, "cross_depth": cross_depth });
                let results = RunResults::R2 {
                    outcome,
                    cross_validation,
                };
                Output::Report(Box::new(report(params, results, Some(&class))), true)
            } else {
                let path = rplus.as_ref().expect("clap enforces one of --r2/--rplus");
                let spec = MixClassSpec::new(read_rows_file(path)?)?;
                let class = spec.class()?;
                let outcome = rplus_criterion(&spec, *tau)?;
                let cross_validation = cross_depth
                    .map(|d| cross_validate_rplus(&spec, *tau, d))
                    .transpose()?;
                let params = json!({ "rplus": path.display().to_string(), "tau": tau, "cross_depth": cross_depth });
                let results = RunResults::Rplus {
                    outcome,
                    cross_validation,
                };
                Output::Report(Box::new(report(params, results, Some(&class))), true)
            }
        }
        Command::Norm {
            input,
            q,
            depth,
            evaluate,
            verify,
            seed,
        } => {
            let (class, source) = input.load()?;
            let rate: Rate = q.parse()?;
            let na = build_norm_with(&class, rate, *depth)?;
            let evaluated = evaluate
                .as_ref()
                .map(|v| Vector::new(v.clone()).and_then(|x| na.evaluate(&x)))
                .transpose()?;
            let contraction = if *verify {
                na.verify_all(&default_samples(class.dim(), *seed))?
            } else {
                Vec::new()
            };
            let passed = contraction.iter().all(|c| c.holds());
            let results = RunResults::Norm(NormReport {
                q: na.q(),
                depth: na.depth(),
                level_sizes: na.level_sizes(),
                bound_constant: na.bound_constant(),
                evaluated,
                contraction,
            });
            let params =
                json!({ "source": source, "q": q, "depth": depth, "verify": verify, "seed": seed });
            Output::Report(Box::new(report(params, results, Some(&class))), passed)
        }
        Command::Regularity { m, word } => {
            let w = read_word_file(word)?;
            if *m == 0 {
                return Err(Error::InvalidInput("alphabet size must be positive".into()));
            }
            if let Some(&bad) = w.indices().iter().find(|&&i| i == 0 || i > *m) {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    len: *m,
                });
            }
            let profile = regularity_profile(*m, &w);
            let results = RunResults::Regularity(RegularityReport {
                m: *m,
                length: w.len(),
                index: profile.last().copied().unwrap_or(0),
                profile,
            });
            let params = json!({ "m": m, "word": word.display().to_string() });
            Output::Report(Box::new(report(params, results, None)), true)
        }
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn fail_with(e: &Error) -> ExitCode {
    let code = match e {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_INVALID,
    };
    fail(e.kind(), &e.to_string(), code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            return fail("usage", first.trim_start_matches("error: "), EXIT_INVALID);
        }
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let start = Instant::now();
    let output = match run(&cli, argv) {
        Ok(o) => o,
        Err(e) => return fail_with(&e),
    };
    let (text, passed) = match output {
        Output::Text(t) => (t, true),
        Output::Report(mut r, passed) => {
            if !cli.deterministic {
                r.wall_time_secs = Some(start.elapsed().as_secs_f64());
            }
            match r.to_json() {
                Ok(t) => (t + "\n", passed),
                Err(e) => return fail_with(&e),
            }
        }
    };
    if let Err(e) = emit(cli.out.as_deref(), &text) {
        return fail_with(&e);
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SUITE_FAILURE)
    }
}
