//! Command-line front end: run configuration, inline polynomial syntax,
//! report types and the command implementations.
//!
//! Every report is a JSON object carrying `"schema": "rootflow/1"` and is
//! parsed back strictly (unknown fields rejected) by [`validate_report`].
//! Output is deterministic: identical inputs and seed give byte-identical
//! reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::align::{align_bottleneck, align_by_deflation, Alignment};
use crate::continuity::{
    modulus_curve, recheck, ModulusCurve, PointStatus, Recheck, SamplerConfig,
};
use crate::deform::{
    chebyshev_points, check_lemma1, check_lemma2, default_ladder, Deformation, ItemStatus,
    Lemma1Config, Lemma2Config, LemmaReport,
};
use crate::error::{Error, Result};
use crate::infinitesimal::{Precision, DEFAULT_ORDER, DEFAULT_TOLERANCE};
use crate::poly::{find_roots, roots_oracle, ComplexPoly, RootConfig, RootSet};
use crate::SCHEMA_VERSION;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Exit code for an error: input problems are usage errors, everything
/// else is a numeric failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::InvalidInput(_)
        | Error::ZeroPolynomial
        | Error::LeadingCoefficientZero
        | Error::DegreeMismatch { .. }
        | Error::SizeMismatch { .. }
        | Error::NotARoot { .. }
        | Error::NotSimpleRoot { .. } => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Settings shared by all commands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Series coefficient drop tolerance τ.
    pub tolerance: f64,
    /// Truncation order K.
    pub order: i64,
    pub ladder: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    pub format: Format,
    pub verify: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: DEFAULT_TOLERANCE,
            order: DEFAULT_ORDER,
            ladder: default_ladder(),
            seed: 0,
            samples: SamplerConfig::default().samples,
            format: Format::Json,
            verify: false,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if self.order < 2 {
            return Err(Error::invalid("truncation order must be at least 2"));
        }
        if self.ladder.is_empty() || self.ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid(
                "ladder must be nonempty and strictly decreasing",
            ));
        }
        if self.ladder.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::invalid("ladder values must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn precision(&self) -> Precision {
        Precision::new(self.order, self.tolerance)
    }

    fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            samples: self.samples,
            seed: self.seed,
            ..SamplerConfig::default()
        }
    }
}

// ---------------------------------------------------------------------------
// Inline syntax

fn parse_error(entry: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position: format!("entry {} (column {})", entry + 1, column + 1),
        message: message.into(),
    }
}

/// One complex literal: `3`, `-2.5e-3`, `4i`, `-i`, `1+2i`, `1.5-0.5i`.
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty coefficient".into());
    }
    let real = |t: &str| match t.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => Err(format!("non-finite coefficient '{t}'")),
        Err(_) => Err(format!("invalid number '{t}'")),
    };
    let Some(body) = s.strip_suffix('i') else {
        return real(s).map(|x| Complex64::new(x, 0.0));
    };
    // Split at the last sign that is neither leading nor an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (real(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => real(t)?,
    };
    Ok(Complex64::new(re, im))
}

/// Comma-separated coefficients in ascending degree order: `"a0,a1,…,an"`.
pub fn parse_inline(s: &str) -> Result<ComplexPoly> {
    let mut coeffs = Vec::new();
    let mut column = 0;
    for (k, entry) in s.split(',').enumerate() {
        coeffs.push(parse_complex(entry).map_err(|m| parse_error(k, column, m))?);
        column += entry.len() + 1;
    }
    ComplexPoly::new(coeffs)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        position: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheck {
    pub oracle: RootSet,
    /// Bottleneck distance between the two root multisets.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootsReport {
    pub schema: String,
    pub command: String,
    pub polynomial: ComplexPoly,
    pub roots: RootSet,
    /// `|f(c)|` at each cluster center, in cluster order.
    pub residuals: Vec<f64>,
    pub verify: Option<OracleCheck>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignReport {
    pub schema: String,
    pub command: String,
    pub f: ComplexPoly,
    pub g: ComplexPoly,
    pub deflation: Alignment,
    pub bottleneck: Alignment,
    /// Both methods produced the same bijection.
    pub agreement: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuityReport {
    pub schema: String,
    pub command: String,
    pub polynomial: ComplexPoly,
    pub seed: u64,
    pub samples: usize,
    pub curve: ModulusCurve,
    /// Soundness re-check per point (`None` for failed points).
    pub rechecks: Vec<Option<Recheck>>,
    pub passed: bool,
}

/// Any report emitted by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Report {
    Roots(RootsReport),
    Align(AlignReport),
    Lemma(LemmaReport),
    Continuity(ContinuityReport),
}

impl Report {
    pub fn passed(&self) -> bool {
        match self {
            Report::Roots(r) => r.passed,
            Report::Align(r) => r.passed,
            Report::Lemma(r) => r.passed,
            Report::Continuity(r) => r.passed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports are serializable");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut row = |fields: &[String]| w.write_record(fields).expect("in-memory write");
        let s = |x: f64| x.to_string();
        match self {
            Report::Roots(r) => {
                row(&["re", "im", "multiplicity", "radius", "residual"].map(String::from));
                for (c, res) in r.roots.clusters.iter().zip(&r.residuals) {
                    row(&[
                        s(c.center.re),
                        s(c.center.im),
                        c.multiplicity.to_string(),
                        s(c.radius),
                        s(*res),
                    ]);
                }
            }
            Report::Align(r) => {
                row(&["method", "f_index", "g_index", "distance"].map(String::from));
                for a in [&r.deflation, &r.bottleneck] {
                    let method = serde_json::to_value(a.method).expect("enum");
                    for (&(i, j), d) in a.pairs.iter().zip(&a.distances) {
                        row(&[
                            method.as_str().unwrap_or_default().to_string(),
                            i.to_string(),
                            j.to_string(),
                            s(*d),
                        ]);
                    }
                }
            }
            Report::Lemma(r) => {
                row(&["name", "status", "detail"].map(String::from));
                for item in &r.items {
                    let status = serde_json::to_value(item.status).expect("enum");
                    row(&[
                        item.name.clone(),
                        status.as_str().unwrap_or_default().to_string(),
                        item.detail.clone(),
                    ]);
                }
            }
            Report::Continuity(r) => {
                row(&[
                    "epsilon",
                    "delta",
                    "distance_at_delta",
                    "witness_json",
                    "samples",
                    "seed",
                ]
                .map(String::from));
                for p in &r.curve.points {
                    let witness = serde_json::to_string(&p.witness).expect("serializable");
                    row(&[
                        s(p.epsilon),
                        s(p.delta),
                        s(p.distance_at_delta),
                        witness,
                        p.samples.to_string(),
                        p.seed.to_string(),
                    ]);
                }
            }
        }
        String::from_utf8(w.into_inner().expect("flushed")).expect("utf-8")
    }

    /// One human-readable line for stderr.
    pub fn summary(&self) -> String {
        let verdict = if self.passed() { "pass" } else { "FAIL" };
        let mut s = String::new();
        match self {
            Report::Roots(r) => {
                let _ = write!(
                    s,
                    "roots: {} clusters, residual bound {:e}",
                    r.roots.clusters.len(),
                    r.roots.residual_bound
                );
                if let Some(v) = &r.verify {
                    let _ = write!(s, ", oracle deviation {:e}", v.max_deviation);
                }
            }
            Report::Align(r) => {
                let _ = write!(
                    s,
                    "align: max distance {:e} (deflation) / {:e} (bottleneck), agreement {}",
                    r.deflation.max_distance, r.bottleneck.max_distance, r.agreement
                );
            }
            Report::Lemma(r) => {
                let failed = r
                    .items
                    .iter()
                    .filter(|i| i.status == ItemStatus::Fail)
                    .count();
                let info = r
                    .items
                    .iter()
                    .filter(|i| i.status == ItemStatus::Informational)
                    .count();
                let _ = write!(
                    s,
                    "lemma: {} items, {failed} failed, {info} informational",
                    r.items.len()
                );
            }
            Report::Continuity(r) => {
                let slope = r
                    .curve
                    .slope
                    .map_or("n/a".to_string(), |x| format!("{x:.4}"));
                let _ = write!(
                    s,
                    "continuity: {} points, slope {slope}",
                    r.curve.points.len()
                );
            }
        }
        let _ = write!(s, " [{verdict}]");
        s
    }
}

/// Strict parse of a report: known shape, no unknown fields, current
/// schema version.
pub fn validate_report(json: &str) -> Result<Report> {
    fn check(schema: &str) -> Result<()> {
        if schema == SCHEMA_VERSION {
            Ok(())
        } else {
            Err(Error::invalid(format!("unsupported schema '{schema}'")))
        }
    }
    let bad = |e: serde_json::Error| Error::Parse {
        position: format!("{}:{}", e.line(), e.column()),
        message: e.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(json).map_err(bad)?;
    let command = value.get("command").and_then(|c| c.as_str());
    let report = match command {
        Some("roots") => Report::Roots(serde_json::from_value(value).map_err(bad)?),
        Some("align") => Report::Align(serde_json::from_value(value).map_err(bad)?),
        Some("continuity") => Report::Continuity(serde_json::from_value(value).map_err(bad)?),
        Some(other) => return Err(Error::invalid(format!("unknown report command '{other}'"))),
        None => Report::Lemma(serde_json::from_value(value).map_err(bad)?),
    };
    let schema = match &report {
        Report::Roots(r) => &r.schema,
        Report::Align(r) => &r.schema,
        Report::Lemma(r) => &r.schema,
        Report::Continuity(r) => &r.schema,
    };
    check(schema)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Commands

fn root_config() -> RootConfig {
    RootConfig::default()
}

pub fn cmd_roots(f: &ComplexPoly, cfg: &RunConfig) -> Result<RootsReport> {
    let roots = find_roots(f, &root_config())?;
    let residuals = roots
        .clusters
        .iter()
        .map(|c| f.eval_c(c.center).norm())
        .collect();
    let verify = if cfg.verify {
        let oracle = roots_oracle(f)?;
        let max_deviation = align_bottleneck(&roots, &oracle)?.max_distance;
        let scale = roots
            .clusters
            .iter()
            .map(|c| c.center.norm())
            .fold(1.0, f64::max);
        let tolerance = 1e-8 * scale;
        Some(OracleCheck {
            oracle,
            max_deviation,
            tolerance,
            passed: max_deviation < tolerance,
        })
    } else {
        None
    };
    let passed = verify.as_ref().is_none_or(|v| v.passed);
    Ok(RootsReport {
        schema: SCHEMA_VERSION.into(),
        command: "roots".into(),
        polynomial: f.clone(),
        roots,
        residuals,
        verify,
        passed,
    })
}

pub fn cmd_align(f: &ComplexPoly, g: &ComplexPoly, _cfg: &RunConfig) -> Result<AlignReport> {
    if f.degree() != g.degree() {
        return Err(Error::DegreeMismatch {
            left: f.degree(),
            right: g.degree(),
        });
    }
    let rc = root_config();
    let deflation = align_by_deflation(f, g, &rc)?;
    let bottleneck = align_bottleneck(&find_roots(f, &rc)?, &find_roots(g, &rc)?)?;
    let agreement = deflation.same_pairing(&bottleneck);
    Ok(AlignReport {
        schema: SCHEMA_VERSION.into(),
        command: "align".into(),
        f: f.clone(),
        g: g.clone(),
        deflation,
        bottleneck,
        agreement,
        passed: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

pub fn cmd_lemma(
    d: &Deformation,
    which: Which,
    points: Option<usize>,
    cfg: &RunConfig,
) -> Result<LemmaReport> {
    let d = d.with_precision(cfg.precision())?;
    match which {
        Which::One => {
            let count = points.unwrap_or(d.degree() + 1);
            check_lemma1(&d, &chebyshev_points(count), &Lemma1Config::default())
        }
        Which::Two => {
            let l2 = Lemma2Config {
                ladder: cfg.ladder.clone(),
                ..Lemma2Config::default()
            };
            Ok(check_lemma2(&d, &l2))
        }
    }
}

pub fn cmd_continuity(
    f: &ComplexPoly,
    epsilons: &[f64],
    cfg: &RunConfig,
) -> Result<ContinuityReport> {
    let sampler = cfg.sampler();
    let curve = modulus_curve(f, epsilons, &sampler)?;
    let rechecks = curve
        .points
        .iter()
        .map(|p| match p.status {
            PointStatus::Failed => Ok(None),
            _ => recheck(f, p, &sampler).map(Some),
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = curve.points.iter().all(|p| p.status != PointStatus::Failed)
        && rechecks.iter().flatten().all(|r| r.passed);
    Ok(ContinuityReport {
        schema: SCHEMA_VERSION.into(),
        command: "continuity".into(),
        polynomial: f.clone(),
        seed: cfg.seed,
        samples: cfg.samples,
        curve,
        rechecks,
        passed,
    })
}

// ---------------------------------------------------------------------------
// Argument parsing

#[derive(Debug, Parser)]
#[command(
    name = "rootflow",
    version,
    about = "Root continuity of complex polynomials, made executable"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Series coefficient drop tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Truncation order K of series arithmetic.
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER)]
    pub order: i64,
    /// Decreasing values of t for root trajectories, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub ladder: Option<Vec<f64>>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Random directions per worst-case search.
    #[arg(long, global = true, default_value_t = SamplerConfig::default().samples)]
    pub samples: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Cross-check against the companion-matrix oracle.
    #[arg(long, global = true)]
    pub verify: bool,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl GlobalArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            tolerance: self.tolerance,
            order: self.order,
            ladder: self.ladder.clone().unwrap_or_else(default_ladder),
            seed: self.seed,
            samples: self.samples,
            format: self.format,
            verify: self.verify,
            out: self.out.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct PolyArg {
    /// Polynomial JSON file: {"coeffs": [[re, im], ...]}, ascending degree.
    pub file: Option<PathBuf>,
    /// Inline coefficients a0,a1,...,an; complex entries as re+imi.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "file")]
    pub inline: Option<String>,
}

impl PolyArg {
    fn load(&self) -> Result<ComplexPoly> {
        load_poly(self.file.as_deref(), self.inline.as_deref(), "polynomial")
    }
}

fn load_poly(file: Option<&Path>, inline: Option<&str>, what: &str) -> Result<ComplexPoly> {
    match (file, inline) {
        (_, Some(s)) => parse_inline(s),
        (Some(p), None) => read_json(p),
        (None, None) => Err(Error::invalid(format!(
            "no {what} given (file or --inline)"
        ))),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Roots with multiplicities and residuals.
    Roots(PolyArg),
    /// Align the roots of f and g by deflation and by bottleneck matching.
    Align {
        f: Option<PathBuf>,
        g: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        f_inline: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        g_inline: Option<String>,
    },
    /// Check the evaluation (1) or nearby-root (2) property of a deformation.
    Lemma {
        /// Deformation JSON file: {"base": ..., "paths": [...], "kind": ...}.
        file: PathBuf,
        #[arg(long, value_enum)]
        which: Which,
        /// Number of sample points for property 1 (default n + 1).
        #[arg(long)]
        points: Option<usize>,
    },
    /// Empirical modulus of continuity δ(ε).
    Continuity {
        #[command(flatten)]
        poly: PolyArg,
        /// Ascending root tolerances, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
    },
}

/// Result of one CLI invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    /// Report text for stdout (empty when written to `--out`).
    pub stdout: String,
    /// Summary or error line for stderr.
    pub stderr: String,
}

pub fn execute(cli: &Cli) -> Outcome {
    let cfg = cli.global.config();
    let fail = |e: Error| Outcome {
        code: exit_code(&e),
        stdout: String::new(),
        stderr: format!("error: {e}"),
    };
    if let Err(e) = cfg.validate() {
        return fail(e);
    }
    let report = match run_command(&cli.command, &cfg) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let text = match cfg.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    let stdout = match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                return fail(Error::invalid(format!(
                    "cannot write {}: {e}",
                    path.display()
                )));
            }
            String::new()
        }
        None => text,
    };
    Outcome {
        code: if report.passed() {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        },
        stdout,
        stderr: report.summary(),
    }
}

fn run_command(command: &Command, cfg: &RunConfig) -> Result<Report> {
    Ok(match command {
        Command::Roots(p) => Report::Roots(cmd_roots(&p.load()?, cfg)?),
        Command::Align {
            f,
            g,
            f_inline,
            g_inline,
        } => {
            // With one inline polynomial the single positional file is the other.
            let (ff, gf) = match (f_inline, g_inline) {
                (Some(_), None) => (None, g.as_deref().or(f.as_deref())),
                _ => (f.as_deref(), g.as_deref()),
            };
            let fp = load_poly(ff, f_inline.as_deref(), "f")?;
            let gp = load_poly(gf, g_inline.as_deref(), "g")?;
            Report::Align(cmd_align(&fp, &gp, cfg)?)
        }
        Command::Lemma {
            file,
            which,
            points,
        } => Report::Lemma(cmd_lemma(&read_json(file)?, *which, *points, cfg)?),
        Command::Continuity { poly, epsilons } => {
            Report::Continuity(cmd_continuity(&poly.load()?, epsilons, cfg)?)
        }
    })
}

/// Parses `args` (including the program name) and runs the command. Usage
/// errors map to exit code 2.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            Outcome {
                code,
                stdout: if e.use_stderr() {
                    String::new()
                } else {
                    e.to_string()
                },
                stderr: if e.use_stderr() {
                    e.to_string()
                } else {
                    String::new()
                },
            }
        }
    }
}
