//! Command-line front end.
//!
//! Exit codes: 0 found or feasible, 1 not found at the requested degree or
//! refuted, 2 input error, 3 numerically undecided. Results are rendered in
//! memory and written only once the command has finished, so an error never
//! leaves partial output behind.

mod commands;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::error::Error;

pub const EXIT_FOUND: i32 = 0;
pub const EXIT_NOT_FOUND: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "kmoment",
    version,
    about = "Positivity certificates, sums of squares and truncated moment problems"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Numerical tolerance; each command has its own default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose a polynomial into squares or refute it with a moment witness.
    Sos { input: PathBuf },
    /// Search for a Positivstellensatz certificate at degree 2t.
    Certify {
        #[command(subcommand)]
        kind: CertifyKind,
    },
    /// Moment matrices, flatness and atom extraction.
    Moment {
        #[command(subcommand)]
        sub: MomentCommand,
    },
    /// Atomic measures and determinacy diagnostics.
    Measure {
        #[command(subcommand)]
        sub: MeasureCommand,
    },
    /// Re-check a certificate, decomposition or witness file.
    Verify {
        input: PathBuf,
        /// Target polynomial, for decompositions and witnesses.
        #[arg(long)]
        p: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Description of K as JSON.
    #[arg(long = "K", value_name = "DESCRIPTION")]
    pub k: PathBuf,
    /// Degree bound 2t.
    #[arg(long)]
    pub degree: u32,
}

#[derive(Debug, Subcommand)]
pub enum CertifyKind {
    /// g in the quadratic module of K.
    Putinar {
        #[arg(long)]
        g: PathBuf,
        #[command(flatten)]
        common: CertifyArgs,
    },
    /// g in the preordering of K.
    Schmudgen {
        #[arg(long)]
        g: PathBuf,
        #[command(flatten)]
        common: CertifyArgs,
    },
    /// λ − Σ x_j² (or λ_j − x_j²) in the quadratic module of K.
    Archimedean {
        #[command(flatten)]
        common: CertifyArgs,
        #[arg(long, value_enum, default_value_t = Mode::Ball)]
        mode: Mode,
    },
    /// −1 in the preordering of K, proving K empty.
    Empty {
        #[command(flatten)]
        common: CertifyArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Ball,
    Coordinates,
}

#[derive(Debug, Subcommand)]
pub enum MomentCommand {
    /// Moment matrix M_n.
    Matrix {
        input: PathBuf,
        #[arg(long)]
        n: u32,
    },
    /// Localizing matrix of g of order n.
    Localize {
        input: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        n: u32,
    },
    /// Rank comparison of M_n and M_{n+1}.
    Flat {
        input: PathBuf,
        #[arg(long)]
        n: Option<u32>,
    },
    /// Atoms and weights of a flat sequence.
    Atoms {
        input: PathBuf,
        #[arg(long = "K", value_name = "DESCRIPTION")]
        k: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum MeasureCommand {
    /// Moments of an atomic measure through a degree.
    Moments {
        input: PathBuf,
        #[arg(long)]
        degree: u32,
        /// Emit binary64 values instead of exact rationals.
        #[arg(long)]
        float: bool,
    },
    /// Carleman terms of {"s": [s_2, s_4, ...]} or {"log_s": [...]}.
    Carleman { input: PathBuf },
    /// Marginal reduction of an atomic measure.
    Petersen {
        input: PathBuf,
        #[arg(long, default_value_t = 30)]
        n: usize,
    },
    /// |L(p)| ≤ L(1) sup |p| on K.
    Bound {
        input: PathBuf,
        #[arg(long = "K", value_name = "DESCRIPTION")]
        k: PathBuf,
        #[arg(long)]
        p: PathBuf,
        /// Halton samples inside the box [-r, r]^d.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
    },
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A finished command: exit code and JSON payload.
pub(crate) struct Outcome {
    pub code: i32,
    pub value: Value,
}

/// Maps a library error to the exit-code contract.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotFlat { .. } => EXIT_NOT_FOUND,
        Error::RankDeficiencyInstability { .. }
        | Error::DegenerateCombination { .. }
        | Error::IllConditionedVandermonde { .. }
        | Error::ToleranceExceeded { .. }
        | Error::NonFinite => EXIT_UNKNOWN,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (program name first), runs the command and writes `--out`.
pub fn run<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_FOUND };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Execution {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Execution {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    execute(&cfg)
}

pub fn execute(cfg: &RunConfig) -> Execution {
    let failure = |code: i32, msg: String| Execution {
        code,
        stdout: String::new(),
        stderr: format!("error: {msg}\n"),
    };
    if let Some(t) = cfg.tol {
        if !(t > 0.0 && t.is_finite()) {
            return failure(EXIT_INPUT, format!("--tol must be positive, got {t}"));
        }
    }
    let outcome = match commands::dispatch(cfg) {
        Ok(o) => o,
        Err(e) => return failure(exit_code(&e), e.to_string()),
    };
    let rendered = render(&outcome.value, cfg.format);
    match &cfg.out {
        Some(path) => match write_atomic(path, &rendered) {
            Ok(()) => Execution {
                code: outcome.code,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => failure(EXIT_INPUT, format!("cannot write {}: {e}", path.display())),
        },
        None => Execution {
            code: outcome.code,
            stdout: rendered,
            stderr: String::new(),
        },
    }
}

fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
        }
    }
}

/// One `path  value` row per scalar leaf.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&join(k), x, rows);
            }
        }
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = a.iter().map(scalar_text).collect();
            rows.push((prefix.to_string(), format!("[{}]", items.join(", "))));
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&join(&i.to_string()), x, rows);
            }
        }
        _ => rows.push((prefix.to_string(), scalar_text(v))),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
