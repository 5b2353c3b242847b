use std::path::Path;

use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::{CertifyKind, Command, MeasureCommand, Mode, MomentCommand, Outcome, RunConfig, EXIT_FOUND, EXIT_NOT_FOUND, EXIT_UNKNOWN};
use crate::certify::{
    archimedean_witness, putinar_search, refute_nonempty, schmudgen_search, ArchimedeanMode, ArchimedeanWitness, ArchimedeanWitnessJson,
    Certificate, CertificateJson, CertifyOutcome, SearchOptions, SearchOutcome,
};
use crate::cones::{PositivityOracle, SemialgebraicDescription};
use crate::error::{Error, Result};
use crate::gns::{recover_measure, verify_support};
use crate::linalg::Mat;
use crate::measures::{
    carleman_diagnostic, carleman_diagnostic_log, petersen_marginals, supnorm_bound_check, AtomicMeasure, Classification, Verdict,
};
use crate::moment::{flatness_check, flatness_check_at, SequenceJson, TruncatedMomentSequence, DEFAULT_RANK_TOL};
use crate::scalar::Scalar;
use crate::sos::{
    sos_decompose, verify_sos, DecompositionJson, NotSosWitness, SosDecomposition, SosOutcome, WitnessJson, FLOAT_VERIFY_TOL,
};
use crate::Polynomial;

const DEFAULT_TOL: f64 = 1e-8;
const BOUND_TOL: f64 = 1e-9;

pub(super) fn dispatch(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::Sos { input } => cmd_sos(cfg, input),
        Command::Certify { kind } => cmd_certify(cfg, kind),
        Command::Moment { sub } => cmd_moment(cfg, sub),
        Command::Measure { sub } => cmd_measure(cfg, sub),
        Command::Verify { input, p } => cmd_verify(input, p.as_deref()),
    }
}

fn read(path: &Path) -> Result<String> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    if s.trim().is_empty() {
        return Err(Error::Parse(format!("{} is empty", path.display())));
    }
    Ok(s)
}

fn load_poly(path: &Path) -> Result<Polynomial> {
    Polynomial::from_json_str(&read(path)?)
}

fn load_description(path: &Path) -> Result<SemialgebraicDescription> {
    SemialgebraicDescription::from_json_str(&read(path)?)
}

fn load_measure(path: &Path) -> Result<AtomicMeasure<f64>> {
    AtomicMeasure::from_json_str(&read(path)?, None)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn done(code: i32, value: Value) -> Result<Outcome> {
    Ok(Outcome { code, value })
}

fn cmd_sos(cfg: &RunConfig, input: &Path) -> Result<Outcome> {
    let p = load_poly(input)?;
    let target = to_value(&p.to_json());
    match sos_decompose(&p, cfg.tol.unwrap_or(DEFAULT_TOL), cfg.seed) {
        SosOutcome::Decomposed { decomposition, report } => done(
            EXIT_FOUND,
            json!({"status": "decomposed", "target": target, "decomposition": decomposition.to_json(), "report": report}),
        ),
        SosOutcome::NotSos(w) => done(
            EXIT_NOT_FOUND,
            json!({"status": "refuted", "target": target, "witness": w.to_json(), "check": w.check(&p)}),
        ),
        SosOutcome::OddDegree { degree } => done(EXIT_NOT_FOUND, json!({"status": "odd-degree", "target": target, "degree": degree})),
        SosOutcome::Unknown(d) => done(EXIT_UNKNOWN, json!({"status": "unknown", "target": target, "diagnostics": d})),
    }
}

fn certificate_ok(c: &Certificate) -> Result<Value> {
    let r = c.verify()?;
    if r.exact || r.max_coeff_error <= FLOAT_VERIFY_TOL * c.target().max_abs_coeff().max(1.0) {
        Ok(to_value(&r))
    } else {
        Err(Error::ToleranceExceeded {
            error: r.max_coeff_error,
            tol: FLOAT_VERIFY_TOL,
        })
    }
}

fn search_outcome<T>(out: SearchOutcome<T>, found: impl FnOnce(T) -> Result<Value>) -> Result<Outcome> {
    match out {
        SearchOutcome::Found(c) => {
            let mut v = found(c)?;
            v.as_object_mut().expect("object").insert("status".into(), json!("found"));
            done(EXIT_FOUND, v)
        }
        SearchOutcome::NotFoundAtDegree(n) => done(
            EXIT_NOT_FOUND,
            json!({"status": "not-found-at-degree", "degree": n.degree, "trace_bound": n.trace_bound, "margin": n.margin}),
        ),
        SearchOutcome::Unknown(d) => done(EXIT_UNKNOWN, json!({"status": "unknown", "diagnostics": d})),
    }
}

fn certificate_outcome(out: CertifyOutcome) -> Result<Outcome> {
    search_outcome(out, |c| {
        let report = certificate_ok(&c)?;
        Ok(json!({"certificate": c.to_json(), "report": report}))
    })
}

fn cmd_certify(cfg: &RunConfig, kind: &CertifyKind) -> Result<Outcome> {
    let opts = SearchOptions {
        tol: cfg.tol.unwrap_or(DEFAULT_TOL),
        seed: cfg.seed,
        ..SearchOptions::default()
    };
    match kind {
        CertifyKind::Putinar { g, common } => {
            let (g, k) = (load_poly(g)?, load_description(&common.k)?);
            certificate_outcome(putinar_search(&g, &k, common.degree, &opts)?)
        }
        CertifyKind::Schmudgen { g, common } => {
            let (g, k) = (load_poly(g)?, load_description(&common.k)?);
            certificate_outcome(schmudgen_search(&g, &k, common.degree, &opts)?)
        }
        CertifyKind::Empty { common } => {
            let k = load_description(&common.k)?;
            certificate_outcome(refute_nonempty(&k, common.degree, &opts)?)
        }
        CertifyKind::Archimedean { common, mode } => {
            let k = load_description(&common.k)?;
            let mode = match mode {
                Mode::Ball => ArchimedeanMode::Ball,
                Mode::Coordinates => ArchimedeanMode::Coordinates,
            };
            search_outcome(archimedean_witness(&k, common.degree, mode, &opts)?, |w| {
                if !w.verify() {
                    return Err(Error::ToleranceExceeded {
                        error: f64::INFINITY,
                        tol: FLOAT_VERIFY_TOL,
                    });
                }
                Ok(json!({"witness": w.to_json()}))
            })
        }
    }
}

fn scalar_json<S: Scalar>(x: &S) -> Value {
    if S::is_exact() {
        Value::String(x.to_string())
    } else {
        json!(x.as_f64())
    }
}

fn matrix_json<S: Scalar>(m: &Mat<S>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(scalar_json).collect()))
            .collect(),
    )
}

enum Sequence {
    Exact(TruncatedMomentSequence<BigRational>),
    Float(TruncatedMomentSequence<f64>),
}

fn load_sequence(path: &Path) -> Result<Sequence> {
    let j = SequenceJson::from_json_str(&read(path)?)?;
    Ok(if j.is_exact() {
        Sequence::Exact(j.to_rational()?)
    } else {
        Sequence::Float(j.to_f64()?)
    })
}

fn cmd_moment(cfg: &RunConfig, sub: &MomentCommand) -> Result<Outcome> {
    match sub {
        MomentCommand::Matrix { input, n } => {
            let m = match load_sequence(input)? {
                Sequence::Exact(y) => matrix_json(&y.moment_matrix(*n)?),
                Sequence::Float(y) => matrix_json(&y.moment_matrix(*n)?),
            };
            done(EXIT_FOUND, json!({"n": n, "matrix": m}))
        }
        MomentCommand::Localize { input, g, n } => {
            let g = load_poly(g)?;
            let m = match load_sequence(input)? {
                Sequence::Exact(y) => matrix_json(&y.localizing_matrix(&g, *n)?),
                Sequence::Float(y) => matrix_json(&y.localizing_matrix(&g.to_f64(), *n)?),
            };
            done(EXIT_FOUND, json!({"n": n, "g": g.to_json(), "matrix": m}))
        }
        MomentCommand::Flat { input, n } => {
            let tol = cfg.tol.unwrap_or(DEFAULT_RANK_TOL);
            let report = match (load_sequence(input)?, n) {
                (Sequence::Exact(y), Some(n)) => flatness_check_at(&y, *n, tol)?,
                (Sequence::Exact(y), None) => flatness_check(&y, tol)?,
                (Sequence::Float(y), Some(n)) => flatness_check_at(&y, *n, tol)?,
                (Sequence::Float(y), None) => flatness_check(&y, tol)?,
            };
            done(if report.flat { EXIT_FOUND } else { EXIT_NOT_FOUND }, to_value(&report))
        }
        MomentCommand::Atoms { input, k } => {
            let tol = cfg.tol.unwrap_or(DEFAULT_RANK_TOL);
            let k = k.as_deref().map(load_description).transpose()?;
            let rec = match load_sequence(input)? {
                Sequence::Exact(y) => recover_measure(&y, tol, cfg.seed)?,
                Sequence::Float(y) => recover_measure(&y, tol, cfg.seed)?,
            };
            let mut out = match to_value(&rec.measure.to_json()) {
                Value::Object(m) => m,
                _ => Map::new(),
            };
            out.insert("rank".into(), json!(rec.basis.len()));
            out.insert(
                "quotient_basis".into(),
                Value::Array(rec.basis.exponents().iter().map(|e| json!(e.entries())).collect()),
            );
            out.insert("weight_residual".into(), json!(rec.weights.residual));
            out.insert("commutator_norm".into(), json!(rec.operators.commutator_norm()));
            let mut code = EXIT_FOUND;
            if let Some(k) = k {
                let points: Vec<Vec<f64>> = rec.measure.atoms().iter().map(|a| a.point.clone()).collect();
                let support = verify_support(&points, &k, BOUND_TOL.max(tol))?;
                if !support.all_inside {
                    code = EXIT_NOT_FOUND;
                }
                out.insert("support".into(), to_value(&support));
            }
            done(code, Value::Object(out))
        }
    }
}

#[derive(serde::Deserialize)]
struct EvenMoments {
    s: Option<Vec<f64>>,
    log_s: Option<Vec<f64>>,
}

fn cmd_measure(cfg: &RunConfig, sub: &MeasureCommand) -> Result<Outcome> {
    match sub {
        MeasureCommand::Moments { input, degree, float } => {
            let mu = load_measure(input)?;
            let y = if *float {
                SequenceJson::from(&mu.moments(*degree))
            } else {
                SequenceJson::from(&mu.to_rational()?.moments(*degree))
            };
            done(EXIT_FOUND, to_value(&y))
        }
        MeasureCommand::Carleman { input } => {
            let j: EvenMoments = serde_json::from_str(&read(input)?).map_err(|e| Error::Parse(format!("even moments JSON: {e}")))?;
            let report = match (j.s, j.log_s) {
                (Some(s), None) => carleman_diagnostic(&s)?,
                (None, Some(l)) => carleman_diagnostic_log(&l)?,
                _ => return Err(Error::Parse("expected exactly one of \"s\" and \"log_s\"".into())),
            };
            let code = if report.classification == Classification::DivergenceConsistent {
                EXIT_FOUND
            } else {
                EXIT_NOT_FOUND
            };
            done(code, to_value(&report))
        }
        MeasureCommand::Petersen { input, n } => {
            let report = petersen_marginals(&load_measure(input)?, *n)?;
            let code = if report.verdict == Verdict::DeterminateConsistent {
                EXIT_FOUND
            } else {
                EXIT_NOT_FOUND
            };
            done(code, to_value(&report))
        }
        MeasureCommand::Bound {
            input,
            k,
            p,
            samples,
            radius,
        } => {
            let mu = load_measure(input)?;
            let k = load_description(k)?;
            let p = load_poly(p)?;
            let oracle = PositivityOracle::new(&k, *samples, *radius, 0.0);
            let report = supnorm_bound_check(&mu.to_rational()?, &k, &p, oracle.points(), cfg.tol.unwrap_or(BOUND_TOL))?;
            done(if report.holds { EXIT_FOUND } else { EXIT_NOT_FOUND }, to_value(&report))
        }
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    v.as_object().and_then(|m| m.get(key))
}

fn parse_value<T: serde::de::DeserializeOwned>(v: &Value, what: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("{what} JSON: {e}")))
}

/// Target polynomial from `--p`, or from a `"target"` field in the file.
fn target_for(doc: &Value, p: Option<&Path>) -> Result<Polynomial> {
    match (p, field(doc, "target")) {
        (Some(path), _) => load_poly(path),
        (None, Some(t)) => Polynomial::from_json(&parse_value(t, "polynomial")?),
        (None, None) => Err(Error::Parse("a target polynomial is required: pass --p".into())),
    }
}

fn cmd_verify(input: &Path, p: Option<&Path>) -> Result<Outcome> {
    let doc: Value = serde_json::from_str(&read(input)?).map_err(|e| Error::Parse(format!("{}: {e}", input.display())))?;
    let verdict = |kind: &str, valid: bool, report: Value| {
        done(
            if valid { EXIT_FOUND } else { EXIT_NOT_FOUND },
            json!({"kind": kind, "valid": valid, "report": report}),
        )
    };
    let inner = |key: &str| field(&doc, key).filter(|v| v.is_object());

    let cert = inner("certificate").or_else(|| field(&doc, "kind").map(|_| &doc));
    if let Some(c) = cert {
        let c = Certificate::from_json(&parse_value::<CertificateJson>(c, "certificate")?)?;
        return match certificate_ok(&c) {
            Ok(r) => verdict("certificate", true, r),
            Err(Error::ToleranceExceeded { error, .. }) => verdict("certificate", false, json!({"max_coeff_error": error})),
            Err(e) => Err(e),
        };
    }
    let arch = inner("witness")
        .filter(|w| field(w, "lambdas").is_some())
        .or_else(|| field(&doc, "lambdas").map(|_| &doc));
    if let Some(w) = arch {
        let w = ArchimedeanWitness::from_json(&parse_value::<ArchimedeanWitnessJson>(w, "archimedean witness")?)?;
        let lambdas: Vec<String> = w.to_json().lambdas;
        return verdict("archimedean-witness", w.verify(), json!({"lambdas": lambdas}));
    }
    let dec = inner("decomposition").or_else(|| field(&doc, "squares").map(|_| &doc));
    if let Some(d) = dec {
        let target = target_for(&doc, p)?;
        let dec = SosDecomposition::from_json(&parse_value::<DecompositionJson>(d, "decomposition")?, target.dim())?;
        let r = verify_sos(&target, &dec);
        let valid = r.exact || r.max_coeff_error <= FLOAT_VERIFY_TOL * target.max_abs_coeff().max(1.0);
        return verdict("decomposition", valid, to_value(&r));
    }
    let wit = inner("witness").or_else(|| field(&doc, "riesz_value").map(|_| &doc));
    if let Some(w) = wit {
        let target = target_for(&doc, p)?;
        let w = NotSosWitness::from_json(&parse_value::<WitnessJson>(w, "witness")?)?;
        let check = w.check(&target);
        return verdict("not-sos-witness", check.valid, to_value(&check));
    }
    Err(Error::Parse(format!(
        "{}: not a certificate, decomposition or witness",
        input.display()
    )))
}
