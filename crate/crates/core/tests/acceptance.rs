//! Acceptance criteria 1–11. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use kmoment::certify::{archimedean_witness, putinar_search, refute_nonempty, ArchimedeanMode, SearchOptions, SearchOutcome};
use kmoment::cones::{halton_point, PositivityOracle, SemialgebraicDescription};
use kmoment::gns::{build_operators, recover_measure};
use kmoment::linalg::min_eigenvalue;
use kmoment::measures::{
    carleman_diagnostic, carleman_diagnostic_log, petersen_marginals, supnorm_bound_check, Atom, AtomicMeasure, Classification, Verdict,
};
use kmoment::moment::DEFAULT_RANK_TOL;
use kmoment::scalar::{rat, rat_int};
use kmoment::sos::{sos_decompose, two_squares_univariate, verify_sos, SosOutcome, TwoSquaresOptions};
use kmoment::{Error, Polynomial, Rational, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{in_unit_ball, random_measure, random_poly, random_sos};

type Check = std::result::Result<String, String>;
/// Name, check and runtime limit in seconds.
type Criterion = (&'static str, fn() -> Check, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn p(d: usize, s: &str) -> Polynomial {
    Polynomial::parse(d, s).expect("valid polynomial literal")
}

fn motzkin() -> Check {
    let m = p(2, "1 - 3x^2y^2 + x^2y^4 + x^4y^2");
    let w = match sos_decompose(&m, 1e-8, 0) {
        SosOutcome::NotSos(w) => w,
        other => return Err(format!("expected a witness, got {other:?}")),
    };
    // re-check from the raw moments, not through the witness type
    let riesz = w.moments.riesz_apply(&m).map_err(|e| e.to_string())?.as_f64();
    let m3 = w.moments.moment_matrix(3).map_err(|e| e.to_string())?.to_f64();
    let lmin = min_eigenvalue(&m3).map_err(|e| e.to_string())?;
    ensure(riesz <= -1e-4, || format!("L_y(m) = {riesz:e}"))?;
    ensure(lmin >= 1e-6, || format!("λ_min(M_3(y)) = {lmin:e}"))?;
    let mut grid_min = f64::INFINITY;
    for i in 0..=80 {
        for j in 0..=80 {
            let pt = [-2.0 + 0.05 * i as f64, -2.0 + 0.05 * j as f64];
            grid_min = grid_min.min(m.eval_f64(&pt));
        }
    }
    ensure(grid_min >= -1e-12, || format!("grid minimum {grid_min:e}"))?;
    Ok(format!("L_y(m)={riesz:.3e} λ_min={lmin:.3e} grid_min={grid_min:.1e}"))
}

fn gram_sweep() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let d = rng.gen_range(1..=2);
        let deg = rng.gen_range(1..=3);
        let target = random_sos(&mut rng, d, deg);
        let dec = match sos_decompose(&target, 1e-9, 0) {
            SosOutcome::Decomposed { decomposition, .. } => decomposition,
            other => return Err(format!("case {case} ({target}): {other:?}")),
        };
        let r = verify_sos(&target, &dec);
        let bound = kmoment::poly::binomial(d as u64 + 3, 3) as usize;
        ensure(r.max_coeff_error <= 1e-6, || format!("case {case}: error {:e}", r.max_coeff_error))?;
        ensure(dec.len() <= bound, || format!("case {case}: {} squares > {bound}", dec.len()))?;
        worst = worst.max(r.max_coeff_error);
    }
    Ok(format!("200/200 decomposed, worst error {worst:.2e}"))
}

fn putinar_ball() -> Check {
    let k = SemialgebraicDescription::unit_ball(2);
    let g = p(2, "3 - x^2");
    let cert = match putinar_search(&g, &k, 2, &SearchOptions::default()).map_err(|e| e.to_string())? {
        SearchOutcome::Found(c) => c,
        other => return Err(format!("{other:?}")),
    };
    let report = cert.verify().map_err(|e| e.to_string())?;
    ensure(report.exact, || format!("certificate not exact: {:e}", report.max_coeff_error))?;
    let oracle = PositivityOracle::new(&k, 1000, 1.0, 0.0);
    ensure(oracle.points().len() == 1000, || {
        format!("only {} sample points", oracle.points().len())
    })?;
    let min = oracle.points().iter().map(|x| g.eval_f64(x)).fold(f64::INFINITY, f64::min);
    ensure(min >= -1e-9, || format!("g = {min:e} at a ball point"))?;
    Ok(format!("exact certificate, min g on 1000 points {min:.3}"))
}

fn archimedean() -> Check {
    let opts = SearchOptions::default();
    let one = 1.0 + 1e-6;
    let ball = archimedean_witness(&SemialgebraicDescription::unit_ball(2), 2, ArchimedeanMode::Ball, &opts).map_err(|e| e.to_string())?;
    let lam = match ball {
        SearchOutcome::Found(w) => w.lambdas[0].as_f64(),
        other => return Err(format!("ball: {other:?}")),
    };
    ensure(lam <= one, || format!("ball λ = {lam}"))?;
    let boxed =
        archimedean_witness(&SemialgebraicDescription::unit_box(2), 2, ArchimedeanMode::Coordinates, &opts).map_err(|e| e.to_string())?;
    let lams: Vec<f64> = match boxed {
        SearchOutcome::Found(w) => w.lambdas.iter().map(Scalar::as_f64).collect(),
        other => return Err(format!("box: {other:?}")),
    };
    ensure(lams.iter().all(|&l| l <= one), || format!("box λ = {lams:?}"))?;
    let half = SemialgebraicDescription::new(1, vec![p(1, "x")]).map_err(|e| e.to_string())?;
    for two_t in [2, 4, 6, 8] {
        let out = archimedean_witness(&half, two_t, ArchimedeanMode::Ball, &opts).map_err(|e| e.to_string())?;
        ensure(matches!(out, SearchOutcome::NotFoundAtDegree(_)), || {
            format!("half-line 2t={two_t}: {out:?}")
        })?;
    }
    Ok(format!("ball λ={lam:.6}, box λ={lams:?}, half-line not found for 2t ≤ 8"))
}

fn emptiness() -> Check {
    let opts = SearchOptions::default();
    let empty = SemialgebraicDescription::new(1, vec![p(1, "-1 - x^2")]).map_err(|e| e.to_string())?;
    let cert = match refute_nonempty(&empty, 2, &opts).map_err(|e| e.to_string())? {
        SearchOutcome::Found(c) => c,
        other => return Err(format!("-1-x²: {other:?}")),
    };
    let r = cert.verify().map_err(|e| e.to_string())?;
    ensure(r.exact || r.max_coeff_error <= 1e-6, || {
        format!("certificate error {:e}", r.max_coeff_error)
    })?;
    let interval = SemialgebraicDescription::new(1, vec![p(1, "1 - x^2")]).map_err(|e| e.to_string())?;
    for two_t in [2, 4, 6] {
        let out = refute_nonempty(&interval, two_t, &opts).map_err(|e| e.to_string())?;
        ensure(matches!(out, SearchOutcome::NotFoundAtDegree(_)), || {
            format!("1-x² 2t={two_t}: {out:?}")
        })?;
    }
    Ok(format!("−1 ∈ T(−1−x²) verified (exact={}), 1−x² not refuted for 2t ≤ 6", r.exact))
}

/// Largest distance from each true atom to its nearest recovered atom, and
/// the matching weight error.
fn match_atoms(truth: &AtomicMeasure<Rational>, found: &AtomicMeasure<f64>) -> (f64, f64) {
    let mut atom_err = 0.0f64;
    let mut weight_err = 0.0f64;
    for a in truth.atoms() {
        let x: Vec<f64> = a.point.iter().map(Scalar::as_f64).collect();
        let best = found
            .atoms()
            .iter()
            .min_by(|u, v| dist(&u.point, &x).total_cmp(&dist(&v.point, &x)));
        match best {
            Some(b) => {
                atom_err = atom_err.max(dist(&b.point, &x));
                weight_err = weight_err.max((b.weight - a.weight.as_f64()).abs());
            }
            None => return (f64::INFINITY, f64::INFINITY),
        }
    }
    (atom_err, weight_err)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

fn flat_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_atom, mut worst_moment) = (0.0f64, 0.0f64);
    for case in 0..100 {
        let d = rng.gen_range(1..=2);
        let k = rng.gen_range(1..=4);
        let mu = random_measure(&mut rng, d, k, |_| true);
        let y = mu.moments(2 * (k as u32 + 1));
        let rec = recover_measure(&y, DEFAULT_RANK_TOL, case).map_err(|e| format!("case {case}: {e}"))?;
        ensure(rec.measure.len() == k, || {
            format!("case {case}: {} atoms recovered, {k} expected", rec.measure.len())
        })?;
        let (atom_err, weight_err) = match_atoms(&mu, &rec.measure);
        ensure(atom_err <= 1e-6 && weight_err <= 1e-6, || {
            format!("case {case}: atom error {atom_err:e}, weight error {weight_err:e}")
        })?;
        let back = rec.measure.moments(y.degree());
        let moment_err = y
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a.as_f64() - b).abs())
            .fold(0.0, f64::max);
        ensure(moment_err <= 1e-8, || format!("case {case}: moment error {moment_err:e}"))?;
        let report = kmoment::gns::verify_support(
            rec.measure.atoms().iter().map(|a| a.point.clone()).collect::<Vec<_>>().as_slice(),
            &SemialgebraicDescription::unit_box(d),
            1e-6,
        )
        .map_err(|e| e.to_string())?;
        ensure(report.all_inside, || format!("case {case}: atom outside the box"))?;
        worst_atom = worst_atom.max(atom_err.max(weight_err));
        worst_moment = worst_moment.max(moment_err);
    }
    Ok(format!(
        "100/100 recovered, atom/weight error {worst_atom:.1e}, moment error {worst_moment:.1e}"
    ))
}

fn identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..50 {
        let a = random_poly(&mut rng, 1, 3);
        let lam = rat(rng.gen_range(1..=40), rng.gen_range(1..=7));
        let l = Polynomial::constant(1, lam.clone());
        let plus = &l + &a;
        let minus = &l - &a;
        let lhs = (&(&plus.square() * &minus) + &(&minus.square() * &plus)).scale(&(rat_int(1) / (rat_int(2) * &lam)));
        ensure(lhs == &l.square() - &a.square(), || {
            format!("bounded-element identity, case {case}")
        })?;
    }
    for case in 0..50 {
        let d = rng.gen_range(1..=2);
        let (a, b) = (random_poly(&mut rng, d, 2), random_poly(&mut rng, d, 2));
        let lam = Polynomial::constant(d, rat(rng.gen_range(1..=40), rng.gen_range(1..=7)));
        let mu = Polynomial::constant(d, rat(rng.gen_range(1..=40), rng.gen_range(1..=7)));
        let lhs = &(&lam * &mu).square() - &(&a * &b).square();
        let rhs = &(&mu.square() * &(&lam.square() - &a.square())) + &(&a.square() * &(&mu.square() - &b.square()));
        ensure(lhs == rhs, || format!("subalgebra identity, case {case}"))?;
    }
    for case in 0..50 {
        let d = rng.gen_range(1..=2);
        let (q, f) = (random_poly(&mut rng, d, 2), random_poly(&mut rng, d, 2));
        let one = Polynomial::one(d);
        let rhs = (&(&(&q + &one).square() * &f) + &(&(&q - &one).square() * &-&f)).scale(&rat(1, 4));
        ensure(&q * &f == rhs, || format!("variety identity, case {case}"))?;
    }
    Ok("3 × 50 identities hold exactly".into())
}

fn operator_norms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let d = rng.gen_range(1..=2);
        let k = rng.gen_range(1..=4);
        let mu = random_measure(&mut rng, d, k, in_unit_ball);
        let y = mu.moments(2 * (mu.len() as u32 + 1));
        let (_, ops) = build_operators(&y, DEFAULT_RANK_TOL).map_err(|e| format!("case {case}: {e}"))?;
        for j in 0..d {
            let norm = ops.operator_norm(j).map_err(|e| e.to_string())?;
            ensure(norm <= 1.0 + 1e-6, || format!("case {case}: ‖M_{j}‖ = {norm}"))?;
            worst = worst.max(norm);
        }
    }
    Ok(format!("50/50 within the unit ball, largest ‖M_j‖ {worst:.9}"))
}

fn two_squares() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = TwoSquaresOptions::default();
    let mut worst = 0.0f64;
    for case in 0..100 {
        let (dq, dr) = (rng.gen_range(0..=4), rng.gen_range(0..=4));
        let q = random_poly(&mut rng, 1, dq);
        let r = random_poly(&mut rng, 1, dr);
        let target = &q.square() + &r.square();
        let out = two_squares_univariate(&target, &opts).map_err(|e| format!("case {case} ({target}): {e}"))?;
        // independent expansion check
        let diff = &(&out.q.square() + &out.r.square()) - &target;
        let err = diff.terms().map(|(_, c)| c.as_f64().abs()).fold(0.0, f64::max);
        ensure(err <= 1e-6, || format!("case {case}: expansion error {err:e}"))?;
        worst = worst.max(err);
    }
    for case in 0..100 {
        // (x − a)(x − b)(1 + x²) with a < b is negative on (a, b)
        let a = rng.gen_range(-12..=11);
        let b = rng.gen_range(a + 1..=12);
        let lin = |c: i64| &Polynomial::var(1, 0) - &Polynomial::constant(1, rat(c, 4));
        let target = &(&lin(a) * &lin(b)) * &p(1, "1 + x^2");
        match two_squares_univariate(&target, &opts) {
            Err(Error::NotNonnegative { point, .. }) => {
                let v = target.eval_f64(&[point]);
                ensure(v < 0.0, || format!("sign-change case {case}: p({point}) = {v}"))?;
            }
            other => return Err(format!("sign-change case {case}: {other:?}")),
        }
    }
    Ok(format!(
        "100/100 decomposed (worst error {worst:.1e}), 100/100 sign changes rejected"
    ))
}

fn determinacy() -> Check {
    // (2n − 1)!! for n = 1..=30
    let normal: Vec<f64> = (1..=30)
        .scan(1.0, |acc, n| {
            *acc *= (2 * n - 1) as f64;
            Some(*acc)
        })
        .collect();
    let r = carleman_diagnostic(&normal).map_err(|e| e.to_string())?;
    ensure(r.classification == Classification::DivergenceConsistent, || {
        format!("normal: {r:?}")
    })?;
    let log_s: Vec<f64> = (1..=30).map(|n| 4.0 * (n * n) as f64).collect();
    let fast = carleman_diagnostic_log(&log_s).map_err(|e| e.to_string())?;
    ensure(fast.classification == Classification::Inconclusive, || {
        format!("exp(4n²): {fast:?}")
    })?;
    let quad = AtomicMeasure::new(
        2,
        [[-1, -1], [-1, 1], [1, -1], [1, 1]]
            .iter()
            .map(|x| Atom {
                point: x.iter().map(|&v| rat_int(v)).collect(),
                weight: rat(1, 4),
            })
            .collect(),
    )
    .map_err(|e| e.to_string())?;
    let pet = petersen_marginals(&quad, 30).map_err(|e| e.to_string())?;
    ensure(pet.verdict == Verdict::DeterminateConsistent, || format!("petersen: {pet:?}"))?;
    Ok(format!(
        "normal slope {:.3}, exp(4n²) slope {:.3}, four-atom measure determinate-consistent",
        r.log_log_slope.unwrap_or(f64::NAN),
        fast.log_log_slope.unwrap_or(f64::NAN)
    ))
}

fn supnorm() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..100 {
        let d = rng.gen_range(1..=2);
        let k = match rng.gen_range(0..3) {
            0 => SemialgebraicDescription::unit_ball(d),
            1 => SemialgebraicDescription::unit_box(d),
            _ => {
                // ball of radius r about the origin
                let r2 = Polynomial::constant(d, rat(rng.gen_range(1..=16), 4));
                let sq = (0..d).fold(Polynomial::zero(d), |acc, j| &acc + &Polynomial::var(d, j).square());
                SemialgebraicDescription::new(d, vec![&r2 - &sq]).map_err(|e| e.to_string())?
            }
        };
        let inside = |x: &[Rational]| {
            let pt: Vec<f64> = x.iter().map(Scalar::as_f64).collect();
            k.contains_point(&pt).unwrap_or(false)
        };
        let (atoms, deg) = (rng.gen_range(1..=4), rng.gen_range(0..=4));
        let mu = random_measure(&mut rng, d, atoms, inside);
        let poly = random_poly(&mut rng, d, deg);
        let samples: Vec<Vec<f64>> = (0..200).map(|i| halton_point(i, d, 2.0)).collect();
        let report = supnorm_bound_check(&mu, &k, &poly, &samples, 1e-9).map_err(|e| format!("case {case}: {e}"))?;
        ensure(report.holds, || format!("case {case}: {report:?}"))?;
    }
    Ok("100/100 triples satisfy |L(p)| ≤ L(1) sup|p|".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1 motzkin refutation", motzkin, 30),
        ("2 gram soundness sweep", gram_sweep, 300),
        ("3 putinar on the ball", putinar_ball, 10),
        ("4 archimedean witnesses", archimedean, 60),
        ("5 emptiness refutation", emptiness, 30),
        ("6 flat round trip", flat_round_trip, 300),
        ("7 symbolic identities", identities, 10),
        ("8 operator-norm bound", operator_norms, 60),
        ("9 univariate two squares", two_squares, 30),
        ("10 determinacy diagnostics", determinacy, 5),
        ("11 sup-norm bound", supnorm, 30),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let verdict = match result {
            Ok(detail) if elapsed <= Duration::from_secs(limit) => format!("PASS  {detail}"),
            Ok(detail) => format!("FAIL  over the {limit} s limit; {detail}"),
            Err(why) => format!("FAIL  {why}"),
        };
        if verdict.starts_with("FAIL") {
            failed += 1;
        }
        println!("criterion {name:<28} {elapsed:>8.2?}  {verdict}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
