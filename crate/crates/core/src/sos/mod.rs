//! Sums of squares through Gram matrices.
//!
//! `p = v_mᵀ G v_m` with `G ⪰ 0` is a linear system in the entries of `G`
//! plus a semidefinite constraint. A feasible `G` is rounded to rationals and
//! factored exactly when possible; an infeasible system yields a moment
//! vector that separates `p` from the SOS cone.

mod decomposition;
mod gram;
mod refine;
mod univariate;
mod witness;

pub use decomposition::{verify_sos, DecompositionJson, SosDecomposition, SosReport};
pub use gram::{Extraction, GramBlock, GramProgram, RATIONAL_DENOMINATOR_CAP};
pub use univariate::{two_squares_univariate, TwoSquares, TwoSquaresOptions};
pub use witness::{NotSosWitness, WitnessCheck, WitnessJson};

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{solve_feasibility, SdpDiagnostics, SdpOptions, SdpOutcome};
use crate::moment::TruncatedMomentSequence;
use crate::poly::{Exponent, MonomialBasis};
use crate::Polynomial;

/// Upper-triangle entries `(i, j, c)` and the right-hand side of one equation.
pub type Equation = (Vec<(usize, usize, BigRational)>, BigRational);

/// Coefficient matching `p = v_mᵀ G v_m` over the full basis of degree `m`.
#[derive(Clone, Debug)]
pub struct GramSystem {
    program: GramProgram,
}

impl GramSystem {
    pub fn basis(&self) -> &MonomialBasis {
        &self.program.blocks()[0].basis
    }

    pub fn half_degree(&self) -> u32 {
        self.basis().degree()
    }

    pub fn num_equations(&self) -> usize {
        self.program.num_equations()
    }

    pub fn gammas(&self) -> &[Exponent] {
        self.program.gammas()
    }

    /// Entries `(i, j, c)` with `i ≤ j` of the equation for `γ`, and its right-hand side.
    pub fn equation(&self, gamma: &Exponent) -> Option<Equation> {
        let k = self.gammas().iter().position(|g| g == gamma)?;
        let (row, rhs) = self.program.equation(k);
        Some((row.iter().map(|(_, i, j, c)| (*i, *j, c.clone())).collect(), rhs.clone()))
    }

    pub fn program(&self) -> &GramProgram {
        &self.program
    }
}

/// Builds the Gram system of `p`. Odd total degree is reported as
/// [`Error::OddDegree`], since such a nonzero polynomial is never SOS.
pub fn gram_system(p: &Polynomial) -> Result<GramSystem> {
    let deg = p.total_degree().unwrap_or(0);
    if deg % 2 == 1 {
        return Err(Error::OddDegree(deg));
    }
    let program = GramProgram::new(
        p,
        vec![GramBlock {
            weight: Polynomial::one(p.dim()),
            basis: MonomialBasis::new(p.dim(), deg / 2),
        }],
    )?;
    Ok(GramSystem { program })
}

/// Removes monomials whose diagonal Gram entry is forced to zero.
///
/// If `p_{2α} = 0` and `2α` is not a sum `β + γ` of two distinct kept
/// monomials, every feasible Gram matrix has `G_αα = 0`, hence a zero row, so
/// `α` can be dropped. Repeats until nothing changes. Such forced zeros leave
/// the full Gram system without interior points.
pub fn prune_basis(p: &Polynomial, basis: &MonomialBasis) -> MonomialBasis {
    let mut keep: Vec<Exponent> = basis.exponents().to_vec();
    loop {
        let set: std::collections::HashSet<&Exponent> = keep.iter().collect();
        let forced = keep.iter().position(|a| {
            let twice = a.add(a);
            p.coeff(&twice).is_zero()
                && !keep
                    .iter()
                    .any(|b| b != a && twice.checked_sub(b).is_some_and(|c| c != *b && set.contains(&c)))
        });
        match forced {
            Some(i) => {
                keep.remove(i);
            }
            None => break,
        }
    }
    basis.subset(|e| keep.contains(e))
}

#[derive(Clone, Debug)]
pub enum SosOutcome {
    Decomposed {
        decomposition: SosDecomposition,
        report: SosReport,
    },
    NotSos(NotSosWitness),
    /// Nonzero polynomial of odd total degree.
    OddDegree {
        degree: u32,
    },
    Unknown(SdpDiagnostics),
}

impl SosOutcome {
    pub fn decomposition(&self) -> Option<&SosDecomposition> {
        match self {
            SosOutcome::Decomposed { decomposition, .. } => Some(decomposition),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&NotSosWitness> {
        match self {
            SosOutcome::NotSos(w) => Some(w),
            _ => None,
        }
    }
}

/// Accepted coefficient error of a floating-point decomposition, relative to
/// `max(1, max |p_α|)`.
pub const FLOAT_VERIFY_TOL: f64 = 1e-6;

fn unknown(phase: &str) -> SdpDiagnostics {
    SdpDiagnostics {
        phase: phase.into(),
        iterations: 0,
        primal_infeasibility: f64::NAN,
        dual_infeasibility: f64::NAN,
        relative_gap: f64::NAN,
        tau: None,
        near_feasible: None,
    }
}

fn accept_gram(p: &Polynomial, prog: &GramProgram, g: &[crate::linalg::SymMatrix], tol: f64) -> Option<SosOutcome> {
    let ex = prog.extract(g, tol);
    let mut decomposition = ex.multipliers.into_iter().next()?;
    if !ex.exact {
        if let Some(better) = refine::refine(p, &decomposition) {
            decomposition = better;
        }
    }
    let report = verify_sos(p, &decomposition);
    (report.exact || report.max_coeff_error <= FLOAT_VERIFY_TOL * p.max_abs_coeff().max(1.0))
        .then_some(SosOutcome::Decomposed { decomposition, report })
}

/// Feasible and verified decompositions of a reduced program; anything else
/// is left to the full program.
fn decompose_with(p: &Polynomial, prog: &GramProgram, opts: &SdpOptions) -> Option<SosOutcome> {
    let sdp = prog.to_sdp(&[1.0]).ok()?;
    match solve_feasibility(&sdp, opts) {
        Ok(SdpOutcome::Feasible { g, .. }) => accept_gram(p, prog, &g, opts.tol),
        Ok(SdpOutcome::Unknown(d)) => d.near_feasible.and_then(|g| accept_gram(p, prog, &g, opts.tol)),
        _ => None,
    }
}

/// Decides whether `p` is a sum of squares.
///
/// The Gram system is first solved over [`prune_basis`]; refutations always
/// come from the full system.
///
/// Eigenvalues of the numerical Gram matrix at or below `tol · λ_max` are
/// dropped. Every returned decomposition and witness has been re-checked.
pub fn sos_decompose(p: &Polynomial, tol: f64, seed: u64) -> SosOutcome {
    if p.is_zero() {
        let decomposition = SosDecomposition::zero(p.dim());
        let report = verify_sos(p, &decomposition);
        return SosOutcome::Decomposed { decomposition, report };
    }
    let system = match gram_system(p) {
        Ok(s) => s,
        Err(Error::OddDegree(degree)) => return SosOutcome::OddDegree { degree },
        Err(e) => return SosOutcome::Unknown(unknown(&format!("setup: {e}"))),
    };
    let opts = SdpOptions {
        tol,
        seed,
        ..SdpOptions::default()
    };
    let pruned = prune_basis(p, system.basis());
    if !pruned.is_empty() && pruned.len() < system.basis().len() {
        let reduced = GramProgram::new(
            p,
            vec![GramBlock {
                weight: Polynomial::one(p.dim()),
                basis: pruned,
            }],
        );
        if let Some(out) = reduced.ok().and_then(|prog| decompose_with(p, &prog, &opts)) {
            return out;
        }
    }
    let prog = system.program();
    let sdp = match prog.to_sdp(&[1.0]) {
        Ok(s) => s,
        Err(e) => return SosOutcome::Unknown(unknown(&format!("setup: {e}"))),
    };
    match solve_feasibility(&sdp, &opts) {
        Ok(SdpOutcome::Feasible { g, .. }) => match accept_gram(p, prog, &g, tol) {
            Some(out) => out,
            None => SosOutcome::Unknown(unknown("verification")),
        },
        Ok(SdpOutcome::InfeasibleWitness(w)) if w.trace_bound.is_none() => {
            let m = system.half_degree();
            let pairs = prog.gammas().iter().cloned().zip(w.y.iter().map(|v| -v));
            match TruncatedMomentSequence::from_pairs(p.dim(), 2 * m, pairs)
                .ok()
                .and_then(|raw| NotSosWitness::from_moments(p, m, &raw))
                .filter(|w| w.verify(p))
            {
                Some(w) => SosOutcome::NotSos(w),
                None => SosOutcome::Unknown(unknown("witness rounding")),
            }
        }
        // a trace-bounded witness excludes only Gram matrices of bounded trace
        Ok(SdpOutcome::InfeasibleWitness(_)) => SosOutcome::Unknown(unknown("bounded witness")),
        // rounding may still land on an exact certificate
        Ok(SdpOutcome::Unknown(d)) => match d.near_feasible.as_ref().and_then(|g| accept_gram(p, prog, g, tol)) {
            Some(out) => out,
            None => SosOutcome::Unknown(d),
        },
        Err(e) => SosOutcome::Unknown(unknown(&format!("solver: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::binomial;
    use crate::scalar::rat_int;
    use proptest::prelude::*;

    fn p(d: usize, s: &str) -> Polynomial {
        Polynomial::parse(d, s).unwrap()
    }

    fn motzkin() -> Polynomial {
        p(2, "1 - 3x^2*y^2 + x^2*y^4 + x^4*y^2")
    }

    #[test]
    fn gram_system_examples() {
        let s = gram_system(&p(1, "x^2")).unwrap();
        assert_eq!(s.basis().len(), 2);
        let eq = |e: u32| s.equation(&Exponent::new(vec![e])).unwrap();
        assert_eq!(eq(0), (vec![(0, 0, rat_int(1))], rat_int(0)));
        assert_eq!(eq(1), (vec![(0, 1, rat_int(1))], rat_int(0)));
        assert_eq!(eq(2), (vec![(1, 1, rat_int(1))], rat_int(1)));

        let s = gram_system(&motzkin()).unwrap();
        assert_eq!(s.basis().len(), 10);
        assert_eq!(s.num_equations() as u64, binomial(2 + 6, 6));

        let s = gram_system(&p(3, "1")).unwrap();
        assert_eq!(s.num_equations(), 1);
        assert_eq!(s.equation(&Exponent::zero(3)).unwrap().1, rat_int(1));

        assert!(matches!(gram_system(&p(1, "x^3")), Err(Error::OddDegree(3))));
    }

    #[test]
    fn decomposes_perfect_squares() {
        for (s, h) in [("x^4 + 2x^2 + 1", "x^2 + 1"), ("x^2 - 2x + 1", "x - 1")] {
            let out = sos_decompose(&p(1, s), 1e-8, 0);
            let dec = out.decomposition().unwrap_or_else(|| panic!("{s}: {out:?}"));
            assert!(verify_sos(&p(1, s), dec).exact);
            assert_eq!(dec.len(), 1);
            let (w, sq) = dec.terms().next().unwrap();
            // h is determined up to sign and weight scaling
            let scaled = sq.square().scale(w);
            assert_eq!(scaled, p(1, h).square());
        }
    }

    #[test]
    fn motzkin_is_refuted() {
        let m = motzkin();
        let out = sos_decompose(&m, 1e-8, 0);
        let w = out.witness().unwrap_or_else(|| panic!("{out:?}"));
        let c = w.check(&m);
        assert!(c.valid, "{c:?}");
        assert!(c.riesz_value <= -1e-4, "{c:?}");
        assert!(c.min_eigenvalue >= 1e-6, "{c:?}");
    }

    #[test]
    fn odd_degree_and_negative_constant() {
        assert!(matches!(
            sos_decompose(&p(2, "x^3 + y"), 1e-8, 0),
            SosOutcome::OddDegree { degree: 3 }
        ));
        let out = sos_decompose(&p(1, "-1"), 1e-8, 0);
        assert!(out.witness().is_some(), "{out:?}");
        let out = sos_decompose(&p(1, "x^2 - 1"), 1e-8, 0);
        assert!(out.witness().is_some(), "{out:?}");
    }

    #[test]
    fn gram_set_without_interior() {
        // q² + r² with common real zeros: every Gram matrix is singular
        let t = p(2, "9 - 18*x - 18*y + x^2 + 26*x*y + 4*y^2 + 22*x^3 + 8*x^2*y + 14*y^3 - 22*x^4 - 24*x^3*y - 6*x^2*y^2 - 2*x*y^3 - 8*y^4 + 16*x^4*y + 8*x^3*y^2 - 8*x^2*y^3 - 4*x*y^4 - 6*y^5 + 18*x^6 + 12*x^5*y + 16*x^4*y^2 - 2*x^3*y^3 + 6*x^2*y^4 - 2*x*y^5 + 5*y^6");
        let out = sos_decompose(&t, 1e-8, 0);
        let dec = out.decomposition().unwrap_or_else(|| panic!("{out:?}"));
        assert!(verify_sos(&t, dec).max_coeff_error <= 1e-6);
    }

    #[test]
    fn refinement_reduces_error() {
        let target = p(1, "x^4 + 2x^2 + 1");
        let rough = SosDecomposition::single(rat_int(1), p(1, "x^2 + 1 + 1/1000")).unwrap();
        let before = verify_sos(&target, &rough).max_coeff_error;
        let better = refine::refine(&target, &rough).unwrap();
        assert!(verify_sos(&target, &better).max_coeff_error < 1e-3 * before);
        assert!(refine::refine(&target, &SosDecomposition::single(rat_int(1), p(1, "x^2 + 1")).unwrap()).is_none());
    }

    #[test]
    fn zero_polynomial_is_empty_sum() {
        let out = sos_decompose(&Polynomial::zero(2), 1e-8, 0);
        let dec = out.decomposition().unwrap();
        assert!(dec.is_empty() && dec.expand().is_zero());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn random_sums_of_two_squares_decompose(
            a in proptest::collection::vec(-3i64..=3, 10),
            b in proptest::collection::vec(-3i64..=3, 10),
        ) {
            let basis = MonomialBasis::new(2, 3);
            let mk = |c: &[i64]| Polynomial::from_coeff_vector(&basis, &c.iter().map(|v| rat_int(*v)).collect::<Vec<_>>());
            let target = &mk(&a).square() + &mk(&b).square();
            let out = sos_decompose(&target, 1e-8, 0);
            let dec = out.decomposition();
            prop_assert!(dec.is_some(), "{}: {:?}", target, out);
            let r = verify_sos(&target, dec.unwrap());
            prop_assert!(r.exact || r.max_coeff_error <= 1e-6 * target.max_abs_coeff().max(1.0));
            prop_assert!(r.num_squares as u64 <= binomial(2 + 3, 3));
        }
    }
}
