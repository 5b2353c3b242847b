//! Degree-bounded Positivstellensatz certificates.
//!
//! A search at degree `2t` looks for SOS multipliers `σ_e` with
//! `Σ_e σ_e f^e = g`, where `σ_e` has degree at most `2t − deg f^e` rounded
//! down to even, and products with `deg f^e > 2t` are left out. All Gram
//! blocks go into one SDP. A result is returned only after the expansion has
//! been checked in rational arithmetic.
//!
//! `NotFoundAtDegree` means the SDP solver produced a verified dual
//! certificate: either no multipliers of this degree exist at all, or none
//! exist with total Gram trace below the reported bound. It is never a proof
//! that `g` lies outside the cone.

mod certificate;

pub use certificate::{Certificate, CertificateJson, CertificateKind, CertificateReport, Multiplier, MultiplierJson};

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cones::{module_selectors, preorder_products, product_for, SemialgebraicDescription};
use crate::error::{Error, Result};
use crate::linalg::{solve_feasibility, SdpDiagnostics, SdpOptions, SdpOutcome};
use crate::poly::MonomialBasis;
use crate::scalar::{format_rational, parse_rational};
use crate::sos::{GramBlock, GramProgram, SosDecomposition, FLOAT_VERIFY_TOL};
use crate::Polynomial;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
    /// Bound on the total Gram trace of a certificate; see [`default_trace_bound`].
    pub trace_bound: Option<f64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tol: 1e-8,
            seed: 0,
            max_iter: 50_000,
            trace_bound: None,
        }
    }
}

/// Size horizon of a search: `10 · N · max(1, max |g_α|)` for Gram matrices of
/// total order `N`.
///
/// Some targets sit at distance zero from the cone without belonging to it
/// (`λ − x²` over the half-line is approached by `λ − x² + ε x^{2t}`). Such a
/// problem is only decidable relative to a size bound, so the bound is kept
/// small and reported with every `NotFoundAtDegree`.
pub fn default_trace_bound(order: usize, target: &Polynomial) -> f64 {
    10.0 * order.max(1) as f64 * target.max_abs_coeff().max(1.0)
}

/// Dual evidence behind a `NotFoundAtDegree` answer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NotFound {
    pub degree: u32,
    /// `None` for a strict separation; otherwise the Gram trace below which
    /// no multipliers exist.
    pub trace_bound: Option<f64>,
    pub margin: f64,
}

#[derive(Clone, Debug)]
pub enum SearchOutcome<T> {
    Found(T),
    NotFoundAtDegree(NotFound),
    Unknown(SdpDiagnostics),
}

impl<T> SearchOutcome<T> {
    pub fn found(&self) -> Option<&T> {
        match self {
            SearchOutcome::Found(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_not_found(&self) -> bool {
        matches!(self, SearchOutcome::NotFoundAtDegree(_))
    }

    fn map<U>(self, f: impl FnOnce(T) -> U) -> SearchOutcome<U> {
        match self {
            SearchOutcome::Found(c) => SearchOutcome::Found(f(c)),
            SearchOutcome::NotFoundAtDegree(n) => SearchOutcome::NotFoundAtDegree(n),
            SearchOutcome::Unknown(d) => SearchOutcome::Unknown(d),
        }
    }
}

pub type CertifyOutcome = SearchOutcome<Certificate>;

/// Gram basis degree of the multiplier of a product of degree `w`, or `None`
/// when the product does not fit under `2t`.
pub fn multiplier_half_degree(two_t: u32, w: u32) -> Option<u32> {
    (w <= two_t).then(|| (two_t - w) / 2)
}

fn diagnostics(phase: &str) -> SdpDiagnostics {
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

/// Multipliers found by one SDP, before they are packed into a certificate.
struct Solved {
    multipliers: Vec<Multiplier>,
    /// Value of the free scalar, when the search had one.
    lambda: Option<BigRational>,
    exact: bool,
}

/// Solves `Σ_e σ_e f^e (− λ) = target` over the given products.
///
/// With `free_lambda`, a nonnegative scalar `λ` enters with weight `−1` and is
/// minimized; `target` then omits it.
fn solve_program(
    target: &Polynomial,
    products: &[(Vec<u8>, Polynomial)],
    two_t: u32,
    free_lambda: bool,
    opts: &SearchOptions,
) -> Result<SearchOutcome<Solved>> {
    let d = target.dim();
    if let Some(deg) = target.total_degree() {
        if deg > two_t {
            return Err(Error::DegreeOverflow { degree: deg, bound: two_t });
        }
    }
    let mut blocks = Vec::new();
    let mut selectors = Vec::new();
    for (e, f) in products {
        let Some(w) = f.total_degree() else { continue };
        let Some(k) = multiplier_half_degree(two_t, w) else { continue };
        blocks.push(GramBlock {
            weight: f.clone(),
            basis: MonomialBasis::new(d, k),
        });
        selectors.push(e.clone());
    }
    let nmult = blocks.len();
    if free_lambda {
        blocks.push(GramBlock {
            weight: -Polynomial::one(d),
            basis: MonomialBasis::new(d, 0),
        });
    }
    if blocks.is_empty() {
        return Ok(if target.is_zero() {
            SearchOutcome::Found(Solved {
                multipliers: Vec::new(),
                lambda: None,
                exact: true,
            })
        } else {
            SearchOutcome::Unknown(diagnostics("no admissible multipliers"))
        });
    }
    let prog = GramProgram::new(target, blocks)?;
    let mut weights = vec![1.0; prog.blocks().len()];
    if free_lambda {
        // λ dominates; the small trace term keeps the multipliers bounded
        weights.iter_mut().for_each(|w| *w = 1e-4);
        weights[nmult] = 1.0;
    }
    let sdp = prog.to_sdp(&weights)?;
    let sdp_opts = SdpOptions {
        tol: opts.tol,
        seed: opts.seed,
        max_iter: opts.max_iter,
        trace_bound: Some(opts.trace_bound.unwrap_or_else(|| default_trace_bound(sdp.order(), target))),
    };
    let outcome = match solve_feasibility(&sdp, &sdp_opts) {
        Ok(o) => o,
        Err(e) => return Ok(SearchOutcome::Unknown(diagnostics(&format!("solver: {e}")))),
    };
    match outcome {
        SdpOutcome::Feasible { g, .. } => {
            let ex = prog.extract(&g, opts.tol);
            let expanded = prog.expand(&ex.multipliers);
            let err = (&expanded - target).max_abs_coeff();
            if !ex.exact && err > FLOAT_VERIFY_TOL * target.max_abs_coeff().max(1.0) {
                return Ok(SearchOutcome::Unknown(diagnostics("verification")));
            }
            let mut decs = ex.multipliers.into_iter();
            let multipliers = selectors
                .into_iter()
                .zip(decs.by_ref().take(nmult))
                .map(|(selector, sos)| Multiplier { selector, sos })
                .collect();
            let lambda = free_lambda.then(|| decs.next().map_or_else(BigRational::zero, |s| s.expand().constant_term()));
            Ok(SearchOutcome::Found(Solved {
                multipliers,
                lambda,
                exact: ex.exact,
            }))
        }
        SdpOutcome::InfeasibleWitness(w) => Ok(SearchOutcome::NotFoundAtDegree(NotFound {
            degree: two_t,
            trace_bound: w.trace_bound,
            margin: w.margin,
        })),
        SdpOutcome::Unknown(d) => Ok(SearchOutcome::Unknown(d)),
    }
}

fn check_description(g: &Polynomial, k: &SemialgebraicDescription) -> Result<()> {
    if g.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            found: g.dim(),
        });
    }
    Ok(())
}

fn module_products(k: &SemialgebraicDescription) -> Vec<(Vec<u8>, Polynomial)> {
    module_selectors(k.num_generators())
        .into_iter()
        .map(|e| {
            let p = product_for(k, &e).expect("module selector is well formed");
            (e, p)
        })
        .collect()
}

fn preorder_list(k: &SemialgebraicDescription) -> Result<Vec<(Vec<u8>, Polynomial)>> {
    Ok(preorder_products(k)?.into_iter().map(|g| (g.selector, g.product)).collect())
}

fn finish(
    solved: SearchOutcome<Solved>,
    kind: CertificateKind,
    target: &Polynomial,
    k: &SemialgebraicDescription,
    two_t: u32,
) -> CertifyOutcome {
    let out = solved.map(|s| Certificate::new(kind, target.clone(), k.clone(), two_t, s.multipliers));
    if let SearchOutcome::Found(c) = &out {
        // the expansion was already matched; this re-check guards the packaging
        match c.verify() {
            Ok(r) if r.exact || r.max_coeff_error <= FLOAT_VERIFY_TOL * target.max_abs_coeff().max(1.0) => {}
            _ => return SearchOutcome::Unknown(diagnostics("certificate re-check")),
        }
    }
    out
}

/// `g ∈ Q(f)` with multipliers of degree at most `2t`.
pub fn putinar_search(g: &Polynomial, k: &SemialgebraicDescription, two_t: u32, opts: &SearchOptions) -> Result<CertifyOutcome> {
    check_description(g, k)?;
    let solved = solve_program(g, &module_products(k), two_t, false, opts)?;
    Ok(finish(solved, CertificateKind::Module, g, k, two_t))
}

/// `g ∈ T(f)` with one multiplier per product `f^e`.
pub fn schmudgen_search(g: &Polynomial, k: &SemialgebraicDescription, two_t: u32, opts: &SearchOptions) -> Result<CertifyOutcome> {
    check_description(g, k)?;
    let solved = solve_program(g, &preorder_list(k)?, two_t, false, opts)?;
    Ok(finish(solved, CertificateKind::Preordering, g, k, two_t))
}

/// `−1 ∈ T(f)`, which proves `K(f) = ∅`.
pub fn refute_nonempty(k: &SemialgebraicDescription, two_t: u32, opts: &SearchOptions) -> Result<CertifyOutcome> {
    let minus_one = -Polynomial::one(k.dim());
    let solved = solve_program(&minus_one, &preorder_list(k)?, two_t, false, opts)?;
    Ok(finish(solved, CertificateKind::Preordering, &minus_one, k, two_t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchimedeanMode {
    /// `λ − Σ_j x_j² ∈ Q(f)`.
    Ball,
    /// `λ_j − x_j² ∈ Q(f)` for each coordinate.
    Coordinates,
}

/// `λ_i` together with the module certificate for `λ_i − q_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArchimedeanWitness {
    pub mode: ArchimedeanMode,
    pub lambdas: Vec<BigRational>,
    pub certificates: Vec<Certificate>,
}

impl ArchimedeanWitness {
    /// Every embedded certificate verifies and every `λ` is positive.
    pub fn verify(&self) -> bool {
        let d = self.certificates.first().map(|c| c.description().dim());
        self.lambdas.len() == self.certificates.len()
            && self.lambdas.iter().all(Signed::is_positive)
            && self.certificates.iter().zip(&self.lambdas).enumerate().all(|(j, (c, l))| {
                let Some(d) = d else { return false };
                let expected = &Polynomial::constant(d, l.clone()) - &archimedean_quadratic(self.mode, d, j);
                c.target() == &expected
                    && c.verify()
                        .is_ok_and(|r| r.exact || r.max_coeff_error <= FLOAT_VERIFY_TOL * expected.max_abs_coeff().max(1.0))
            })
    }
}

impl ArchimedeanWitness {
    pub fn to_json(&self) -> ArchimedeanWitnessJson {
        ArchimedeanWitnessJson {
            mode: self.mode,
            lambdas: self.lambdas.iter().map(format_rational).collect(),
            certificates: self.certificates.iter().map(Certificate::to_json).collect(),
        }
    }

    pub fn from_json(j: &ArchimedeanWitnessJson) -> Result<Self> {
        Ok(ArchimedeanWitness {
            mode: j.mode,
            lambdas: j.lambdas.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?,
            certificates: j.certificates.iter().map(Certificate::from_json).collect::<Result<_>>()?,
        })
    }
}

/// `{"mode": "ball"|"coordinates", "lambdas": ["num/den"], "certificates": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchimedeanWitnessJson {
    pub mode: ArchimedeanMode,
    pub lambdas: Vec<String>,
    pub certificates: Vec<CertificateJson>,
}

fn archimedean_quadratic(mode: ArchimedeanMode, d: usize, j: usize) -> Polynomial {
    match mode {
        ArchimedeanMode::Ball => (0..d).fold(Polynomial::zero(d), |acc, i| acc + Polynomial::var(d, i).square()),
        ArchimedeanMode::Coordinates => Polynomial::var(d, j).square(),
    }
}

/// Smallest `λ` with `λ − Σ x_j² ∈ Q(f)` at degree `2t` (or one `λ_j` per
/// coordinate). `λ` is a decision variable of the SDP.
pub fn archimedean_witness(
    k: &SemialgebraicDescription,
    two_t: u32,
    mode: ArchimedeanMode,
    opts: &SearchOptions,
) -> Result<SearchOutcome<ArchimedeanWitness>> {
    let d = k.dim();
    let count = match mode {
        ArchimedeanMode::Ball => 1,
        ArchimedeanMode::Coordinates => d,
    };
    let products = module_products(k);
    let mut lambdas = Vec::with_capacity(count);
    let mut certificates = Vec::with_capacity(count);
    for j in 0..count {
        let q = archimedean_quadratic(mode, d, j);
        let solved = match solve_program(&-q.clone(), &products, two_t, true, opts)? {
            SearchOutcome::Found(s) => s,
            SearchOutcome::NotFoundAtDegree(n) => return Ok(SearchOutcome::NotFoundAtDegree(n)),
            SearchOutcome::Unknown(diag) => return Ok(SearchOutcome::Unknown(diag)),
        };
        let mut multipliers = solved.multipliers;
        let mut lambda = solved.lambda.unwrap_or_else(BigRational::zero);
        if !lambda.is_positive() {
            // −q ∈ Q(f) already; any positive λ then works through σ₀
            lambda = BigRational::from_integer(1.into());
            let sigma0 = multipliers.iter_mut().find(|m| m.selector.iter().all(|&b| b == 0));
            match sigma0 {
                Some(m) => {
                    let mut w = m.sos.weights().to_vec();
                    let mut s = m.sos.squares().to_vec();
                    w.push(lambda.clone());
                    s.push(Polynomial::one(d));
                    m.sos = SosDecomposition::new(d, w, s)?;
                }
                None => return Ok(SearchOutcome::Unknown(diagnostics("zero λ without σ₀"))),
            }
        }
        let target = &Polynomial::constant(d, lambda.clone()) - &q;
        let cert = Certificate::new(CertificateKind::Module, target.clone(), k.clone(), two_t, multipliers);
        match cert.verify() {
            Ok(r) if r.exact || (!solved.exact && r.max_coeff_error <= FLOAT_VERIFY_TOL * target.max_abs_coeff().max(1.0)) => {}
            _ => return Ok(SearchOutcome::Unknown(diagnostics("certificate re-check"))),
        }
        lambdas.push(lambda);
        certificates.push(cert);
    }
    Ok(SearchOutcome::Found(ArchimedeanWitness {
        mode,
        lambdas,
        certificates,
    }))
}
