//! Small dense semidefinite feasibility solver with Farkas-type certificates.
//!
//! Problems are block-diagonal: find `G = diag(G_1, …, G_p) ⪰ 0` with
//! `⟨A_k, G⟩ = b_k`. The engine runs three interior-point phases:
//!
//! * a trace-bounded decision problem `min τ : A(G) + τ r = b, tr G ≤ R`,
//!   whose dual yields a witness valid for every `G` with `tr G ≤ R`;
//! * an objective phase (minimum trace unless an objective is supplied),
//!   followed by alternating affine/PSD projections to polish the iterate;
//! * a strict-separation phase `max ε : A*(y) ⪯ −ε I, bᵀy ≥ ε`.
//!
//! Every returned outcome is re-checked against the original data.

mod face;
mod ipm;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use self::ipm::{BlockSdp, Blocks, Entry, IpmOptions, IpmResult, IpmStatus};
use super::{cholesky, cholesky_solve, eigh, is_psd, Mat, SymMatrix};
use crate::error::{Error, Result};

/// One linear constraint `⟨A, G⟩ = rhs` with a sparse symmetric `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    /// `(block, i, j, v)` with `i ≤ j`, meaning `A_ij = A_ji = v`.
    entries: Vec<(usize, usize, usize, f64)>,
    pub rhs: f64,
}

impl Constraint {
    pub fn entries(&self) -> &[(usize, usize, usize, f64)] {
        &self.entries
    }

    fn full_entries(&self) -> Vec<Entry> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for &(block, r, c, v) in &self.entries {
            out.push(Entry { block, r, c, v });
            if r != c {
                out.push(Entry { block, r: c, c: r, v });
            }
        }
        out
    }

    /// Frobenius norm of `A`.
    fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, r, c, v)| if r == c { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }
}

/// Block-diagonal SDP feasibility problem with an optional linear objective.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    sizes: Vec<usize>,
    constraints: Vec<Constraint>,
    objective: Option<Vec<SymMatrix>>,
}

impl SdpProblem {
    /// Single block of order `n`.
    pub fn new(n: usize) -> Self {
        Self::with_blocks(vec![n])
    }

    pub fn with_blocks(sizes: Vec<usize>) -> Self {
        SdpProblem {
            sizes,
            constraints: Vec::new(),
            objective: None,
        }
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn order(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Adds `⟨A, G_0⟩ = b` for a dense symmetric `A` on the first block.
    pub fn add_constraint(&mut self, a: &SymMatrix, b: f64) -> Result<()> {
        let n = self.sizes.first().copied().unwrap_or(0);
        if a.rows() != n || a.cols() != n {
            return Err(Error::InconsistentDimensions(format!(
                "constraint matrix is {}x{}, block order is {n}",
                a.rows(),
                a.cols()
            )));
        }
        if !a.is_symmetric() {
            return Err(Error::InconsistentDimensions("constraint matrix is not symmetric".into()));
        }
        let entries = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .filter(|&(i, j)| a[(i, j)] != 0.0)
            .map(|(i, j)| (0, i, j, a[(i, j)]));
        self.add_sparse_constraint(entries, b)
    }

    /// Adds a constraint from `(block, i, j, v)` triples meaning
    /// `A_ij = A_ji += v`; repeated positions accumulate.
    pub fn add_sparse_constraint<I>(&mut self, entries: I, b: f64) -> Result<()>
    where
        I: IntoIterator<Item = (usize, usize, usize, f64)>,
    {
        let mut acc: std::collections::BTreeMap<(usize, usize, usize), f64> = Default::default();
        for (block, i, j, v) in entries {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            if block >= self.sizes.len() || j >= self.sizes[block] {
                return Err(Error::InconsistentDimensions(format!(
                    "entry ({block}, {i}, {j}) outside block structure {:?}",
                    self.sizes
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            *acc.entry((block, i, j)).or_insert(0.0) += v;
        }
        if !b.is_finite() {
            return Err(Error::NonFinite);
        }
        self.constraints.push(Constraint {
            entries: acc
                .into_iter()
                .filter(|&(_, v)| v != 0.0)
                .map(|((bl, i, j), v)| (bl, i, j, v))
                .collect(),
            rhs: b,
        });
        Ok(())
    }

    /// Minimizes `⟨C, G⟩` over the feasible set instead of the trace.
    pub fn set_objective(&mut self, c: Vec<SymMatrix>) -> Result<()> {
        if c.len() != self.sizes.len() || c.iter().zip(&self.sizes).any(|(m, &n)| m.rows() != n || m.cols() != n) {
            return Err(Error::InconsistentDimensions(
                "objective blocks do not match block structure".into(),
            ));
        }
        self.objective = Some(c.into_iter().map(|m| m.symmetrize()).collect());
        Ok(())
    }

    /// `A(G)`.
    pub fn apply(&self, g: &[SymMatrix]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| {
                c.entries
                    .iter()
                    .map(|&(b, i, j, v)| {
                        if i == j {
                            v * g[b][(i, i)]
                        } else {
                            v * (g[b][(i, j)] + g[b][(j, i)])
                        }
                    })
                    .sum()
            })
            .collect()
    }

    /// `A*(y) = Σ y_k A_k`.
    pub fn adjoint(&self, y: &[f64]) -> Vec<SymMatrix> {
        let mut out: Vec<SymMatrix> = self.sizes.iter().map(|&n| Mat::zeros(n, n)).collect();
        for (c, &yk) in self.constraints.iter().zip(y) {
            for &(b, i, j, v) in &c.entries {
                out[b][(i, j)] += yk * v;
                if i != j {
                    out[b][(j, i)] += yk * v;
                }
            }
        }
        out
    }

    /// `max_k |⟨A_k, G⟩ − b_k|`.
    pub fn residual(&self, g: &[SymMatrix]) -> f64 {
        self.apply(g)
            .iter()
            .zip(&self.constraints)
            .map(|(a, c)| (a - c.rhs).abs())
            .fold(0.0, f64::max)
    }

    fn validate(&self, g_shape: bool) -> Result<()> {
        if g_shape && self.sizes.contains(&0) {
            return Err(Error::InconsistentDimensions("empty block".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Trace bound `R` for the decision phase; chosen from the data when `None`.
    pub trace_bound: Option<f64>,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            tol: 1e-8,
            max_iter: 50_000,
            seed: 0,
            trace_bound: None,
        }
    }
}

/// Dual certificate `y` for infeasibility, with `A*(y) ⪯ max_eig · I` and
/// `bᵀy = value`.
///
/// Without a trace bound the witness is strict: `max_eig ≤ −margin` and
/// `value ≥ margin`, so no `G ⪰ 0` satisfies the constraints. With a trace
/// bound `R`, `value − R · max(max_eig, 0) = margin > 0` excludes every
/// feasible `G` with `tr G ≤ R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarkasWitness {
    pub y: Vec<f64>,
    pub max_eig: f64,
    pub value: f64,
    pub margin: f64,
    pub trace_bound: Option<f64>,
}

impl FarkasWitness {
    /// Recomputes eigenvalue, value and margin from `y` and the problem data.
    pub fn evaluate(prob: &SdpProblem, y: &[f64], trace_bound: Option<f64>) -> Self {
        let adj = prob.adjoint(y);
        let max_eig = adj
            .iter()
            .filter(|m| m.rows() > 0)
            .map(|m| eigh(m).map(|e| e.max()).unwrap_or(f64::INFINITY))
            .fold(f64::NEG_INFINITY, f64::max);
        let value: f64 = prob.constraints.iter().zip(y).map(|(c, y)| c.rhs * y).sum();
        let margin = match trace_bound {
            None => (-max_eig).min(value),
            Some(r) => value - r * max_eig.max(0.0),
        };
        FarkasWitness {
            y: y.to_vec(),
            max_eig,
            value,
            margin,
            trace_bound,
        }
    }

    /// Margin exceeds a rounding allowance computed from the data.
    pub fn verify(&self, prob: &SdpProblem) -> bool {
        let fresh = Self::evaluate(prob, &self.y, self.trace_bound);
        let scale: f64 = prob
            .constraints
            .iter()
            .zip(&self.y)
            .map(|(c, y)| (c.rhs.abs() + c.norm()) * y.abs())
            .sum();
        let slack = 256.0 * f64::EPSILON * scale * (1.0 + self.trace_bound.unwrap_or(1.0)) * (1.0 + prob.order() as f64);
        fresh.margin.is_finite() && fresh.margin > slack
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpDiagnostics {
    pub phase: String,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
    /// Optimal `τ` of the decision phase, if it ran.
    pub tau: Option<f64>,
    /// PSD point whose residual is small but above tolerance, kept for
    /// callers that can round and re-verify exactly.
    #[serde(skip)]
    pub near_feasible: Option<Vec<SymMatrix>>,
}

#[derive(Clone, Debug)]
pub enum SdpOutcome {
    Feasible { g: Vec<SymMatrix>, residual: f64, objective: f64 },
    InfeasibleWitness(FarkasWitness),
    Unknown(SdpDiagnostics),
}

impl SdpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SdpOutcome::Feasible { .. })
    }
}

/// Scaled, reduced copy of the problem handed to the interior-point phases.
struct Prepared {
    /// Indices of the kept (independent, nonzero) constraints.
    keep: Vec<usize>,
    norms: Vec<f64>,
    rows: Vec<Vec<Entry>>,
    b: Vec<f64>,
}

enum Preparation {
    Ready(Prepared),
    Inconsistent(Vec<f64>),
}

/// Constraint row keyed by `(block, row, col)`.
type SparseRow = std::collections::HashMap<(usize, usize, usize), f64>;

fn prepare(prob: &SdpProblem, tol: f64) -> Preparation {
    let m = prob.constraints.len();
    let norms: Vec<f64> = prob.constraints.iter().map(Constraint::norm).collect();
    // orthonormal basis of kept rows, each with its expansion in original rows
    let mut basis: Vec<(SparseRow, Vec<f64>)> = Vec::new();
    let mut keep = Vec::new();
    for k in 0..m {
        let c = &prob.constraints[k];
        let mut v: SparseRow = c
            .entries
            .iter()
            .map(|&(b, i, j, val)| ((b, i, j), if i == j { val } else { val * std::f64::consts::SQRT_2 }))
            .collect();
        let mut coef = vec![0.0; m];
        coef[k] = 1.0;
        let original = norms[k];
        for (q, qc) in &basis {
            let d: f64 = v.iter().map(|(key, x)| x * q.get(key).copied().unwrap_or(0.0)).sum();
            if d == 0.0 {
                continue;
            }
            for (key, x) in q {
                *v.entry(*key).or_insert(0.0) -= d * x;
            }
            for (a, b) in coef.iter_mut().zip(qc) {
                *a -= d * b;
            }
        }
        let rn = v.values().map(|x| x * x).sum::<f64>().sqrt();
        if rn <= 1e-10 * original.max(f64::MIN_POSITIVE) || original == 0.0 {
            // A_k is a combination of earlier rows: coef encodes A_k − Σ … ≈ 0
            let value: f64 = coef.iter().zip(&prob.constraints).map(|(a, c)| a * c.rhs).sum();
            let scale: f64 = coef
                .iter()
                .zip(&prob.constraints)
                .map(|(a, c)| (a * c.rhs).abs())
                .sum::<f64>()
                .max(1.0);
            if value.abs() > tol * scale {
                return Preparation::Inconsistent(coef.iter().map(|a| a * value.signum()).collect());
            }
            continue;
        }
        for x in v.values_mut() {
            *x /= rn;
        }
        for a in coef.iter_mut() {
            *a /= rn;
        }
        basis.push((v, coef));
        keep.push(k);
    }
    let rows = keep
        .iter()
        .map(|&k| {
            let n = norms[k];
            prob.constraints[k]
                .full_entries()
                .into_iter()
                .map(|e| Entry { v: e.v / n, ..e })
                .collect()
        })
        .collect();
    let b = keep.iter().map(|&k| prob.constraints[k].rhs / norms[k]).collect();
    Preparation::Ready(Prepared { keep, norms, rows, b })
}

fn default_trace_bound(prob: &SdpProblem, prep: &Prepared) -> f64 {
    let bmax = prep.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1e3 * (prob.order().max(1) as f64) * bmax.max(1.0)
}

fn identity_blocks(sizes: &[usize]) -> Blocks {
    sizes.iter().map(|&n| Mat::identity(n)).collect()
}

fn trace_row(sizes: &[usize], slack_block: usize, scale: f64) -> Vec<Entry> {
    let mut row = Vec::new();
    for (b, &n) in sizes.iter().enumerate() {
        for i in 0..n {
            row.push(Entry {
                block: b,
                r: i,
                c: i,
                v: scale,
            });
        }
    }
    row.push(Entry {
        block: slack_block,
        r: 0,
        c: 0,
        v: scale,
    });
    row
}

fn diagnostics(phase: &str, r: &IpmResult, tau: Option<f64>) -> SdpDiagnostics {
    SdpDiagnostics {
        phase: phase.into(),
        iterations: r.iterations,
        primal_infeasibility: r.pinf,
        dual_infeasibility: r.dinf,
        relative_gap: r.relgap,
        tau,
        near_feasible: None,
    }
}

struct Runner {
    budget: usize,
    rng: ChaCha8Rng,
    ipm_tol: f64,
}

impl Runner {
    fn run(&mut self, p: &BlockSdp) -> IpmResult {
        let mut best: Option<IpmResult> = None;
        for attempt in 0..3 {
            let scale = if attempt == 0 {
                1.0
            } else {
                10f64.powf(self.rng.gen_range(-1.0..1.0))
            };
            let iters = self.budget.min(250);
            let r = ipm::solve(
                p,
                &IpmOptions {
                    tol: self.ipm_tol,
                    max_iter: iters,
                    start_scale: scale,
                },
            );
            self.budget = self.budget.saturating_sub(r.iterations.max(1));
            let ok = r.status == IpmStatus::Converged || r.pinf.max(r.dinf).max(r.relgap) < 1e-7;
            let better = best
                .as_ref()
                .is_none_or(|b| r.pinf.max(r.dinf).max(r.relgap) < b.pinf.max(b.dinf).max(b.relgap));
            if better {
                best = Some(r);
            }
            if ok || self.budget == 0 {
                break;
            }
        }
        best.expect("one attempt always runs")
    }
}

/// Decides feasibility of `prob`; see the module docs for the phases.
pub fn solve_feasibility(prob: &SdpProblem, opts: &SdpOptions) -> Result<SdpOutcome> {
    prob.validate(true)?;
    if !(opts.tol > 0.0) {
        return Err(Error::InconsistentDimensions("tolerance must be positive".into()));
    }
    let prep = match prepare(prob, opts.tol) {
        Preparation::Ready(p) => p,
        Preparation::Inconsistent(y) => {
            // A*(y) = 0 and bᵀy > 0: valid for every trace bound
            let r = opts.trace_bound.unwrap_or(1.0);
            let w = FarkasWitness::evaluate(prob, &y, Some(r));
            if w.verify(prob) {
                return Ok(SdpOutcome::InfeasibleWitness(w));
            }
            return Ok(SdpOutcome::Unknown(SdpDiagnostics {
                phase: "reduction".into(),
                iterations: 0,
                primal_infeasibility: f64::NAN,
                dual_infeasibility: f64::NAN,
                relative_gap: f64::NAN,
                tau: None,
                near_feasible: None,
            }));
        }
    };
    let big_r = opts.trace_bound.unwrap_or_else(|| default_trace_bound(prob, &prep));
    let mut runner = Runner {
        budget: opts.max_iter.max(1),
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        ipm_tol: (opts.tol * 1e-3).max(1e-12),
    };

    let sizes = prob.sizes.clone();
    let nb = sizes.len();
    let n_total = prob.order() as f64;
    let tscale = 1.0 / (n_total + 1.0).sqrt();

    // decision phase
    let ident = identity_blocks(&sizes);
    let a_ident = ipm::apply(&prep.rows, &ident);
    let r_vec: Vec<f64> = prep.b.iter().zip(&a_ident).map(|(b, a)| b - a).collect();
    let mut sizes_a = sizes.clone();
    sizes_a.extend([1, 1]);
    let mut rows_a: Vec<Vec<Entry>> = prep
        .rows
        .iter()
        .zip(&r_vec)
        .map(|(row, &rk)| {
            let mut row = row.clone();
            if rk != 0.0 {
                row.push(Entry {
                    block: nb,
                    r: 0,
                    c: 0,
                    v: rk,
                });
            }
            row
        })
        .collect();
    rows_a.push(trace_row(&sizes, nb + 1, tscale));
    let mut b_a = prep.b.clone();
    b_a.push(big_r * tscale);
    let mut c_a: Blocks = sizes_a.iter().map(|&n| Mat::zeros(n, n)).collect();
    c_a[nb][(0, 0)] = 1.0;
    let phase_a = runner.run(&BlockSdp {
        sizes: sizes_a,
        rows: rows_a,
        b: b_a,
        c: c_a,
    });
    let tau = phase_a.x[nb][(0, 0)].max(0.0);
    let r_norm = r_vec.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let looks_feasible = tau * r_norm <= opts.tol.sqrt();

    let bounded_witness = || {
        let mut y = vec![0.0; prob.constraints.len()];
        for (i, &k) in prep.keep.iter().enumerate() {
            y[k] = phase_a.y[i] / prep.norms[k];
        }
        let w = FarkasWitness::evaluate(prob, &y, Some(big_r));
        w.verify(prob).then_some(w)
    };

    let mut near = None;
    if looks_feasible {
        match objective_phase(prob, &prep, &mut runner, big_r, opts) {
            Ok(out) => return Ok(out),
            Err(n) => near = n,
        }
    }
    let bounded = bounded_witness();
    if bounded.is_some() || !looks_feasible {
        if let Some(w) = strict_phase(prob, &prep, &mut runner) {
            return Ok(SdpOutcome::InfeasibleWitness(w));
        }
    }
    if let Some(w) = bounded {
        return Ok(SdpOutcome::InfeasibleWitness(w));
    }
    Ok(SdpOutcome::Unknown(SdpDiagnostics {
        near_feasible: near,
        ..diagnostics("decision", &phase_a, Some(tau))
    }))
}

fn objective_phase(
    prob: &SdpProblem,
    prep: &Prepared,
    runner: &mut Runner,
    big_r: f64,
    opts: &SdpOptions,
) -> std::result::Result<SdpOutcome, Option<Vec<SymMatrix>>> {
    let sizes = prob.sizes.clone();
    let nb = sizes.len();
    let tscale = 1.0 / (prob.order() as f64 + 1.0).sqrt();
    let mut sizes_b = sizes.clone();
    sizes_b.push(1);
    let mut rows_b = prep.rows.clone();
    rows_b.push(trace_row(&sizes, nb, tscale));
    let mut b_b = prep.b.clone();
    b_b.push(big_r * tscale);
    let mut c_b: Blocks = match &prob.objective {
        Some(c) => c.clone(),
        None => identity_blocks(&sizes),
    };
    c_b.push(Mat::zeros(1, 1));
    let res = runner.run(&BlockSdp {
        sizes: sizes_b,
        rows: rows_b,
        b: b_b,
        c: c_b,
    });
    let raw: Vec<SymMatrix> = res.x[..nb].to_vec();
    let accept = |g: &[SymMatrix]| prob.residual(g) <= opts.tol && g.iter().all(|m| is_psd(m, opts.tol));
    let mut g = polish(prob, prep, raw.clone(), opts.tol, &mut runner.budget).ok_or(None)?;
    if !accept(&g) {
        // no interior: restrict to the dominant eigenspace
        let mut near: Option<(f64, Vec<SymMatrix>)> = None;
        let mut found = None;
        for start in [&raw, &g] {
            match face::face_polish(prob, start, opts.tol) {
                Some(Ok(f)) => {
                    found = Some(f);
                    break;
                }
                Some(Err(cand)) if near.as_ref().is_none_or(|(r, _)| cand.0 < *r) => near = Some(cand),
                _ => {}
            }
        }
        g = found.ok_or_else(|| near.map(|(_, c)| c))?;
    }
    if accept(&g) {
        let residual = prob.residual(&g);
        let objective = match &prob.objective {
            Some(c) => ipm::blocks_dot(c, &g),
            None => g.iter().map(Mat::trace).sum(),
        };
        return Ok(SdpOutcome::Feasible { g, residual, objective });
    }
    Err(None)
}

/// Alternating projections onto `{A(G) = b}` and the PSD cone, ending on the
/// affine set.
fn polish(prob: &SdpProblem, prep: &Prepared, mut g: Vec<SymMatrix>, tol: f64, budget: &mut usize) -> Option<Vec<SymMatrix>> {
    let m = prep.rows.len();
    let mut gram = Mat::<f64>::zeros(m, m);
    let keyed: Vec<std::collections::HashMap<(usize, usize, usize), f64>> = prep
        .rows
        .iter()
        .map(|row| row.iter().map(|e| ((e.block, e.r, e.c), e.v)).collect())
        .collect();
    for i in 0..m {
        for j in 0..=i {
            let (small, large) = if keyed[i].len() <= keyed[j].len() {
                (&keyed[i], &keyed[j])
            } else {
                (&keyed[j], &keyed[i])
            };
            let s: f64 = small.iter().map(|(k, v)| v * large.get(k).copied().unwrap_or(0.0)).sum();
            gram[(i, j)] = s;
            gram[(j, i)] = s;
        }
    }
    let l = if m > 0 { Some(cholesky(&gram)?) } else { None };
    let project = |g: &mut Vec<SymMatrix>| {
        if let Some(l) = &l {
            let ag = ipm::apply(&prep.rows, g);
            let r: Vec<f64> = prep.b.iter().zip(&ag).map(|(b, a)| b - a).collect();
            let w = cholesky_solve(l, &r);
            let corr = ipm::adjoint(&prob.sizes, &prep.rows, &w);
            for (gb, cb) in g.iter_mut().zip(&corr) {
                *gb = gb.add(cb).symmetrize();
            }
        }
    };
    for _ in 0..200 {
        project(&mut g);
        if prob.residual(&g) <= 0.1 * tol && g.iter().all(|b| is_psd(b, 0.1 * tol)) {
            return Some(g);
        }
        if *budget == 0 {
            break;
        }
        *budget -= 1;
        for b in g.iter_mut() {
            let e = eigh(b).ok()?;
            let clipped: Vec<f64> = e.values.iter().map(|v| v.max(0.0)).collect();
            *b = super::SymEigen {
                values: clipped,
                vectors: e.vectors,
            }
            .reconstruct()
            .symmetrize();
        }
    }
    project(&mut g);
    Some(g)
}

fn strict_phase(prob: &SdpProblem, prep: &Prepared, runner: &mut Runner) -> Option<FarkasWitness> {
    let sizes = prob.sizes.clone();
    let nb = sizes.len();
    let m = prep.rows.len();
    let mut sizes_w = sizes.clone();
    sizes_w.extend([1, 1]);
    // primal rows: one per dual variable y_k, plus one for ε
    let mut rows_w: Vec<Vec<Entry>> = Vec::with_capacity(m + 1);
    for (row, &bk) in prep.rows.iter().zip(&prep.b) {
        let mut r = row.clone();
        let tr: f64 = row.iter().filter(|e| e.r == e.c).map(|e| e.v).sum();
        if bk != 0.0 {
            r.push(Entry {
                block: nb,
                r: 0,
                c: 0,
                v: -bk,
            });
        }
        if tr != 0.0 {
            r.push(Entry {
                block: nb + 1,
                r: 0,
                c: 0,
                v: -tr,
            });
        }
        rows_w.push(r);
    }
    let mut eps_row = Vec::new();
    for (b, &n) in sizes.iter().enumerate() {
        for i in 0..n {
            eps_row.push(Entry {
                block: b,
                r: i,
                c: i,
                v: 1.0,
            });
        }
    }
    eps_row.push(Entry {
        block: nb,
        r: 0,
        c: 0,
        v: 1.0,
    });
    rows_w.push(eps_row);
    let mut b_w = vec![0.0; m];
    b_w.push(1.0);
    let mut c_w: Blocks = sizes_w.iter().map(|&n| Mat::zeros(n, n)).collect();
    c_w[nb + 1][(0, 0)] = 1.0;
    let res = runner.run(&BlockSdp {
        sizes: sizes_w,
        rows: rows_w,
        b: b_w,
        c: c_w,
    });
    let eps = res.y[m];
    if !(eps > 0.0) {
        return None;
    }
    let mut y = vec![0.0; prob.constraints.len()];
    for (i, &k) in prep.keep.iter().enumerate() {
        y[k] = res.y[i] / prep.norms[k];
    }
    let w = FarkasWitness::evaluate(prob, &y, None);
    w.verify(prob).then_some(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_by_one(b: f64) -> SdpProblem {
        let mut p = SdpProblem::new(1);
        p.add_constraint(&Mat::identity(1), b).unwrap();
        p
    }

    #[test]
    fn unit_entry_is_feasible() {
        match solve_feasibility(&one_by_one(1.0), &SdpOptions::default()).unwrap() {
            SdpOutcome::Feasible { g, residual, .. } => {
                assert!((g[0][(0, 0)] - 1.0).abs() < 1e-8);
                assert!(residual <= 1e-8);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn negative_entry_has_strict_witness() {
        let p = one_by_one(-1.0);
        match solve_feasibility(&p, &SdpOptions::default()).unwrap() {
            SdpOutcome::InfeasibleWitness(w) => {
                assert!(w.trace_bound.is_none());
                assert!(w.margin > 0.0);
                assert!(w.verify(&p));
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }

    #[test]
    fn inconsistent_linear_system_is_refuted() {
        let mut p = SdpProblem::new(2);
        p.add_sparse_constraint([(0, 0, 1, 1.0)], 1.0).unwrap();
        p.add_sparse_constraint([(0, 0, 1, 2.0)], 3.0).unwrap();
        assert!(matches!(
            solve_feasibility(&p, &SdpOptions::default()).unwrap(),
            SdpOutcome::InfeasibleWitness(_)
        ));
    }

    #[test]
    fn rejects_bad_dimensions() {
        let mut p = SdpProblem::new(2);
        assert!(p.add_constraint(&Mat::identity(3), 1.0).is_err());
        assert!(p.add_sparse_constraint([(1, 0, 0, 1.0)], 1.0).is_err());
    }

    #[test]
    fn min_trace_selects_rank_one_solution() {
        // x⁴ + 2x² + 1 in the basis (1, x, x²)
        let mut p = SdpProblem::new(3);
        let eqs: [(Vec<(usize, usize)>, f64); 5] = [
            (vec![(0, 0)], 1.0),
            (vec![(0, 1)], 0.0),
            (vec![(0, 2), (1, 1)], 2.0),
            (vec![(1, 2)], 0.0),
            (vec![(2, 2)], 1.0),
        ];
        for (pos, b) in eqs {
            p.add_sparse_constraint(pos.into_iter().map(|(i, j)| (0, i, j, 1.0)), b).unwrap();
        }
        match solve_feasibility(&p, &SdpOptions::default()).unwrap() {
            SdpOutcome::Feasible { g, .. } => {
                assert!((g[0][(0, 2)] - 1.0).abs() < 1e-6, "{:?}", g[0]);
                assert!(g[0][(1, 1)].abs() < 1e-6);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let p = one_by_one(2.0);
        let o = SdpOptions {
            seed: 7,
            ..Default::default()
        };
        let a = format!("{:?}", solve_feasibility(&p, &o).unwrap());
        let b = format!("{:?}", solve_feasibility(&p, &o).unwrap());
        assert_eq!(a, b);
    }
}
