//! Affine correction restricted to the dominant eigenspace of an iterate.
//!
//! When the feasible set has no interior the interior-point iterate stalls
//! next to a low-rank face. Writing `G_b = V_b S_b V_bᵀ` over the eigenvectors
//! of the significant eigenvalues and refining the factor `F_b = V_b Λ_b^{1/2}`
//! by Gauss–Newton keeps every iterate PSD while the residual drops.

use super::{SdpProblem, SymMatrix};
use crate::linalg::{eigh, is_psd, min_norm_lstsq, Mat, SymEigen};

const GN_STEPS: usize = 40;

/// Relative eigenvalue cut-offs tried in turn, coarsest first.
const CUTOFFS: [f64; 5] = [1e-3, 1e-4, 1e-5, 1e-7, 1e-9];

/// A point within tolerance, or else the PSD candidate of least residual.
pub(super) type Polished = Result<Vec<SymMatrix>, (f64, Vec<SymMatrix>)>;

pub(super) fn face_polish(prob: &SdpProblem, g: &[SymMatrix], tol: f64) -> Option<Polished> {
    let eig: Vec<_> = g.iter().map(eigh).collect::<crate::Result<_>>().ok()?;
    let lmax = eig.iter().map(|e| e.max()).fold(0.0f64, f64::max);
    if !(lmax > 0.0) {
        return None;
    }
    let mut best: Option<(f64, Vec<SymMatrix>)> = None;
    for cut in CUTOFFS {
        let vs: Vec<Mat<f64>> = eig
            .iter()
            .map(|e| {
                let keep: Vec<usize> = (0..e.values.len()).filter(|&k| e.values[k] > cut * lmax).collect();
                Mat::from_fn(e.vectors.rows(), keep.len(), |i, p| e.vectors[(i, keep[p])])
            })
            .collect();
        let Some(cand) = solve_on_face(prob, g, &vs, &eig, cut, lmax) else {
            continue;
        };
        let resid = prob.residual(&cand);
        if resid <= tol && cand.iter().all(|b| is_psd(b, 0.1 * tol)) {
            return Some(Ok(cand));
        }
        if best.as_ref().is_none_or(|(r, _)| resid < *r) && cand.iter().all(|b| is_psd(b, tol)) {
            best = Some((resid, cand));
        }
    }
    best.map(Err)
}

/// Gauss–Newton on `‖A(F Fᵀ) − b‖²` with minimum-norm steps.
fn solve_on_face(
    prob: &SdpProblem,
    g: &[SymMatrix],
    vs: &[Mat<f64>],
    eig: &[SymEigen<f64>],
    cut: f64,
    lmax: f64,
) -> Option<Vec<SymMatrix>> {
    // F_b = V_b diag(√λ) over the kept eigenpairs
    let mut f: Vec<Mat<f64>> = vs
        .iter()
        .zip(eig)
        .map(|(v, e)| {
            let lams: Vec<f64> = e.values.iter().copied().filter(|&l| l > cut * lmax).collect();
            Mat::from_fn(v.rows(), v.cols(), |i, p| v[(i, p)] * lams[p].sqrt())
        })
        .collect();
    let nvars: usize = f.iter().map(|m| m.rows() * m.cols()).sum();
    if nvars == 0 {
        return None;
    }
    let m = prob.constraints.len();
    let rhs: Vec<f64> = prob.constraints.iter().map(|c| c.rhs).collect();
    let gram = |f: &[Mat<f64>]| -> Vec<SymMatrix> {
        f.iter()
            .zip(g)
            .map(|(fb, gb)| {
                if fb.cols() == 0 {
                    Mat::zeros(gb.rows(), gb.cols())
                } else {
                    fb.matmul(&fb.transpose())
                }
            })
            .collect()
    };
    let mut best = prob.residual(&gram(&f));
    for _ in 0..GN_STEPS {
        let cur = gram(&f);
        let r: Vec<f64> = rhs.iter().zip(prob.apply(&cur)).map(|(b, a)| b - a).collect();
        // J[k] = vec(2 A_k F)
        let mut jac = Mat::<f64>::zeros(m, nvars);
        for (k, c) in prob.constraints.iter().enumerate() {
            let mut offsets = Vec::with_capacity(f.len());
            let mut off = 0;
            for fb in &f {
                offsets.push(off);
                off += fb.rows() * fb.cols();
            }
            for &(b, i, j, a) in c.entries() {
                let fb = &f[b];
                let r_b = fb.cols();
                for p in 0..r_b {
                    jac[(k, offsets[b] + i * r_b + p)] += 2.0 * a * fb[(j, p)];
                    if i != j {
                        jac[(k, offsets[b] + j * r_b + p)] += 2.0 * a * fb[(i, p)];
                    }
                }
            }
        }
        let delta = min_norm_lstsq(&jac, &r, 1e-12)?;
        // damped step: halve until the residual drops
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let mut trial = f.clone();
            let mut idx = 0;
            for fb in trial.iter_mut() {
                let (rows, cols) = (fb.rows(), fb.cols());
                for i in 0..rows {
                    for p in 0..cols {
                        fb[(i, p)] += t * delta[idx];
                        idx += 1;
                    }
                }
            }
            let res = prob.residual(&gram(&trial));
            if res < best {
                best = res;
                f = trial;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved || best <= 1e-3 * f64::EPSILON.sqrt() * (1.0 + rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
            break;
        }
    }
    Some(gram(&f).into_iter().map(|m| m.symmetrize()).collect())
}
