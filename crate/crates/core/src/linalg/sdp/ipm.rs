//! Primal-dual interior-point method for block-diagonal SDPs
//!
//! ```text
//! primal:  min ⟨C, X⟩  s.t.  ⟨A_k, X⟩ = b_k,  X ⪰ 0
//! dual:    max bᵀy     s.t.  Σ y_k A_k + Z = C,  Z ⪰ 0
//! ```
//!
//! HKM search direction with a Mehrotra predictor-corrector step and an
//! infeasible starting point.

use super::super::{cholesky, cholesky_solve, eigh, lower_inverse, spd_inverse, Mat};

/// One stored entry of a symmetric constraint matrix. Both `(r, c)` and
/// `(c, r)` are listed for off-diagonal positions.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Entry {
    pub block: usize,
    pub r: usize,
    pub c: usize,
    pub v: f64,
}

pub(crate) type Blocks = Vec<Mat<f64>>;

#[derive(Clone, Debug)]
pub(crate) struct BlockSdp {
    pub sizes: Vec<usize>,
    pub rows: Vec<Vec<Entry>>,
    pub b: Vec<f64>,
    pub c: Blocks,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Converged,
    MaxIter,
    Stalled,
    Diverged,
}

#[derive(Clone, Debug)]
pub(crate) struct IpmResult {
    pub x: Blocks,
    pub y: Vec<f64>,
    pub pinf: f64,
    pub dinf: f64,
    pub relgap: f64,
    pub iterations: usize,
    pub status: IpmStatus,
}

impl IpmResult {
    fn merit(&self) -> f64 {
        self.pinf.max(self.dinf).max(self.relgap)
    }
}

pub(crate) struct IpmOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Multiplies the default starting point; used for jittered restarts.
    pub start_scale: f64,
}

pub(crate) fn apply(rows: &[Vec<Entry>], x: &Blocks) -> Vec<f64> {
    rows.iter()
        .map(|row| row.iter().map(|e| e.v * x[e.block][(e.r, e.c)]).sum())
        .collect()
}

pub(crate) fn adjoint(sizes: &[usize], rows: &[Vec<Entry>], y: &[f64]) -> Blocks {
    let mut out: Blocks = sizes.iter().map(|&n| Mat::zeros(n, n)).collect();
    for (row, &yk) in rows.iter().zip(y) {
        if yk == 0.0 {
            continue;
        }
        for e in row {
            out[e.block][(e.r, e.c)] += yk * e.v;
        }
    }
    out
}

pub(crate) fn blocks_dot(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn blocks_norm(a: &Blocks) -> f64 {
    blocks_dot(a, a).sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn scaled_identity(sizes: &[usize], s: f64) -> Blocks {
    sizes.iter().map(|&n| Mat::identity(n).scale(s)).collect()
}

/// Largest `α` with `X + α ΔX ⪰ 0`, or `+∞`.
fn max_step(x: &Blocks, dx: &Blocks) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        let n = xb.rows();
        if n == 0 {
            continue;
        }
        let lam = if n == 1 {
            db[(0, 0)] / xb[(0, 0)]
        } else {
            let l = cholesky(xb)?;
            let li = lower_inverse(&l);
            let s = li.matmul(db).matmul(&li.transpose());
            eigh(&s).ok()?.min()
        };
        if lam < 0.0 {
            alpha = alpha.min(-1.0 / lam);
        }
    }
    Some(alpha)
}

struct Direction {
    dx: Blocks,
    dy: Vec<f64>,
    dz: Blocks,
}

pub(crate) fn solve(p: &BlockSdp, opts: &IpmOptions) -> IpmResult {
    let m = p.rows.len();
    let n_total: usize = p.sizes.iter().sum();
    let nf = n_total.max(1) as f64;

    let row_norms: Vec<f64> = p.rows.iter().map(|row| row.iter().map(|e| e.v * e.v).sum::<f64>().sqrt()).collect();
    let c_norm = blocks_norm(&p.c);
    let b_norm = norm(&p.b);

    let xi =
        p.b.iter()
            .zip(&row_norms)
            .map(|(b, a)| nf * (1.0 + b.abs()) / (1.0 + a))
            .fold(10.0f64.max(nf.sqrt()), f64::max);
    let eta = row_norms.iter().copied().fold(10.0f64.max(nf.sqrt()).max(c_norm), f64::max);

    let mut x = scaled_identity(&p.sizes, xi * opts.start_scale);
    let mut z = scaled_identity(&p.sizes, eta * opts.start_scale);
    let mut y = vec![0.0; m];

    let mut best: Option<IpmResult> = None;
    let mut stall = 0usize;
    let mut status = IpmStatus::MaxIter;
    let mut iterations = 0;

    for it in 0..opts.max_iter {
        iterations = it;
        let ax = apply(&p.rows, &x);
        let rp: Vec<f64> = p.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = adjoint(&p.sizes, &p.rows, &y);
        let rd: Blocks = p.c.iter().zip(&z).zip(&aty).map(|((c, z), a)| c.sub(z).sub(a)).collect();
        let pobj = blocks_dot(&p.c, &x);
        let dobj: f64 = p.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let gap = blocks_dot(&x, &z);
        let cur = IpmResult {
            x: x.clone(),
            y: y.clone(),
            pinf: norm(&rp) / (1.0 + b_norm),
            dinf: blocks_norm(&rd) / (1.0 + c_norm),
            relgap: gap.max(0.0) / (1.0 + pobj.abs() + dobj.abs()),
            iterations: it,
            status: IpmStatus::MaxIter,
        };
        let merit = cur.merit();
        let best_merit = best.as_ref().map_or(f64::INFINITY, IpmResult::merit);
        if merit < 0.9 * best_merit {
            stall = 0;
        } else {
            stall += 1;
        }
        if merit < best_merit {
            best = Some(cur);
        }
        if merit <= opts.tol {
            status = IpmStatus::Converged;
            break;
        }
        if stall >= 15 {
            status = IpmStatus::Stalled;
            break;
        }
        let xn = blocks_norm(&x);
        if !xn.is_finite() || xn > 1e13 || norm(&y) > 1e13 {
            status = IpmStatus::Diverged;
            break;
        }

        let Some(zi) = z.iter().map(spd_inverse).collect::<Option<Blocks>>() else {
            status = IpmStatus::Stalled;
            break;
        };
        let Some(schur) = schur_factor(p, &x, &zi) else {
            status = IpmStatus::Stalled;
            break;
        };
        let mu = gap / nf;

        // X Rd Z⁻¹ enters every right-hand side
        let xrdzi: Blocks = x.iter().zip(&rd).zip(&zi).map(|((x, r), zi)| x.matmul(r).matmul(zi)).collect();

        let pred = direction(p, &schur, &x, &zi, &rd, &xrdzi, 0.0, None);
        let ap = max_step(&x, &pred.dx).map_or(0.0, |a| a.min(1.0));
        let ad = max_step(&z, &pred.dz).map_or(0.0, |a| a.min(1.0));
        let mut xa = x.clone();
        let mut za = z.clone();
        for (b, d) in xa.iter_mut().zip(&pred.dx) {
            b.axpy(ap, d);
        }
        for (b, d) in za.iter_mut().zip(&pred.dz) {
            b.axpy(ad, d);
        }
        let mu_aff = blocks_dot(&xa, &za) / nf;
        let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };
        let corr: Blocks = pred
            .dx
            .iter()
            .zip(&pred.dz)
            .zip(&zi)
            .map(|((dx, dz), zi)| dx.matmul(dz).matmul(zi))
            .collect();
        let dir = direction(p, &schur, &x, &zi, &rd, &xrdzi, sigma * mu, Some(&corr));

        let gamma = 0.95;
        let Some(sp) = max_step(&x, &dir.dx) else {
            status = IpmStatus::Stalled;
            break;
        };
        let Some(sd) = max_step(&z, &dir.dz) else {
            status = IpmStatus::Stalled;
            break;
        };
        let ap = (gamma * sp).min(1.0);
        let ad = (gamma * sd).min(1.0);
        for (b, d) in x.iter_mut().zip(&dir.dx) {
            b.axpy(ap, d);
        }
        for (b, d) in z.iter_mut().zip(&dir.dz) {
            b.axpy(ad, d);
        }
        for (v, d) in y.iter_mut().zip(&dir.dy) {
            *v += ad * d;
        }
        for b in x.iter_mut().chain(z.iter_mut()) {
            *b = b.symmetrize();
        }
        iterations = it + 1;
    }

    let mut out = best.expect("at least one iterate is evaluated");
    out.status = status;
    out.iterations = iterations;
    out
}

/// Cholesky factor of the Schur matrix `M_ij = tr(A_i X A_j Z⁻¹)`.
fn schur_factor(p: &BlockSdp, x: &Blocks, zi: &Blocks) -> Option<Mat<f64>> {
    let m = p.rows.len();
    let mut mm = Mat::<f64>::zeros(m, m);
    let mut scratch: Vec<Option<Mat<f64>>> = vec![None; p.sizes.len()];
    for j in 0..m {
        for s in scratch.iter_mut() {
            *s = None;
        }
        for e in &p.rows[j] {
            let n = p.sizes[e.block];
            let bm = scratch[e.block].get_or_insert_with(|| Mat::zeros(n, n));
            let xb = &x[e.block];
            let zb = &zi[e.block];
            for a in 0..n {
                let xa = xb[(a, e.r)] * e.v;
                if xa == 0.0 {
                    continue;
                }
                for q in 0..n {
                    bm[(a, q)] += xa * zb[(e.c, q)];
                }
            }
        }
        for i in 0..=j {
            let mut s = 0.0;
            for e in &p.rows[i] {
                if let Some(bm) = &scratch[e.block] {
                    s += e.v * bm[(e.c, e.r)];
                }
            }
            mm[(i, j)] = s;
            mm[(j, i)] = s;
        }
    }
    if m == 0 {
        return Some(mm);
    }
    if let Some(l) = cholesky(&mm) {
        return Some(l);
    }
    let diag_max = (0..m).map(|i| mm[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    for k in [1e-14, 1e-12, 1e-10, 1e-8] {
        let mut reg = mm.clone();
        for i in 0..m {
            reg[(i, i)] += k * diag_max;
        }
        if let Some(l) = cholesky(&reg) {
            return Some(l);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn direction(
    p: &BlockSdp,
    schur: &Mat<f64>,
    x: &Blocks,
    zi: &Blocks,
    rd: &Blocks,
    xrdzi: &Blocks,
    target: f64,
    corr: Option<&Blocks>,
) -> Direction {
    // rhs = b − A(target Z⁻¹) + A(corr) + A(X Rd Z⁻¹)
    let mut rhs_mat: Blocks = zi.iter().zip(xrdzi).map(|(zi, xr)| xr.sub(&zi.scale(target))).collect();
    if let Some(c) = corr {
        for (r, c) in rhs_mat.iter_mut().zip(c) {
            r.axpy(1.0, c);
        }
    }
    let a_rhs = apply(&p.rows, &rhs_mat);
    let rhs: Vec<f64> = p.b.iter().zip(&a_rhs).map(|(b, a)| b + a).collect();
    let dy = if p.rows.is_empty() {
        Vec::new()
    } else {
        cholesky_solve(schur, &rhs)
    };
    let atdy = adjoint(&p.sizes, &p.rows, &dy);
    let dz: Blocks = rd.iter().zip(&atdy).map(|(r, a)| r.sub(a)).collect();
    let dx: Blocks = x
        .iter()
        .zip(zi)
        .zip(&dz)
        .enumerate()
        .map(|(k, ((xb, zb), dzb))| {
            let mut d = zb.scale(target).sub(xb).sub(&xb.matmul(dzb).matmul(zb));
            if let Some(c) = corr {
                d = d.sub(&c[k]);
            }
            d.symmetrize()
        })
        .collect();
    Direction { dx, dy, dz }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(block: usize, r: usize, c: usize, v: f64) -> Vec<Entry> {
        if r == c {
            vec![Entry { block, r, c, v }]
        } else {
            vec![Entry { block, r, c, v }, Entry { block, r: c, c: r, v }]
        }
    }

    #[test]
    fn solves_small_lp_like_sdp() {
        // min X00 + X11  s.t. X01 = 1  (2x2 block): optimum 2 at X = [[1,1],[1,1]]
        let p = BlockSdp {
            sizes: vec![2],
            rows: vec![entry(0, 0, 1, 0.5)],
            b: vec![1.0],
            c: vec![Mat::identity(2)],
        };
        let r = solve(
            &p,
            &IpmOptions {
                tol: 1e-10,
                max_iter: 100,
                start_scale: 1.0,
            },
        );
        assert_eq!(r.status, IpmStatus::Converged);
        let pobj = blocks_dot(&p.c, &r.x);
        let dobj: f64 = p.b.iter().zip(&r.y).map(|(b, y)| b * y).sum();
        assert!((pobj - 2.0).abs() < 1e-8, "pobj {pobj}");
        assert!((dobj - 2.0).abs() < 1e-8);
    }
}
