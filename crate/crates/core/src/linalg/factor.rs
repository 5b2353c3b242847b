use super::{eigh, Mat};
use crate::scalar::Real;

/// Lower Cholesky factor `L` with `M = L Lᵀ`, or `None` if `M` is not
/// numerically positive definite.
pub fn cholesky<F: Real>(m: &Mat<F>) -> Option<Mat<F>> {
    let n = m.rows();
    if !m.is_square() {
        return None;
    }
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if !(d > F::zero()) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn solve_lower<F: Real>(l: &Mat<F>, b: &[F]) -> Vec<F> {
    let n = l.rows();
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s = s - l[(i, k)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `Lᵀ x = b` for lower-triangular `L`.
pub fn solve_lower_t<F: Real>(l: &Mat<F>, b: &[F]) -> Vec<F> {
    let n = l.rows();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s = s - l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `L Lᵀ x = b`.
pub fn cholesky_solve<F: Real>(l: &Mat<F>, b: &[F]) -> Vec<F> {
    solve_lower_t(l, &solve_lower(l, b))
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse<F: Real>(l: &Mat<F>) -> Mat<F> {
    let n = l.rows();
    let mut inv = Mat::zeros(n, n);
    for j in 0..n {
        let mut e = vec![F::zero(); n];
        e[j] = F::one();
        let col = solve_lower(l, &e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    inv
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse<F: Real>(m: &Mat<F>) -> Option<Mat<F>> {
    let l = cholesky(m)?;
    let li = lower_inverse(&l);
    Some(li.transpose().matmul(&li).symmetrize())
}

/// Householder QR of a tall matrix, used for least squares.
#[derive(Clone, Debug)]
pub struct Qr<F> {
    qr: Mat<F>,
    tau: Vec<F>,
    rdiag: Vec<F>,
}

impl<F: Real> Qr<F> {
    pub fn new(a: &Mat<F>) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let mut qr = a.clone();
        let mut tau = vec![F::zero(); n];
        let mut rdiag = vec![F::zero(); n];
        for k in 0..n.min(m) {
            let norm: F = (k..m).map(|i| qr[(i, k)] * qr[(i, k)]).sum::<F>().sqrt();
            if norm == F::zero() {
                continue;
            }
            let alpha = if qr[(k, k)] > F::zero() { -norm } else { norm };
            // v = x - alpha e1, stored in place with v_k explicit
            qr[(k, k)] = qr[(k, k)] - alpha;
            let vnorm2: F = (k..m).map(|i| qr[(i, k)] * qr[(i, k)]).sum();
            if vnorm2 == F::zero() {
                rdiag[k] = alpha;
                continue;
            }
            let t = F::lit(2.0) / vnorm2;
            for j in k + 1..n {
                let s: F = (k..m).map(|i| qr[(i, k)] * qr[(i, j)]).sum();
                for i in k..m {
                    qr[(i, j)] = qr[(i, j)] - t * s * qr[(i, k)];
                }
            }
            tau[k] = t;
            rdiag[k] = alpha;
        }
        Qr { qr, tau, rdiag }
    }

    /// Ratio `min |R_kk| / max |R_kk|`, a cheap conditioning indicator.
    pub fn diag_ratio(&self) -> F {
        let max = self.rdiag.iter().fold(F::zero(), |m, v| m.max(v.abs()));
        let min = self.rdiag.iter().fold(F::infinity(), |m, v| m.min(v.abs()));
        if max == F::zero() {
            F::zero()
        } else {
            min / max
        }
    }

    /// Least-squares solution of `A x ≈ b` and the residual norm `‖A x − b‖`.
    pub fn solve(&self, b: &[F]) -> (Vec<F>, F) {
        let (m, n) = (self.qr.rows(), self.qr.cols());
        assert_eq!(b.len(), m);
        let mut y = b.to_vec();
        for k in 0..n.min(m) {
            if self.tau[k] == F::zero() {
                continue;
            }
            let s: F = (k..m).map(|i| self.qr[(i, k)] * y[i]).sum();
            for (i, yi) in y.iter_mut().enumerate().skip(k) {
                *yi = *yi - self.tau[k] * s * self.qr[(i, k)];
            }
        }
        let mut x = vec![F::zero(); n];
        for i in (0..n.min(m)).rev() {
            let s = (i + 1..n).fold(y[i], |s, j| s - self.qr[(i, j)] * x[j]);
            x[i] = if self.rdiag[i] == F::zero() { F::zero() } else { s / self.rdiag[i] };
        }
        let resid: F = y[n.min(m)..].iter().map(|v| *v * *v).sum::<F>().sqrt();
        (x, resid)
    }
}

/// Least squares `min ‖A x − b‖`; returns the solution and residual norm.
pub fn lstsq<F: Real>(a: &Mat<F>, b: &[F]) -> (Vec<F>, F) {
    Qr::new(a).solve(b)
}

/// Minimum-norm solution `Aᵀ (A Aᵀ)⁺ b`, dropping eigenvalues of `A Aᵀ` at or
/// below `rel_cut · λ_max`.
pub fn min_norm_lstsq(a: &Mat<f64>, b: &[f64], rel_cut: f64) -> Option<Vec<f64>> {
    let m = a.rows();
    let e = eigh(&a.matmul(&a.transpose()).symmetrize()).ok()?;
    let emax = e.max().max(0.0);
    let mut w = vec![0.0; m];
    for k in 0..m {
        let lam = e.values[k];
        if lam <= rel_cut * emax {
            continue;
        }
        let u = e.vector(k);
        let c: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / lam;
        for i in 0..m {
            w[i] += c * u[i];
        }
    }
    Some(a.transpose().matvec(&w))
}
