//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Jacobi is slower than tridiagonal QR but has small relative error on
//! tiny eigenvalues, which is what rank and PSD decisions depend on.

use super::Mat;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenvalues in ascending order and orthonormal eigenvectors as columns,
/// so that `M = V diag(values) Vᵀ`.
#[derive(Clone, Debug)]
pub struct SymEigen<F> {
    pub values: Vec<F>,
    pub vectors: Mat<F>,
}

impl<F: Real> SymEigen<F> {
    pub fn min(&self) -> F {
        self.values.first().copied().unwrap_or_else(F::zero)
    }

    pub fn max(&self) -> F {
        self.values.last().copied().unwrap_or_else(F::zero)
    }

    pub fn vector(&self, k: usize) -> Vec<F> {
        self.vectors.col(k)
    }

    /// `V diag(values) Vᵀ`.
    pub fn reconstruct(&self) -> Mat<F> {
        let n = self.values.len();
        let v = &self.vectors;
        Mat::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * self.values[k] * v[(j, k)]).sum())
    }
}

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix; the input is symmetrized first.
pub fn eigh<F: Real>(m: &Mat<F>) -> Result<SymEigen<F>> {
    if !m.is_square() {
        return Err(Error::InconsistentDimensions(format!(
            "eigh needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.rows();
    let mut a = m.symmetrize();
    let mut v = Mat::<F>::identity(n);
    let scale = a.frobenius_norm();
    if scale == F::zero() || n < 2 {
        return Ok(sorted(a, v));
    }
    let eps = F::epsilon();
    let two = F::lit(2.0);

    for _ in 0..MAX_SWEEPS {
        let off: F = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= eps * scale * F::lit(1e-2) {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == F::zero() {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // skip rotations that cannot change the diagonal in working precision
                if apq.abs() <= eps * F::lit(1e-3) * (app.abs() + aqq.abs()).max(scale * eps) {
                    a[(p, q)] = F::zero();
                    a[(q, p)] = F::zero();
                    continue;
                }
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                let tau = s / (F::one() + c);

                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = F::zero();
                a[(q, p)] = F::zero();
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let nrp = arp - s * (arq + tau * arp);
                    let nrq = arq + s * (arp - tau * arq);
                    a[(r, p)] = nrp;
                    a[(p, r)] = nrp;
                    a[(r, q)] = nrq;
                    a[(q, r)] = nrq;
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp - s * (vrq + tau * vrp);
                    v[(r, q)] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }
    Ok(sorted(a, v))
}

fn sorted<F: Real>(a: Mat<F>, v: Mat<F>) -> SymEigen<F> {
    let n = a.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    SymEigen {
        values: order.iter().map(|&k| a[(k, k)]).collect(),
        vectors: Mat::from_fn(n, n, |i, j| v[(i, order[j])]),
    }
}

/// Eigenvalues only, ascending.
pub fn eigvalsh<F: Real>(m: &Mat<F>) -> Result<Vec<F>> {
    eigh(m).map(|e| e.values)
}

/// Smallest eigenvalue (zero for the empty matrix).
pub fn min_eigenvalue<F: Real>(m: &Mat<F>) -> Result<F> {
    eigh(m).map(|e| e.min())
}

/// PSD test: `λ_min ≥ −tol · max(1, |λ_max|)`.
pub fn is_psd<F: Real>(m: &Mat<F>, tol: F) -> bool {
    match eigh(m) {
        Ok(e) => {
            let top = e.values.iter().fold(F::zero(), |acc, v| acc.max(v.abs()));
            e.min() >= -tol * top.max(F::one())
        }
        Err(_) => false,
    }
}

/// Number of singular values exceeding `tol · σ_max`; zero for the zero matrix.
pub fn numerical_rank<F: Real>(m: &Mat<F>, tol: F) -> usize {
    match eigh(m) {
        Ok(e) => rank_from_values(&e.values, tol),
        Err(_) => 0,
    }
}

pub(crate) fn rank_from_values<F: Real>(values: &[F], tol: F) -> usize {
    let smax = values.iter().fold(F::zero(), |acc, v| acc.max(v.abs()));
    if smax == F::zero() {
        return 0;
    }
    values.iter().filter(|v| v.abs() > tol * smax).count()
}
