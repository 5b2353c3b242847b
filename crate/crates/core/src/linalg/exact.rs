//! Exact rational kernels: LDLᵀ positive-semidefiniteness test and
//! consistent linear solves.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Mat;

/// `M = L diag(d) Lᵀ` with unit lower-triangular `L` and `d ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ldl {
    pub l: Mat<BigRational>,
    pub d: Vec<BigRational>,
}

/// Exact LDLᵀ of a symmetric rational matrix, or `None` when it is not PSD.
///
/// A zero pivot is accepted only if the rest of its column is zero; any
/// nonzero entry next to it exhibits a 2×2 minor with negative determinant.
pub fn ldl_psd(m: &Mat<BigRational>) -> Option<Ldl> {
    if !m.is_square() || !m.is_symmetric() {
        return None;
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut l = Mat::<BigRational>::identity(n);
    let mut d = vec![BigRational::zero(); n];
    for k in 0..n {
        let piv = a[(k, k)].clone();
        if piv.is_negative() {
            return None;
        }
        if piv.is_zero() {
            if (k + 1..n).any(|i| !a[(i, k)].is_zero()) {
                return None;
            }
            continue;
        }
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            l[(i, k)] = &a[(i, k)] / &piv;
        }
        for i in k + 1..n {
            if l[(i, k)].is_zero() {
                continue;
            }
            for j in k + 1..=i {
                if l[(j, k)].is_zero() {
                    continue;
                }
                let v = &a[(i, j)] - &l[(i, k)] * &l[(j, k)] * &piv;
                a[(i, j)] = v.clone();
                a[(j, i)] = v;
            }
        }
        d[k] = piv;
    }
    Some(Ldl { l, d })
}

pub fn is_psd_exact(m: &Mat<BigRational>) -> bool {
    ldl_psd(m).is_some()
}

/// Some solution of `A x = b`, or `None` if the system is inconsistent.
/// Free variables are set to zero.
pub fn solve_consistent(a: &Mat<BigRational>, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let (m, n) = (a.rows(), a.cols());
    assert_eq!(b.len(), m);
    let mut aug = Mat::from_fn(m, n + 1, |i, j| if j < n { a[(i, j)].clone() } else { b[i].clone() });
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        let Some(p) = (row..m).find(|&i| !aug[(i, col)].is_zero()) else {
            continue;
        };
        if p != row {
            for j in 0..=n {
                let t = aug[(p, j)].clone();
                aug[(p, j)] = aug[(row, j)].clone();
                aug[(row, j)] = t;
            }
        }
        let inv = BigRational::one() / &aug[(row, col)];
        for j in col..=n {
            aug[(row, j)] = &aug[(row, j)] * &inv;
        }
        for i in 0..m {
            if i == row || aug[(i, col)].is_zero() {
                continue;
            }
            let f = aug[(i, col)].clone();
            for j in col..=n {
                let v = &aug[(i, j)] - &f * &aug[(row, j)];
                aug[(i, j)] = v;
            }
        }
        pivots.push(col);
        row += 1;
    }
    if (row..m).any(|i| !aug[(i, n)].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[(r, n)].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn rm(rows: Vec<Vec<i64>>) -> Mat<BigRational> {
        Mat::from_rows(rows.into_iter().map(|r| r.into_iter().map(rat_int).collect()).collect()).unwrap()
    }

    #[test]
    fn ldl_accepts_psd_and_reconstructs() {
        let m = rm(vec![vec![1, 0, 1], vec![0, 0, 0], vec![1, 0, 1]]);
        let f = ldl_psd(&m).unwrap();
        let dm = Mat::from_diag(&f.d);
        let rec = f.l.mul_mat(&dm).unwrap().mul_mat(&f.l.transpose()).unwrap();
        assert_eq!(rec, m);
        assert_eq!(f.d, vec![rat_int(1), rat_int(0), rat_int(0)]);
    }

    #[test]
    fn ldl_rejects_indefinite() {
        assert!(!is_psd_exact(&rm(vec![vec![0, 1], vec![1, 0]])));
        assert!(!is_psd_exact(&rm(vec![vec![1, 2], vec![2, 1]])));
        assert!(is_psd_exact(&rm(vec![vec![1, 1], vec![1, 1]])));
        assert!(!is_psd_exact(&rm(vec![vec![-1]])));
    }

    #[test]
    fn consistent_solve() {
        let a = rm(vec![vec![1, 1], vec![2, 2]]);
        let x = solve_consistent(&a, &[rat_int(3), rat_int(6)]).unwrap();
        assert_eq!(&x[0] + &x[1], rat_int(3));
        assert!(solve_consistent(&a, &[rat_int(3), rat_int(5)]).is_none());
        let b = rm(vec![vec![2, 0], vec![0, 4]]);
        assert_eq!(solve_consistent(&b, &[rat_int(1), rat_int(1)]).unwrap(), vec![rat(1, 2), rat(1, 4)]);
    }
}
