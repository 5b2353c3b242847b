//! Finite-dimensional GNS realization of flat moment data.
//!
//! For `p, q` of degree `≤ n` the form `⟨p, q⟩ = L(pq) = ĉ(p)ᵀ M_n ĉ(q)`
//! vanishes on the kernel of `M_n`. A set `B` of monomials whose columns of
//! `M_n` are independent spans the quotient. When `rank M_n = rank M_{n+1}`,
//! every product `x_j b` with `b ∈ B` reduces to a combination of `B`, which
//! gives the matrix of multiplication by `x_j`. These matrices commute, are
//! self-adjoint for the Gram matrix `G = M_n[B, B]`, and their joint
//! eigenvalues are the atoms of the representing measure.
//!
//! This truncated construction is standard practice under flatness; it is
//! the finite shadow of the operators built from a full positive functional.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cones::SemialgebraicDescription;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, eigh, lower_inverse, lstsq, Mat, Qr};
use crate::measures::{Atom, AtomicMeasure};
use crate::moment::{flatness_check, TruncatedMomentSequence};
use crate::poly::{Exponent, MonomialBasis};
use crate::scalar::Scalar;

/// Relative eigenvalue gap below which a random combination is rejected.
pub const GAP_TOL: f64 = 1e-8;
/// Reseeding attempts in [`extract_atoms`].
pub const MAX_ATTEMPTS: usize = 8;
/// Smallest accepted pivot ratio of the weight system.
pub const VANDERMONDE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct QuotientBasis {
    n: u32,
    basis: MonomialBasis,
    indices: Vec<usize>,
    /// Column `c` holds the coordinates of column `c` of `M_n` in `B`'s columns.
    coordinates: Mat<f64>,
}

impl QuotientBasis {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn exponents(&self) -> Vec<Exponent> {
        self.indices.iter().map(|&i| self.basis.get(i).clone()).collect()
    }

    /// Positions of `B` in the graded-lex basis of degree `n`.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn coordinates(&self) -> &Mat<f64> {
        &self.coordinates
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicationOperators {
    gram: Mat<f64>,
    matrices: Vec<Mat<f64>>,
    /// `Lᵀ M_j L⁻ᵀ` for `G = L Lᵀ`, symmetric up to rounding.
    symmetric: Vec<Mat<f64>>,
}

impl MultiplicationOperators {
    /// Builds from the Gram matrix of the quotient basis and the operator matrices.
    pub fn new(gram: Mat<f64>, matrices: Vec<Mat<f64>>) -> Result<Self> {
        let r = gram.rows();
        if matrices.iter().any(|m| m.rows() != r || m.cols() != r) {
            return Err(Error::InconsistentDimensions("operator order differs from the Gram matrix".into()));
        }
        let l = cholesky(&gram).ok_or_else(|| Error::InconsistentDimensions("quotient Gram matrix is not positive definite".into()))?;
        let li = lower_inverse(&l);
        let symmetric = matrices
            .iter()
            .map(|m| li.matmul(&gram.matmul(m).symmetrize()).matmul(&li.transpose()).symmetrize())
            .collect();
        Ok(MultiplicationOperators { gram, matrices, symmetric })
    }

    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    pub fn order(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &Mat<f64> {
        &self.gram
    }

    pub fn matrix(&self, j: usize) -> &Mat<f64> {
        &self.matrices[j]
    }

    pub fn matrices(&self) -> &[Mat<f64>] {
        &self.matrices
    }

    /// Matrix of `M_j` in a `G`-orthonormal basis.
    pub fn symmetric(&self, j: usize) -> &Mat<f64> {
        &self.symmetric[j]
    }

    /// `max_{i<j} ‖M_i M_j − M_j M_i‖_F`.
    pub fn commutator_norm(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in i + 1..self.dim() {
                let (a, b) = (&self.matrices[i], &self.matrices[j]);
                worst = worst.max(a.matmul(b).sub(&b.matmul(a)).frobenius_norm());
            }
        }
        worst
    }

    /// `max_j ‖G M_j − M_jᵀ G‖_F`.
    pub fn adjointness_defect(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| {
                let gm = self.gram.matmul(m);
                gm.sub(&gm.transpose()).frobenius_norm()
            })
            .fold(0.0, f64::max)
    }

    /// Norm of `M_j` on the quotient with its own inner product.
    pub fn operator_norm(&self, j: usize) -> Result<f64> {
        let e = eigh(&self.symmetric[j])?;
        Ok(e.min().abs().max(e.max().abs()))
    }

    pub fn eigenvalues(&self, j: usize) -> Result<Vec<f64>> {
        Ok(eigh(&self.symmetric[j])?.values)
    }
}

fn column(m: &Mat<f64>, rows: usize, c: usize) -> Vec<f64> {
    (0..rows).map(|i| m[(i, c)]).collect()
}

/// Builds the quotient basis and the multiplication operators of a sequence
/// that is flat at the largest order it supports.
///
/// `tol` is the relative rank tolerance of the flatness test; a reduction
/// residual above `100 · tol · max(1, max |M_{n+1}|)` is reported as unstable.
pub fn build_operators<S: Scalar>(y: &TruncatedMomentSequence<S>, tol: f64) -> Result<(QuotientBasis, MultiplicationOperators)> {
    let report = flatness_check(y, tol)?;
    if !report.flat {
        return Err(Error::NotFlat {
            rank_n: report.rank_n,
            rank_n1: report.rank_n1,
        });
    }
    let n = report.n;
    let d = y.dim();
    let m1 = y.moment_matrix(n + 1)?.to_f64();
    let basis1 = MonomialBasis::new(d, n + 1);
    let basis = MonomialBasis::new(d, n);
    let k = basis.len();
    let k1 = basis1.len();

    // greedy graded-lex selection through Schur-complement pivots
    let mut indices: Vec<usize> = Vec::new();
    let mut chol_rows: Vec<Vec<f64>> = Vec::new();
    for c in 0..k {
        let mut l = vec![0.0; indices.len()];
        for (p, &b) in indices.iter().enumerate() {
            let s: f64 = (0..p).map(|q| l[q] * chol_rows[p][q]).sum();
            l[p] = (m1[(c, b)] - s) / chol_rows[p][p];
        }
        let pivot = m1[(c, c)] - l.iter().map(|v| v * v).sum::<f64>();
        if pivot > report.threshold {
            l.push(pivot.sqrt());
            chol_rows.push(l);
            indices.push(c);
        }
    }
    if indices.len() != report.rank_n {
        return Err(Error::RankDeficiencyInstability {
            residual: (indices.len() as f64 - report.rank_n as f64).abs(),
            tol: report.threshold,
        });
    }
    let r = indices.len();
    let scale = m1.max_abs().max(1.0);
    let residual_tol = 100.0 * tol * scale;

    let mn_b = Mat::from_fn(k, r, |i, p| m1[(i, indices[p])]);
    let mut coordinates = Mat::zeros(r, k);
    for c in 0..k {
        let (x, _) = lstsq(&mn_b, &column(&m1, k, c));
        for p in 0..r {
            coordinates[(p, c)] = x[p];
        }
    }

    let m1_b = Mat::from_fn(k1, r, |i, p| m1[(i, indices[p])]);
    let qr = Qr::new(&m1_b);
    let mut matrices = Vec::with_capacity(d);
    for j in 0..d {
        let unit = Exponent::unit(d, j);
        let mut mj = Mat::zeros(r, r);
        for (col, &b) in indices.iter().enumerate() {
            let target = basis.get(b).add(&unit);
            let t = basis1.index_of(&target).expect("degree n + 1 monomial");
            let (x, resid) = qr.solve(&column(&m1, k1, t));
            if !(resid <= residual_tol) {
                return Err(Error::RankDeficiencyInstability {
                    residual: resid,
                    tol: residual_tol,
                });
            }
            for p in 0..r {
                mj[(p, col)] = x[p];
            }
        }
        matrices.push(mj);
    }
    let gram = Mat::from_fn(r, r, |a, b| m1[(indices[a], indices[b])]);
    let ops = MultiplicationOperators::new(gram, matrices)?;
    Ok((
        QuotientBasis {
            n,
            basis,
            indices,
            coordinates,
        },
        ops,
    ))
}

/// Joint eigenvalues of the multiplication operators, sorted lexicographically
/// on coordinates rounded to `1e-9`.
///
/// A seeded random combination `Σ c_j M_j` is diagonalized and each
/// coordinate is read as a Rayleigh quotient. If two eigenvalues of the
/// combination lie within `tol · max(1, ‖Σ c_j M_j‖)` the combination is
/// redrawn, at most [`MAX_ATTEMPTS`] times.
pub fn extract_atoms(ops: &MultiplicationOperators, seed: u64, tol: f64) -> Result<Vec<Vec<f64>>> {
    let r = ops.order();
    let d = ops.dim();
    if r == 0 {
        return Ok(Vec::new());
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let mut combo = Mat::zeros(r, r);
        for j in 0..d {
            let c: f64 = rng.gen_range(-1.0..1.0);
            combo.axpy(c, ops.symmetric(j));
        }
        let e = eigh(&combo)?;
        let scale = e.min().abs().max(e.max().abs()).max(1.0);
        if e.values.windows(2).any(|w| w[1] - w[0] < tol * scale) {
            continue;
        }
        let mut atoms: Vec<Vec<f64>> = (0..r)
            .map(|k| {
                let u = e.vector(k);
                (0..d).map(|j| ops.symmetric(j).bilinear(&u, &u)).collect()
            })
            .collect();
        // order on rounded coordinates so rounding noise does not reorder ties
        let key = |a: &Vec<f64>| a.iter().map(|v| (v * 1e9).round() as i64).collect::<Vec<_>>();
        atoms.sort_by_key(key);
        return Ok(atoms);
    }
    Err(Error::DegenerateCombination { attempts: MAX_ATTEMPTS })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSolution {
    pub weights: Vec<f64>,
    /// `‖V w − y‖` of the unclipped least-squares solution.
    pub residual: f64,
    /// Number of equations `|α| ≤ n` used.
    pub equations: usize,
}

/// Least-squares weights on the equations `Σ_i w_i x_i^α = y_α`, `|α| ≤ n`,
/// with `n = ⌊degree/2⌋ − 1` as in [`flatness_check`]. Weights in `[−tol, 0)`
/// are clipped to zero and the rest rescaled to total mass `y_0`.
pub fn solve_weights<S: Scalar>(y: &TruncatedMomentSequence<S>, atoms: &[Vec<f64>], tol: f64) -> Result<WeightSolution> {
    let n = (y.degree() / 2).saturating_sub(1);
    let basis = MonomialBasis::new(y.dim(), n);
    let rhs: Vec<f64> = y.values()[..basis.len()].iter().map(Scalar::as_f64).collect();
    if atoms.is_empty() {
        return Ok(WeightSolution {
            weights: Vec::new(),
            residual: rhs.iter().map(|v| v * v).sum::<f64>().sqrt(),
            equations: basis.len(),
        });
    }
    if let Some(a) = atoms.iter().find(|a| a.len() != y.dim()) {
        return Err(Error::DimensionMismatch {
            expected: y.dim(),
            found: a.len(),
        });
    }
    if atoms.len() > basis.len() {
        return Err(Error::IllConditionedVandermonde { ratio: 0.0 });
    }
    let v = Mat::from_fn(basis.len(), atoms.len(), |row, i| basis.get(row).eval(&atoms[i]));
    let qr = Qr::new(&v);
    let ratio = qr.diag_ratio();
    if !(ratio >= VANDERMONDE_TOL) {
        return Err(Error::IllConditionedVandermonde { ratio });
    }
    let (mut w, residual) = qr.solve(&rhs);
    let y0 = rhs[0];
    let floor = tol * y0.abs().max(1.0);
    if let Some(bad) = w.iter().copied().find(|&x| x < -floor) {
        return Err(Error::ToleranceExceeded { error: -bad, tol: floor });
    }
    for x in w.iter_mut() {
        *x = x.max(0.0);
    }
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        for x in w.iter_mut() {
            *x *= y0 / total;
        }
    }
    Ok(WeightSolution {
        weights: w,
        residual,
        equations: basis.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSupport {
    pub index: usize,
    pub inside: bool,
    /// First violated generator and its value.
    pub violation: Option<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub atoms: Vec<AtomSupport>,
    pub all_inside: bool,
}

/// Checks every atom against `K` with `f_i(x) ≥ −tol`.
pub fn verify_support(atoms: &[Vec<f64>], k: &SemialgebraicDescription, tol: f64) -> Result<SupportReport> {
    let atoms = atoms
        .iter()
        .enumerate()
        .map(|(index, x)| {
            let violation = k.violation(x, tol)?;
            Ok(AtomSupport {
                index,
                inside: violation.is_none(),
                violation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SupportReport {
        all_inside: atoms.iter().all(|a| a.inside),
        atoms,
    })
}

/// Output of [`recover_measure`].
#[derive(Clone, Debug)]
pub struct Recovery {
    pub basis: QuotientBasis,
    pub operators: MultiplicationOperators,
    pub measure: AtomicMeasure<f64>,
    pub weights: WeightSolution,
}

/// Flatness test, operators, atoms and weights in one pass. Atoms whose
/// weight is clipped to zero are dropped.
pub fn recover_measure<S: Scalar>(y: &TruncatedMomentSequence<S>, tol: f64, seed: u64) -> Result<Recovery> {
    let (basis, operators) = build_operators(y, tol)?;
    let points = extract_atoms(&operators, seed, GAP_TOL)?;
    let weights = solve_weights(y, &points, tol)?;
    let atoms = points
        .into_iter()
        .zip(&weights.weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(point, &weight)| Atom { point, weight })
        .collect();
    let measure = AtomicMeasure::new(y.dim(), atoms)?;
    Ok(Recovery {
        basis,
        operators,
        measure,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Atom;
    use crate::scalar::{rat, rat_int};
    use crate::Polynomial;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn measure(d: usize, atoms: &[(&[i64], i64, i64)]) -> AtomicMeasure<BigRational> {
        AtomicMeasure::new(
            d,
            atoms
                .iter()
                .map(|(x, wn, wd)| Atom {
                    point: x.iter().map(|&v| rat_int(v)).collect(),
                    weight: rat(*wn, *wd),
                })
                .collect(),
        )
        .unwrap()
    }

    fn close(a: &Mat<f64>, rows: Vec<Vec<f64>>) -> bool {
        a.sub(&Mat::from_rows(rows).unwrap()).max_abs() < 1e-10
    }

    #[test]
    fn operator_examples() {
        let y = measure(1, &[(&[2], 1, 1)]).moments(4);
        let (b, ops) = build_operators(&y, 1e-7).unwrap();
        assert_eq!(b.exponents(), vec![Exponent::zero(1)]);
        assert!(close(ops.matrix(0), vec![vec![2.0]]));
        assert_eq!(extract_atoms(&ops, 0, GAP_TOL).unwrap(), vec![vec![2.0]]);

        let y = measure(1, &[(&[-1], 1, 2), (&[1], 1, 2)]).moments(4);
        let (b, ops) = build_operators(&y, 1e-7).unwrap();
        assert_eq!(b.exponents(), vec![Exponent::new(vec![0]), Exponent::new(vec![1])]);
        assert!(close(ops.matrix(0), vec![vec![0.0, 1.0], vec![1.0, 0.0]]));
        let atoms = extract_atoms(&ops, 0, GAP_TOL).unwrap();
        assert!((atoms[0][0] + 1.0).abs() < 1e-12 && (atoms[1][0] - 1.0).abs() < 1e-12);

        let quad = measure(2, &[(&[-1, -1], 1, 4), (&[-1, 1], 1, 4), (&[1, -1], 1, 4), (&[1, 1], 1, 4)]);
        let y = quad.moments(6);
        let (b, ops) = build_operators(&y, 1e-7).unwrap();
        assert_eq!(b.len(), 4);
        assert!(ops.commutator_norm() < 1e-10);
        assert!(ops.adjointness_defect() < 1e-10);
        for j in 0..2 {
            let ev = ops.eigenvalues(j).unwrap();
            assert!(ev.iter().all(|v| (v.abs() - 1.0).abs() < 1e-10), "{ev:?}");
        }
        let atoms = extract_atoms(&ops, 0, GAP_TOL).unwrap();
        let expect = [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]];
        for (a, e) in atoms.iter().zip(expect) {
            assert!((a[0] - e[0]).abs() < 1e-10 && (a[1] - e[1]).abs() < 1e-10, "{atoms:?}");
        }
    }

    #[test]
    fn not_flat_is_reported() {
        let y = TruncatedMomentSequence::univariate([1, 0, 1, 0, 2].map(rat_int).to_vec()).unwrap();
        assert!(matches!(build_operators(&y, 1e-7), Err(Error::NotFlat { rank_n: 2, rank_n1: 3 })));
    }

    #[test]
    fn degenerate_combination_retries_then_fails() {
        // two equal eigenvalues in a single coordinate cannot be separated
        let ops = MultiplicationOperators::new(Mat::identity(2), vec![Mat::identity(2)]).unwrap();
        assert!(matches!(
            extract_atoms(&ops, 0, GAP_TOL),
            Err(Error::DegenerateCombination { attempts: MAX_ATTEMPTS })
        ));
    }

    #[test]
    fn weight_examples() {
        let y = measure(1, &[(&[2], 1, 1)]).moments(4);
        assert_eq!(solve_weights(&y, &[vec![2.0]], 1e-9).unwrap().weights, vec![1.0]);

        let y = measure(1, &[(&[-1], 1, 2), (&[1], 1, 2)]).moments(4);
        let w = solve_weights(&y, &[vec![-1.0], vec![1.0]], 1e-9).unwrap();
        assert!((w.weights[0] - 0.5).abs() < 1e-14 && (w.weights[1] - 0.5).abs() < 1e-14);
        assert!(w.residual < 1e-14);

        let y = measure(1, &[(&[-1], 3, 2), (&[1], 3, 2)]).moments(4);
        let w = solve_weights(&y, &[vec![-1.0], vec![1.0]], 1e-9).unwrap();
        assert!((w.weights[0] - 1.5).abs() < 1e-14 && (w.weights[1] - 1.5).abs() < 1e-14);

        let e = solve_weights(&y, &[vec![1.0], vec![1.0 + 1e-13]], 1e-9).unwrap_err();
        assert!(matches!(e, Error::IllConditionedVandermonde { .. }));
    }

    #[test]
    fn support_examples() {
        let k = SemialgebraicDescription::new(1, vec![Polynomial::parse(1, "1 - x^2").unwrap()]).unwrap();
        assert!(verify_support(&[vec![-1.0], vec![1.0]], &k, 1e-9).unwrap().all_inside);
        let r = verify_support(&[vec![2.0]], &k, 1e-9).unwrap();
        assert!(!r.all_inside);
        assert_eq!(r.atoms[0].violation, Some((0, -3.0)));
        assert!(verify_support(&[], &k, 1e-9).unwrap().all_inside);
    }

    /// Up to four distinct atoms on the grid `{-1, -7/8, …, 1}^d`.
    fn grid_measure() -> impl Strategy<Value = AtomicMeasure<BigRational>> {
        (1usize..=2, proptest::collection::vec(((-8i64..=8, -8i64..=8), 1i64..=20), 1..=4)).prop_map(|(d, raw)| {
            let mut atoms: Vec<Atom<BigRational>> = Vec::new();
            for ((a, b), w) in raw {
                let point: Vec<BigRational> = [a, b][..d].iter().map(|&v| rat(v, 8)).collect();
                if atoms.iter().all(|x| x.point != point) {
                    atoms.push(Atom { point, weight: rat(w, 10) });
                }
            }
            AtomicMeasure::new(d, atoms).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn round_trip_recovers_measure(mu in grid_measure(), seed in 0u64..1000) {
            let k = mu.len() as u32;
            let y = mu.moments(2 * (k + 1));
            let rec = recover_measure(&y, 1e-7, seed).unwrap();
            let ops = &rec.operators;
            prop_assert!(ops.commutator_norm() <= 1e-6);
            prop_assert!(ops.adjointness_defect() <= 1e-6);
            prop_assert_eq!(rec.measure.len(), mu.len());
            let truth = mu.to_f64();
            for a in truth.atoms() {
                let hit = rec.measure.atoms().iter().find(|b| b.point.iter().zip(&a.point).all(|(u, v)| (u - v).abs() <= 1e-6));
                prop_assert!(hit.is_some(), "{:?} missing from {:?}", a, rec.measure);
                prop_assert!((hit.unwrap().weight - a.weight).abs() <= 1e-6);
            }
            // eigenvalues of M_j are the j-th coordinates of the atoms
            for j in 0..mu.dim() {
                let mut coords: Vec<f64> = rec.measure.atoms().iter().map(|a| a.point[j]).collect();
                coords.sort_by(f64::total_cmp);
                let ev = ops.eigenvalues(j).unwrap();
                for (c, e) in coords.iter().zip(&ev) {
                    prop_assert!((c - e).abs() <= 1e-6);
                }
                prop_assert!(ops.operator_norm(j).unwrap() <= 1.0 + 1e-6);
            }
            let back = rec.measure.moments(y.degree());
            for (u, v) in back.values().iter().zip(y.values()) {
                prop_assert!((u - v.as_f64()).abs() <= 1e-8);
            }
        }
    }
}
