//! Coefficient matching `Σ_b w_b · v_bᵀ G_b v_b = target` for several Gram
//! blocks at once, with exact and floating-point extraction of the squares.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::SosDecomposition;
use crate::error::{Error, Result};
use crate::linalg::{eigh, ldl_psd, solve_consistent, Mat, SdpProblem, SymMatrix};
use crate::poly::{Exponent, MonomialBasis};
use crate::scalar::{rationalize, Scalar};
use crate::Polynomial;

/// Denominator cap used when snapping numerical Gram entries to rationals.
pub const RATIONAL_DENOMINATOR_CAP: u64 = 1_000_000;
/// Denominator cap for coefficients of floating-point squares.
const FLOAT_DENOMINATOR_CAP: u64 = 1 << 40;

/// One SOS multiplier `σ = v_bᵀ G_b v_b` attached to a fixed weight polynomial.
#[derive(Clone, Debug)]
pub struct GramBlock {
    pub weight: Polynomial,
    pub basis: MonomialBasis,
}

/// Linear system in the entries of several Gram matrices.
#[derive(Clone, Debug)]
pub struct GramProgram {
    dim: usize,
    blocks: Vec<GramBlock>,
    target: Polynomial,
    gammas: Vec<Exponent>,
    /// `(block, i, j, c)` with `i ≤ j`, meaning `A_ij = A_ji = c`.
    rows: Vec<Vec<(usize, usize, usize, BigRational)>>,
    rhs: Vec<BigRational>,
}

/// Result of turning numerical Gram matrices into SOS multipliers.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub multipliers: Vec<SosDecomposition>,
    /// Multipliers come from an exact PSD rational Gram matrix.
    pub exact: bool,
}

impl GramProgram {
    pub fn new(target: &Polynomial, blocks: Vec<GramBlock>) -> Result<Self> {
        let dim = target.dim();
        for b in &blocks {
            if b.weight.dim() != dim || b.basis.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: if b.weight.dim() != dim { b.weight.dim() } else { b.basis.dim() },
                });
            }
        }
        let mut eqs: BTreeMap<Exponent, BTreeMap<(usize, usize, usize), BigRational>> = BTreeMap::new();
        for (bi, b) in blocks.iter().enumerate() {
            let ex = b.basis.exponents();
            for i in 0..ex.len() {
                for j in i..ex.len() {
                    let ab = ex[i].add(&ex[j]);
                    for (d, w) in b.weight.terms() {
                        let slot = eqs
                            .entry(ab.add(d))
                            .or_default()
                            .entry((bi, i, j))
                            .or_insert_with(BigRational::zero);
                        *slot += w;
                    }
                }
            }
        }
        for (e, _) in target.terms() {
            eqs.entry(e.clone()).or_default();
        }
        let mut gammas = Vec::with_capacity(eqs.len());
        let mut rows = Vec::with_capacity(eqs.len());
        let mut rhs = Vec::with_capacity(eqs.len());
        for (g, entries) in eqs {
            rhs.push(target.coeff(&g));
            gammas.push(g);
            rows.push(
                entries
                    .into_iter()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|((b, i, j), c)| (b, i, j, c))
                    .collect(),
            );
        }
        Ok(GramProgram {
            dim,
            blocks,
            target: target.clone(),
            gammas,
            rows,
            rhs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[GramBlock] {
        &self.blocks
    }

    pub fn target(&self) -> &Polynomial {
        &self.target
    }

    pub fn num_equations(&self) -> usize {
        self.rows.len()
    }

    /// Monomial `γ` of each equation, in equation order.
    pub fn gammas(&self) -> &[Exponent] {
        &self.gammas
    }

    /// Entries `(block, i, j, c)` of equation `k`.
    pub fn equation(&self, k: usize) -> (&[(usize, usize, usize, BigRational)], &BigRational) {
        (&self.rows[k], &self.rhs[k])
    }

    /// Binary64 SDP; the objective is `Σ_b c_b tr G_b`.
    pub fn to_sdp(&self, trace_weights: &[f64]) -> Result<SdpProblem> {
        let sizes: Vec<usize> = self.blocks.iter().map(|b| b.basis.len()).collect();
        let mut p = SdpProblem::with_blocks(sizes.clone());
        for (row, b) in self.rows.iter().zip(&self.rhs) {
            p.add_sparse_constraint(row.iter().map(|(bl, i, j, c)| (*bl, *i, *j, c.as_f64())), b.as_f64())?;
        }
        let obj = sizes.iter().zip(trace_weights).map(|(&n, &w)| Mat::identity(n).scale(w)).collect();
        p.set_objective(obj)?;
        Ok(p)
    }

    /// `Σ_b w_b σ_b` for candidate multipliers.
    pub fn expand(&self, multipliers: &[SosDecomposition]) -> Polynomial {
        self.blocks
            .iter()
            .zip(multipliers)
            .fold(Polynomial::zero(self.dim), |acc, (b, s)| acc + &b.weight * &s.expand())
    }

    /// Exact route first (snap, project, LDLᵀ); otherwise eigenvalue
    /// truncation at `tol · λ_max` per block.
    pub fn extract(&self, g: &[SymMatrix], tol: f64) -> Extraction {
        if let Some(m) = self.extract_exact(g) {
            if self.expand(&m) == self.target {
                return Extraction {
                    multipliers: m,
                    exact: true,
                };
            }
        }
        Extraction {
            multipliers: self.extract_float(g, tol),
            exact: false,
        }
    }

    fn extract_exact(&self, g: &[SymMatrix]) -> Option<Vec<SosDecomposition>> {
        let mut gr: Vec<Mat<BigRational>> = g
            .iter()
            .map(|m| {
                let n = m.rows();
                let mut r = Mat::<BigRational>::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let v = rationalize(0.5 * (m[(i, j)] + m[(j, i)]), RATIONAL_DENOMINATOR_CAP)?;
                        r[(i, j)] = v.clone();
                        r[(j, i)] = v;
                    }
                }
                Some(r)
            })
            .collect::<Option<_>>()?;

        let resid: Vec<BigRational> = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| b - self.apply_row(row, &gr))
            .collect();
        if resid.iter().any(|r| !r.is_zero()) {
            let z = self.min_norm_correction(&resid)?;
            for (row, zk) in self.rows.iter().zip(&z) {
                if zk.is_zero() {
                    continue;
                }
                for (b, i, j, c) in row {
                    let add = zk * c;
                    gr[*b][(*i, *j)] += &add;
                    if i != j {
                        gr[*b][(*j, *i)] += &add;
                    }
                }
            }
        }
        gr.iter()
            .zip(&self.blocks)
            .map(|(m, b)| {
                let f = ldl_psd(m)?;
                let n = m.rows();
                let mut weights = Vec::new();
                let mut squares = Vec::new();
                for k in 0..n {
                    if f.d[k].is_zero() {
                        continue;
                    }
                    let coeffs: Vec<BigRational> = (0..n).map(|i| f.l[(i, k)].clone()).collect();
                    weights.push(f.d[k].clone());
                    squares.push(Polynomial::from_coeff_vector(&b.basis, &coeffs));
                }
                SosDecomposition::new(self.dim, weights, squares).ok()
            })
            .collect()
    }

    fn apply_row(&self, row: &[(usize, usize, usize, BigRational)], g: &[Mat<BigRational>]) -> BigRational {
        row.iter().fold(BigRational::zero(), |acc, (b, i, j, c)| {
            let v = if i == j {
                c * &g[*b][(*i, *i)]
            } else {
                c * (&g[*b][(*i, *j)] + &g[*b][(*j, *i)])
            };
            acc + v
        })
    }

    /// Solves `(A A*) z = r` exactly.
    fn min_norm_correction(&self, r: &[BigRational]) -> Option<Vec<BigRational>> {
        let m = self.rows.len();
        let keyed: Vec<HashMap<(usize, usize, usize), &BigRational>> = self
            .rows
            .iter()
            .map(|row| row.iter().map(|(b, i, j, c)| ((*b, *i, *j), c)).collect())
            .collect();
        let mut gram = Mat::<BigRational>::zeros(m, m);
        for k in 0..m {
            for l in 0..=k {
                let (small, large) = if keyed[k].len() <= keyed[l].len() {
                    (&keyed[k], &keyed[l])
                } else {
                    (&keyed[l], &keyed[k])
                };
                let mut s = BigRational::zero();
                for (key, c) in small {
                    if let Some(d) = large.get(key) {
                        let mult = if key.1 == key.2 { 1 } else { 2 };
                        s += *c * *d * BigRational::from_integer(mult.into());
                    }
                }
                gram[(k, l)] = s.clone();
                gram[(l, k)] = s;
            }
        }
        solve_consistent(&gram, r)
    }

    fn extract_float(&self, g: &[SymMatrix], tol: f64) -> Vec<SosDecomposition> {
        g.iter()
            .zip(&self.blocks)
            .map(|(m, b)| {
                let Ok(e) = eigh(m) else {
                    return SosDecomposition::zero(self.dim);
                };
                let lmax = e.max();
                let mut weights = Vec::new();
                let mut squares = Vec::new();
                for (k, &lam) in e.values.iter().enumerate() {
                    if !(lam > tol * lmax) || lmax <= 0.0 {
                        continue;
                    }
                    let Some(w) = rationalize(lam, FLOAT_DENOMINATOR_CAP).filter(|w| w.is_positive()) else {
                        continue;
                    };
                    let coeffs: Vec<BigRational> = e
                        .vector(k)
                        .iter()
                        .map(|&v| rationalize(v, FLOAT_DENOMINATOR_CAP).unwrap_or_else(BigRational::zero))
                        .collect();
                    let h = Polynomial::from_coeff_vector(&b.basis, &coeffs);
                    if h.is_zero() {
                        continue;
                    }
                    weights.push(w);
                    squares.push(h);
                }
                SosDecomposition::new(self.dim, weights, squares).expect("positive weights, matching dimension")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    #[test]
    fn equations_match_coefficients() {
        let p = Polynomial::parse(1, "x^2").unwrap();
        let prog = GramProgram::new(
            &p,
            vec![GramBlock {
                weight: Polynomial::one(1),
                basis: MonomialBasis::new(1, 1),
            }],
        )
        .unwrap();
        assert_eq!(prog.num_equations(), 3);
        let (row, rhs) = prog.equation(2);
        assert_eq!(row, &[(0, 1, 1, rat_int(1))]);
        assert_eq!(rhs, &rat_int(1));
        let (row, rhs) = prog.equation(1);
        assert_eq!(row, &[(0, 0, 1, rat_int(1))]);
        assert!(rhs.is_zero());
    }

    #[test]
    fn exact_extraction_snaps_and_projects() {
        let p = Polynomial::parse(1, "x^4 + 2x^2 + 1").unwrap();
        let prog = GramProgram::new(
            &p,
            vec![GramBlock {
                weight: Polynomial::one(1),
                basis: MonomialBasis::new(1, 2),
            }],
        )
        .unwrap();
        let g = Mat::from_rows(vec![
            vec![1.0 + 1e-10, 0.0, 1.0 - 1e-10],
            vec![0.0, 1e-11, 0.0],
            vec![1.0 - 1e-10, 0.0, 1.0],
        ])
        .unwrap();
        let ex = prog.extract(&[g], 1e-8);
        assert!(ex.exact);
        assert_eq!(ex.multipliers[0].len(), 1);
        assert_eq!(prog.expand(&ex.multipliers), p);
    }
}
