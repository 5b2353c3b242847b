//! Truncated moment sequences, the Riesz functional, moment and localizing
//! matrices, Hankel matrices and the flatness test.

mod json;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

pub use json::{MomentEntryJson, SequenceJson};

use crate::error::{Error, Result};
use crate::linalg::{eigh, Mat};
use crate::poly::{Exponent, MonomialBasis, Poly};
use crate::scalar::Scalar;

/// Values `y_α` for every `|α| ≤ degree`, stored in graded-lex order.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedMomentSequence<S> {
    basis: MonomialBasis,
    values: Vec<S>,
}

impl<S: Scalar> TruncatedMomentSequence<S> {
    /// `values` must list `y_α` for the graded-lex basis of the given degree.
    pub fn new(dim: usize, degree: u32, values: Vec<S>) -> Result<Self> {
        let basis = MonomialBasis::new(dim, degree);
        if values.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: values.len(),
            });
        }
        Ok(TruncatedMomentSequence { basis, values })
    }

    pub fn from_fn(dim: usize, degree: u32, f: impl Fn(&Exponent) -> S) -> Self {
        let basis = MonomialBasis::new(dim, degree);
        let values = basis.exponents().iter().map(f).collect();
        TruncatedMomentSequence { basis, values }
    }

    /// Builds from `(α, y_α)` pairs; every `|α| ≤ degree` must appear once.
    pub fn from_pairs<I>(dim: usize, degree: u32, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, S)>,
    {
        let basis = MonomialBasis::new(dim, degree);
        let mut values: Vec<Option<S>> = vec![None; basis.len()];
        for (e, v) in pairs {
            let i = basis
                .index_of(&e)
                .ok_or_else(|| Error::Parse(format!("moment index {e} outside dimension {dim}, degree {degree}")))?;
            if values[i].replace(v).is_some() {
                return Err(Error::Parse(format!("moment index {e} listed twice")));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::Parse(format!("missing moment {}", basis.get(i)))))
            .collect::<Result<Vec<_>>>()?;
        Ok(TruncatedMomentSequence { basis, values })
    }

    /// Univariate sequence `(s_0, …, s_D)`.
    pub fn univariate(s: Vec<S>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InsufficientDegree { required: 0, available: 0 });
        }
        let degree = (s.len() - 1) as u32;
        Self::new(1, degree, s)
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn degree(&self) -> u32 {
        self.basis.degree()
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Exponent, &S)> {
        self.basis.exponents().iter().zip(&self.values)
    }

    pub fn get(&self, alpha: &Exponent) -> Option<&S> {
        self.basis.index_of(alpha).map(|i| &self.values[i])
    }

    /// `y_0 = L(1)`.
    pub fn mass(&self) -> S {
        self.values[0].clone()
    }

    /// A sequence whose mass is not positive cannot come from a nonzero measure.
    pub fn has_positive_mass(&self) -> bool {
        self.values[0] > S::zero()
    }

    fn need(&self, required: u32) -> Result<()> {
        if required > self.degree() {
            return Err(Error::InsufficientDegree {
                required,
                available: self.degree(),
            });
        }
        Ok(())
    }

    /// `L_y(p) = Σ_α p_α y_α`.
    pub fn riesz_apply(&self, p: &Poly<S>) -> Result<S> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        if let Some(deg) = p.total_degree() {
            if deg > self.degree() {
                return Err(Error::DegreeOverflow {
                    degree: deg,
                    bound: self.degree(),
                });
            }
        }
        Ok(p.terms().fold(S::zero(), |acc, (e, c)| {
            acc + c.clone() * self.get(e).expect("within degree").clone()
        }))
    }

    /// `L_y(p)` for a rational polynomial, embedding its coefficients into `S`.
    pub fn riesz_apply_rational(&self, p: &Poly<BigRational>) -> Result<S> {
        self.riesz_apply(&p.cast::<S>())
    }

    /// `M_n(y)_{α,β} = y_{α+β}` over the basis of degree `n`.
    pub fn moment_matrix(&self, n: u32) -> Result<Mat<S>> {
        self.need(2 * n)?;
        let b = self.basis.prefix_len(n);
        let ex = self.basis.exponents();
        Ok(Mat::from_fn(b, b, |i, j| {
            self.get(&ex[i].add(&ex[j])).expect("within degree").clone()
        }))
    }

    /// Localizing matrix `L_y(g · x^{α+β})` for `|α|, |β| ≤ k`.
    pub fn localizing_matrix(&self, g: &Poly<S>, k: u32) -> Result<Mat<S>> {
        if g.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: g.dim(),
            });
        }
        let dg = g.total_degree().unwrap_or(0);
        let required = 2 * k + dg;
        if required > self.degree() {
            return Err(Error::DegreeOverflow {
                degree: required,
                bound: self.degree(),
            });
        }
        let b = self.basis.prefix_len(k);
        let ex = self.basis.exponents();
        Ok(Mat::from_fn(b, b, |i, j| {
            let ab = ex[i].add(&ex[j]);
            g.terms().fold(S::zero(), |acc, (e, c)| {
                acc + c.clone() * self.get(&ab.add(e)).expect("within degree").clone()
            })
        }))
    }

    pub fn to_f64(&self) -> TruncatedMomentSequence<f64> {
        TruncatedMomentSequence {
            basis: self.basis.clone(),
            values: self.values.iter().map(Scalar::as_f64).collect(),
        }
    }

    /// Entrywise sum of two sequences of equal shape.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() || self.degree() != other.degree() {
            return Err(Error::InconsistentDimensions(
                "moment sequences differ in dimension or degree".into(),
            ));
        }
        Ok(TruncatedMomentSequence {
            basis: self.basis.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a.clone() + b.clone()).collect(),
        })
    }

    /// Restriction to moments of degree at most `degree`.
    pub fn truncate(&self, degree: u32) -> Result<Self> {
        self.need(degree)?;
        let basis = MonomialBasis::new(self.dim(), degree);
        let values = self.values[..basis.len()].to_vec();
        Ok(TruncatedMomentSequence { basis, values })
    }
}

/// Hankel matrix `H_ij = s_{i+j}` of order `n + 1`.
pub fn hankel<S: Scalar>(s: &[S], n: usize) -> Result<Mat<S>> {
    if s.len() < 2 * n + 1 {
        return Err(Error::InsufficientDegree {
            required: 2 * n as u32,
            available: s.len().saturating_sub(1) as u32,
        });
    }
    Ok(Mat::from_fn(n + 1, n + 1, |i, j| s[i + j].clone()))
}

/// Default relative rank tolerance of [`flatness_check`].
pub const DEFAULT_RANK_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub n: u32,
    pub rank_n: usize,
    pub rank_n1: usize,
    pub psd_n: bool,
    pub psd_n1: bool,
    /// Absolute threshold shared by both rank computations.
    pub threshold: f64,
    pub flat: bool,
}

/// Compares `rank M_n(y)` with `rank M_{n+1}(y)` for the largest `n` the
/// sequence supports, using one threshold `tol · σ_max(M_{n+1})`.
pub fn flatness_check<S: Scalar>(y: &TruncatedMomentSequence<S>, tol: f64) -> Result<FlatnessReport> {
    if y.degree() < 2 {
        return Err(Error::InsufficientDegree {
            required: 2,
            available: y.degree(),
        });
    }
    flatness_check_at(y, y.degree() / 2 - 1, tol)
}

/// As [`flatness_check`] at a given `n`; requires degree `≥ 2n + 2`.
pub fn flatness_check_at<S: Scalar>(y: &TruncatedMomentSequence<S>, n: u32, tol: f64) -> Result<FlatnessReport> {
    y.need(2 * n + 2)?;
    let m1 = y.moment_matrix(n + 1)?.to_f64();
    let e1 = eigh(&m1)?;
    let smax = e1.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = tol * smax;
    let k = y.basis.prefix_len(n);
    let idx: Vec<usize> = (0..k).collect();
    let m0 = m1.select(&idx, &idx);
    let e0 = eigh(&m0)?;
    let count = |vals: &[f64]| vals.iter().filter(|v| v.abs() > threshold).count();
    let rank_n = count(&e0.values);
    let rank_n1 = count(&e1.values);
    let psd_n = e0.min() >= -threshold;
    let psd_n1 = e1.min() >= -threshold;
    Ok(FlatnessReport {
        n,
        rank_n,
        rank_n1,
        psd_n,
        psd_n1,
        threshold,
        flat: rank_n == rank_n1 && psd_n && psd_n1 && smax > 0.0,
    })
}
