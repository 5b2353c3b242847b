use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;

use super::{Exponent, MonomialBasis};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparse multivariate polynomial with coefficients in `C`.
///
/// Terms are keyed by [`Exponent`] in graded-lex order; zero coefficients are
/// never stored, so structural equality is polynomial equality.
#[derive(Clone, PartialEq)]
pub struct Poly<C> {
    dim: usize,
    terms: BTreeMap<Exponent, C>,
}

impl<C: Scalar> Poly<C> {
    pub fn zero(dim: usize) -> Self {
        Poly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, C::one())
    }

    pub fn constant(dim: usize, c: C) -> Self {
        Self::monomial(Exponent::zero(dim), c)
    }

    /// The coordinate function `x_j` (zero-based `j`).
    pub fn var(dim: usize, j: usize) -> Self {
        Self::monomial(Exponent::unit(dim, j), C::one())
    }

    pub fn monomial(e: Exponent, c: C) -> Self {
        let dim = e.dim();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Poly { dim, terms }
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, merging repeats.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, C)>,
    {
        let mut p = Poly::zero(dim);
        for (e, c) in terms {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.dim(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Exponent, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponent, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exponent) -> C {
        self.terms.get(e).cloned().unwrap_or_else(C::zero)
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Exponent::degree).max()
    }

    /// Constant term.
    pub fn constant_term(&self) -> C {
        self.coeff(&Exponent::zero(self.dim))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Poly::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Poly::zero(self.dim);
        }
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v.clone() * c.clone())).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Poly::one(self.dim);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Evaluation in the coefficient type; exact for rational points.
    pub fn eval(&self, point: &[C]) -> C {
        assert_eq!(point.len(), self.dim, "point length must equal dimension");
        self.terms.iter().fold(C::zero(), |acc, (e, c)| acc + c.clone() * e.eval(point))
    }

    /// Monomial-by-monomial evaluation in binary64.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.dim, "point length must equal dimension");
        self.terms.iter().map(|(e, c)| c.as_f64() * e.eval(point)).sum()
    }

    /// Coefficients with respect to `basis`, i.e. `c` with `p = cᵀ v_m`.
    pub fn coeff_vector(&self, basis: &MonomialBasis) -> Result<Vec<C>> {
        if basis.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: self.dim,
            });
        }
        if let Some(deg) = self.total_degree() {
            if deg > basis.degree() {
                return Err(Error::DegreeOverflow {
                    degree: deg,
                    bound: basis.degree(),
                });
            }
        }
        let mut v = vec![C::zero(); basis.len()];
        for (e, c) in &self.terms {
            let i = basis.index_of(e).expect("exponent within basis degree");
            v[i] = c.clone();
        }
        Ok(v)
    }

    /// Inverse of [`Poly::coeff_vector`].
    pub fn from_coeff_vector(basis: &MonomialBasis, coeffs: &[C]) -> Self {
        assert_eq!(coeffs.len(), basis.len());
        let mut p = Poly::zero(basis.dim());
        for (e, c) in basis.exponents().iter().zip(coeffs) {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    /// Maximum absolute coefficient, as binary64.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.as_f64().abs()).fold(0.0, f64::max)
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    pub fn to_f64(&self) -> Poly<f64> {
        self.map_coeffs(|c| c.as_f64())
    }
}

impl Poly<BigRational> {
    /// Exact rational image of a binary64 polynomial.
    pub fn from_f64_poly(p: &Poly<f64>) -> Self {
        p.map_coeffs(|c| BigRational::from_float(*c).expect("finite coefficient"))
    }

    /// Convert into another scalar type through the rational embedding.
    pub fn cast<D: Scalar>(&self) -> Poly<D> {
        self.map_coeffs(D::from_rational)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl<C: Scalar> $trait<&Poly<C>> for &Poly<C> {
            type Output = Poly<C>;
            fn $method(self, rhs: &Poly<C>) -> Poly<C> {
                self.$try(rhs).expect("polynomial dimensions must agree")
            }
        }
        impl<C: Scalar> $trait<Poly<C>> for Poly<C> {
            type Output = Poly<C>;
            fn $method(self, rhs: Poly<C>) -> Poly<C> {
                (&self).$method(&rhs)
            }
        }
        impl<C: Scalar> $trait<&Poly<C>> for Poly<C> {
            type Output = Poly<C>;
            fn $method(self, rhs: &Poly<C>) -> Poly<C> {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl<C: Scalar> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }
}

impl<C: Scalar> Neg for Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        -&self
    }
}

impl<C: Scalar> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c < &C::zero();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if e.is_zero() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{e}")?;
            } else {
                write!(f, "{mag}*{e}")?;
            }
        }
        Ok(())
    }
}

impl<C: Scalar> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[d={}]({})", self.dim, self)
    }
}
