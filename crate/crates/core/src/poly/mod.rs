//! Sparse multivariate polynomials over exact rationals (or any [`Scalar`]),
//! graded-lex monomial bases and coefficient vectors.
//!
//! [`Scalar`]: crate::scalar::Scalar

mod basis;
mod exponent;
mod json;
mod parse;
mod polynomial;

pub use basis::{binomial, MonomialBasis};
pub use exponent::Exponent;
pub use json::{PolynomialJson, TermJson};
pub use parse::parse_polynomial;
pub use polynomial::Poly;

/// Ordered list of all monomials of degree `<= m` in `d` variables.
pub fn monomial_basis(d: usize, m: u32) -> MonomialBasis {
    MonomialBasis::new(d, m)
}
