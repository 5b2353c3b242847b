//! Degree-bounded positivity certificates, sums-of-squares decompositions and
//! truncated moment problems on basic closed semialgebraic sets.
//!
//! Every numerical answer is re-checked against exact rational arithmetic
//! before it is returned.

// NaN must fail every threshold test, so `!(x > t)` is written on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod cli;
pub mod cones;
pub mod error;
pub mod gns;
pub mod linalg;
pub mod measures;
pub mod moment;
pub mod poly;
pub mod scalar;
pub mod sos;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
/// Polynomial with exact rational coefficients.
pub type Polynomial = poly::Poly<Rational>;
/// Polynomial with binary64 coefficients.
pub type FloatPolynomial = poly::Poly<f64>;
