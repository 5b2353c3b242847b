use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::PolynomialJson;
use crate::scalar::{format_rational, parse_rational, Scalar};
use crate::Polynomial;

/// `Σ_k λ_k h_k²` with positive rational weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SosDecomposition {
    dim: usize,
    weights: Vec<BigRational>,
    squares: Vec<Polynomial>,
}

impl SosDecomposition {
    pub fn new(dim: usize, weights: Vec<BigRational>, squares: Vec<Polynomial>) -> Result<Self> {
        if weights.len() != squares.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                found: squares.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::Parse(format!("SOS weight {w} is not positive")));
        }
        if let Some(h) = squares.iter().find(|h| h.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: h.dim(),
            });
        }
        Ok(SosDecomposition { dim, weights, squares })
    }

    /// The zero SOS polynomial.
    pub fn zero(dim: usize) -> Self {
        SosDecomposition {
            dim,
            weights: Vec::new(),
            squares: Vec::new(),
        }
    }

    /// A single term `λ h²`.
    pub fn single(weight: BigRational, h: Polynomial) -> Result<Self> {
        let dim = h.dim();
        Self::new(dim, vec![weight], vec![h])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn squares(&self) -> &[Polynomial] {
        &self.squares
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigRational, &Polynomial)> {
        self.weights.iter().zip(&self.squares)
    }

    /// Exact expansion `Σ λ_k h_k²`.
    pub fn expand(&self) -> Polynomial {
        self.terms()
            .fold(Polynomial::zero(self.dim), |acc, (w, h)| acc + h.square().scale(w))
    }

    /// Largest degree of a square, or `None` when empty.
    pub fn max_square_degree(&self) -> Option<u32> {
        self.squares.iter().filter_map(Polynomial::total_degree).max()
    }

    pub fn to_json(&self) -> DecompositionJson {
        DecompositionJson {
            weights: self.weights.iter().map(format_rational).collect(),
            squares: self.squares.iter().map(Polynomial::to_json).collect(),
        }
    }

    /// `dim` is needed because an empty decomposition carries no polynomial.
    pub fn from_json(j: &DecompositionJson, dim: usize) -> Result<Self> {
        let weights = j.weights.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        let squares = j.squares.iter().map(Polynomial::from_json).collect::<Result<Vec<_>>>()?;
        Self::new(dim, weights, squares)
    }
}

/// `{"weights": ["num/den", ...], "squares": [Polynomial, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub weights: Vec<String>,
    pub squares: Vec<PolynomialJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SosReport {
    /// The expansion equals the target exactly.
    pub exact: bool,
    /// Largest absolute coefficient of `Σ λ_k h_k² − p`.
    pub max_coeff_error: f64,
    pub num_squares: usize,
}

/// Expands the decomposition exactly and compares it with `p`.
pub fn verify_sos(p: &Polynomial, dec: &SosDecomposition) -> SosReport {
    let diff = if dec.dim() == p.dim() {
        &dec.expand() - p
    } else {
        return SosReport {
            exact: false,
            max_coeff_error: f64::INFINITY,
            num_squares: dec.len(),
        };
    };
    SosReport {
        exact: diff.is_zero(),
        max_coeff_error: diff.terms().map(|(_, c)| c.abs().as_f64()).fold(0.0, f64::max),
        num_squares: dec.len(),
    }
}
