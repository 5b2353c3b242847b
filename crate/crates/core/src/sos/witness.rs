use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue;
use crate::moment::{SequenceJson, TruncatedMomentSequence};
use crate::scalar::{rationalize, Scalar};
use crate::Polynomial;

/// Denominator cap for the rounded witness moments.
const WITNESS_DENOMINATOR_CAP: u64 = 1_000_000_000_000;

/// Normalized moment vector separating `p` from the SOS cone:
/// `L_y(1) = 1`, `L_y(p) ≤ −ε` and `M_m(y) ⪰ ε I`.
#[derive(Clone, Debug, PartialEq)]
pub struct NotSosWitness {
    pub moments: TruncatedMomentSequence<BigRational>,
    pub order: u32,
    pub epsilon: f64,
    /// `L_y(p)`, exact.
    pub riesz_value: BigRational,
}

/// Outcome of re-checking a witness from scratch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub normalized: bool,
    pub riesz_value: f64,
    pub min_eigenvalue: f64,
    pub epsilon: f64,
    pub valid: bool,
}

impl NotSosWitness {
    /// Rounds a numerical moment vector, normalizes `y₀ = 1` and measures the
    /// margin. Returns `None` when the rounded vector does not separate.
    pub fn from_moments(p: &Polynomial, order: u32, raw: &TruncatedMomentSequence<f64>) -> Option<Self> {
        let y0 = *raw.values().first()?;
        if !(y0 > 0.0) {
            return None;
        }
        let mut vals = Vec::with_capacity(raw.values().len());
        for v in raw.values() {
            vals.push(rationalize(v / y0, WITNESS_DENOMINATOR_CAP)?);
        }
        vals[0] = BigRational::one();
        let moments = TruncatedMomentSequence::new(raw.dim(), raw.degree(), vals).ok()?;
        let riesz_value = moments.riesz_apply(p).ok()?;
        let lmin = min_eigenvalue(&moments.to_f64().moment_matrix(order).ok()?).ok()?;
        let margin = lmin.min(-riesz_value.as_f64());
        if !(margin > 0.0) {
            return None;
        }
        let w = NotSosWitness {
            moments,
            order,
            // half the observed margin absorbs eigensolver rounding on re-check
            epsilon: 0.5 * margin,
            riesz_value,
        };
        Some(w)
    }

    /// Recomputes all three conditions against `p`.
    pub fn check(&self, p: &Polynomial) -> WitnessCheck {
        let normalized = self.moments.mass().is_one();
        let riesz = self.moments.riesz_apply(p).unwrap_or_else(|_| BigRational::zero());
        let lmin = self
            .moments
            .to_f64()
            .moment_matrix(self.order)
            .and_then(|m| min_eigenvalue(&m))
            .unwrap_or(f64::NEG_INFINITY);
        let riesz_ok = self.moments.riesz_apply(p).is_ok() && riesz.as_f64() <= -self.epsilon;
        WitnessCheck {
            normalized,
            riesz_value: riesz.as_f64(),
            min_eigenvalue: lmin,
            epsilon: self.epsilon,
            valid: normalized && self.epsilon > 0.0 && riesz_ok && lmin >= self.epsilon,
        }
    }

    pub fn verify(&self, p: &Polynomial) -> bool {
        self.check(p).valid
    }

    pub fn to_json(&self) -> WitnessJson {
        WitnessJson {
            order: self.order,
            epsilon: self.epsilon,
            riesz_value: crate::scalar::format_rational(&self.riesz_value),
            moments: SequenceJson::from(&self.moments),
        }
    }

    pub fn from_json(j: &WitnessJson) -> Result<Self> {
        let moments = j.moments.to_rational()?;
        if moments.degree() < 2 * j.order {
            return Err(Error::InsufficientDegree {
                required: 2 * j.order,
                available: moments.degree(),
            });
        }
        Ok(NotSosWitness {
            moments,
            order: j.order,
            epsilon: j.epsilon,
            riesz_value: crate::scalar::parse_rational(&j.riesz_value)?,
        })
    }
}

/// Witness JSON: the moment sequence plus order, margin and `L_y(p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub order: u32,
    pub epsilon: f64,
    pub riesz_value: String,
    pub moments: SequenceJson,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_separates_negative_constant_shift() {
        // y = δ_0 scaled up on higher moments gives M ⪰ εI; p = x² − 1 has L(p) < 0
        let p = Polynomial::parse(1, "x^2 - 1").unwrap();
        let raw = TruncatedMomentSequence::univariate(vec![2.0, 0.0, 1.0]).unwrap();
        let w = NotSosWitness::from_moments(&p, 1, &raw).unwrap();
        assert!(w.verify(&p));
        assert_eq!(w.riesz_value, crate::scalar::rat(-1, 2));
        let back = NotSosWitness::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);
        // the same moments certify nothing about an SOS polynomial
        assert!(!w.verify(&Polynomial::parse(1, "x^2 + 1").unwrap()));
    }

    #[test]
    fn non_separating_moments_are_rejected() {
        let p = Polynomial::parse(1, "x^2 + 1").unwrap();
        let raw = TruncatedMomentSequence::univariate(vec![1.0, 0.0, 1.0]).unwrap();
        assert!(NotSosWitness::from_moments(&p, 1, &raw).is_none());
    }
}
