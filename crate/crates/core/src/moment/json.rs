use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::TruncatedMomentSequence;
use crate::error::{Error, Result};
use crate::poly::Exponent;
use crate::scalar::{format_rational, parse_rational, Scalar};

/// `{"d": 1, "degree": 4, "moments": [{"alpha": [0], "y": "1/1"}, ...]}`.
/// Exact sequences carry `"num/den"` strings, binary64 sequences numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceJson {
    pub d: usize,
    pub degree: u32,
    pub moments: Vec<MomentEntryJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEntryJson {
    pub alpha: Vec<u32>,
    pub y: MomentValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MomentValue {
    Exact(String),
    Float(f64),
}

impl SequenceJson {
    /// True when every value is an exact rational string.
    pub fn is_exact(&self) -> bool {
        self.moments.iter().all(|m| matches!(m.y, MomentValue::Exact(_)))
    }

    fn pairs<S>(&self, conv: impl Fn(&MomentValue) -> Result<S>) -> Result<Vec<(Exponent, S)>> {
        if self.d == 0 {
            return Err(Error::Parse("sequence dimension must be positive".into()));
        }
        self.moments
            .iter()
            .map(|m| {
                if m.alpha.len() != self.d {
                    return Err(Error::Parse(format!(
                        "moment index {:?} has length {}, expected {}",
                        m.alpha,
                        m.alpha.len(),
                        self.d
                    )));
                }
                Ok((Exponent::new(m.alpha.clone()), conv(&m.y)?))
            })
            .collect()
    }

    /// Exact reading; binary64 entries are converted exactly.
    pub fn to_rational(&self) -> Result<TruncatedMomentSequence<BigRational>> {
        let pairs = self.pairs(|v| match v {
            MomentValue::Exact(s) => parse_rational(s),
            MomentValue::Float(x) => BigRational::from_float(*x).ok_or(Error::NonFinite),
        })?;
        TruncatedMomentSequence::from_pairs(self.d, self.degree, pairs)
    }

    pub fn to_f64(&self) -> Result<TruncatedMomentSequence<f64>> {
        let pairs = self.pairs(|v| match v {
            MomentValue::Exact(s) => Ok(parse_rational(s)?.as_f64()),
            MomentValue::Float(x) if x.is_finite() => Ok(*x),
            MomentValue::Float(_) => Err(Error::NonFinite),
        })?;
        TruncatedMomentSequence::from_pairs(self.d, self.degree, pairs)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("sequence JSON: {e}")))
    }
}

impl From<&TruncatedMomentSequence<BigRational>> for SequenceJson {
    fn from(y: &TruncatedMomentSequence<BigRational>) -> Self {
        SequenceJson {
            d: y.dim(),
            degree: y.degree(),
            moments: y
                .iter()
                .map(|(e, v)| MomentEntryJson {
                    alpha: e.entries().to_vec(),
                    y: MomentValue::Exact(format_rational(v)),
                })
                .collect(),
        }
    }
}

impl From<&TruncatedMomentSequence<f64>> for SequenceJson {
    fn from(y: &TruncatedMomentSequence<f64>) -> Self {
        SequenceJson {
            d: y.dim(),
            degree: y.degree(),
            moments: y
                .iter()
                .map(|(e, v)| MomentEntryJson {
                    alpha: e.entries().to_vec(),
                    y: MomentValue::Float(*v),
                })
                .collect(),
        }
    }
}
