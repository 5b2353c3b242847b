use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{Exponent, Poly};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational};

/// Wire form: `{"d": 2, "terms": [{"c": "-3/1", "e": [2, 2]}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub d: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub c: String,
    pub e: Vec<u32>,
}

impl From<&Poly<BigRational>> for PolynomialJson {
    fn from(p: &Poly<BigRational>) -> Self {
        PolynomialJson {
            d: p.dim(),
            terms: p
                .terms()
                .map(|(e, c)| TermJson {
                    c: format_rational(c),
                    e: e.entries().to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<&PolynomialJson> for Poly<BigRational> {
    type Error = Error;

    fn try_from(j: &PolynomialJson) -> Result<Self> {
        if j.d == 0 {
            return Err(Error::Parse("polynomial dimension must be positive".into()));
        }
        let terms = j
            .terms
            .iter()
            .map(|t| {
                if t.e.len() != j.d {
                    return Err(Error::Parse(format!(
                        "exponent {:?} has length {}, expected {}",
                        t.e,
                        t.e.len(),
                        j.d
                    )));
                }
                Ok((Exponent::new(t.e.clone()), parse_rational(&t.c)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Poly::from_terms(j.d, terms)
    }
}

impl Poly<BigRational> {
    pub fn to_json(&self) -> PolynomialJson {
        PolynomialJson::from(self)
    }

    pub fn from_json(j: &PolynomialJson) -> Result<Self> {
        Self::try_from(j)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: PolynomialJson = serde_json::from_str(s).map_err(|e| Error::Parse(format!("polynomial JSON: {e}")))?;
        Self::try_from(&j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_validation() {
        let p = Poly::parse(2, "1/2 - 3x^2y^2 + y").unwrap();
        let s = serde_json::to_string(&p.to_json()).unwrap();
        assert_eq!(Poly::from_json_str(&s).unwrap(), p);

        let bad = r#"{"d": 2, "terms": [{"c": "1/1", "e": [1]}]}"#;
        assert!(Poly::from_json_str(bad).is_err());
        let merged = r#"{"d": 1, "terms": [{"c": "1", "e": [1]}, {"c": "-1/1", "e": [1]}]}"#;
        assert!(Poly::from_json_str(merged).unwrap().is_zero());
    }
}
