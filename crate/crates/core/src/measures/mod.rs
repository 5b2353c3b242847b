//! Finitely atomic measures and heuristic determinacy diagnostics.

mod determinacy;

pub use determinacy::{
    carleman_diagnostic, carleman_diagnostic_log, petersen_from_marginals, petersen_marginals, supnorm_bound_check, BoundReport,
    CarlemanReport, Classification, MarginalReport, PetersenReport, Verdict, SLOPE_THRESHOLD,
};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moment::TruncatedMomentSequence;
use crate::poly::Exponent;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom<S> {
    pub point: Vec<S>,
    pub weight: S,
}

/// `μ = Σ w_i δ_{x_i}` with positive weights and distinct points.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure<S> {
    dim: usize,
    atoms: Vec<Atom<S>>,
}

impl<S: Scalar> AtomicMeasure<S> {
    pub fn new(dim: usize, atoms: Vec<Atom<S>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("dimension must be positive".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.point.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.point.len(),
                });
            }
            if a.weight <= S::zero() {
                return Err(Error::InvalidMeasure(format!("atom {i} has nonpositive weight {}", a.weight)));
            }
            if atoms[..i].iter().any(|b| b.point == a.point) {
                return Err(Error::InvalidMeasure(format!("atom {i} repeats an earlier point")));
            }
        }
        Ok(AtomicMeasure { dim, atoms })
    }

    pub fn empty(dim: usize) -> Self {
        AtomicMeasure { dim, atoms: Vec::new() }
    }

    pub fn dirac(point: Vec<S>, weight: S) -> Result<Self> {
        Self::new(point.len(), vec![Atom { point, weight }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom<S>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass(&self) -> S {
        self.atoms.iter().fold(S::zero(), |m, a| m + a.weight.clone())
    }

    pub fn is_zero_mass(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `y_α = Σ w_i x_i^α` for `|α| ≤ degree`; exact over rationals.
    pub fn moments(&self, degree: u32) -> TruncatedMomentSequence<S> {
        TruncatedMomentSequence::from_fn(self.dim, degree, |e: &Exponent| {
            self.atoms
                .iter()
                .fold(S::zero(), |acc, a| acc + a.weight.clone() * e.eval(&a.point))
        })
    }

    /// `μ + ν`, merging coincident atoms.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut atoms = self.atoms.clone();
        for b in &other.atoms {
            match atoms.iter_mut().find(|a| a.point == b.point) {
                Some(a) => a.weight = a.weight.clone() + b.weight.clone(),
                None => atoms.push(b.clone()),
            }
        }
        Ok(AtomicMeasure { dim: self.dim, atoms })
    }

    /// Push-forward under `x ↦ x_j`, merging atoms that project together.
    pub fn marginal(&self, j: usize) -> Result<AtomicMeasure<S>> {
        if j >= self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: j + 1,
            });
        }
        let mut out = AtomicMeasure::empty(1);
        for a in &self.atoms {
            let single = AtomicMeasure {
                dim: 1,
                atoms: vec![Atom {
                    point: vec![a.point[j].clone()],
                    weight: a.weight.clone(),
                }],
            };
            out = out.try_add(&single)?;
        }
        Ok(out)
    }

    /// Even moments `s_2, s_4, …, s_{2N}` of the `j`-th marginal, in binary64.
    pub fn marginal_even_moments(&self, j: usize, n: usize) -> Result<Vec<f64>> {
        let m = self.marginal(j)?;
        Ok((1..=n)
            .map(|k| {
                m.atoms
                    .iter()
                    .map(|a| a.weight.as_f64() * a.point[0].as_f64().powi(2 * k as i32))
                    .sum()
            })
            .collect())
    }

    pub fn to_f64(&self) -> AtomicMeasure<f64> {
        AtomicMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    point: a.point.iter().map(Scalar::as_f64).collect(),
                    weight: a.weight.as_f64(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> MeasureJson {
        MeasureJson {
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomJson {
                    x: a.point.iter().map(Scalar::as_f64).collect(),
                    w: a.weight.as_f64(),
                })
                .collect(),
        }
    }
}

impl AtomicMeasure<f64> {
    /// Exact rational copy of the binary64 data.
    pub fn to_rational(&self) -> Result<AtomicMeasure<BigRational>> {
        let conv = |x: f64| BigRational::from_float(x).ok_or(Error::NonFinite);
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                Ok(Atom {
                    point: a.point.iter().map(|&x| conv(x)).collect::<Result<_>>()?,
                    weight: conv(a.weight)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(AtomicMeasure { dim: self.dim, atoms })
    }

    /// `dim` is needed for the empty measure and checked otherwise.
    pub fn from_json(j: &MeasureJson, dim: Option<usize>) -> Result<Self> {
        let dim = match (dim, j.atoms.first()) {
            (Some(d), _) => d,
            (None, Some(a)) => a.x.len(),
            (None, None) => return Err(Error::InvalidMeasure("empty measure needs an explicit dimension".into())),
        };
        if j.atoms.iter().any(|a| !a.w.is_finite() || a.x.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite);
        }
        Self::new(
            dim,
            j.atoms
                .iter()
                .map(|a| Atom {
                    point: a.x.clone(),
                    weight: a.w,
                })
                .collect(),
        )
    }

    pub fn from_json_str(s: &str, dim: Option<usize>) -> Result<Self> {
        let j: MeasureJson = serde_json::from_str(s).map_err(|e| Error::Parse(format!("measure JSON: {e}")))?;
        Self::from_json(&j, dim)
    }
}

/// `{"atoms": [{"x": [...], "w": 0.5}, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub atoms: Vec<AtomJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomJson {
    pub x: Vec<f64>,
    pub w: f64,
}
