use serde::{Deserialize, Serialize};

use crate::cones::{product_for, SemialgebraicDescription};
use crate::error::{Error, Result};
use crate::poly::PolynomialJson;
use crate::scalar::Scalar;
use crate::sos::{verify_sos, DecompositionJson, SosDecomposition, SosReport};
use crate::Polynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    /// Quadratic module: only `e = 0` and unit selectors.
    Module,
    /// Preordering: any `e ∈ {0,1}^s`.
    Preordering,
}

/// SOS multiplier `σ_e` of the product `f^e`.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplier {
    pub selector: Vec<u8>,
    pub sos: SosDecomposition,
}

/// `g = Σ_e σ_e f^e` with `σ_e` SOS.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    kind: CertificateKind,
    target: Polynomial,
    description: SemialgebraicDescription,
    degree: u32,
    multipliers: Vec<Multiplier>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub exact: bool,
    /// Largest absolute coefficient of `Σ σ_e f^e − g`.
    pub max_coeff_error: f64,
    pub multiplier_reports: Vec<SosReport>,
}

impl Certificate {
    pub fn new(
        kind: CertificateKind,
        target: Polynomial,
        description: SemialgebraicDescription,
        degree: u32,
        multipliers: Vec<Multiplier>,
    ) -> Self {
        Certificate {
            kind,
            target,
            description,
            degree,
            multipliers,
        }
    }

    pub fn kind(&self) -> CertificateKind {
        self.kind
    }

    pub fn target(&self) -> &Polynomial {
        &self.target
    }

    pub fn description(&self) -> &SemialgebraicDescription {
        &self.description
    }

    /// Degree bound `2t` of the search.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn multipliers(&self) -> &[Multiplier] {
        &self.multipliers
    }

    pub fn multiplier(&self, selector: &[u8]) -> Option<&SosDecomposition> {
        self.multipliers.iter().find(|m| m.selector == selector).map(|m| &m.sos)
    }

    /// Same multipliers, read in a different cone.
    pub fn with_kind(mut self, kind: CertificateKind) -> Self {
        self.kind = kind;
        self
    }

    /// Mutable access, for tests that tamper with a certificate.
    pub fn multipliers_mut(&mut self) -> &mut Vec<Multiplier> {
        &mut self.multipliers
    }

    fn check_selectors(&self) -> Result<()> {
        for m in &self.multipliers {
            let ones = m.selector.iter().filter(|&&b| b == 1).count();
            if self.kind == CertificateKind::Module && ones > 1 {
                return Err(Error::MalformedSelector {
                    selector: m.selector.clone(),
                });
            }
            if m.sos.dim() != self.description.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.description.dim(),
                    found: m.sos.dim(),
                });
            }
        }
        Ok(())
    }

    /// `Σ_e σ_e f^e`, exact.
    pub fn expand(&self) -> Polynomial {
        self.multipliers.iter().fold(Polynomial::zero(self.target.dim()), |acc, m| {
            let f = product_for(&self.description, &m.selector).unwrap_or_else(|_| Polynomial::zero(self.target.dim()));
            acc + &m.sos.expand() * &f
        })
    }

    /// Full rational expansion against the target.
    pub fn verify(&self) -> Result<CertificateReport> {
        self.check_selectors()?;
        for m in &self.multipliers {
            product_for(&self.description, &m.selector)?;
        }
        let diff = &self.expand() - &self.target;
        Ok(CertificateReport {
            exact: diff.is_zero(),
            max_coeff_error: diff.terms().map(|(_, c)| c.as_f64().abs()).fold(0.0, f64::max),
            multiplier_reports: self.multipliers.iter().map(|m| verify_sos(&m.sos.expand(), &m.sos)).collect(),
        })
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            kind: self.kind,
            degree: self.degree,
            d: self.description.dim(),
            target: self.target.to_json(),
            generators: self.description.generators().iter().map(Polynomial::to_json).collect(),
            multipliers: self
                .multipliers
                .iter()
                .map(|m| MultiplierJson {
                    e: m.selector.clone(),
                    sos: m.sos.to_json(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &CertificateJson) -> Result<Self> {
        let gens = j.generators.iter().map(Polynomial::from_json).collect::<Result<Vec<_>>>()?;
        let description = SemialgebraicDescription::new(j.d, gens)?;
        let target = Polynomial::from_json(&j.target)?;
        if target.dim() != j.d {
            return Err(Error::DimensionMismatch {
                expected: j.d,
                found: target.dim(),
            });
        }
        let multipliers = j
            .multipliers
            .iter()
            .map(|m| {
                Ok(Multiplier {
                    selector: m.e.clone(),
                    sos: SosDecomposition::from_json(&m.sos, j.d)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Certificate::new(j.kind, target, description, j.degree, multipliers))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: CertificateJson = serde_json::from_str(s).map_err(|e| Error::Parse(format!("certificate JSON: {e}")))?;
        Self::from_json(&j)
    }
}

/// `{"kind", "degree", "multipliers": [{"e", "sos"}]}` plus the dimension,
/// target and generators needed to re-check the certificate on its own.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub kind: CertificateKind,
    pub degree: u32,
    pub d: usize,
    pub target: PolynomialJson,
    pub generators: Vec<PolynomialJson>,
    pub multipliers: Vec<MultiplierJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierJson {
    pub e: Vec<u8>,
    pub sos: DecompositionJson,
}
