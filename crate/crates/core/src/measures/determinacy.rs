//! Finite-window determinacy heuristics.
//!
//! Divergence of `Σ s_{2n}^{-1/(2n)}` cannot be decided from finitely many
//! moments. The classification here only records whether the observed terms
//! decay no faster than `c/n`; the raw terms are always returned.

use serde::{Deserialize, Serialize};

use super::AtomicMeasure;
use crate::cones::SemialgebraicDescription;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::Polynomial;

/// Least-squares slope of `log t_n` against `log n` at or above which the
/// window counts as divergence-consistent.
pub const SLOPE_THRESHOLD: f64 = -1.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    DivergenceConsistent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlemanReport {
    /// `t_n = s_{2n}^{-1/(2n)}` for `n = 1..N`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `None` when the window has fewer than two terms.
    pub log_log_slope: Option<f64>,
    pub classification: Classification,
}

/// Runs the heuristic on `s_2, s_4, …, s_{2N}`.
pub fn carleman_diagnostic(s: &[f64]) -> Result<CarlemanReport> {
    let logs = s
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > 0.0 && v.is_finite() {
                Ok(v.ln())
            } else {
                Err(Error::NonpositiveMoment {
                    index: 2 * (i + 1),
                    value: v,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    carleman_diagnostic_log(&logs)
}

/// As [`carleman_diagnostic`] from `log s_{2n}`, for moments beyond binary64 range.
pub fn carleman_diagnostic_log(log_s: &[f64]) -> Result<CarlemanReport> {
    if let Some(i) = log_s.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonpositiveMoment {
            index: 2 * (i + 1),
            value: log_s[i].exp(),
        });
    }
    let log_terms: Vec<f64> = log_s.iter().enumerate().map(|(i, l)| -l / (2.0 * (i + 1) as f64)).collect();
    let terms: Vec<f64> = log_terms.iter().map(|l| l.exp()).collect();
    let partial_sums = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let log_log_slope = slope(&log_terms);
    let classification = match log_log_slope {
        Some(b) if b >= SLOPE_THRESHOLD => Classification::DivergenceConsistent,
        _ => Classification::Inconclusive,
    };
    Ok(CarlemanReport {
        terms,
        partial_sums,
        log_log_slope,
        classification,
    })
}

/// Ordinary least-squares slope of `v_n` against `log n`.
fn slope(v: &[f64]) -> Option<f64> {
    if v.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = (1..=v.len()).map(|n| (n as f64).ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = v.iter().sum::<f64>() / v.len() as f64;
    let sxy: f64 = xs.iter().zip(v).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    DeterminateConsistent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub coordinate: usize,
    /// All even moments vanish, so the marginal is `δ_0` or zero.
    pub point_mass_at_zero: bool,
    pub carleman: Option<CarlemanReport>,
    pub classification: Classification,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PetersenReport {
    pub marginals: Vec<MarginalReport>,
    pub verdict: Verdict,
}

/// Marginal reduction over explicit even-moment lists, one per coordinate.
pub fn petersen_from_marginals(lists: &[Vec<f64>]) -> Result<PetersenReport> {
    let marginals = lists
        .iter()
        .enumerate()
        .map(|(j, s)| {
            if s.iter().all(|&v| v == 0.0) {
                return Ok(MarginalReport {
                    coordinate: j,
                    point_mass_at_zero: true,
                    carleman: None,
                    classification: Classification::DivergenceConsistent,
                });
            }
            let r = carleman_diagnostic(s)?;
            Ok(MarginalReport {
                coordinate: j,
                point_mass_at_zero: false,
                classification: r.classification,
                carleman: Some(r),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = if marginals.iter().all(|m| m.classification == Classification::DivergenceConsistent) {
        Verdict::DeterminateConsistent
    } else {
        Verdict::Inconclusive
    };
    Ok(PetersenReport { marginals, verdict })
}

/// Projects `μ` onto each coordinate and runs the Carleman heuristic on the
/// marginal even moments `s_2, …, s_{2N}`.
pub fn petersen_marginals<S: Scalar>(mu: &AtomicMeasure<S>, n: usize) -> Result<PetersenReport> {
    let lists = (0..mu.dim()).map(|j| mu.marginal_even_moments(j, n)).collect::<Result<Vec<_>>>()?;
    petersen_from_marginals(&lists)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `|L_μ(p)|`.
    pub lhs: f64,
    /// `L_μ(1)`.
    pub mass: f64,
    /// Largest `|p|` over the atoms and the sample points inside `K`.
    pub sup_estimate: f64,
    /// `L_μ(1) · sup_estimate`.
    pub rhs: f64,
    pub samples_used: usize,
    pub holds: bool,
}

/// Checks `|L_μ(p)| ≤ L_μ(1) · max |p|` with the maximum taken over the atoms
/// and the samples that lie in `K`. Every atom must lie in `K`.
pub fn supnorm_bound_check<S: Scalar>(
    mu: &AtomicMeasure<S>,
    k: &SemialgebraicDescription,
    p: &Polynomial,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<BoundReport> {
    if p.dim() != mu.dim() || k.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: if p.dim() != mu.dim() { p.dim() } else { k.dim() },
        });
    }
    for (index, a) in mu.atoms().iter().enumerate() {
        let point: Vec<f64> = a.point.iter().map(Scalar::as_f64).collect();
        if let Some((generator, value)) = k.violation(&point, tol)? {
            return Err(Error::AtomOutsideK {
                index,
                point,
                generator,
                value,
            });
        }
    }
    let ps = p.map_coeffs(|c| S::from_rational(c));
    let integral = mu
        .atoms()
        .iter()
        .fold(S::zero(), |acc, a| acc + a.weight.clone() * ps.eval(&a.point));
    let lhs = integral.as_f64().abs();
    let mass = mu.mass().as_f64();
    let mut sup_estimate = mu.atoms().iter().map(|a| ps.eval(&a.point).as_f64().abs()).fold(0.0, f64::max);
    let mut samples_used = 0;
    for s in samples {
        if k.contains_point_tol(s, tol)? {
            samples_used += 1;
            sup_estimate = sup_estimate.max(p.eval_f64(s).abs());
        }
    }
    let rhs = mass * sup_estimate;
    Ok(BoundReport {
        lhs,
        mass,
        sup_estimate,
        rhs,
        samples_used,
        holds: lhs <= rhs + tol * rhs.max(1.0),
    })
}
