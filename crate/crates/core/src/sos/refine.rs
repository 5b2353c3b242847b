//! Gauss–Newton correction of a floating-point decomposition.
//!
//! The weights stay fixed and the square coefficients move so that
//! `Σ λ_k h_k²` approaches `p`. Residuals are formed exactly, so each accepted
//! step is a genuine improvement of the verified error.

use std::collections::HashMap;

use num_rational::BigRational;

use super::{verify_sos, SosDecomposition};
use crate::linalg::{min_norm_lstsq, Mat};
use crate::poly::Exponent;
use crate::scalar::{rationalize, Scalar};
use crate::Polynomial;

const STEPS: usize = 6;
const DENOMINATOR_CAP: u64 = 1 << 40;

/// Returns a decomposition with smaller coefficient error, if one is found.
pub(super) fn refine(p: &Polynomial, dec: &SosDecomposition) -> Option<SosDecomposition> {
    let start = verify_sos(p, dec).max_coeff_error;
    if dec.is_empty() || start == 0.0 {
        return None;
    }
    let mut support: Vec<Exponent> = dec.squares().iter().flat_map(|h| h.terms().map(|(e, _)| e.clone())).collect();
    support.sort();
    support.dedup();
    let n = support.len();
    let weights: Vec<f64> = dec.weights().iter().map(Scalar::as_f64).collect();
    let mut coeffs: Vec<Vec<f64>> = dec
        .squares()
        .iter()
        .map(|h| support.iter().map(|e| h.coeff(e).as_f64()).collect())
        .collect();

    let mut rows: HashMap<Exponent, usize> = HashMap::new();
    for (e, _) in p.terms() {
        let next = rows.len();
        rows.entry(e.clone()).or_insert(next);
    }
    for a in &support {
        for b in &support {
            let next = rows.len();
            rows.entry(a.add(b)).or_insert(next);
        }
    }

    let build = |coeffs: &[Vec<f64>]| -> Option<SosDecomposition> {
        let squares = coeffs
            .iter()
            .map(|c| {
                let terms = support
                    .iter()
                    .zip(c)
                    .map(|(e, &v)| Some((e.clone(), rationalize(v, DENOMINATOR_CAP)?)));
                Polynomial::from_terms(p.dim(), terms.collect::<Option<Vec<(Exponent, BigRational)>>>()?).ok()
            })
            .collect::<Option<Vec<_>>>()?;
        SosDecomposition::new(p.dim(), dec.weights().to_vec(), squares).ok()
    };

    let mut best: Option<(f64, SosDecomposition)> = None;
    let mut err = start;
    let mut current = dec.clone();
    for _ in 0..STEPS {
        let diff = p - &current.expand();
        let mut r = vec![0.0; rows.len()];
        for (e, c) in diff.terms() {
            r[rows[e]] = c.as_f64();
        }
        // d(λ h²)/d h_i = 2 λ h_j at the row of α_i + α_j
        let mut jac = Mat::<f64>::zeros(rows.len(), coeffs.len() * n);
        for (k, c) in coeffs.iter().enumerate() {
            for (i, a) in support.iter().enumerate() {
                for (j, b) in support.iter().enumerate() {
                    jac[(rows[&a.add(b)], k * n + i)] += 2.0 * weights[k] * c[j];
                }
            }
        }
        let Some(delta) = min_norm_lstsq(&jac, &r, 1e-12).filter(|d| d.iter().all(|v| v.is_finite())) else {
            break;
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..8 {
            let trial: Vec<Vec<f64>> = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c.iter().enumerate().map(|(i, v)| v + t * delta[k * n + i]).collect())
                .collect();
            if let Some(cand) = build(&trial) {
                let e = verify_sos(p, &cand).max_coeff_error;
                if e < err {
                    err = e;
                    coeffs = trial;
                    current = cand.clone();
                    best = Some((e, cand));
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved || err == 0.0 {
            break;
        }
    }
    best.map(|(_, d)| d)
}
