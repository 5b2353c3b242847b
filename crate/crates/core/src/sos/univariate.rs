//! Nonnegative univariate polynomials as a sum of two squares.
//!
//! `p = lc · S² · T` where `S` collects the exact square part of the
//! square-free factorization and `T` has no real roots. Writing
//! `T = |Q(x)|²` with `Q` monic over the roots of `T` in the upper half plane
//! gives `p = (√lc · S · Re Q)² + (√lc · S · Im Q)²`.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::poly_roots;
use crate::poly::Exponent;
use crate::scalar::{rationalize, Scalar};
use crate::Polynomial;

const ROOT_DENOMINATOR_CAP: u64 = 1_000_000;
const FLOAT_DENOMINATOR_CAP: u64 = 1 << 40;

/// `p = q² + r²`, with the exactness and coefficient error of the expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSquares {
    pub q: Polynomial,
    pub r: Polynomial,
    pub exact: bool,
    pub max_coeff_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSquaresOptions {
    /// Accepted coefficient error relative to `max(1, max |p_α|)`.
    pub tol: f64,
}

impl Default for TwoSquaresOptions {
    fn default() -> Self {
        TwoSquaresOptions { tol: 1e-6 }
    }
}

type Upoly = Vec<BigRational>;

fn trim(mut a: Upoly) -> Upoly {
    while a.last().is_some_and(Zero::is_zero) {
        a.pop();
    }
    a
}

fn deg(a: &Upoly) -> usize {
    a.len().saturating_sub(1)
}

fn to_upoly(p: &Polynomial) -> Upoly {
    let n = p.total_degree().map_or(0, |d| d as usize + 1);
    let mut c = vec![BigRational::zero(); n];
    for (e, v) in p.terms() {
        c[e.entries()[0] as usize] = v.clone();
    }
    trim(c)
}

fn from_upoly(c: &[BigRational]) -> Polynomial {
    Polynomial::from_terms(1, c.iter().enumerate().map(|(k, v)| (Exponent::new(vec![k as u32]), v.clone()))).expect("univariate terms")
}

fn umul(a: &Upoly, b: &Upoly) -> Upoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    trim(c)
}

/// Quotient and remainder.
fn udivrem(a: &Upoly, b: &Upoly) -> (Upoly, Upoly) {
    let mut r = a.clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lb = b.last().expect("nonzero divisor");
    let mut q = vec![BigRational::zero(); r.len() - b.len() + 1];
    while !r.is_empty() && r.len() >= b.len() {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / lb;
        for (k, v) in b.iter().enumerate() {
            r[shift + k] -= &f * v;
        }
        q[shift] = f;
        r.pop();
        r = trim(r);
    }
    (trim(q), r)
}

fn monic(a: Upoly) -> Upoly {
    match a.last().cloned() {
        Some(l) => a.into_iter().map(|v| v / &l).collect(),
        None => a,
    }
}

fn ugcd(a: &Upoly, b: &Upoly) -> Upoly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let (_, r) = udivrem(&a, &b);
        a = b;
        b = r;
    }
    monic(a)
}

fn deriv(a: &Upoly) -> Upoly {
    trim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| v * BigRational::from_integer(k.into()))
            .collect(),
    )
}

fn ueval(a: &Upoly, x: &BigRational) -> BigRational {
    a.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Yun's algorithm: monic square-free `P_i` with `a = lc · Π P_i^i`.
fn square_free(a: &Upoly) -> Vec<(Upoly, u32)> {
    let mut out = Vec::new();
    let a = monic(a.clone());
    let da = deriv(&a);
    let b = ugcd(&a, &da);
    let mut c = udivrem(&a, &b).0;
    let mut d = trim(
        udivrem(&da, &b)
            .0
            .iter()
            .zip(deriv(&c).iter().chain(std::iter::repeat(&BigRational::zero())))
            .map(|(x, y)| x - y)
            .collect(),
    );
    let mut i = 1;
    while deg(&c) > 0 {
        let g = ugcd(&c, &d);
        if deg(&g) > 0 {
            out.push((g.clone(), i));
        }
        c = udivrem(&c, &g).0;
        let y = udivrem(&d, &g).0;
        let dc = deriv(&c);
        let n = y.len().max(dc.len());
        d = trim(
            (0..n)
                .map(|k| y.get(k).cloned().unwrap_or_default() - dc.get(k).cloned().unwrap_or_default())
                .collect(),
        );
        i += 1;
    }
    out
}

/// Number of distinct real roots of a square-free polynomial (Sturm).
fn real_root_count(a: &Upoly) -> usize {
    let mut seq = vec![a.clone(), deriv(a)];
    while let Some(last) = seq.last() {
        if last.is_empty() {
            seq.pop();
            break;
        }
        let prev = &seq[seq.len() - 2];
        let (_, r) = udivrem(prev, last);
        if r.is_empty() {
            break;
        }
        seq.push(r.into_iter().map(|v| -v).collect());
    }
    let changes = |signs: Vec<i8>| signs.windows(2).filter(|w| w[0] != w[1]).count();
    let at_pos: Vec<i8> = seq.iter().map(|s| if s.last().unwrap().is_positive() { 1 } else { -1 }).collect();
    let at_neg: Vec<i8> = seq
        .iter()
        .map(|s| {
            let pos = s.last().unwrap().is_positive();
            let odd = deg(s) % 2 == 1;
            if pos != odd {
                1
            } else {
                -1
            }
        })
        .collect();
    changes(at_neg) - changes(at_pos)
}

/// A rational point where `a < 0`, searched around the real roots of `odd`.
fn negative_point(a: &Upoly, odd: &Upoly) -> Option<BigRational> {
    let mut cands: Vec<f64> = Vec::new();
    if a.last().is_some_and(Signed::is_negative) || deg(a) % 2 == 1 {
        cands.extend([1e3, -1e3, 1e6, -1e6]);
    }
    let roots: Vec<f64> = poly_roots(&odd.iter().map(Scalar::as_f64).collect::<Vec<_>>())
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect();
    for &r in &roots {
        for k in 1..40 {
            let h = (1.0 + r.abs()) * 2f64.powi(-k);
            cands.push(r + h);
            cands.push(r - h);
        }
    }
    cands.into_iter().find_map(|x| {
        let q = BigRational::from_float(x)?;
        ueval(a, &q).is_negative().then_some(q)
    })
}

fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| BigRational::new(n, d))
}

/// Writes a nonnegative univariate `p` as `q² + r²`.
pub fn two_squares_univariate(p: &Polynomial, opts: &TwoSquaresOptions) -> Result<TwoSquares> {
    if p.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: p.dim(),
        });
    }
    let a = to_upoly(p);
    if a.is_empty() {
        return Ok(TwoSquares {
            q: Polynomial::zero(1),
            r: Polynomial::zero(1),
            exact: true,
            max_coeff_error: 0.0,
        });
    }
    let factors = square_free(&a);
    let mut odd: Upoly = vec![BigRational::one()];
    let mut s: Upoly = vec![BigRational::one()];
    for (f, i) in &factors {
        if i % 2 == 1 {
            odd = umul(&odd, f);
        }
        for _ in 0..i / 2 {
            s = umul(&s, f);
        }
    }
    let lc = a.last().unwrap().clone();
    if lc.is_negative() || real_root_count(&odd) > 0 {
        let x = negative_point(&a, &odd).ok_or(Error::NotNonnegative {
            point: f64::NAN,
            value: f64::NAN,
        })?;
        return Err(Error::NotNonnegative {
            point: x.as_f64(),
            value: ueval(&a, &x).as_f64(),
        });
    }

    // Q = Π (x − z) over the upper-half-plane roots of each odd factor
    let mut qc: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
    for (f, i) in &factors {
        if i % 2 == 0 {
            continue;
        }
        let roots = poly_roots(&f.iter().map(Scalar::as_f64).collect::<Vec<_>>());
        let mut upper: Vec<Complex64> = roots.into_iter().filter(|z| z.im > 0.0).collect();
        upper.truncate(deg(f) / 2);
        for z in upper {
            let mut next = vec![Complex64::new(0.0, 0.0); qc.len() + 1];
            for (k, c) in qc.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * z;
            }
            qc = next;
        }
    }
    let re: Vec<f64> = qc.iter().map(|c| c.re).collect();
    let im: Vec<f64> = qc.iter().map(|c| c.im).collect();

    let candidates = [ROOT_DENOMINATOR_CAP, FLOAT_DENOMINATOR_CAP];
    let sqrt_lc = rational_sqrt(&lc);
    let mut best: Option<TwoSquares> = None;
    for cap in candidates {
        let snap = |v: &[f64]| -> Option<Upoly> { v.iter().map(|x| rationalize(*x, cap)).collect() };
        let (Some(qa), Some(qb)) = (snap(&re), snap(&im)) else {
            continue;
        };
        let scale = match &sqrt_lc {
            Some(r) => r.clone(),
            None => match rationalize(lc.as_f64().sqrt(), FLOAT_DENOMINATOR_CAP) {
                Some(r) => r,
                None => continue,
            },
        };
        let sq: Upoly = s.iter().map(|c| c * &scale).collect();
        let mut q = from_upoly(&umul(&sq, &trim(qa)));
        let mut r = from_upoly(&umul(&sq, &trim(qb)));
        if r.terms().next_back().is_some_and(|(_, c)| c.is_negative()) {
            r = -r;
        }
        if q.terms().next_back().is_some_and(|(_, c)| c.is_negative()) {
            q = -q;
        }
        let diff = &(&q.square() + &r.square()) - p;
        let err = diff.max_abs_coeff();
        let cand = TwoSquares {
            q,
            r,
            exact: diff.is_zero(),
            max_coeff_error: err,
        };
        if cand.exact {
            return Ok(cand);
        }
        if best.as_ref().is_none_or(|b| err < b.max_coeff_error) {
            best = Some(cand);
        }
    }
    let best = best.ok_or(Error::NonFinite)?;
    let bound = opts.tol * p.max_abs_coeff().max(1.0);
    if best.max_coeff_error > bound {
        return Err(Error::ToleranceExceeded {
            error: best.max_coeff_error,
            tol: bound,
        });
    }
    Ok(best)
}
