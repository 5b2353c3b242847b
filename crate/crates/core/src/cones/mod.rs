//! Basic closed semialgebraic sets `K(f) = {x : f_i(x) ≥ 0}` and the
//! generators of the quadratic module and preordering they define.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::PolynomialJson;
use crate::Polynomial;

/// Default slack for [`SemialgebraicDescription::contains_point`].
pub const MEMBERSHIP_TOL: f64 = 1e-12;
/// Largest generator count accepted by [`preorder_products`].
pub const MAX_PREORDER_GENERATORS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct SemialgebraicDescription {
    dim: usize,
    generators: Vec<Polynomial>,
}

impl SemialgebraicDescription {
    pub fn new(dim: usize, generators: Vec<Polynomial>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InconsistentDimensions("dimension must be positive".into()));
        }
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: g.dim(),
            });
        }
        Ok(SemialgebraicDescription { dim, generators })
    }

    /// `K = ℝ^d`.
    pub fn whole_space(dim: usize) -> Self {
        SemialgebraicDescription {
            dim,
            generators: Vec::new(),
        }
    }

    /// Unit ball `1 − Σ x_j² ≥ 0`.
    pub fn unit_ball(dim: usize) -> Self {
        let r2 = (0..dim).fold(Polynomial::zero(dim), |acc, j| acc + Polynomial::var(dim, j).square());
        SemialgebraicDescription {
            dim,
            generators: vec![&Polynomial::one(dim) - &r2],
        }
    }

    /// Box `[-1, 1]^d` as `1 − x_j² ≥ 0`.
    pub fn unit_box(dim: usize) -> Self {
        SemialgebraicDescription {
            dim,
            generators: (0..dim)
                .map(|j| &Polynomial::one(dim) - &Polynomial::var(dim, j).square())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// `f_i(pt) ≥ −1e-12` for every generator.
    pub fn contains_point(&self, pt: &[f64]) -> Result<bool> {
        self.contains_point_tol(pt, MEMBERSHIP_TOL)
    }

    pub fn contains_point_tol(&self, pt: &[f64], tol: f64) -> Result<bool> {
        Ok(self.violation(pt, tol)?.is_none())
    }

    /// First generator with `f_i(pt) < −tol`, and its value.
    pub fn violation(&self, pt: &[f64], tol: f64) -> Result<Option<(usize, f64)>> {
        if pt.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: pt.len(),
            });
        }
        Ok(self
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| (i, g.eval_f64(pt)))
            .find(|(_, v)| !(*v >= -tol)))
    }

    pub fn to_json(&self) -> DescriptionJson {
        DescriptionJson {
            d: self.dim,
            generators: self.generators.iter().map(Polynomial::to_json).collect(),
        }
    }

    pub fn from_json(j: &DescriptionJson) -> Result<Self> {
        let gens = j.generators.iter().map(Polynomial::from_json).collect::<Result<Vec<_>>>()?;
        Self::new(j.d, gens)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: DescriptionJson = serde_json::from_str(s).map_err(|e| Error::Parse(format!("description JSON: {e}")))?;
        Self::from_json(&j)
    }
}

/// `{"d": 2, "generators": [Polynomial, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptionJson {
    pub d: usize,
    pub generators: Vec<PolynomialJson>,
}

/// `f₁^{e₁} ⋯ f_s^{e_s}` for `e ∈ {0,1}^s`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorProduct {
    pub selector: Vec<u8>,
    pub product: Polynomial,
}

impl GeneratorProduct {
    /// Number of selected generators `|e|`.
    pub fn order(&self) -> usize {
        self.selector.iter().filter(|&&b| b == 1).count()
    }
}

/// Selector `k` of the `2^s` products, with `e_i` the `i`-th bit of `k`.
pub fn selector(s: usize, k: usize) -> Vec<u8> {
    (0..s).map(|i| ((k >> i) & 1) as u8).collect()
}

/// `Π f_i^{e_i}`; an invalid selector is reported as [`Error::MalformedSelector`].
pub fn product_for(k: &SemialgebraicDescription, e: &[u8]) -> Result<Polynomial> {
    if e.len() != k.num_generators() || e.iter().any(|&b| b > 1) {
        return Err(Error::MalformedSelector { selector: e.to_vec() });
    }
    Ok(k.generators
        .iter()
        .zip(e)
        .filter(|(_, &b)| b == 1)
        .fold(Polynomial::one(k.dim), |acc, (g, _)| &acc * g))
}

/// All `2^s` products in binary counting order of the selector (`e₁` is the
/// lowest bit), so `f = (x, 1 − x)` gives `[1, x, 1 − x, x − x²]`.
pub fn preorder_products(k: &SemialgebraicDescription) -> Result<Vec<GeneratorProduct>> {
    let s = k.num_generators();
    if s > MAX_PREORDER_GENERATORS {
        return Err(Error::TooManyGenerators {
            count: s,
            limit: MAX_PREORDER_GENERATORS,
        });
    }
    let mut out: Vec<GeneratorProduct> = Vec::with_capacity(1 << s);
    out.push(GeneratorProduct {
        selector: vec![0; s],
        product: Polynomial::one(k.dim),
    });
    // each product extends the one without its highest selected generator
    for idx in 1usize..(1 << s) {
        let top = usize::BITS as usize - 1 - idx.leading_zeros() as usize;
        let rest = idx & !(1 << top);
        let product = &out[rest].product * &k.generators[top];
        out.push(GeneratorProduct {
            selector: selector(s, idx),
            product,
        });
    }
    Ok(out)
}

/// `[1, f₁, …, f_s]`.
pub fn module_generators(k: &SemialgebraicDescription) -> Vec<Polynomial> {
    std::iter::once(Polynomial::one(k.dim))
        .chain(k.generators.iter().cloned())
        .collect()
}

/// Selectors `0, e₁, …, e_s` matching [`module_generators`].
pub fn module_selectors(s: usize) -> Vec<Vec<u8>> {
    std::iter::once(vec![0; s])
        .chain((0..s).map(|i| {
            let mut e = vec![0; s];
            e[i] = 1;
            e
        }))
        .collect()
}

/// The real variety of `g₁, …, g_m` as `K(g₁, −g₁, …, g_m, −g_m)`.
pub fn variety_description(dim: usize, gens: &[Polynomial]) -> Result<SemialgebraicDescription> {
    let mut out = Vec::with_capacity(2 * gens.len());
    for g in gens {
        out.push(g.clone());
        out.push(-g.clone());
    }
    SemialgebraicDescription::new(dim, out)
}

/// Radical inverse of `k` in base `b`.
fn radical_inverse(mut k: u64, b: u64) -> f64 {
    let (mut inv, mut f) = (0.0, 1.0 / b as f64);
    while k > 0 {
        inv += (k % b) as f64 * f;
        k /= b;
        f /= b as f64;
    }
    inv
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Point `k` of the Halton sequence mapped to `[-r, r]^d`.
pub fn halton_point(k: u64, d: usize, r: f64) -> Vec<f64> {
    (0..d)
        .map(|j| {
            let base = PRIMES.get(j).copied().unwrap_or(2 + 2 * j as u64 + 1);
            r * (2.0 * radical_inverse(k + 1, base) - 1.0)
        })
        .collect()
}

/// Sampled surrogate for `Pos(K)`: low-discrepancy points of `[-r, r]^d`
/// that lie in `K`, plus any user points in `K`.
#[derive(Clone, Debug)]
pub struct PositivityOracle {
    description: SemialgebraicDescription,
    points: Vec<Vec<f64>>,
    tol: f64,
}

impl PositivityOracle {
    /// Keeps the first `count` Halton points of `[-radius, radius]^d` in `K`,
    /// scanning at most `64 · count` candidates.
    pub fn new(k: &SemialgebraicDescription, count: usize, radius: f64, tol: f64) -> Self {
        let mut points = Vec::with_capacity(count);
        let mut idx = 0u64;
        while points.len() < count && idx < 64 * count as u64 {
            let pt = halton_point(idx, k.dim, radius);
            if k.contains_point_tol(&pt, 0.0).unwrap_or(false) {
                points.push(pt);
            }
            idx += 1;
        }
        PositivityOracle {
            description: k.clone(),
            points,
            tol,
        }
    }

    /// Adds `pt` when it lies in `K`; returns whether it was kept.
    pub fn add_point(&mut self, pt: Vec<f64>) -> bool {
        let inside = self.description.contains_point_tol(&pt, 0.0).unwrap_or(false);
        if inside {
            self.points.push(pt);
        }
        inside
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn description(&self) -> &SemialgebraicDescription {
        &self.description
    }

    /// Smallest sampled value of `p` and the point where it occurs.
    pub fn min_value(&self, p: &Polynomial) -> Option<(f64, &[f64])> {
        self.points
            .iter()
            .map(|x| (p.eval_f64(x), x.as_slice()))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// `p(x) ≥ −tol` at every sample.
    pub fn is_nonnegative(&self, p: &Polynomial) -> bool {
        self.min_value(p).is_none_or(|(v, _)| v >= -self.tol)
    }
}
