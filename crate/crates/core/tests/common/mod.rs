//! Random instance generators shared by the integration suites.

#![allow(dead_code)]

use kmoment::measures::{Atom, AtomicMeasure};
use kmoment::poly::monomial_basis;
use kmoment::scalar::rat;
use kmoment::{Polynomial, Rational};
use rand::Rng;

/// Rational in `[lo, hi]` with denominator `den`.
pub fn rational_in<R: Rng>(rng: &mut R, lo: i64, hi: i64, den: i64) -> Rational {
    rat(rng.gen_range(lo * den..=hi * den), den)
}

/// Polynomial of degree at most `deg` with coefficients `k/4` in `[-3, 3]`.
pub fn random_poly<R: Rng>(rng: &mut R, d: usize, deg: u32) -> Polynomial {
    let basis = monomial_basis(d, deg);
    let c: Vec<Rational> = (0..basis.len()).map(|_| rational_in(rng, -3, 3, 4)).collect();
    Polynomial::from_coeff_vector(&basis, &c)
}

/// `Σ λ_k h_k²` with one to three squares and `λ_k ∈ [1/4, 3]`.
pub fn random_sos<R: Rng>(rng: &mut R, d: usize, deg: u32) -> Polynomial {
    let mut p = Polynomial::zero(d);
    for _ in 0..rng.gen_range(1..=3) {
        let h = random_poly(rng, d, deg);
        let lam = rat(rng.gen_range(1..=12), 4);
        p = &p + &h.square().scale(&lam);
    }
    p
}

/// Up to `k` distinct atoms on the grid `(1/8) ℤ^d ∩ [-1, 1]^d` accepted by
/// `inside`, with weights `k/10` in `[0.1, 2]`.
pub fn random_measure<R: Rng>(rng: &mut R, d: usize, k: usize, inside: impl Fn(&[Rational]) -> bool) -> AtomicMeasure<Rational> {
    let mut atoms: Vec<Atom<Rational>> = Vec::new();
    let mut tries = 0;
    while atoms.len() < k && tries < 1000 {
        tries += 1;
        let point: Vec<Rational> = (0..d).map(|_| rat(rng.gen_range(-8..=8), 8)).collect();
        if !inside(&point) || atoms.iter().any(|a| a.point == point) {
            continue;
        }
        atoms.push(Atom {
            point,
            weight: rat(rng.gen_range(1..=20), 10),
        });
    }
    AtomicMeasure::new(d, atoms).expect("distinct atoms with positive weights")
}

pub fn in_unit_ball(x: &[Rational]) -> bool {
    let r2 = x.iter().fold(rat(0, 1), |acc, v| acc + v * v);
    r2 <= rat(1, 1)
}
