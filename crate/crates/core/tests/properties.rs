//! Cross-module invariants on random instances.

mod common;

use kmoment::cones::{preorder_products, SemialgebraicDescription};
use kmoment::gns::recover_measure;
use kmoment::linalg::is_psd_exact;
use kmoment::measures::AtomicMeasure;
use kmoment::moment::DEFAULT_RANK_TOL;
use kmoment::scalar::rat;
use kmoment::sos::{sos_decompose, verify_sos, SosDecomposition, SosOutcome};
use kmoment::{Polynomial, Rational};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn poly_strategy(d: usize, deg: u32) -> impl Strategy<Value = Polynomial> {
    any::<u64>().prop_map(move |s| common::random_poly(&mut ChaCha8Rng::seed_from_u64(s), d, deg))
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=60, 1i64..=9).prop_map(|(n, d)| rat(n, d))
}

fn measure_strategy(d: usize) -> impl Strategy<Value = AtomicMeasure<Rational>> {
    (any::<u64>(), 1usize..=4).prop_map(move |(s, k)| common::random_measure(&mut ChaCha8Rng::seed_from_u64(s), d, k, |_| true))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounded_element_identity(a in poly_strategy(1, 3), lam in positive_rational()) {
        let l = Polynomial::constant(1, lam.clone());
        let (plus, minus) = (&l + &a, &l - &a);
        let lhs = (&(&plus.square() * &minus) + &(&minus.square() * &plus)).scale(&(rat(1, 2) / &lam));
        prop_assert_eq!(lhs, &l.square() - &a.square());
    }

    #[test]
    fn subalgebra_identity(a in poly_strategy(2, 2), b in poly_strategy(2, 2), lam in positive_rational(), mu in positive_rational()) {
        let (l, m) = (Polynomial::constant(2, lam), Polynomial::constant(2, mu));
        let lhs = &(&l * &m).square() - &(&a * &b).square();
        let rhs = &(&m.square() * &(&l.square() - &a.square())) + &(&a.square() * &(&m.square() - &b.square()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn variety_identity(q in poly_strategy(2, 2), f in poly_strategy(2, 2)) {
        let one = Polynomial::one(2);
        let rhs = (&(&(&q + &one).square() * &f) + &(&(&q - &one).square() * &-&f)).scale(&rat(1, 4));
        prop_assert_eq!(&q * &f, rhs);
    }

    #[test]
    fn riesz_functional_of_a_measure_is_nonnegative_on_squares(mu in measure_strategy(2), h in poly_strategy(2, 2)) {
        let y = mu.moments(4);
        prop_assert!(y.riesz_apply(&h.square()).unwrap() >= rat(0, 1));
        prop_assert!(is_psd_exact(&y.moment_matrix(2).unwrap()));
    }

    #[test]
    fn localizing_matrices_of_box_measures_are_psd(mu in measure_strategy(2)) {
        let y = mu.moments(4);
        for g in SemialgebraicDescription::unit_box(2).generators() {
            prop_assert!(is_psd_exact(&y.localizing_matrix(g, 1).unwrap()));
        }
    }

    #[test]
    fn preorder_products_are_nonnegative_at_box_atoms(mu in measure_strategy(2)) {
        let k = SemialgebraicDescription::unit_box(2);
        for prod in preorder_products(&k).unwrap() {
            for a in mu.atoms() {
                prop_assert!(prod.product.eval(&a.point) >= rat(0, 1));
            }
        }
    }

    #[test]
    fn recovered_measures_reproduce_their_moments(mu in measure_strategy(1)) {
        let y = mu.moments(2 * (mu.len() as u32 + 1));
        let rec = recover_measure(&y, DEFAULT_RANK_TOL, 0).unwrap();
        prop_assert_eq!(rec.measure.len(), mu.len());
        let back = rec.measure.moments(y.degree());
        for (a, b) in y.values().iter().zip(back.values()) {
            prop_assert!((kmoment::Scalar::as_f64(a) - b).abs() <= 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_sums_of_squares_decompose(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_sos(&mut rng, 2, 2);
        match sos_decompose(&p, 1e-9, 0) {
            SosOutcome::Decomposed { decomposition, report } => {
                prop_assert!(report.max_coeff_error <= 1e-6);
                prop_assert_eq!(verify_sos(&p, &decomposition), report);
                let round = SosDecomposition::from_json(&decomposition.to_json(), 2).unwrap();
                prop_assert_eq!(round, decomposition);
            }
            other => prop_assert!(false, "{p}: {other:?}"),
        }
    }
}

#[test]
fn negated_sums_of_squares_are_refuted() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..6 {
        let p = -&(&common::random_sos(&mut rng, 2, 2) + &Polynomial::one(2));
        match sos_decompose(&p, 1e-8, 0) {
            SosOutcome::NotSos(w) => assert!(w.verify(&p)),
            other => panic!("{p}: {other:?}"),
        }
    }
}
