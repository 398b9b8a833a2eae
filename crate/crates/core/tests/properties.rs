mod common;

use std::sync::Arc;

use common::{field, Poly};
use hyperstress::bundles::{include_holonomic, iterated_jet, symmetrize_iterated, JetSection1};
use hyperstress::geometry::{
    basis_tuples, Body, CoefficientForm, ExteriorDerivative, FormField, FormValue, QuadratureRule,
};
use hyperstress::jetcore::jet_extension;
use hyperstress::nonholonomic::{
    lift_second_order, restrict_to_second_order, second_contraction_values, VariationalStress2,
};
use hyperstress::scenario::{generate_scenario, Scenario};
use hyperstress::stress::{verify_balance_order1, VariationalStress1};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jets_of_products_follow_leibniz(seed in any::<u64>(), x in point(2)) {
        let mut r = rng(seed);
        let (p, q) = (Poly::random(&mut r, 2, 3), Poly::random(&mut r, 2, 3));
        let jp = jet_extension(&field(std::slice::from_ref(&p)), &x, 2).unwrap();
        let jq = jet_extension(&field(std::slice::from_ref(&q)), &x, 2).unwrap();
        let jpq = jet_extension(&field(&[p.mul(&q)]), &x, 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let leibniz = jp.get(0, &[i, j]) * jq.get(0, &[])
                    + jp.get(0, &[i]) * jq.get(0, &[j])
                    + jp.get(0, &[j]) * jq.get(0, &[i])
                    + jp.get(0, &[]) * jq.get(0, &[i, j]);
                prop_assert!((jpq.get(0, &[i, j]) - leibniz).abs() <= 1e-11 * (1.0 + leibniz.abs()));
            }
        }
    }

    #[test]
    fn order1_balance_on_random_boxes(
        seed in any::<u64>(),
        n in 2usize..=3,
        lo in prop::collection::vec(-1.0f64..0.0, 3),
        len in prop::collection::vec(0.2f64..1.5, 3),
    ) {
        let mut r = rng(seed);
        let s = VariationalStress1::new(field(&Poly::random_vec(&mut r, n, 2, 1)), field(&Poly::random_vec(&mut r, n, 2, n))).unwrap();
        let w = field(&Poly::random_vec(&mut r, n, 2, 1));
        let lower = lo[..n].to_vec();
        let upper: Vec<f64> = lower.iter().zip(&len).map(|(a, l)| a + l).collect();
        let body = Body::new(hyperstress::geometry::Chart::unbounded(n), lower, upper, None).unwrap();
        let rep = verify_balance_order1(&s, &w, &body, &QuadratureRule::new(4).unwrap()).unwrap();
        prop_assert!(rep.relative <= 1e-10, "relative residual {}", rep.relative);
    }

    #[test]
    fn second_contraction_sees_only_the_antisymmetric_part(
        n in 2usize..=4,
        vals in prop::collection::vec(-2.0f64..2.0, 64),
    ) {
        let x3 = &vals[..n * n];
        let transposed: Vec<f64> = (0..n * n).map(|k| x3[(k % n) * n + k / n]).collect();
        let sym: Vec<f64> = x3.iter().zip(&transposed).map(|(a, b)| a + b).collect();
        let anti: Vec<f64> = x3.iter().zip(&transposed).map(|(a, b)| a - b).collect();
        prop_assert_eq!(second_contraction_values(&sym, n).unwrap()[0].max_abs(), 0.0);
        let full = &second_contraction_values(x3, n).unwrap()[0];
        let half = second_contraction_values(&anti, n).unwrap()[0].scale(0.5);
        prop_assert!(full.max_abs_diff(&half).unwrap() <= 1e-15);
        let neg = second_contraction_values(&transposed, n).unwrap()[0].scale(-1.0);
        prop_assert!(full.max_abs_diff(&neg).unwrap() <= 1e-15);
    }

    #[test]
    fn restrict_after_lift_is_identity(seed in any::<u64>(), lambda in 0.0f64..=1.0, x in point(3)) {
        let mut r = rng(seed);
        let n = 3;
        let s = VariationalStress2::new(
            field(&Poly::random_vec(&mut r, n, 2, 2)),
            field(&Poly::random_vec(&mut r, n, 2, 2 * n)),
            field(&Poly::random_vec(&mut r, n, 2, 2 * n * n)),
        ).unwrap();
        let back = restrict_to_second_order(&lift_second_order(&s, lambda).unwrap());
        let gap = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        prop_assert!(gap(s.s0.value(&x).unwrap(), back.s0.value(&x).unwrap()) <= 1e-14);
        prop_assert!(gap(s.s1.value(&x).unwrap(), back.s1.value(&x).unwrap()) <= 1e-14);
        prop_assert!(gap(s.s2().value(&x).unwrap(), back.s2().value(&x).unwrap()) <= 1e-14);
    }

    #[test]
    fn holonomic_inclusion_commutes(seed in any::<u64>(), x in point(2)) {
        let mut r = rng(seed);
        let u = field(&Poly::random_vec(&mut r, 2, 3, 2));
        let j2 = jet_extension(&u, &x, 2).unwrap();
        let iota = include_holonomic(&j2).unwrap();
        prop_assert!(iota.max_abs_diff(&iterated_jet(&JetSection1::holonomic(&u), &x).unwrap()).unwrap() <= 1e-13);
        prop_assert!(symmetrize_iterated(&iota).max_abs_diff(&j2).unwrap() == 0.0);
    }

    #[test]
    fn interior_product_twice_vanishes(
        coeffs in prop::collection::vec(-1.0f64..1.0, 10),
        v in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let mut form = FormValue::zero(4, 2).unwrap();
        for (t, c) in basis_tuples(4, 2).iter().zip(&coeffs) {
            form.add(t, *c).unwrap();
        }
        let twice = form.interior(&v).unwrap().interior(&v).unwrap();
        prop_assert!(twice.max_abs() <= 1e-15);
    }

    #[test]
    fn exterior_derivative_squares_to_zero(seed in any::<u64>(), x in point(3)) {
        let mut r = rng(seed);
        let tuples = basis_tuples(3, 1);
        let coeffs = field(&Poly::random_vec(&mut r, 3, 3, tuples.len()));
        let one_form: Arc<dyn FormField> = Arc::new(CoefficientForm::new(3, 1, tuples, coeffs).unwrap());
        let d1: Arc<dyn FormField> = Arc::new(ExteriorDerivative::new(one_form).unwrap());
        let dd = ExteriorDerivative::new(d1).unwrap();
        prop_assert!(dd.value_at(&x).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn generated_scenarios_round_trip(seed in any::<u64>(), n in 2usize..=3, degree in 0usize..=4) {
        let text = generate_scenario(seed, n, 1, degree).unwrap();
        let parsed = Scenario::parse(&text).unwrap();
        prop_assert_eq!(Scenario::parse(&parsed.to_toml().unwrap()).unwrap(), parsed);
    }
}
