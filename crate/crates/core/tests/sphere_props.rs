mod common;

use common::unit_vector;
use hidden_basis::seeding::rng_from_seed;
use hidden_basis::sphere::{class_distance, exp_map, orthonormal_complement, sample_tangent_sphere, sign_distance};
use hidden_basis::DVector;
use proptest::prelude::*;

proptest! {
    #[test]
    fn exp_map_stays_on_sphere_at_geodesic_distance(p in unit_vector(5), sigma in 1e-3f64..1.5, seed in any::<u64>()) {
        let x = sample_tangent_sphere(&p, sigma, &mut rng_from_seed(seed)).unwrap();
        prop_assert!((x.direction().norm() - sigma).abs() <= 1e-12);
        prop_assert!(p.dot(x.direction()).abs() <= 1e-12);
        let q = exp_map(&p, &x).unwrap();
        prop_assert!((q.norm() - 1.0).abs() <= 1e-12);
        let angle = p.dot(&q).clamp(-1.0, 1.0).acos();
        prop_assert!((angle - sigma).abs() <= 1e-7);
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal(a in unit_vector(6), b in unit_vector(6)) {
        prop_assume!(a.dot(&b).abs() < 0.99);
        let comp = orthonormal_complement(&[a.as_vector().clone(), b.as_vector().clone()], 6).unwrap();
        prop_assert_eq!(comp.len(), 4);
        for (i, x) in comp.iter().enumerate() {
            prop_assert!(x.dot(&a).abs() <= 1e-12);
            prop_assert!(x.dot(&b).abs() <= 1e-12);
            for (j, y) in comp.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((x.dot(y) - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn class_distance_ignores_signs(u in unit_vector(4), flips in prop::collection::vec(any::<bool>(), 4)) {
        let basis: Vec<DVector<f64>> = (0..4).map(|i| DVector::from_fn(4, |k, _| if k == i { 1.0 } else { 0.0 })).collect();
        let v = DVector::from_fn(4, |k, _| if flips[k] { -u[k] } else { u[k] });
        prop_assert!(class_distance(&u, &v, &basis).unwrap() <= 1e-15);
        prop_assert!(class_distance(&u, &v, &basis).unwrap() <= sign_distance(&u, &v) + 1e-15);
    }

    #[test]
    fn sign_distance_is_a_pseudometric(u in unit_vector(3), v in unit_vector(3), w in unit_vector(3)) {
        let neg = -u.as_vector();
        prop_assert!(sign_distance(&u, &neg) <= 1e-15);
        prop_assert!((sign_distance(&u, &v) - sign_distance(&v, &u)).abs() <= 1e-15);
        prop_assert!(sign_distance(&u, &w) <= sign_distance(&u, &v) + sign_distance(&v, &w) + 1e-12);
        prop_assert!(sign_distance(&u, &v) <= 2f64.sqrt() + 1e-12);
    }
}
