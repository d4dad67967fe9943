mod common;

use common::{rotated_monomial_bef, unit_vector};
use hidden_basis::test_oracles::{finite_diff_grad, FiniteDiffSpec};
use hidden_basis::{BefSpec, ContrastFunction, ExactBef};
use proptest::prelude::*;

proptest! {
    #[test]
    fn gradient_forms_agree(u in unit_vector(5), w in prop::collection::vec(0.2f64..3.0, 5), seed in any::<u64>(), power in 3.0f64..7.0) {
        let bef = rotated_monomial_bef(5, &w, power, seed);
        let direct = bef.eval_grad(&u).unwrap();
        let h_form = bef.eval_grad_h_form(&u).unwrap();
        prop_assert!((&direct - h_form).norm() <= 1e-12 * direct.norm().max(1.0));
    }

    #[test]
    fn gradient_matches_finite_differences(u in unit_vector(4), w in prop::collection::vec(0.5f64..2.0, 3), seed in any::<u64>()) {
        let bef = rotated_monomial_bef(4, &w, 4.0, seed);
        let u = u.as_vector() * 0.9;
        let g = bef.eval_grad(&u).unwrap();
        let scale = bef.coords(&u).unwrap().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        prop_assume!(scale > 1e-2);
        let fd = finite_diff_grad(|v| bef.eval_f(v).unwrap(), &u, &FiniteDiffSpec { step: 1e-5 * scale }).unwrap();
        prop_assert!((&g - fd).norm() <= 1e-6 * g.norm().max(1e-6));
    }

    #[test]
    fn value_is_invariant_under_coordinate_sign_flips(u in unit_vector(3), flip in 0usize..3) {
        let c = ContrastFunction::monomial(1.5, 4.0).unwrap();
        let bef = ExactBef::canonical(3, vec![c.clone(), c.clone(), c]).unwrap();
        let mut v = u.as_vector().clone();
        v[flip] = -v[flip];
        prop_assert!((bef.eval_f(&u).unwrap() - bef.eval_f(&v).unwrap()).abs() <= 1e-15);
    }
}

#[test]
fn json_spec_builds_the_same_function() {
    let spec = BefSpec::from_json(
        r#"{"dimension": 3, "basis": "canonical",
            "contrasts": [{"kind": "monomial", "weight": 2.0, "power": 4.0}, {"kind": "cosh", "weight": 1.0}]}"#,
    )
    .unwrap();
    let bef = spec.build().unwrap();
    let direct = ExactBef::canonical(3, vec![ContrastFunction::monomial(2.0, 4.0).unwrap(), ContrastFunction::cosh(1.0).unwrap()]).unwrap();
    let u = hidden_basis::DVector::from_vec(vec![0.6, 0.0, 0.8]);
    assert_eq!(bef.eval_f(&u).unwrap(), direct.eval_f(&u).unwrap());
    assert_eq!(bef.m(), 2);
}
