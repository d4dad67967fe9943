#![allow(dead_code)]

use hidden_basis::seeding::rng_from_seed;
use hidden_basis::synth::random_orthogonal;
use hidden_basis::{ContrastFunction, DVector, ExactBef, UnitVector};
use proptest::prelude::*;

pub fn unit_vector(d: usize) -> impl Strategy<Value = UnitVector> {
    prop::collection::vec(-1.0f64..1.0, d)
        .prop_filter("away from zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| UnitVector::normalize(DVector::from_vec(v)).unwrap())
}

/// A rotated BEF with `m` monomial contrasts of the given power.
pub fn rotated_monomial_bef(d: usize, weights: &[f64], power: f64, seed: u64) -> ExactBef {
    let q = random_orthogonal(d, &mut rng_from_seed(seed));
    let basis = (0..weights.len()).map(|i| q.column(i).into_owned()).collect();
    let contrasts = weights.iter().map(|&w| ContrastFunction::monomial(w, power).unwrap()).collect();
    ExactBef::new(basis, contrasts).unwrap()
}
