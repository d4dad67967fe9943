//! Brute-force references: central differences, exhaustive fixed-point
//! enumeration and grid scans for the maxima of `|F|`.

use nalgebra::{DMatrix, DVector, Rotation3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bef::ExactBef;
use crate::error::{Error, Result};
use crate::iteration::fixed_point_for_support;
use crate::sphere::UnitVector;

pub const MAX_ENUMERATION_M: usize = 12;
pub const MIN_GRID_RESOLUTION: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteDiffSpec {
    /// Central-difference step, in `[1e-8, 1e-3]`.
    pub step: f64,
}

impl Default for FiniteDiffSpec {
    fn default() -> Self {
        Self { step: 1e-5 }
    }
}

/// `(f(u + h e_i) - f(u - h e_i)) / 2h` for every coordinate.
pub fn finite_diff_grad<F>(f: F, u: &DVector<f64>, spec: &FiniteDiffSpec) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let h = spec.step;
    if !(1e-8..=1e-3).contains(&h) {
        return Err(Error::InvalidParameter(format!("finite-difference step {h} outside [1e-8, 1e-3]")));
    }
    let mut x = u.clone();
    let mut out = DVector::zeros(u.len());
    for i in 0..u.len() {
        let xi = u[i];
        x[i] = xi + h;
        let fp = f(&x);
        x[i] = xi - h;
        let fm = f(&x);
        x[i] = xi;
        out[i] = (fp - fm) / (2.0 * h);
    }
    Ok(out)
}

/// The fixed point for every non-empty support of the hidden coordinates:
/// `2^m - 1` entries, supports in increasing bitmask order.
pub fn enumerate_fixed_points(bef: &ExactBef, tol: f64) -> Result<Vec<(Vec<usize>, UnitVector)>> {
    let m = bef.m();
    if m > MAX_ENUMERATION_M {
        return Err(Error::TooLarge(format!("enumeration over 2^{m} supports (limit m <= {MAX_ENUMERATION_M})")));
    }
    (1u32..1 << m)
        .into_par_iter()
        .map(|mask| {
            let support: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
            let v = fixed_point_for_support(bef, &support, tol)?;
            Ok((support, v))
        })
        .collect()
}

/// Outcome of a grid scan of `|F|` on the sphere.
#[derive(Clone, Debug)]
pub struct GridScan {
    /// Grid local maxima of `|F|`.
    pub maxima: Vec<UnitVector>,
    /// Maxima farther than `spacing` from every `±Z_i`.
    pub unexplained: Vec<UnitVector>,
    /// Indices `i` with no maximum within `spacing` of `Z_i` or of `-Z_i`.
    pub missing: Vec<usize>,
    /// Geodesic tolerance used for the comparison (one grid cell).
    pub spacing: f64,
}

impl GridScan {
    pub fn is_clean(&self) -> bool {
        self.unexplained.is_empty() && self.missing.is_empty()
    }
}

fn angle(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    u.dot(v).clamp(-1.0, 1.0).acos()
}

/// Local maxima of `|F|` over a grid on `S^{d-1}`, `d ∈ {2, 3}`.
///
/// For `d = 2` the grid has `resolution` equally spaced angles and each
/// point is compared with its two neighbours. For `d = 3` it is a
/// latitude-longitude grid with `resolution` rows and `2 resolution` columns
/// around a fixed generic pole, with 8 neighbours per point. Ties are broken
/// by grid index so plateaus yield at most one maximum.
pub fn grid_maxima_scan(bef: &ExactBef, resolution: usize) -> Result<GridScan> {
    if resolution < MIN_GRID_RESOLUTION {
        return Err(Error::InvalidParameter(format!("resolution must be >= {MIN_GRID_RESOLUTION}, got {resolution}")));
    }
    let absf = |u: &DVector<f64>| bef.eval_f(u).map(f64::abs);
    let (maxima, spacing) = match bef.dim() {
        2 => {
            let n = resolution;
            let point = |k: usize| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                DVector::from_vec(vec![t.cos(), t.sin()])
            };
            let vals = (0..n).into_par_iter().map(|k| absf(&point(k))).collect::<Result<Vec<f64>>>()?;
            let beats = |a: usize, b: usize| vals[a] > vals[b] || (vals[a] == vals[b] && a < b);
            let maxima: Vec<UnitVector> = (0..n)
                .filter(|&k| beats(k, (k + n - 1) % n) && beats(k, (k + 1) % n))
                .map(|k| UnitVector::new_unchecked(point(k)))
                .collect();
            (maxima, std::f64::consts::TAU / n as f64)
        }
        3 => {
            let rows = resolution;
            let cols = 2 * resolution;
            // A rotation that keeps the grid poles away from special points.
            let frame: DMatrix<f64> = {
                let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(Vector3::new(0.31, -0.77, 0.55)), 0.93);
                DMatrix::from_fn(3, 3, |i, j| r.matrix()[(i, j)])
            };
            let point = |i: usize, j: usize| {
                let th = std::f64::consts::PI * (i as f64 + 0.5) / rows as f64;
                let ph = std::f64::consts::TAU * j as f64 / cols as f64;
                let local = DVector::from_vec(vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
                &frame * local
            };
            let vals = (0..rows * cols)
                .into_par_iter()
                .map(|k| absf(&point(k / cols, k % cols)))
                .collect::<Result<Vec<f64>>>()?;
            let beats = |a: usize, b: usize| vals[a] > vals[b] || (vals[a] == vals[b] && a < b);
            let maxima: Vec<UnitVector> = (0..rows * cols)
                .into_par_iter()
                .filter(|&k| {
                    let (i, j) = (k / cols, k % cols);
                    for di in [-1i64, 0, 1] {
                        let ii = i as i64 + di;
                        if ii < 0 || ii >= rows as i64 {
                            continue;
                        }
                        for dj in [-1i64, 0, 1] {
                            if di == 0 && dj == 0 {
                                continue;
                            }
                            let jj = (j as i64 + dj).rem_euclid(cols as i64) as usize;
                            if !beats(k, ii as usize * cols + jj) {
                                return false;
                            }
                        }
                    }
                    true
                })
                .map(|k| UnitVector::new_unchecked(point(k / cols, k % cols)))
                .collect();
            (maxima, std::f64::consts::SQRT_2 * std::f64::consts::PI / rows as f64)
        }
        _ => return Err(Error::Unsupported("grid scans outside d = 2, 3")),
    };
    let targets: Vec<DVector<f64>> = bef.basis().iter().flat_map(|z| [z.clone(), -z]).collect();
    let unexplained = maxima
        .iter()
        .filter(|u| targets.iter().all(|z| angle(u.as_vector(), z) > spacing))
        .cloned()
        .collect();
    let missing = (0..bef.m())
        .filter(|&i| {
            [&targets[2 * i], &targets[2 * i + 1]]
                .iter()
                .any(|z| maxima.iter().all(|u| angle(u.as_vector(), z) > spacing))
        })
        .collect();
    Ok(GridScan { maxima, unexplained, missing, spacing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contrast::ContrastFunction;
    use crate::iteration::gi_step;
    use crate::oracle::GradientOracle;
    use crate::seeding::rng_from_seed;
    use crate::sphere::class_distance;
    use crate::synth::random_orthogonal;
    use rand::Rng;

    fn quartic(w: f64) -> ContrastFunction {
        ContrastFunction::monomial(w, 4.0).unwrap()
    }

    #[test]
    fn finite_difference_examples() {
        let u = DVector::from_vec(vec![1.0, 2.0]);
        let g = finite_diff_grad(|v| v.norm_squared(), &u, &FiniteDiffSpec::default()).unwrap();
        assert!((g - DVector::from_vec(vec![2.0, 4.0])).norm() <= 1e-9);
        let z = finite_diff_grad(|_| 3.0, &u, &FiniteDiffSpec::default()).unwrap();
        assert_eq!(z, DVector::zeros(2));
        assert!(finite_diff_grad(|_| 0.0, &u, &FiniteDiffSpec { step: 1e-2 }).is_err());
        assert!(finite_diff_grad(|_| 0.0, &u, &FiniteDiffSpec { step: 1e-9 }).is_err());

        let bef = ExactBef::canonical(3, vec![quartic(1.0), quartic(2.0), quartic(0.5)]).unwrap();
        let u = DVector::from_vec(vec![0.3, -0.4, 0.5]);
        let fd = finite_diff_grad(|v| bef.eval_f(v).unwrap(), &u, &FiniteDiffSpec::default()).unwrap();
        let g = bef.eval_grad(&u).unwrap();
        assert!((&g - fd).norm() <= 1e-5 * g.norm());
    }

    #[test]
    fn enumeration_examples() {
        let one = ExactBef::canonical(2, vec![quartic(1.0)]).unwrap();
        let pts = enumerate_fixed_points(&one, 1e-12).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].1, UnitVector::canonical(2, 0));

        let two = ExactBef::canonical(2, vec![quartic(1.0); 2]).unwrap();
        let pts = enumerate_fixed_points(&two, 1e-12).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0].0, vec![0]);
        assert_eq!(pts[1].0, vec![1]);
        assert_eq!(pts[2].0, vec![0, 1]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_close!(pts[2].1[0], h, 1e-10);
        assert_close!(pts[2].1[1], h, 1e-10);

        let big = ExactBef::canonical(13, vec![quartic(1.0); 13]).unwrap();
        assert!(matches!(enumerate_fixed_points(&big, 1e-12), Err(Error::TooLarge(_))));
    }

    #[test]
    fn enumerated_points_are_fixed_and_distinct() {
        let mut rng = rng_from_seed(11);
        let tol = 1e-12;
        for m in 1..=5 {
            let q = random_orthogonal(m + 1, &mut rng);
            let basis = (0..m).map(|i| q.column(i).into_owned()).collect();
            let contrasts = (0..m).map(|_| quartic(0.5 + rng.random::<f64>() * 2.0)).collect();
            let bef = ExactBef::new(basis, contrasts).unwrap();
            let pts = enumerate_fixed_points(&bef, tol).unwrap();
            assert_eq!(pts.len(), (1 << m) - 1);
            for (_, v) in &pts {
                let next = gi_step(&bef, v).unwrap();
                let r = (next.as_vector() - v.as_vector()).norm().min((next.as_vector() + v.as_vector()).norm());
                assert!(r <= 1e-10, "{r}");
                assert!(bef.gradient(v).unwrap().norm() > 0.0);
            }
            for a in 0..pts.len() {
                for b in a + 1..pts.len() {
                    assert!(class_distance(&pts[a].1, &pts[b].1, bef.basis()).unwrap() >= 0.05);
                }
            }
        }
    }

    #[test]
    fn grid_scan_d2() {
        let bef = ExactBef::canonical(2, vec![quartic(1.0); 2]).unwrap();
        let scan = grid_maxima_scan(&bef, 10_000).unwrap();
        assert_eq!(scan.maxima.len(), 4);
        assert!(scan.is_clean());

        let single = ExactBef::canonical(2, vec![quartic(1.0)]).unwrap();
        let scan = grid_maxima_scan(&single, 360).unwrap();
        assert_eq!(scan.maxima.len(), 2);
        assert!(scan.is_clean());

        let mixed = ExactBef::canonical(2, vec![quartic(1.0), quartic(3.0)]).unwrap();
        let scan = grid_maxima_scan(&mixed, 1000).unwrap();
        assert_eq!(scan.maxima.len(), 4);
        assert!(scan.is_clean());

        assert!(grid_maxima_scan(&bef, 49).is_err());
    }

    #[test]
    fn grid_scan_d3() {
        let cubic = ContrastFunction::monomial(2.0, 3.0).unwrap();
        let bef = ExactBef::canonical(3, vec![quartic(1.0), cubic, quartic(-0.5)]).unwrap();
        let scan = grid_maxima_scan(&bef, 120).unwrap();
        assert!(scan.is_clean(), "{:?} {:?}", scan.unexplained, scan.missing);
        assert_eq!(scan.maxima.len(), 6);
    }
}
