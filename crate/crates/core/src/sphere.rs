//! Unit-sphere utilities.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};

pub const UNIT_TOL: f64 = 1e-9;
pub const TANGENT_TOL: f64 = 1e-9;
/// Residual norm below which a Gram-Schmidt candidate counts as dependent.
pub const RANK_TOL: f64 = 1e-8;

/// A point on `S^{d-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(DVector<f64>);

impl UnitVector {
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        let norm = coords.norm();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self(coords))
    }

    pub fn normalize(coords: DVector<f64>) -> Result<Self> {
        let norm = coords.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self(coords / norm))
    }

    /// Wraps without checking; callers guarantee unit norm.
    pub(crate) fn new_unchecked(coords: DVector<f64>) -> Self {
        Self(coords)
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(values))
    }

    pub fn canonical(dim: usize, i: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn negated(&self) -> Self {
        Self(-&self.0)
    }
}

impl std::ops::Deref for UnitVector {
    type Target = DVector<f64>;
    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

/// A vector in the tangent space `u^⊥` at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: UnitVector,
    direction: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: UnitVector, direction: DVector<f64>) -> Result<Self> {
        check_dim(base.dim(), direction.len())?;
        let inner = base.dot(&direction);
        if inner.abs() > TANGENT_TOL * direction.norm().max(f64::MIN_POSITIVE) && inner != 0.0 {
            return Err(Error::NotTangent { inner });
        }
        Ok(Self { base, direction })
    }

    pub fn base(&self) -> &UnitVector {
        &self.base
    }

    pub fn direction(&self) -> &DVector<f64> {
        &self.direction
    }
}

/// `exp_p(x) = p cos|x| + (x/|x|) sin|x|`, with `exp_p(0) = p`.
pub fn exp_map(p: &UnitVector, x: &TangentVector) -> Result<UnitVector> {
    check_dim(p.dim(), x.direction.len())?;
    let inner = p.dot(&x.direction);
    let r = x.direction.norm();
    if inner.abs() > TANGENT_TOL * r.max(f64::MIN_POSITIVE) && inner != 0.0 {
        return Err(Error::NotTangent { inner });
    }
    if r == 0.0 {
        return Ok(p.clone());
    }
    let out = p.as_vector() * r.cos() + &x.direction * (r.sin() / r);
    // Renormalize away rounding; the formula is unit norm in exact arithmetic.
    let n = out.norm();
    Ok(UnitVector(out / n))
}

/// Uniform sample from `σ S^{d-1} ∩ p^⊥`.
pub fn sample_tangent_sphere<R: Rng + ?Sized>(p: &UnitVector, sigma: f64, rng: &mut R) -> Result<TangentVector> {
    let d = p.dim();
    if d < 2 {
        return Err(Error::InvalidParameter("tangent sampling needs d >= 2".into()));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("jump radius must be positive, got {sigma}")));
    }
    loop {
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut t = &z - p.as_vector() * p.dot(&z);
        // Second projection pass keeps tangency at the 1e-16 level.
        let c = p.dot(&t);
        t.axpy(-c, p.as_vector(), 1.0);
        let n = t.norm();
        if n > 1e-8 {
            t *= sigma / n;
            return Ok(TangentVector { base: p.clone(), direction: t });
        }
    }
}

/// `Σ_{i ∈ S} <u, Z_i> Z_i`.
pub fn project_coords(u: &DVector<f64>, index_set: &[usize], basis: &[DVector<f64>]) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(u.len());
    for &i in index_set {
        let z = basis.get(i).ok_or(Error::IndexOutOfRange { index: i, dim: basis.len() })?;
        check_dim(u.len(), z.len())?;
        out.axpy(z.dot(u), z, 1.0);
    }
    Ok(out)
}

fn orthogonalize(v: &mut DVector<f64>, against: &[DVector<f64>]) {
    for _ in 0..2 {
        for q in against {
            let c = q.dot(v);
            v.axpy(-c, q, 1.0);
        }
    }
}

fn complete(accepted: &mut Vec<DVector<f64>>, dim: usize) -> Vec<DVector<f64>> {
    let start = accepted.len();
    for i in 0..dim {
        if accepted.len() == dim {
            break;
        }
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        orthogonalize(&mut v, accepted);
        let n = v.norm();
        if n > RANK_TOL.sqrt() {
            accepted.push(v / n);
        }
    }
    accepted.split_off(start)
}

/// Orthonormal basis of `span(vectors)^⊥` via modified Gram-Schmidt with a
/// reorthogonalization pass. Inputs must be linearly independent.
pub fn orthonormal_complement(vectors: &[DVector<f64>], dim: usize) -> Result<Vec<DVector<f64>>> {
    if vectors.len() > dim {
        return Err(Error::InvalidParameter(format!("{} vectors in dimension {dim}", vectors.len())));
    }
    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for (index, v) in vectors.iter().enumerate() {
        check_dim(dim, v.len())?;
        let scale = v.norm();
        let mut w = v.clone();
        orthogonalize(&mut w, &accepted);
        let residual = w.norm();
        if !(residual > RANK_TOL * scale.max(1.0)) {
            return Err(Error::RankDeficient { index, residual });
        }
        accepted.push(w / residual);
    }
    Ok(complete(&mut accepted, dim))
}

/// Like [`orthonormal_complement`] but silently skips dependent inputs.
/// Returns the complement of whatever span the independent inputs cover.
pub(crate) fn orthonormal_complement_tolerant(vectors: &[DVector<f64>], dim: usize) -> Vec<DVector<f64>> {
    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for v in vectors {
        let mut w = v.clone();
        orthogonalize(&mut w, &accepted);
        let residual = w.norm();
        if residual > 1e-6 * v.norm().max(1.0) && accepted.len() < dim {
            accepted.push(w / residual);
        }
    }
    complete(&mut accepted, dim)
}

/// Distance between sign classes: `|Σ|v_i|Z_i - Σ|u_i|Z_i|`.
///
/// `basis` may hold fewer than `d` vectors; the coordinates outside its span
/// are compared through the norm of the remainder.
pub fn class_distance(u: &DVector<f64>, v: &DVector<f64>, basis: &[DVector<f64>]) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    let mut sq = 0.0;
    let mut ru = u.clone();
    let mut rv = v.clone();
    for z in basis {
        check_dim(u.len(), z.len())?;
        let (a, b) = (z.dot(u), z.dot(v));
        sq += (a.abs() - b.abs()).powi(2);
        ru.axpy(-a, z, 1.0);
        rv.axpy(-b, z, 1.0);
    }
    if basis.len() < u.len() {
        let rest = orthonormal_complement_tolerant(basis, u.len());
        for z in &rest {
            let (a, b) = (z.dot(&ru), z.dot(&rv));
            sq += (a.abs() - b.abs()).powi(2);
        }
    }
    Ok(sq.sqrt())
}

/// `min(|u - v|, |u + v|)`.
pub fn sign_distance(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (u - v).norm().min((u + v).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;
    use std::f64::consts::FRAC_PI_2;

    fn e(d: usize, i: usize) -> UnitVector {
        UnitVector::canonical(d, i)
    }

    #[test]
    fn exp_map_examples() {
        let p = e(2, 0);
        let x = TangentVector::new(p.clone(), DVector::from_vec(vec![0.0, FRAC_PI_2])).unwrap();
        let q = exp_map(&p, &x).unwrap();
        assert_close!(q[0], 0.0, 1e-15);
        assert_close!(q[1], 1.0, 1e-15);

        let zero = TangentVector::new(p.clone(), DVector::zeros(2)).unwrap();
        assert_eq!(exp_map(&p, &zero).unwrap(), p);

        let x = TangentVector::new(p.clone(), DVector::from_vec(vec![0.0, 0.1])).unwrap();
        let q = exp_map(&p, &x).unwrap();
        assert_close!(q[0], 0.995004, 1e-6);
        assert_close!(q[1], 0.099833, 1e-6);
    }

    #[test]
    fn rejects_non_tangent() {
        assert!(matches!(
            TangentVector::new(e(2, 0), DVector::from_vec(vec![0.1, 1.0])),
            Err(Error::NotTangent { .. })
        ));
        assert!(UnitVector::new(DVector::from_vec(vec![1.0, 1.0])).is_err());
    }

    #[test]
    fn tangent_samples() {
        let mut rng = rng_from_seed(3);
        let p = UnitVector::normalize(DVector::from_vec(vec![1.0, 2.0, -0.5, 0.3])).unwrap();
        let n = 100_000;
        let sigma = 0.3;
        let mut mean = DVector::zeros(4);
        for _ in 0..n {
            let t = sample_tangent_sphere(&p, sigma, &mut rng).unwrap();
            assert_close!(t.direction().norm(), sigma, 1e-12);
            assert_close!(t.direction().dot(&p), 0.0, 1e-10);
            mean += t.direction();
        }
        mean /= n as f64;
        assert!(mean.amax() <= 0.02 * sigma, "{mean}");
        assert!(sample_tangent_sphere(&UnitVector::canonical(1, 0), 0.1, &mut rng).is_err());
        assert!(sample_tangent_sphere(&p, 0.0, &mut rng).is_err());
    }

    #[test]
    fn projection_examples() {
        let basis: Vec<_> = (0..3).map(|i| e(3, i).into_vector()).collect();
        let u = DVector::from_vec(vec![0.8, 0.6, 0.0]);
        assert_eq!(project_coords(&u, &[0, 1, 2], &basis).unwrap(), u);
        assert_eq!(project_coords(&u, &[], &basis).unwrap(), DVector::zeros(3));
        assert_eq!(project_coords(&u, &[1], &basis).unwrap(), DVector::from_vec(vec![0.0, 0.6, 0.0]));
        assert!(matches!(project_coords(&u, &[3], &basis), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn complement_examples() {
        let c = orthonormal_complement(&[e(3, 0).into_vector()], 3).unwrap();
        assert_eq!(c.len(), 2);
        for v in &c {
            assert_close!(v[0], 0.0, 1e-15);
            assert_close!(v.norm(), 1.0, 1e-15);
        }
        assert_close!(c[0].dot(&c[1]), 0.0, 1e-15);
        assert_eq!(orthonormal_complement(&[], 4).unwrap().len(), 4);

        let q = crate::synth::random_orthogonal(4, &mut rng_from_seed(8));
        let pair = vec![q.column(0).into_owned(), q.column(1).into_owned()];
        let c = orthonormal_complement(&pair, 4).unwrap();
        assert_eq!(c.len(), 2);
        let all: Vec<_> = pair.iter().chain(&c).collect();
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert!(all[i].dot(all[j]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn complement_rejects_dependent_input() {
        let v = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let r = orthonormal_complement(&[v.clone(), v * 2.0], 3);
        assert!(matches!(r, Err(Error::RankDeficient { index: 1, .. })));
        let t = orthonormal_complement_tolerant(&[e(3, 0).into_vector(), e(3, 0).into_vector()], 3);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn class_distance_examples() {
        let basis: Vec<_> = (0..2).map(|i| e(2, i).into_vector()).collect();
        let u = DVector::from_vec(vec![0.6, -0.8]);
        assert_close!(class_distance(&u, &-&u, &basis).unwrap(), 0.0, 1e-15);
        let v = DVector::from_vec(vec![0.8, -0.6]);
        assert_close!(class_distance(&u, &v, &basis).unwrap(), (&u - &v).norm(), 1e-15);
        let (a, b) = (e(2, 0).into_vector(), e(2, 1).into_vector());
        assert_close!(class_distance(&a, &b, &basis).unwrap(), 2f64.sqrt(), 1e-15);
        // Partial basis in R^3: flipping the unlisted coordinate is still a class move.
        let partial = vec![e(3, 0).into_vector()];
        let u = DVector::from_vec(vec![0.6, 0.0, 0.8]);
        let w = DVector::from_vec(vec![-0.6, 0.0, -0.8]);
        assert_close!(class_distance(&u, &w, &partial).unwrap(), 0.0, 1e-15);
    }
}
