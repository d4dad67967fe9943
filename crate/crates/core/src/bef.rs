//! Exact basis encoding functions built from a known hidden basis.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::contrast::{ContrastFunction, PowerTerm, RobustnessCertificate};
use crate::error::{check_dim, Error, Result};
use crate::oracle::GradientOracle;
use crate::seeding::rng_from_seed;
use crate::synth::random_orthogonal;

pub const ORTHONORMAL_TOL: f64 = 1e-10;
pub const BALL_TOL: f64 = 1e-9;

/// `F(u) = Σ g_i(<u, Z_i>)` with orthonormal `Z_1..Z_m` in `R^d`.
#[derive(Clone, Debug)]
pub struct ExactBef {
    basis: Vec<DVector<f64>>,
    contrasts: Vec<ContrastFunction>,
    dim: usize,
}

pub(crate) fn check_orthonormal(vectors: &[DVector<f64>], tol: f64) -> Result<()> {
    for i in 0..vectors.len() {
        for j in i..vectors.len() {
            let target = if i == j { 1.0 } else { 0.0 };
            let deviation = (vectors[i].dot(&vectors[j]) - target).abs();
            if deviation > tol {
                return Err(Error::NotOrthonormal { i, j, deviation });
            }
        }
    }
    Ok(())
}

impl ExactBef {
    pub fn new(basis: Vec<DVector<f64>>, contrasts: Vec<ContrastFunction>) -> Result<Self> {
        let m = basis.len();
        if m == 0 {
            return Err(Error::InvalidParameter("a BEF needs at least one basis vector".into()));
        }
        let dim = basis[0].len();
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {dim}")));
        }
        if m > dim {
            return Err(Error::InvalidParameter(format!("{m} basis vectors in dimension {dim}")));
        }
        if contrasts.len() != m {
            return Err(Error::InvalidParameter(format!("{} contrasts for {m} basis vectors", contrasts.len())));
        }
        for z in &basis {
            check_dim(dim, z.len())?;
        }
        check_orthonormal(&basis, ORTHONORMAL_TOL)?;
        Ok(Self { basis, contrasts, dim })
    }

    /// The first `m` canonical vectors of `R^d` as hidden basis.
    pub fn canonical(dim: usize, contrasts: Vec<ContrastFunction>) -> Result<Self> {
        let basis = (0..contrasts.len()).map(|i| canonical_vector(dim, i)).collect();
        Self::new(basis, contrasts)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    pub fn contrasts(&self) -> &[ContrastFunction] {
        &self.contrasts
    }

    /// Combined certificate across all contrasts, if every contrast has one.
    pub fn certificate(&self) -> Option<RobustnessCertificate> {
        let certs: Option<Vec<_>> = self.contrasts.iter().map(|g| g.certificate().copied()).collect();
        RobustnessCertificate::combine(&certs?)
    }

    /// Hidden coordinates `<u, Z_i>`.
    pub fn coords(&self, u: &DVector<f64>) -> Result<Vec<f64>> {
        check_dim(self.dim, u.len())?;
        Ok(self.basis.iter().map(|z| z.dot(u)).collect())
    }

    fn check_ball(&self, u: &DVector<f64>) -> Result<()> {
        check_dim(self.dim, u.len())?;
        let norm = u.norm();
        if norm > 1.0 + BALL_TOL {
            return Err(Error::OutsideBall { norm });
        }
        Ok(())
    }

    pub fn eval_f(&self, u: &DVector<f64>) -> Result<f64> {
        self.check_ball(u)?;
        Ok(self.basis.iter().zip(&self.contrasts).map(|(z, g)| g.g(z.dot(u))).sum())
    }

    pub fn eval_grad(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_ball(u)?;
        let mut out = DVector::zeros(self.dim);
        for (z, g) in self.basis.iter().zip(&self.contrasts) {
            out.axpy(g.dg(z.dot(u)), z, 1.0);
        }
        Ok(out)
    }

    /// The gradient written through the `h`-transforms:
    /// `2 Σ h_i'(±<u,Z_i>^2) <u,Z_i> Z_i` (sign of the coordinate inside `h'`).
    pub fn eval_grad_h_form(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_ball(u)?;
        let mut out = DVector::zeros(self.dim);
        for (z, g) in self.basis.iter().zip(&self.contrasts) {
            let c = z.dot(u);
            let h = g.h_transform();
            let t = c.signum() * c * c;
            // g'(x) = 2 h'(x^2) x for even g, and 2 h'(sign(x) x^2) |x| for odd g.
            let coef = match g.symmetry() {
                crate::contrast::Symmetry::Even => 2.0 * h.dh(c * c) * c,
                crate::contrast::Symmetry::Odd => 2.0 * h.dh(t) * c.abs(),
            };
            out.axpy(coef, z, 1.0);
        }
        Ok(out)
    }
}

impl GradientOracle for ExactBef {
    fn dim(&self) -> usize {
        self.dim
    }

    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.eval_grad(u)
    }

    fn value(&self, u: &DVector<f64>) -> Result<f64> {
        self.eval_f(u)
    }
}

pub fn canonical_vector(dim: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[i] = 1.0;
    v
}

/// JSON description of a contrast.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContrastSpec {
    Monomial { weight: f64, power: f64 },
    Polynomial { terms: Vec<PowerTerm> },
    Cosh { weight: f64 },
}

impl ContrastSpec {
    pub fn build(&self) -> Result<ContrastFunction> {
        match self {
            ContrastSpec::Monomial { weight, power } => ContrastFunction::monomial(*weight, *power),
            ContrastSpec::Polynomial { terms } => ContrastFunction::polynomial(terms.clone()),
            ContrastSpec::Cosh { weight } => ContrastFunction::cosh(*weight),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisSpec {
    Named(NamedBasis),
    RandomRotation { random_rotation_seed: u64 },
    Explicit(Vec<Vec<f64>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedBasis {
    Canonical,
}

/// `{"dimension": d, "basis": ..., "contrasts": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BefSpec {
    pub dimension: usize,
    pub basis: BasisSpec,
    pub contrasts: Vec<ContrastSpec>,
}

impl BefSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<ExactBef> {
        let contrasts = self.contrasts.iter().map(ContrastSpec::build).collect::<Result<Vec<_>>>()?;
        let m = contrasts.len();
        if m > self.dimension {
            return Err(Error::InvalidParameter(format!("{m} contrasts exceed dimension {}", self.dimension)));
        }
        let basis = match &self.basis {
            BasisSpec::Named(NamedBasis::Canonical) => (0..m).map(|i| canonical_vector(self.dimension, i)).collect(),
            BasisSpec::RandomRotation { random_rotation_seed } => {
                let q = random_orthogonal(self.dimension, &mut rng_from_seed(*random_rotation_seed));
                (0..m).map(|i| q.column(i).into_owned()).collect()
            }
            BasisSpec::Explicit(rows) => {
                if rows.len() != m {
                    return Err(Error::InvalidParameter(format!("{} basis vectors for {m} contrasts", rows.len())));
                }
                rows.iter().map(|r| DVector::from_column_slice(r)).collect()
            }
        };
        ExactBef::new(basis, contrasts)
    }
}
