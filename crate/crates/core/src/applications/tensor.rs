//! Orthogonally decomposable tensors and a dense reference contraction.

use nalgebra::DVector;

use crate::bef::{check_orthonormal, ExactBef, ORTHONORMAL_TOL};
use crate::contrast::ContrastFunction;
use crate::error::{check_dim, Error, Result};
use crate::oracle::GradientOracle;

pub const DENSE_MAX_DIM: usize = 8;
pub const SYMMETRY_TOL: f64 = 1e-10;

/// `T = Σ w_k μ_k^{⊗r}` with orthonormal `μ_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct OdecoTensor {
    weights: Vec<f64>,
    directions: Vec<DVector<f64>>,
    order: u32,
}

impl OdecoTensor {
    pub fn new(weights: Vec<f64>, directions: Vec<DVector<f64>>, order: u32) -> Result<Self> {
        if order < 3 {
            return Err(Error::InvalidParameter(format!("tensor order must be >= 3, got {order}")));
        }
        if weights.is_empty() || weights.len() != directions.len() {
            return Err(Error::InvalidParameter("weights and directions must be non-empty and match".into()));
        }
        if let Some(w) = weights.iter().find(|w| **w == 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("tensor weight {w} must be finite and nonzero")));
        }
        let d = directions[0].len();
        for v in &directions {
            check_dim(d, v.len())?;
        }
        check_orthonormal(&directions, ORTHONORMAL_TOL)?;
        Ok(Self { weights, directions, order })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn directions(&self) -> &[DVector<f64>] {
        &self.directions
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.directions[0].len()
    }

    /// `T u^{r-1}` from the decomposition.
    pub fn apply(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for (w, mu) in self.weights.iter().zip(&self.directions) {
            out.axpy(w * mu.dot(u).powi(self.order as i32 - 1), mu, 1.0);
        }
        out
    }

    /// The same function as an exact BEF with contrasts `w_k x^r`.
    pub fn to_bef(&self) -> Result<ExactBef> {
        let contrasts = self
            .weights
            .iter()
            .map(|w| ContrastFunction::monomial(*w, self.order as f64))
            .collect::<Result<Vec<_>>>()?;
        ExactBef::new(self.directions.clone(), contrasts)
    }
}

/// `∇F(u) = r T u^{r-1}` for `F(u) = T(u, ..., u)`.
pub fn tensor_oracle(t: OdecoTensor) -> OdecoTensor {
    t
}

impl GradientOracle for OdecoTensor {
    fn dim(&self) -> usize {
        OdecoTensor::dim(self)
    }

    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), u.len())?;
        Ok(self.apply(u) * self.order as f64)
    }

    fn value(&self, u: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        Ok(self.weights.iter().zip(&self.directions).map(|(w, mu)| w * mu.dot(u).powi(self.order as i32)).sum())
    }
}

/// A symmetric order-3 or order-4 tensor stored densely, for `d <= 8`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSymmetricTensor {
    dim: usize,
    order: u32,
    entries: Vec<f64>,
}

fn multi_index(mut flat: usize, dim: usize, order: u32) -> Vec<usize> {
    let mut idx = vec![0; order as usize];
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
    idx
}

fn flat_index(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

impl DenseSymmetricTensor {
    /// Entries in row-major order: `T[i1, ..., ir]` at `Σ i_k d^{r-k}`.
    pub fn new(entries: Vec<f64>, dim: usize, order: u32) -> Result<Self> {
        if !(3..=4).contains(&order) {
            return Err(Error::InvalidParameter(format!("dense tensors support order 3 or 4, got {order}")));
        }
        if dim == 0 || dim > DENSE_MAX_DIM {
            return Err(Error::TooLarge(format!("dense tensors support 1 <= d <= {DENSE_MAX_DIM}, got {dim}")));
        }
        let len = dim.pow(order);
        if entries.len() != len {
            return Err(Error::DimensionMismatch { expected: len, found: entries.len() });
        }
        for flat in 0..len {
            let idx = multi_index(flat, dim, order);
            // Adjacent transpositions generate the symmetric group.
            for k in 0..idx.len() - 1 {
                let mut swapped = idx.clone();
                swapped.swap(k, k + 1);
                let dev = (entries[flat] - entries[flat_index(&swapped, dim)]).abs();
                if dev > SYMMETRY_TOL {
                    return Err(Error::NotSymmetric(dev));
                }
            }
        }
        Ok(Self { dim, order, entries })
    }

    /// Materializes `Σ w_k μ_k^{⊗r}`.
    pub fn from_odeco(t: &OdecoTensor) -> Result<Self> {
        let (dim, order) = (t.dim(), t.order());
        if dim > DENSE_MAX_DIM || !(3..=4).contains(&order) {
            return Err(Error::TooLarge(format!("dense form limited to d <= {DENSE_MAX_DIM}, r in 3..=4")));
        }
        let len = dim.pow(order);
        let mut entries = vec![0.0; len];
        for (flat, e) in entries.iter_mut().enumerate() {
            let idx = multi_index(flat, dim, order);
            *e = t
                .weights()
                .iter()
                .zip(t.directions())
                .map(|(w, mu)| w * idx.iter().map(|&i| mu[i]).product::<f64>())
                .sum();
        }
        Self::new(entries, dim, order)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn entry(&self, idx: &[usize]) -> f64 {
        self.entries[flat_index(idx, self.dim)]
    }
}

/// Brute-force `[T u^{r-1}]_j = Σ T[j, i2, ..., ir] u_{i2} ... u_{ir}`.
pub fn dense_tensor_apply(t: &DenseSymmetricTensor, u: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(t.dim, u.len())?;
    let d = t.dim;
    let mut out = DVector::zeros(d);
    for j in 0..d {
        let mut acc = 0.0;
        match t.order {
            3 => {
                for a in 0..d {
                    for b in 0..d {
                        acc += t.entries[(j * d + a) * d + b] * u[a] * u[b];
                    }
                }
            }
            _ => {
                for a in 0..d {
                    for b in 0..d {
                        for c in 0..d {
                            acc += t.entries[((j * d + a) * d + b) * d + c] * u[a] * u[b] * u[c];
                        }
                    }
                }
            }
        }
        out[j] = acc;
    }
    Ok(out)
}
