//! `F(u) = uᵀAu`: the border case where the gradient iteration is the
//! matrix power method.
//!
//! The contrast here is quadratic, so `h` is linear and the hidden
//! convexity is not strict. The iteration converges linearly, at rate
//! `|λ₂/λ₁|`, and only to the top eigenvector.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::oracle::GradientOracle;

pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixOracle {
    a: DMatrix<f64>,
}

impl MatrixOracle {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
        }
        let dev = (&a - a.transpose()).amax();
        if dev > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(dev));
        }
        Ok(Self { a })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }
}

pub fn matrix_oracle(a: DMatrix<f64>) -> Result<MatrixOracle> {
    MatrixOracle::new(a)
}

impl GradientOracle for MatrixOracle {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), u.len())?;
        Ok(&self.a * u * 2.0)
    }

    fn value(&self, u: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        Ok(u.dot(&(&self.a * u)))
    }
}
