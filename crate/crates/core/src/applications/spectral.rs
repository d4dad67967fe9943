//! `F(u) = Σ_i g(<u, x_i>)` over embedded points.

use nalgebra::DVector;

use super::samples::SampleMatrix;
use crate::contrast::ContrastFunction;
use crate::error::{check_dim, Error, Result};
use crate::oracle::GradientOracle;

#[derive(Clone, Debug)]
pub struct SpectralOracle {
    points: SampleMatrix,
    contrast: ContrastFunction,
    scale: f64,
}

/// Rescales the points into the unit ball by their largest norm and builds
/// the oracle. The factor is available as [`SpectralOracle::scale`].
pub fn spectral_oracle(points: &SampleMatrix, g: ContrastFunction) -> Result<SpectralOracle> {
    let max = points.rows().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::Degenerate("all embedded points are zero".into()));
    }
    let scale = 1.0 / max;
    let d = points.d();
    let data: Vec<f64> = points.rows().flat_map(|r| r.iter().map(|x| x * scale)).collect();
    Ok(SpectralOracle { points: SampleMatrix::new(points.n(), d, data)?, contrast: g, scale })
}

impl SpectralOracle {
    /// The default contrast `x^4`.
    pub fn with_default_contrast(points: &SampleMatrix) -> Result<Self> {
        spectral_oracle(points, ContrastFunction::monomial(1.0, 4.0)?)
    }

    /// The factor applied to every point.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn contrast(&self) -> &ContrastFunction {
        &self.contrast
    }

    pub fn points(&self) -> &SampleMatrix {
        &self.points
    }
}

impl GradientOracle for SpectralOracle {
    fn dim(&self) -> usize {
        self.points.d()
    }

    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), u.len())?;
        let g = &self.contrast;
        let s = self.points.chunked_sum(self.dim(), |row, acc| {
            let p: f64 = row.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
            let c = g.dg(p);
            for (a, x) in acc.iter_mut().zip(row) {
                *a += c * x;
            }
        });
        Ok(DVector::from_vec(s))
    }

    fn value(&self, u: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        let g = &self.contrast;
        let s = self.points.chunked_sum(1, |row, acc| {
            let p: f64 = row.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
            acc[0] += g.g(p);
        });
        Ok(s[0])
    }
}
