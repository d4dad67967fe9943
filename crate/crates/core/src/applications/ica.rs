//! Fourth-cumulant ICA oracle and whitening.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::samples::SampleMatrix;
use crate::error::{check_dim, Error, Result};
use crate::oracle::GradientOracle;

/// Largest allowed `|Ĉ - I|_max` for input to [`ica_oracle`].
pub const WHITENESS_TOL: f64 = 0.05;
/// Eigenvalue ratio below which a covariance counts as singular.
pub const SINGULAR_RATIO: f64 = 1e-12;

/// `y = W (x - mean)` with `W = E Λ^{-1/2} Eᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct WhiteningTransform {
    pub mean: DVector<f64>,
    pub matrix: DMatrix<f64>,
    /// `W^{-1} = E Λ^{1/2} Eᵀ`.
    pub inverse: DMatrix<f64>,
}

impl WhiteningTransform {
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * (x - &self.mean)
    }

    /// Maps a direction `u ≈ W A_i` found in whitened space back to the
    /// unit mixing column `A_i/|A_i|`.
    pub fn mixing_column(&self, u: &DVector<f64>) -> DVector<f64> {
        let v = &self.inverse * u;
        let n = v.norm();
        v / n
    }
}

/// Centers and decorrelates the samples (symmetric whitening).
pub fn whiten(samples: &SampleMatrix) -> Result<(SampleMatrix, WhiteningTransform)> {
    let mean = samples.mean();
    let cov = samples.covariance();
    let eig = cov.symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(max > 0.0) || min <= SINGULAR_RATIO * max {
        return Err(Error::Singular(format!("covariance eigenvalues span [{min:e}, {max:e}]")));
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let w = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    let w = (&w + w.transpose()) * 0.5;
    let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inverse = &eig.eigenvectors * sqrt * eig.eigenvectors.transpose();
    let out = samples.affine_map(&w, &mean)?;
    Ok((out, WhiteningTransform { mean, matrix: w, inverse }))
}

/// Which extension of the sample cumulant off the unit sphere is
/// differentiated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IcaGradientForm {
    /// `F̂(u) = (1/N) Σ <u,x>^4 - 3|u|^4`, homogeneous of degree four. Its
    /// gradient is that of the BEF `Σ κ_i <u, A_i>^4` up to sampling error.
    #[default]
    Cumulant,
    /// `F̂(u) = (1/N) Σ <u,x>^4 - 3` with gradient `(4/N) Σ <u,x>^3 x`.
    /// Same value on the sphere; the gradient carries an extra `12 u` term.
    RawMoment,
}

/// Sample fourth-cumulant oracle on whitened data.
#[derive(Clone, Debug)]
pub struct IcaOracle {
    samples: SampleMatrix,
    form: IcaGradientForm,
}

/// Builds the oracle after checking the data are white to [`WHITENESS_TOL`].
pub fn ica_oracle(samples: SampleMatrix) -> Result<IcaOracle> {
    IcaOracle::new(samples, IcaGradientForm::Cumulant)
}

impl IcaOracle {
    pub fn new(samples: SampleMatrix, form: IcaGradientForm) -> Result<Self> {
        let d = samples.d();
        let dev = (samples.covariance() - DMatrix::identity(d, d)).amax();
        if dev > WHITENESS_TOL {
            return Err(Error::NotWhitened { deviation: dev, tolerance: WHITENESS_TOL });
        }
        Ok(Self { samples, form })
    }

    pub fn samples(&self) -> &SampleMatrix {
        &self.samples
    }

    pub fn form(&self) -> IcaGradientForm {
        self.form
    }

    fn fourth_moment(&self, u: &DVector<f64>) -> f64 {
        let s = self.samples.chunked_sum(1, |row, acc| {
            let p: f64 = row.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
            acc[0] += p * p * p * p;
        });
        s[0] / self.samples.n() as f64
    }
}

impl GradientOracle for IcaOracle {
    fn dim(&self) -> usize {
        self.samples.d()
    }

    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), u.len())?;
        let d = self.dim();
        let s = self.samples.chunked_sum(d, |row, acc| {
            let p: f64 = row.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
            let c = p * p * p;
            for (a, x) in acc.iter_mut().zip(row) {
                *a += c * x;
            }
        });
        let mut g = DVector::from_vec(s) * (4.0 / self.samples.n() as f64);
        if self.form == IcaGradientForm::Cumulant {
            g.axpy(-12.0 * u.norm_squared(), u, 1.0);
        }
        Ok(g)
    }

    fn value(&self, u: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        let m4 = self.fourth_moment(u);
        Ok(match self.form {
            IcaGradientForm::Cumulant => m4 - 3.0 * u.norm_squared().powi(2),
            IcaGradientForm::RawMoment => m4 - 3.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iteration::gi_step;
    use crate::seeding::rng_from_seed;
    use crate::sphere::UnitVector;
    use crate::synth::{GeneratorSpec, Generated, SourceKind};
    use crate::test_oracles::{finite_diff_grad, FiniteDiffSpec};
    use rand::Rng;

    fn ica_data(kind: SourceKind, n: usize, seed: u64) -> (SampleMatrix, DMatrix<f64>) {
        let spec = GeneratorSpec::Ica { sources: vec![kind; 3], mixing_seed: 4, n };
        let Generated::Ica { samples, mixing, .. } = spec.generate(seed).unwrap() else { unreachable!() };
        (samples, mixing)
    }

    #[test]
    fn whitening_examples() {
        let (white, t) = whiten(&ica_data(SourceKind::Uniform, 5000, 1).0).unwrap();
        let cov = white.covariance();
        assert!((cov - DMatrix::identity(3, 3)).amax() <= 1e-8);
        assert!(white.mean().amax() <= 1e-12);
        // Data already close to white: the transform is near the identity.
        assert!((t.matrix - DMatrix::identity(3, 3)).amax() < 0.1);

        let mut rng = rng_from_seed(2);
        let rows: Vec<Vec<f64>> = (0..2000).map(|_| vec![2.0 * (rng.random::<f64>() - 0.5), rng.random::<f64>() - 0.5]).collect();
        let scaled = SampleMatrix::from_rows(&rows).unwrap();
        let (w1, _) = whiten(&scaled).unwrap();
        assert!((w1.covariance() - DMatrix::identity(2, 2)).amax() <= 1e-8);
        let (w2, _) = whiten(&w1).unwrap();
        assert!((w2.covariance() - DMatrix::identity(2, 2)).amax() <= 1e-8);

        let singular = SampleMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
        assert!(matches!(whiten(&singular), Err(Error::Singular(_))));
    }

    #[test]
    fn rejects_non_white_input() {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64, 0.5 * i as f64 + 1.0]).collect();
        let s = SampleMatrix::from_rows(&rows).unwrap();
        assert!(matches!(ica_oracle(s), Err(Error::NotWhitened { .. })));
    }

    #[test]
    fn uniform_kurtosis_estimate() {
        let n = 200_000;
        let (x, a) = ica_data(SourceKind::Uniform, n, 3);
        let (white, t) = whiten(&x).unwrap();
        let oracle = ica_oracle(white).unwrap();
        for i in 0..3 {
            let col = t.matrix.clone() * a.column(i);
            let u = &col / col.norm();
            let f = oracle.value(&u).unwrap();
            assert!((f + 1.2).abs() <= 3.0 / (n as f64).sqrt() * 3.0, "{f}");
        }
    }

    #[test]
    fn gaussian_sources_are_flat() {
        let (x, _) = ica_data(SourceKind::Gaussian, 200_000, 4);
        let oracle = ica_oracle(whiten(&x).unwrap().0).unwrap();
        let mut rng = rng_from_seed(7);
        for _ in 0..10 {
            let u = UnitVector::normalize(DVector::from_fn(3, |_, _| rng.random::<f64>() - 0.5)).unwrap();
            assert!(oracle.value(&u).unwrap().abs() < 0.05);
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let (x, _) = ica_data(SourceKind::Laplace, 2000, 5);
        let white = whiten(&x).unwrap().0;
        let mut rng = rng_from_seed(8);
        for form in [IcaGradientForm::Cumulant, IcaGradientForm::RawMoment] {
            let oracle = IcaOracle::new(white.clone(), form).unwrap();
            for _ in 0..10 {
                let u = DVector::from_fn(3, |_, _| rng.random::<f64>() - 0.5);
                let g = oracle.gradient(&u).unwrap();
                let fd = finite_diff_grad(|v| oracle.value(v).unwrap(), &u, &FiniteDiffSpec::default()).unwrap();
                assert!((&g - &fd).norm() <= 1e-6 * g.norm().max(1.0));
            }
        }
    }

    #[test]
    fn raw_moment_gradient_drifts_for_negative_kurtosis() {
        let (x, a) = ica_data(SourceKind::Uniform, 50_000, 6);
        let (white, t) = whiten(&x).unwrap();
        let col = &t.matrix * a.column(0);
        let truth = &col / col.norm();
        let mut rng = rng_from_seed(1);
        let noise = DVector::from_fn(3, |_, _| 0.05 * (rng.random::<f64>() - 0.5));
        let start = UnitVector::normalize(&truth + noise).unwrap();
        let run = |form| {
            let oracle = IcaOracle::new(white.clone(), form).unwrap();
            let mut u = start.clone();
            for _ in 0..30 {
                u = gi_step(&oracle, &u).unwrap();
            }
            u.dot(&truth).abs()
        };
        assert!(run(IcaGradientForm::Cumulant) > 0.999);
        assert!(run(IcaGradientForm::RawMoment) < 0.9);
    }
}
