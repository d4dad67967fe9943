//! Seeded synthetic problems.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::applications::samples::SampleMatrix;
use crate::applications::tensor::OdecoTensor;
use crate::error::{Error, Result};
use crate::seeding::{rng_from_seed, split_seed, stream};

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// signs of `diag(R)` absorbed into `Q`).
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Unit-variance, zero-mean source distributions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    /// Uniform on `[-√3, √3]`.
    Uniform,
    /// Laplace with scale `1/√2`.
    Laplace,
    /// `±1` with equal probability.
    Rademacher,
    Gaussian,
}

impl SourceKind {
    /// Population fourth cumulant `m4 - 3`.
    pub fn kurtosis(self) -> f64 {
        match self {
            SourceKind::Uniform => 9.0 / 5.0 - 3.0,
            SourceKind::Laplace => 3.0,
            SourceKind::Rademacher => -2.0,
            SourceKind::Gaussian => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            SourceKind::Uniform => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
            SourceKind::Laplace => {
                let e: f64 = rand_distr::Exp1.sample(rng);
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                s * e / 2f64.sqrt()
            }
            SourceKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            SourceKind::Gaussian => rng.sample(StandardNormal),
        }
    }
}

/// JSON description of a synthetic data set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// `x = A s` with orthogonal `A` and independent sources.
    Ica { sources: Vec<SourceKind>, mixing_seed: u64, n: usize },
    /// Spherical mixture with common standard deviation.
    Gmm { means: Vec<Vec<f64>>, weights: Vec<f64>, sigma: f64, n: usize },
    /// Orthogonally decomposable tensor with random directions.
    Odeco { dimension: usize, weights: Vec<f64>, order: u32, basis_seed: u64 },
    /// Embedded points `b_j Z_j` repeated `a_j` times, optionally jittered.
    SpectralIdeal {
        dimension: usize,
        counts: Vec<usize>,
        scales: Vec<f64>,
        basis_seed: u64,
        #[serde(default)]
        noise: f64,
    },
}

/// Output of [`GeneratorSpec::generate`] along with its ground truth.
#[derive(Clone, Debug)]
pub enum Generated {
    Ica { samples: SampleMatrix, mixing: DMatrix<f64>, sources: Vec<SourceKind> },
    Gmm { samples: SampleMatrix, means: Vec<DVector<f64>>, weights: Vec<f64>, sigma: f64 },
    Odeco { tensor: OdecoTensor },
    Spectral { points: SampleMatrix, directions: Vec<DVector<f64>> },
}

impl Generated {
    /// Rows of data, if the generator produces samples.
    pub fn samples(&self) -> Option<&SampleMatrix> {
        match self {
            Generated::Ica { samples, .. } | Generated::Gmm { samples, .. } => Some(samples),
            Generated::Spectral { points, .. } => Some(points),
            Generated::Odeco { .. } => None,
        }
    }
}

impl GeneratorSpec {
    /// Draws the data set. Structure seeds (mixing, basis) are part of the
    /// spec; `seed` drives the sample noise.
    pub fn generate(&self, seed: u64) -> Result<Generated> {
        let mut rng = rng_from_seed(split_seed(seed, stream::DATA));
        match self {
            GeneratorSpec::Ica { sources, mixing_seed, n } => {
                let d = sources.len();
                if d < 2 || *n < 1 {
                    return Err(Error::InvalidParameter("ica needs at least two sources and one sample".into()));
                }
                let mixing = random_orthogonal(d, &mut rng_from_seed(*mixing_seed));
                let mut data = Vec::with_capacity(n * d);
                let mut s = DVector::zeros(d);
                for _ in 0..*n {
                    for (k, kind) in sources.iter().enumerate() {
                        s[k] = kind.sample(&mut rng);
                    }
                    data.extend((&mixing * &s).iter());
                }
                Ok(Generated::Ica { samples: SampleMatrix::new(*n, d, data)?, mixing, sources: sources.clone() })
            }
            GeneratorSpec::Gmm { means, weights, sigma, n } => {
                let k = means.len();
                if k == 0 || weights.len() != k || *n < 1 {
                    return Err(Error::InvalidParameter("gmm needs matching non-empty means and weights".into()));
                }
                if !(*sigma > 0.0) {
                    return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
                }
                let d = means[0].len();
                if means.iter().any(|m| m.len() != d) {
                    return Err(Error::InvalidParameter("means differ in dimension".into()));
                }
                let total: f64 = weights.iter().sum();
                if weights.iter().any(|w| !(*w > 0.0)) || (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter("weights must be positive and sum to 1".into()));
                }
                let mut data = Vec::with_capacity(n * d);
                for _ in 0..*n {
                    let mut r: f64 = rng.random();
                    let mut c = k - 1;
                    for (i, w) in weights.iter().enumerate() {
                        if r < *w {
                            c = i;
                            break;
                        }
                        r -= w;
                    }
                    for x in &means[c] {
                        data.push(x + sigma * rng.sample::<f64, _>(StandardNormal));
                    }
                }
                Ok(Generated::Gmm {
                    samples: SampleMatrix::new(*n, d, data)?,
                    means: means.iter().map(|m| DVector::from_column_slice(m)).collect(),
                    weights: weights.clone(),
                    sigma: *sigma,
                })
            }
            GeneratorSpec::Odeco { dimension, weights, order, basis_seed } => {
                if weights.len() > *dimension {
                    return Err(Error::InvalidParameter("more tensor terms than dimensions".into()));
                }
                let q = random_orthogonal(*dimension, &mut rng_from_seed(*basis_seed));
                let dirs = (0..weights.len()).map(|i| q.column(i).into_owned()).collect();
                Ok(Generated::Odeco { tensor: OdecoTensor::new(weights.clone(), dirs, *order)? })
            }
            GeneratorSpec::SpectralIdeal { dimension, counts, scales, basis_seed, noise } => {
                if counts.len() != scales.len() || counts.is_empty() || counts.len() > *dimension {
                    return Err(Error::InvalidParameter("counts and scales must match and fit the dimension".into()));
                }
                if !(*noise >= 0.0) {
                    return Err(Error::InvalidParameter(format!("noise must be >= 0, got {noise}")));
                }
                let q = random_orthogonal(*dimension, &mut rng_from_seed(*basis_seed));
                let directions: Vec<DVector<f64>> = (0..counts.len()).map(|i| q.column(i).into_owned()).collect();
                let total: usize = counts.iter().sum();
                let mut data = Vec::with_capacity(total * dimension);
                for ((z, &a), &b) in directions.iter().zip(counts).zip(scales) {
                    for _ in 0..a {
                        for x in z.iter() {
                            let jitter = if *noise > 0.0 { noise * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
                            data.push(b * x + jitter);
                        }
                    }
                }
                Ok(Generated::Spectral { points: SampleMatrix::new(total, *dimension, data)?, directions })
            }
        }
    }
}
