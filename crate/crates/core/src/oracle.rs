//! Gradient oracles and perturbed oracles.

use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::seeding::{hash_floats, rng_from_seed, splitmix64};

/// Access to `∇F` (and optionally `F`) on the closed unit ball.
///
/// `epsilon` is the declared bound on `|∇̂F(u) - ∇F(u)|` over the ball.
pub trait GradientOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>>;

    fn value(&self, _u: &DVector<f64>) -> Result<f64> {
        Err(Error::Unsupported("this oracle does not evaluate F"))
    }

    fn epsilon(&self) -> f64 {
        0.0
    }
}

impl<T: GradientOracle + ?Sized> GradientOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).gradient(u)
    }
    fn value(&self, u: &DVector<f64>) -> Result<f64> {
        (**self).value(u)
    }
    fn epsilon(&self) -> f64 {
        (**self).epsilon()
    }
}

impl<T: GradientOracle + ?Sized> GradientOracle for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).gradient(u)
    }
    fn value(&self, u: &DVector<f64>) -> Result<f64> {
        (**self).value(u)
    }
    fn epsilon(&self) -> f64 {
        (**self).epsilon()
    }
}

impl<T: GradientOracle + ?Sized> GradientOracle for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).gradient(u)
    }
    fn value(&self, u: &DVector<f64>) -> Result<f64> {
        (**self).value(u)
    }
    fn epsilon(&self) -> f64 {
        (**self).epsilon()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    /// A fixed smooth field of constant norm `ε`.
    DeterministicAdversarial,
    /// A uniform draw from the `ε`-ball, keyed on the query point and seed.
    SeededRandom,
}

/// A base oracle plus a bounded additive gradient perturbation.
#[derive(Clone, Debug)]
pub struct PerturbedOracle<O> {
    base: O,
    eps: f64,
    mode: PerturbationMode,
    seed: u64,
    // Frequencies and phases of the trigonometric field, d x d each.
    freq: Vec<f64>,
    phase: Vec<f64>,
}

pub fn perturb_oracle<O: GradientOracle>(base: O, epsilon: f64, mode: PerturbationMode, seed: u64) -> Result<PerturbedOracle<O>> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("perturbation size must be finite and >= 0, got {epsilon}")));
    }
    let d = base.dim();
    let mut rng = rng_from_seed(splitmix64(seed ^ 0x5045_5254));
    let freq = (0..d * d).map(|_| 1.0 + 4.0 * rng.random::<f64>()).collect();
    let phase = (0..d * d).map(|_| std::f64::consts::TAU * rng.random::<f64>()).collect();
    Ok(PerturbedOracle { base, eps: epsilon, mode, seed, freq, phase })
}

impl<O: GradientOracle> PerturbedOracle<O> {
    pub fn base(&self) -> &O {
        &self.base
    }

    pub fn mode(&self) -> PerturbationMode {
        self.mode
    }

    /// The perturbation vector at `u`; its norm is at most `ε`.
    pub fn perturbation(&self, u: &DVector<f64>) -> DVector<f64> {
        let d = u.len();
        if self.eps == 0.0 {
            return DVector::zeros(d);
        }
        match self.mode {
            PerturbationMode::DeterministicAdversarial => {
                let mut v = DVector::from_fn(d, |j, _| {
                    (0..d).map(|k| (self.freq[j * d + k] * u[k] + self.phase[j * d + k]).sin()).sum::<f64>()
                });
                let n = v.norm();
                if n < 1e-300 {
                    v = DVector::zeros(d);
                    v[0] = 1.0;
                } else {
                    v /= n;
                }
                v * self.eps
            }
            PerturbationMode::SeededRandom => {
                let mut rng = rng_from_seed(hash_floats(self.seed, u.as_slice()));
                let dir = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                let n = dir.norm();
                let radius = self.eps * rng.random::<f64>().powf(1.0 / d as f64);
                if n < 1e-300 {
                    DVector::zeros(d)
                } else {
                    dir * (radius / n)
                }
            }
        }
    }
}

impl<O: GradientOracle> GradientOracle for PerturbedOracle<O> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), u.len())?;
        let g = self.base.gradient(u)?;
        if self.eps == 0.0 {
            return Ok(g);
        }
        Ok(g + self.perturbation(u))
    }

    fn value(&self, u: &DVector<f64>) -> Result<f64> {
        self.base.value(u)
    }

    fn epsilon(&self) -> f64 {
        self.base.epsilon() + self.eps
    }
}
