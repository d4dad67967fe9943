//! Spherical Gaussian mixtures with `k = d` components via third moments.
//!
//! With `x = μ_c + σ z`, `M₂ = E[xxᵀ] - σ²I = A D Aᵀ` (`A` holds the means,
//! `D` the weights) and `M = M₂^{1/2} = A D^{1/2} R` for an orthogonal `R`.
//! For `y = M^{-1} u`,
//!
//! `F(u) = E<x,y>³ - 3σ²|y|² E<x,y> = Σ_i w_i^{-1/2} <u, R_i>³`,
//!
//! a BEF with hidden basis the rows of `R`. Then `M R_i = w_i^{1/2} μ_i`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::samples::SampleMatrix;
use crate::error::{check_dim, Error, Result};
use crate::oracle::GradientOracle;
use crate::recovery::{robust_gi_recovery, RecoveredBasis, RecoveryConfig};

/// Negative eigenvalues of `M̂₂` down to `-PSD_CLIP_REL |M̂₂|` are zeroed.
pub const PSD_CLIP_REL: f64 = 1e-6;
/// `|<d_i, v>| / |d_i|` below this makes the mean scale ambiguous.
pub const AMBIGUITY_TOL: f64 = 1e-3;

/// `E<x,y>³`, `E[<x,y>² x]` and `E<x,y>` for one `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicTerms {
    pub t3: f64,
    pub t2x: DVector<f64>,
    pub t1: f64,
}

/// Moment access for a mixture, from samples or in closed form.
pub trait MixtureMoments: Send + Sync {
    fn dim(&self) -> usize;
    fn mean(&self) -> DVector<f64>;
    /// `E[x xᵀ]`.
    fn second_moment(&self) -> DMatrix<f64>;
    fn cubic_terms(&self, y: &DVector<f64>) -> CubicTerms;
    /// Sample count, or `None` for exact moments.
    fn sample_size(&self) -> Option<usize>;

    fn covariance(&self) -> DMatrix<f64> {
        let m = self.mean();
        self.second_moment() - &m * m.transpose()
    }
}

impl MixtureMoments for SampleMatrix {
    fn dim(&self) -> usize {
        self.d()
    }

    fn mean(&self) -> DVector<f64> {
        SampleMatrix::mean(self)
    }

    fn second_moment(&self) -> DMatrix<f64> {
        SampleMatrix::second_moment(self)
    }

    fn covariance(&self) -> DMatrix<f64> {
        SampleMatrix::covariance(self)
    }

    fn cubic_terms(&self, y: &DVector<f64>) -> CubicTerms {
        let d = self.d();
        let s = self.chunked_sum(d + 2, |row, acc| {
            let p: f64 = row.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
            let p2 = p * p;
            acc[0] += p2 * p;
            acc[1] += p;
            for (a, x) in acc[2..].iter_mut().zip(row) {
                *a += p2 * x;
            }
        });
        let n = self.n() as f64;
        CubicTerms { t3: s[0] / n, t1: s[1] / n, t2x: DVector::from_column_slice(&s[2..]) / n }
    }

    fn sample_size(&self) -> Option<usize> {
        Some(self.n())
    }
}

/// Exact mixture moments.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationMoments {
    pub means: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
    pub sigma: f64,
}

impl PopulationMoments {
    pub fn new(means: Vec<DVector<f64>>, weights: Vec<f64>, sigma: f64) -> Result<Self> {
        if means.is_empty() || means.len() != weights.len() {
            return Err(Error::InvalidParameter("means and weights must be non-empty and match".into()));
        }
        let d = means[0].len();
        for m in &means {
            check_dim(d, m.len())?;
        }
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { means, weights, sigma })
    }
}

impl MixtureMoments for PopulationMoments {
    fn dim(&self) -> usize {
        self.means[0].len()
    }

    fn mean(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for (w, m) in self.weights.iter().zip(&self.means) {
            out.axpy(*w, m, 1.0);
        }
        out
    }

    fn second_moment(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut out = DMatrix::identity(d, d) * self.sigma.powi(2);
        for (w, m) in self.weights.iter().zip(&self.means) {
            out += m * m.transpose() * *w;
        }
        out
    }

    fn cubic_terms(&self, y: &DVector<f64>) -> CubicTerms {
        let s2 = self.sigma.powi(2);
        let yy = y.norm_squared();
        let mut t3 = 0.0;
        let mut t1 = 0.0;
        let mut t2x = DVector::zeros(self.dim());
        for (w, m) in self.weights.iter().zip(&self.means) {
            let a = m.dot(y);
            t3 += w * (a.powi(3) + 3.0 * a * s2 * yy);
            t1 += w * a;
            t2x.axpy(w * (a * a + s2 * yy), m, 1.0);
            t2x.axpy(w * 2.0 * s2 * a, y, 1.0);
        }
        CubicTerms { t3, t2x, t1 }
    }

    fn sample_size(&self) -> Option<usize> {
        None
    }
}

/// The correction term multiplying `3σ² E<x,y>`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThirdMomentForm {
    /// `|y|²`: cancels the noise contribution exactly.
    #[default]
    SquaredNorm,
    /// `|y|`: leaves a residual noise term; kept for comparison.
    Norm,
}

/// `F(u) = E<x,y>³ - 3σ² c(y) E<x,y>` with `y = M^{-1} u`.
#[derive(Clone, Debug)]
pub struct GmmCubicOracle<'a, M: MixtureMoments + ?Sized> {
    moments: &'a M,
    m_inv: DMatrix<f64>,
    sigma2: f64,
    form: ThirdMomentForm,
}

impl<'a, M: MixtureMoments + ?Sized> GmmCubicOracle<'a, M> {
    pub fn new(moments: &'a M, m_inv: DMatrix<f64>, sigma2: f64, form: ThirdMomentForm) -> Result<Self> {
        check_dim(moments.dim(), m_inv.nrows())?;
        check_dim(moments.dim(), m_inv.ncols())?;
        Ok(Self { moments, m_inv, sigma2, form })
    }
}

impl<M: MixtureMoments + ?Sized> GradientOracle for GmmCubicOracle<'_, M> {
    fn dim(&self) -> usize {
        self.moments.dim()
    }

    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), u.len())?;
        let y = &self.m_inv * u;
        let CubicTerms { t2x, t1, .. } = self.moments.cubic_terms(&y);
        let mean = self.moments.mean();
        let s = self.sigma2;
        let yy = y.norm_squared();
        let mut gy = t2x * 3.0;
        match self.form {
            ThirdMomentForm::SquaredNorm => {
                gy.axpy(-6.0 * s * t1, &y, 1.0);
                gy.axpy(-3.0 * s * yy, &mean, 1.0);
            }
            ThirdMomentForm::Norm => {
                let n = yy.sqrt();
                if n > 0.0 {
                    gy.axpy(-3.0 * s * t1 / n, &y, 1.0);
                }
                gy.axpy(-3.0 * s * n, &mean, 1.0);
            }
        }
        // M is symmetric, so the chain rule gives M^{-1} ∇_y.
        Ok(&self.m_inv * gy)
    }

    fn value(&self, u: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        let y = &self.m_inv * u;
        let CubicTerms { t3, t1, .. } = self.moments.cubic_terms(&y);
        let c = match self.form {
            ThirdMomentForm::SquaredNorm => y.norm_squared(),
            ThirdMomentForm::Norm => y.norm(),
        };
        Ok(t3 - 3.0 * self.sigma2 * c * t1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmmOptions {
    pub recovery: RecoveryConfig,
    #[serde(default)]
    pub form: ThirdMomentForm,
}

impl GmmOptions {
    pub fn practical(d: usize, seed: u64) -> Self {
        Self { recovery: RecoveryConfig::practical(d, seed), form: ThirdMomentForm::SquaredNorm }
    }
}

/// The moment-side quantities of the reduction.
#[derive(Clone, Debug)]
pub struct GmmMoments {
    pub sigma2: f64,
    /// Eigenvector of the smallest covariance eigenvalue.
    pub v: DVector<f64>,
    /// `M̂₂` after clipping.
    pub m2: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub m_inv: DMatrix<f64>,
}

/// Steps (1) to (3): `σ̂²`, `M̂₂` (clipped PSD) and its symmetric square root.
pub fn gmm_moments<M: MixtureMoments + ?Sized>(moments: &M) -> Result<GmmMoments> {
    let d = moments.dim();
    let cov = moments.covariance();
    let eig = cov.symmetric_eigen();
    let imin = eig.eigenvalues.imin();
    let sigma2 = eig.eigenvalues[imin];
    if !(sigma2 > 0.0) {
        return Err(Error::Degenerate(format!("smallest covariance eigenvalue {sigma2:e} is not positive")));
    }
    let v = eig.eigenvectors.column(imin).into_owned();

    let raw = moments.second_moment() - DMatrix::identity(d, d) * sigma2;
    let raw = (&raw + raw.transpose()) * 0.5;
    let e2 = raw.symmetric_eigen();
    let scale = e2.eigenvalues.amax();
    let lmax = e2.eigenvalues.max();
    let noise = moments.sample_size().map_or(1e-9, |n| (8.0 / (n as f64).sqrt()).max(1e-9));
    if lmax <= noise * sigma2 {
        return Err(Error::Degenerate(format!(
            "second moment carries no signal above the noise (largest eigenvalue {lmax:e}, sigma^2 {sigma2:e})"
        )));
    }
    let mut lambdas = e2.eigenvalues.clone();
    for l in lambdas.iter_mut() {
        if *l < 0.0 {
            if *l < -PSD_CLIP_REL * scale {
                return Err(Error::NotPsd(*l));
            }
            *l = 0.0;
        }
    }
    if lambdas.min() <= 1e-12 * lmax {
        return Err(Error::Singular("M2 is rank deficient; fewer than d separated components".into()));
    }
    let q = &e2.eigenvectors;
    let m2 = q * DMatrix::from_diagonal(&lambdas) * q.transpose();
    let m = q * DMatrix::from_diagonal(&lambdas.map(f64::sqrt)) * q.transpose();
    let m_inv = q * DMatrix::from_diagonal(&lambdas.map(|l| 1.0 / l.sqrt())) * q.transpose();
    Ok(GmmMoments { sigma2, v, m2, m, m_inv })
}

#[derive(Clone, Debug)]
pub struct GmmEstimate {
    pub sigma: f64,
    pub means: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
    /// Mean scale came from the fallback `d_i F(r_i)` instead of the
    /// projection identity.
    pub ambiguous: Vec<bool>,
    /// Set when weights fall outside `[-0.05, ∞)` or their sum outside `[0.9, 1.1]`.
    pub weights_suspect: bool,
    /// Recovered rows of `R`.
    pub rows: RecoveredBasis,
}

/// Full pipeline: moments, cubic BEF oracle, recovery of the rows of `R`,
/// then means and weights.
pub fn gmm_recover<M: MixtureMoments + ?Sized>(moments: &M, options: &GmmOptions) -> Result<GmmEstimate> {
    let d = moments.dim();
    if options.recovery.m_hat != d {
        return Err(Error::InvalidParameter(format!("k = d is required: m_hat {} vs d {d}", options.recovery.m_hat)));
    }
    let mm = gmm_moments(moments)?;
    let oracle = GmmCubicOracle::new(moments, mm.m_inv.clone(), mm.sigma2, options.form)?;
    let rows = robust_gi_recovery(&oracle, &options.recovery)?;
    if rows.has_duplicates() {
        return Err(Error::Degenerate("recovery returned a repeated direction".into()));
    }
    let mean = moments.mean();
    let mean_v = mean.dot(&mm.v);
    let mut means = Vec::with_capacity(d);
    let mut ambiguous = Vec::with_capacity(d);
    for r in &rows.directions {
        let mut r = r.clone();
        let mut f = oracle.value(&r)?;
        if f < 0.0 {
            r = -r;
            f = -f;
        }
        let di = &mm.m * &r;
        let proj = di.dot(&mm.v);
        if proj.abs() > AMBIGUITY_TOL * di.norm() {
            means.push(&di * (mean_v / proj));
            ambiguous.push(false);
        } else {
            means.push(&di * f);
            ambiguous.push(true);
        }
    }
    let a = DMatrix::from_columns(&means);
    let weights: Vec<f64> = a
        .lu()
        .solve(&mean)
        .ok_or_else(|| Error::Singular("recovered means are linearly dependent".into()))?
        .iter()
        .copied()
        .collect();
    let total: f64 = weights.iter().sum();
    let weights_suspect = weights.iter().any(|w| *w < -0.05) || !(0.9..=1.1).contains(&total);
    Ok(GmmEstimate { sigma: mm.sigma2.sqrt(), means, weights, ambiguous, weights_suspect, rows })
}
