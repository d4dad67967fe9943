//! Perturbation-robust recovery: `FindBasisElement` with random jumps,
//! `RobustGI-Recovery`, theoretical parameters and basis matching.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::contrast::RobustnessCertificate;
use crate::error::{Error, Result};
use crate::iteration::{gi_loop_lean, step_raw};
use crate::oracle::GradientOracle;
use crate::seeding::{rng_from_seed, split_seed};
use crate::sphere::{exp_map, orthonormal_complement_tolerant, sample_tangent_sphere, sign_distance, UnitVector};

/// Consecutive converged jump rounds that end the main loop early.
pub const EARLY_EXIT_ROUNDS: usize = 3;
/// `|<u, μ_j>|` above this marks a repeated direction.
pub const DUPLICATE_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryConfig {
    /// Jump radius.
    pub sigma: f64,
    /// Warm-start steps.
    pub n1: usize,
    /// Steps after each jump.
    pub n2: usize,
    /// Number of jumps.
    pub i_max: usize,
    /// Number of directions to recover.
    pub m_hat: usize,
    pub tol: f64,
    pub seed: u64,
    /// Reference control flow: every jump runs, no early exit.
    #[serde(default)]
    pub strict_paper: bool,
}

impl RecoveryConfig {
    /// Practical defaults: `σ = 0.05`, `N1 = 50`, `N2 = 100`, `I = 10 m̂`.
    pub fn practical(m_hat: usize, seed: u64) -> Self {
        Self { sigma: 0.05, n1: 50, n2: 100, i_max: 10 * m_hat.max(1), m_hat, tol: 1e-10, seed, strict_paper: false }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.n2 < 1 {
            return Err(Error::InvalidParameter("n2 must be >= 1".into()));
        }
        if self.i_max < 1 {
            return Err(Error::InvalidParameter("i_max must be >= 1".into()));
        }
        if self.m_hat < 1 || self.m_hat > dim {
            return Err(Error::InvalidParameter(format!("m_hat must be in 1..={dim}, got {}", self.m_hat)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionDiagnostics {
    pub jumps_used: usize,
    /// `min(|Ĝ(u) - u|, |Ĝ(u) + u|)` at the returned point.
    pub residual: f64,
    /// `|∇̂F(u)|` at the returned point.
    pub grad_norm: f64,
    /// `|∇̂F(x_j)|` at the chosen complement vector.
    pub seed_grad_norm: f64,
    pub early_exit: bool,
    /// Index of a previously found direction this one repeats, if any.
    pub duplicate_of: Option<usize>,
    /// Set when the gradient norm is below the significance threshold.
    pub below_threshold: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveredBasis {
    pub directions: Vec<DVector<f64>>,
    pub diagnostics: Vec<DirectionDiagnostics>,
}

impl RecoveredBasis {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn total_jumps(&self) -> usize {
        self.diagnostics.iter().map(|d| d.jumps_used).sum()
    }

    pub fn has_duplicates(&self) -> bool {
        self.diagnostics.iter().any(|d| d.duplicate_of.is_some())
    }

    /// Largest `|<μ_i, μ_j>|` over distinct pairs.
    pub fn max_coherence(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.directions.len() {
            for j in (i + 1)..self.directions.len() {
                worst = worst.max(self.directions[i].dot(&self.directions[j]).abs());
            }
        }
        worst
    }

    /// Marks directions whose gradient norm is at most `threshold`.
    /// With `m̂ > m` these are the directions past the hidden basis.
    pub fn flag_small_gradients(&mut self, threshold: f64) {
        for d in &mut self.diagnostics {
            d.below_threshold = d.grad_norm <= threshold;
        }
    }

    /// Directions neither flagged by [`Self::flag_small_gradients`] nor
    /// repeating an earlier direction.
    pub fn significant(&self) -> Vec<DVector<f64>> {
        self.directions
            .iter()
            .zip(&self.diagnostics)
            .filter(|(_, d)| !d.below_threshold && d.duplicate_of.is_none())
            .map(|(v, _)| v.clone())
            .collect()
    }
}

/// Default significance threshold: `max(10 ε, 1e-6 · max_ℓ |∇̂F(μ_ℓ)|)`.
pub fn default_gradient_threshold(epsilon: f64, grad_norms: &[f64]) -> f64 {
    let max = grad_norms.iter().copied().fold(0.0, f64::max);
    (10.0 * epsilon).max(1e-6 * max)
}

/// Recovers one hidden direction not yet approximated by `found`.
pub fn find_basis_element<O: GradientOracle + ?Sized>(
    oracle: &O,
    found: &[DVector<f64>],
    config: &RecoveryConfig,
) -> Result<(UnitVector, DirectionDiagnostics)> {
    let d = oracle.dim();
    config.validate(d)?;
    if found.len() >= d {
        return Err(Error::InvalidParameter(format!("{} directions already found in dimension {d}", found.len())));
    }
    let mut rng = rng_from_seed(split_seed(config.seed, found.len() as u64));

    let complement = orthonormal_complement_tolerant(found, d);
    if complement.is_empty() {
        return Err(Error::RankDeficient { index: found.len(), residual: 0.0 });
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for (j, x) in complement.iter().enumerate() {
        let n = oracle.gradient(x)?.norm();
        if n > best.1 {
            best = (j, n);
        }
    }
    let (j, seed_grad_norm) = best;

    let stop_tol = if config.strict_paper { 0.0 } else { 0.1 * config.tol };
    let (start, _) = step_raw(oracle, &complement[j])?;
    let mut u = gi_loop_lean(oracle, start, config.n1, stop_tol)?;

    let mut jumps_used = 0;
    let mut calm_rounds = 0;
    let mut early_exit = false;
    for _ in 0..config.i_max {
        let p = UnitVector::new_unchecked(u);
        let x = sample_tangent_sphere(&p, config.sigma, &mut rng)?;
        let w = exp_map(&p, &x)?;
        u = gi_loop_lean(oracle, w.into_vector(), config.n2, stop_tol)?;
        jumps_used += 1;
        if !config.strict_paper {
            let (g, _) = step_raw(oracle, &u)?;
            if sign_distance(&g, &u) <= config.tol {
                calm_rounds += 1;
                if calm_rounds >= EARLY_EXIT_ROUNDS {
                    early_exit = jumps_used < config.i_max;
                    break;
                }
            } else {
                calm_rounds = 0;
            }
        }
    }

    let grad = oracle.gradient(&u)?;
    let grad_norm = grad.norm();
    let (g, _) = step_raw(oracle, &u)?;
    let residual = sign_distance(&g, &u);
    let duplicate_of = found.iter().position(|mu| mu.dot(&u).abs() > DUPLICATE_THRESHOLD);
    let diagnostics = DirectionDiagnostics {
        jumps_used,
        residual,
        grad_norm,
        seed_grad_norm,
        early_exit,
        duplicate_of,
        below_threshold: false,
    };
    Ok((UnitVector::normalize(u)?, diagnostics))
}

/// Runs [`find_basis_element`] `m̂` times, threading found directions.
/// Directions are returned in discovery order, with small-gradient
/// directions flagged by [`default_gradient_threshold`].
pub fn robust_gi_recovery<O: GradientOracle + ?Sized>(oracle: &O, config: &RecoveryConfig) -> Result<RecoveredBasis> {
    config.validate(oracle.dim())?;
    let mut directions = Vec::with_capacity(config.m_hat);
    let mut diagnostics = Vec::with_capacity(config.m_hat);
    for _ in 0..config.m_hat {
        let (u, diag) = find_basis_element(oracle, &directions, config)?;
        directions.push(u.into_vector());
        diagnostics.push(diag);
    }
    let norms: Vec<f64> = diagnostics.iter().map(|d| d.grad_norm).collect();
    let mut out = RecoveredBasis { directions, diagnostics };
    out.flag_small_gradients(default_gradient_threshold(oracle.epsilon(), &norms));
    Ok(out)
}

/// Parameters from the recovery guarantees, with universal constants set to 1
/// except the jump-count constant, which is 8.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoreticalParams {
    pub config: RecoveryConfig,
    /// Small/large coordinate threshold `τ`.
    pub tau: f64,
    /// Steps for small coordinates to reach the `ε` floor.
    pub n_small: usize,
    /// Step size argument of the spread bound.
    pub eta: f64,
    pub n_spread: usize,
    /// Largest `ε` covered by the guarantee.
    pub epsilon_bound: f64,
    pub in_guarantee_regime: bool,
    /// A second, independently derived lower bound on `N2`.
    pub n2_alternative: f64,
    /// Predicted error bound `4√2 δ ε / β`.
    pub error_bound: f64,
}

const EPS_FLOOR: f64 = 1e-16;
pub const JUMP_CONSTANT: f64 = 8.0;

fn ceil_count(x: f64) -> usize {
    if !x.is_finite() || x > 1e15 {
        usize::MAX
    } else if x <= 1.0 {
        1
    } else {
        x.ceil() as usize
    }
}

/// `τ = [βγ/(16αδ) m^{-δ}]^{1/(2γ)}`.
pub fn tau(cert: &RobustnessCertificate, m: usize) -> f64 {
    let RobustnessCertificate { alpha, beta, gamma, delta } = *cert;
    (beta * gamma / (16.0 * alpha * delta) * (m as f64).powf(-delta)).powf(1.0 / (2.0 * gamma))
}

/// `⌈log_{1+2γ}(log2(βγ/(8αδ)) + 2γ log2(β/(4δε)))⌉`, at least 1.
pub fn n_small_coords(cert: &RobustnessCertificate, epsilon: f64) -> usize {
    let RobustnessCertificate { alpha, beta, gamma, delta } = *cert;
    let eps = epsilon.max(EPS_FLOOR);
    let inner = (beta * gamma / (8.0 * alpha * delta)).log2() + 2.0 * gamma * (beta / (4.0 * delta * eps)).log2();
    if inner <= 1.0 {
        return 1;
    }
    ceil_count(inner.ln() / (1.0 + 2.0 * gamma).ln())
}

/// Spread-time bound for step-size argument `η`, including its `2 N_sc` term.
pub fn n_spread(cert: &RobustnessCertificate, m: usize, eta: f64, epsilon: f64) -> usize {
    let RobustnessCertificate { alpha, beta, gamma, delta } = *cert;
    let m = m as f64;
    let ratio = alpha * delta / (beta * gamma);
    let main = 3.0 / (2.0 * eta)
        * ratio.powf(delta / gamma)
        * m.powf(delta / gamma * (delta - gamma))
        * ((4.0 * ratio).ln() / gamma + delta / gamma * m.ln());
    let head = ceil_count(main);
    head.saturating_add(2usize.saturating_mul(n_small_coords(cert, epsilon)))
}

/// `E(η, S)`: the perturbation size up to which one spread step is guaranteed.
pub fn epsilon_diverge(cert: &RobustnessCertificate, m: usize, eta: f64, support: usize) -> f64 {
    let RobustnessCertificate { alpha, beta, gamma, delta } = *cert;
    let s = support as f64;
    9.0 / 256.0
        * (beta / delta)
        * (beta * gamma / (alpha * delta)).powf((2.0 * delta + 1.0) / (2.0 * gamma))
        * s.powf(-(delta / gamma) * (0.5 + delta - gamma) - delta)
        * tau(cert, m).powf(2.0 + 2.0 * delta)
        * eta
}

/// Parameters satisfying the single-recovery guarantee.
pub fn theoretical_params(cert: &RobustnessCertificate, m: usize, d: usize, epsilon: f64, p: f64) -> Result<TheoreticalParams> {
    RobustnessCertificate::new(cert.alpha, cert.beta, cert.gamma, cert.delta)?;
    if m < 1 || d < m || d < 2 {
        return Err(Error::InvalidParameter(format!("need 1 <= m <= d and d >= 2, got m={m}, d={d}")));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("failure probability must be in (0, 1), got {p}")));
    }
    let RobustnessCertificate { alpha, beta, gamma, delta } = *cert;
    let (mf, df) = (m as f64, d as f64);
    let tau = tau(cert, m);
    let sigma = tau * tau / (6.0 * (2.0 * df * (1.0 + 2.0 * delta)).sqrt());
    let n_small = n_small_coords(cert, epsilon);
    let eta = sigma / df.sqrt() * (beta * gamma / (alpha * delta * mf.powf(delta))).powf(1.0 / gamma) * tau * tau;
    let n_spread = n_spread(cert, m, eta, epsilon);
    let n2 = (2 * n_small).saturating_add(n_spread);
    let i_max = ceil_count(JUMP_CONSTANT * mf * (mf / p).ln().ceil().max(1.0));
    let epsilon_bound = epsilon_diverge(cert, m, eta, m) * df.powf(-delta);

    let ratio = alpha * delta / (beta * gamma);
    let small_term = {
        let inner = (beta / (delta * epsilon.max(EPS_FLOOR))).log2();
        if inner <= 1.0 { 1.0 } else { (inner.ln() / (1.0 + 2.0 * gamma).ln()).ceil().max(1.0) }
    };
    let n2_alternative = (4f64.powf(2.0 / gamma)
        * df.sqrt()
        / sigma
        * ratio.powf((delta + 2.0) / gamma)
        * mf.powf(delta / gamma * (delta - gamma + 2.0))
        * (ratio.ln() / gamma + delta / gamma * mf.ln()))
    .ceil()
        + small_term;

    let config = RecoveryConfig { sigma, n1: 2 * n_small, n2, i_max, m_hat: m, tol: 1e-10, seed: 0, strict_paper: true };
    Ok(TheoreticalParams {
        config,
        tau,
        n_small,
        eta,
        n_spread,
        epsilon_bound,
        in_guarantee_regime: epsilon <= epsilon_bound,
        n2_alternative,
        error_bound: 4.0 * 2f64.sqrt() * delta * epsilon / beta,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    /// `permutation[i]` is the truth index matched to recovered direction `i`.
    pub permutation: Vec<Option<usize>>,
    pub signs: Vec<f64>,
    /// `|s_i μ_i - Z_π(i)|` for matched directions.
    pub errors: Vec<Option<f64>>,
    pub max_error: f64,
    pub unmatched_recovered: Vec<usize>,
    pub unmatched_truth: Vec<usize>,
}

/// Greedy sign-aware matching by largest `|<μ_i, Z_j>|`, ties broken by index.
pub fn match_basis(recovered: &[DVector<f64>], truth: &[DVector<f64>]) -> Result<MatchReport> {
    if recovered.is_empty() {
        return Err(Error::InvalidParameter("nothing to match".into()));
    }
    for v in recovered.iter().chain(truth) {
        crate::error::check_dim(recovered[0].len(), v.len())?;
    }
    let mut pairs = Vec::with_capacity(recovered.len() * truth.len());
    for (i, mu) in recovered.iter().enumerate() {
        for (j, z) in truth.iter().enumerate() {
            pairs.push((mu.dot(z).abs(), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut permutation = vec![None; recovered.len()];
    let mut used = vec![false; truth.len()];
    for (_, i, j) in pairs {
        if permutation[i].is_none() && !used[j] {
            permutation[i] = Some(j);
            used[j] = true;
        }
    }
    let mut signs = vec![1.0; recovered.len()];
    let mut errors = vec![None; recovered.len()];
    let mut max_error: f64 = 0.0;
    for (i, mu) in recovered.iter().enumerate() {
        if let Some(j) = permutation[i] {
            let s = if mu.dot(&truth[j]) < 0.0 { -1.0 } else { 1.0 };
            let e = (mu * s - &truth[j]).norm();
            signs[i] = s;
            errors[i] = Some(e);
            max_error = max_error.max(e);
        }
    }
    Ok(MatchReport {
        unmatched_recovered: (0..recovered.len()).filter(|&i| permutation[i].is_none()).collect(),
        unmatched_truth: (0..truth.len()).filter(|&j| !used[j]).collect(),
        permutation,
        signs,
        errors,
        max_error,
    })
}
