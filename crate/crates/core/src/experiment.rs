//! Experiment descriptions and drivers behind the command-line tool.
//!
//! Every run derives all randomness from one root seed. Repeat `k` uses
//! `split_seed(root, k)`, and within a repeat the data, recovery,
//! perturbation and start streams use `split_seed(repeat_seed, stream::*)`.
//! Repeats run in parallel and results are returned in repeat order.

use std::io::Write;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::applications::gmm::{gmm_recover, GmmOptions};
use crate::applications::ica::{ica_oracle, whiten};
use crate::applications::matrix::MatrixOracle;
use crate::applications::samples::SampleMatrix;
use crate::applications::spectral::SpectralOracle;
use crate::bef::{BefSpec, ExactBef};
use crate::contrast::ContrastFunction;
use crate::error::{Error, Result};
use crate::iteration::{residual, run_to_convergence};
use crate::oracle::{perturb_oracle, GradientOracle, PerturbationMode};
use crate::recovery::{match_basis, robust_gi_recovery, theoretical_params, RecoveredBasis, RecoveryConfig};
use crate::seeding::{rng_from_seed, split_seed, stream};
use crate::sphere::UnitVector;
use crate::synth::{random_orthogonal, Generated, GeneratorSpec};
use crate::test_oracles::enumerate_fixed_points;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    SyntheticBef,
    Ica,
    Tensor,
    Spectral,
    Gmm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecoveryPreset {
    /// [`RecoveryConfig::practical`].
    Default,
    /// [`theoretical_params`] from the problem's certificate.
    Theoretical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecoverySetting {
    Preset(RecoveryPreset),
    Config(RecoveryConfig),
}

impl Default for RecoverySetting {
    fn default() -> Self {
        RecoverySetting::Preset(RecoveryPreset::Default)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub epsilon: f64,
    #[serde(default = "default_mode")]
    pub mode: PerturbationMode,
    /// Mixed into the per-repeat perturbation seed.
    #[serde(default)]
    pub seed: u64,
}

fn default_mode() -> PerturbationMode {
    PerturbationMode::DeterministicAdversarial
}

fn one() -> usize {
    1
}

fn default_powers() -> Vec<f64> {
    vec![3.0, 4.0]
}

fn default_starts() -> usize {
    20
}

fn default_failure_threshold() -> f64 {
    0.1
}

fn default_failure_probability() -> f64 {
    0.01
}

/// JSON experiment description shared by all subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub problem: ProblemKind,
    /// Exact BEF for `synthetic-bef` and `fixed-points`.
    #[serde(default)]
    pub bef: Option<BefSpec>,
    /// Draw a fresh random rotation basis for every repeat.
    #[serde(default)]
    pub randomize_basis: bool,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    /// CSV samples, one per row, no header.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub recovery: RecoverySetting,
    #[serde(default)]
    pub perturbation: Option<PerturbationSpec>,
    #[serde(default = "one")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub strict_paper: bool,
    /// A repeat fails when its max matching error exceeds this.
    #[serde(default = "default_failure_threshold")]
    pub failure_threshold: f64,
    /// Failure probability `p` for the theoretical preset.
    #[serde(default = "default_failure_probability")]
    pub failure_probability: f64,
    /// Perturbation sizes for `perturb-sweep`.
    #[serde(default)]
    pub epsilons: Vec<f64>,
    /// Contrast powers for `convergence-order`.
    #[serde(default = "default_powers")]
    pub powers: Vec<f64>,
    /// Dimension for `convergence-order`.
    #[serde(default)]
    pub dimension: Option<usize>,
    /// Random starts per power for `convergence-order`.
    #[serde(default = "default_starts")]
    pub starts: usize,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats < 1 {
            return Err(Error::InvalidParameter("repeats must be >= 1".into()));
        }
        if let Some(p) = &self.perturbation {
            if !(p.epsilon >= 0.0) || !p.epsilon.is_finite() {
                return Err(Error::InvalidParameter(format!("perturbation epsilon must be >= 0, got {}", p.epsilon)));
            }
        }
        if self.epsilons.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
            return Err(Error::InvalidParameter("epsilons must be finite and >= 0".into()));
        }
        if let Some(path) = &self.input {
            if !path.is_file() {
                return Err(Error::InvalidParameter(format!("input file {} does not exist", path.display())));
            }
        }
        Ok(())
    }

    pub fn repeat_seed(&self, repeat: usize) -> u64 {
        split_seed(self.seed, repeat as u64)
    }
}

/// One repeat of `recover`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoverRow {
    pub repeat: usize,
    pub seed: u64,
    pub m: usize,
    pub d: usize,
    pub epsilon: f64,
    /// Empty when there is no ground truth or the repeat errored.
    pub max_error: Option<f64>,
    pub jumps_used: usize,
    pub failed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoverSummary {
    pub repeats: usize,
    pub median_max_error: Option<f64>,
    pub failure_rate: f64,
    pub mean_jumps: f64,
}

pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

/// Linear-interpolation quantile of the finite values.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

pub fn summarize(rows: &[RecoverRow]) -> RecoverSummary {
    let errors: Vec<f64> = rows.iter().filter_map(|r| r.max_error).collect();
    let n = rows.len().max(1) as f64;
    RecoverSummary {
        repeats: rows.len(),
        median_max_error: median(&errors),
        failure_rate: rows.iter().filter(|r| r.failed).count() as f64 / n,
        mean_jumps: rows.iter().map(|r| r.jumps_used as f64).sum::<f64>() / n,
    }
}

struct Outcome {
    m: usize,
    d: usize,
    max_error: Option<f64>,
    jumps: usize,
    clean: bool,
}

fn load_samples(spec: &ExperimentSpec, seed: u64) -> Result<(SampleMatrix, Option<Generated>)> {
    if let Some(path) = &spec.input {
        return Ok((SampleMatrix::from_csv_path(path)?, None));
    }
    let gen = spec
        .generator
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("problem needs a generator or an input file".into()))?;
    let generated = gen.generate(seed)?;
    let samples = generated
        .samples()
        .cloned()
        .ok_or_else(|| Error::InvalidParameter("generator does not produce samples".into()))?;
    Ok((samples, Some(generated)))
}

fn recovery_config(
    spec: &ExperimentSpec,
    cert_source: Option<&ExactBef>,
    m: usize,
    d: usize,
    epsilon: f64,
    seed: u64,
) -> Result<RecoveryConfig> {
    let mut config = match &spec.recovery {
        RecoverySetting::Preset(RecoveryPreset::Default) => RecoveryConfig::practical(m, seed),
        RecoverySetting::Preset(RecoveryPreset::Theoretical) => {
            let bef = cert_source
                .ok_or_else(|| Error::InvalidParameter("theoretical parameters need an exact BEF problem".into()))?;
            let cert = bef.certificate().ok_or_else(|| Error::NotCertified("combined contrasts".into()))?;
            let mut c = theoretical_params(&cert, m, d, epsilon, spec.failure_probability)?.config;
            c.seed = seed;
            c
        }
        RecoverySetting::Config(c) => RecoveryConfig { seed: split_seed(c.seed, seed), ..c.clone() },
    };
    if spec.strict_paper {
        config.strict_paper = true;
    }
    config.validate(d)?;
    Ok(config)
}

fn basis_outcome(found: &RecoveredBasis, truth: Option<&[DVector<f64>]>, d: usize) -> Result<Outcome> {
    let m = truth.map_or(found.len(), <[_]>::len);
    let (max_error, clean) = match truth {
        Some(t) => {
            let r = match_basis(&found.directions, t)?;
            (Some(r.max_error), r.unmatched_truth.is_empty())
        }
        None => (None, true),
    };
    Ok(Outcome { m, d, max_error, jumps: found.total_jumps(), clean: clean && !found.has_duplicates() })
}

fn synthetic_bef(spec: &ExperimentSpec, repeat_seed: u64) -> Result<ExactBef> {
    let bef_spec = spec.bef.as_ref().ok_or_else(|| Error::InvalidParameter("problem needs a bef".into()))?;
    let base = bef_spec.build()?;
    if !spec.randomize_basis {
        return Ok(base);
    }
    let q = random_orthogonal(base.dim(), &mut rng_from_seed(split_seed(repeat_seed, stream::DATA)));
    ExactBef::new((0..base.m()).map(|i| q.column(i).into_owned()).collect(), base.contrasts().to_vec())
}

fn recover_exact<O: GradientOracle>(
    spec: &ExperimentSpec,
    oracle: O,
    bef: &ExactBef,
    epsilon: f64,
    repeat_seed: u64,
) -> Result<Outcome> {
    let d = bef.dim();
    let config = recovery_config(spec, Some(bef), bef.m(), d, epsilon, split_seed(repeat_seed, stream::RECOVERY))?;
    let run = |o: &dyn GradientOracle| -> Result<Outcome> {
        let found = robust_gi_recovery(o, &config)?;
        basis_outcome(&found, Some(bef.basis()), d)
    };
    match &spec.perturbation {
        Some(p) if epsilon > 0.0 => {
            let po = perturb_oracle(oracle, epsilon, p.mode, split_seed(repeat_seed ^ p.seed, stream::PERTURBATION))?;
            run(&po)
        }
        None if epsilon > 0.0 => {
            let po = perturb_oracle(oracle, epsilon, default_mode(), split_seed(repeat_seed, stream::PERTURBATION))?;
            run(&po)
        }
        _ => run(&oracle),
    }
}

fn mean_matching_error(est: &[DVector<f64>], truth: &[DVector<f64>]) -> (f64, bool) {
    let mut used = vec![false; truth.len()];
    let mut worst: f64 = 0.0;
    for e in est {
        let best = (0..truth.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (e - &truth[a]).norm().total_cmp(&(e - &truth[b]).norm()));
        match best {
            Some(j) => {
                used[j] = true;
                worst = worst.max((e - &truth[j]).norm() / truth[j].norm().max(f64::MIN_POSITIVE));
            }
            None => return (f64::INFINITY, false),
        }
    }
    (worst, used.iter().all(|u| *u))
}

fn run_repeat(spec: &ExperimentSpec, repeat: usize, epsilon: f64) -> Result<Outcome> {
    let seed = spec.repeat_seed(repeat);
    let data_seed = split_seed(seed, stream::DATA);
    let rec_seed = split_seed(seed, stream::RECOVERY);
    match spec.problem {
        ProblemKind::SyntheticBef => {
            let bef = synthetic_bef(spec, seed)?;
            recover_exact(spec, bef.clone(), &bef, epsilon, seed)
        }
        ProblemKind::Tensor => {
            let gen = spec.generator.as_ref().ok_or_else(|| Error::InvalidParameter("tensor needs a generator".into()))?;
            let Generated::Odeco { tensor } = gen.generate(data_seed)? else {
                return Err(Error::InvalidParameter("tensor problems need an odeco generator".into()));
            };
            let bef = tensor.to_bef()?;
            recover_exact(spec, tensor, &bef, epsilon, seed)
        }
        ProblemKind::Ica => {
            let (x, generated) = load_samples(spec, data_seed)?;
            let (white, transform) = whiten(&x)?;
            let oracle = ica_oracle(white)?;
            let d = oracle.dim();
            let config = recovery_config(spec, None, d, d, 0.0, rec_seed)?;
            let mut found = robust_gi_recovery(&oracle, &config)?;
            found.directions = found.directions.iter().map(|u| transform.mixing_column(u)).collect();
            let truth: Option<Vec<DVector<f64>>> = match generated {
                Some(Generated::Ica { mixing, .. }) => Some((0..d).map(|i| mixing.column(i).into_owned()).collect()),
                _ => None,
            };
            basis_outcome(&found, truth.as_deref(), d)
        }
        ProblemKind::Spectral => {
            let (points, generated) = load_samples(spec, data_seed)?;
            let oracle = SpectralOracle::with_default_contrast(&points)?;
            let d = oracle.dim();
            let truth = match generated {
                Some(Generated::Spectral { directions, .. }) => Some(directions),
                _ => None,
            };
            let m = match (&spec.recovery, &truth) {
                (RecoverySetting::Config(c), _) => c.m_hat,
                (_, Some(t)) => t.len(),
                _ => d,
            };
            let config = recovery_config(spec, None, m, d, 0.0, rec_seed)?;
            let found = robust_gi_recovery(&oracle, &config)?;
            basis_outcome(&found, truth.as_deref(), d)
        }
        ProblemKind::Gmm => {
            let (x, generated) = load_samples(spec, data_seed)?;
            let d = x.d();
            let config = recovery_config(spec, None, d, d, 0.0, rec_seed)?;
            let est = gmm_recover(&x, &GmmOptions { recovery: config, form: Default::default() })?;
            let (max_error, clean) = match generated {
                Some(Generated::Gmm { means, .. }) => {
                    let (e, ok) = mean_matching_error(&est.means, &means);
                    (Some(e), ok)
                }
                _ => (None, true),
            };
            Ok(Outcome { m: d, d, max_error, jumps: est.rows.total_jumps(), clean: clean && !est.weights_suspect })
        }
    }
}

fn recover_rows(spec: &ExperimentSpec, epsilon: f64) -> Vec<RecoverRow> {
    (0..spec.repeats)
        .into_par_iter()
        .map(|repeat| {
            let seed = spec.repeat_seed(repeat);
            match run_repeat(spec, repeat, epsilon) {
                Ok(o) => RecoverRow {
                    repeat,
                    seed,
                    m: o.m,
                    d: o.d,
                    epsilon,
                    failed: !o.clean || o.max_error.is_some_and(|e| !(e <= spec.failure_threshold)),
                    max_error: o.max_error,
                    jumps_used: o.jumps,
                },
                Err(_) => RecoverRow { repeat, seed, m: 0, d: 0, epsilon, max_error: None, jumps_used: 0, failed: true },
            }
        })
        .collect()
}

/// Problem-level checks that should surface as configuration errors rather
/// than per-repeat failures.
fn preflight(spec: &ExperimentSpec) -> Result<()> {
    match spec.problem {
        ProblemKind::SyntheticBef => {
            synthetic_bef(spec, spec.seed)?;
        }
        ProblemKind::Tensor => {
            if !matches!(spec.generator, Some(GeneratorSpec::Odeco { .. })) {
                return Err(Error::InvalidParameter("tensor problems need an odeco generator".into()));
            }
        }
        ProblemKind::Ica | ProblemKind::Spectral | ProblemKind::Gmm => {
            if spec.input.is_none() && spec.generator.is_none() {
                return Err(Error::InvalidParameter("problem needs a generator or an input file".into()));
            }
            if spec.perturbation.is_some() {
                return Err(Error::InvalidParameter("perturbation applies only to exact oracles".into()));
            }
        }
    }
    if matches!(spec.recovery, RecoverySetting::Preset(RecoveryPreset::Theoretical))
        && !matches!(spec.problem, ProblemKind::SyntheticBef | ProblemKind::Tensor)
    {
        return Err(Error::InvalidParameter("theoretical parameters need an exact BEF problem".into()));
    }
    Ok(())
}

/// `recover`: one row per repeat.
pub fn run_recover(spec: &ExperimentSpec) -> Result<(Vec<RecoverRow>, RecoverSummary)> {
    spec.validate()?;
    preflight(spec)?;
    let eps = spec.perturbation.map_or(0.0, |p| p.epsilon);
    let rows = recover_rows(spec, eps);
    let summary = summarize(&rows);
    Ok((rows, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub median_error: Option<f64>,
    pub p90_error: Option<f64>,
    pub failures: usize,
    pub repeats: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    /// Least-squares slope of `log median_error` against `log ε` over `ε > 0`.
    pub loglog_slope: Option<f64>,
    /// `max_ε median_error / ε` over `ε > 0`.
    pub max_error_ratio: Option<f64>,
}

pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `perturb-sweep`: `repeats` recoveries at each `ε` in `spec.epsilons`.
pub fn run_perturbation_sweep(spec: &ExperimentSpec) -> Result<(Vec<SweepRow>, SweepSummary)> {
    spec.validate()?;
    preflight(spec)?;
    if !matches!(spec.problem, ProblemKind::SyntheticBef | ProblemKind::Tensor) {
        return Err(Error::InvalidParameter("perturbation sweeps need an exact BEF problem".into()));
    }
    if spec.epsilons.is_empty() {
        return Err(Error::InvalidParameter("perturbation sweep needs a non-empty epsilons list".into()));
    }
    let rows: Vec<SweepRow> = spec
        .epsilons
        .iter()
        .map(|&eps| {
            let rows = recover_rows(spec, eps);
            let errors: Vec<f64> = rows.iter().filter_map(|r| r.max_error).collect();
            SweepRow {
                epsilon: eps,
                median_error: median(&errors),
                p90_error: quantile(&errors, 0.9),
                failures: rows.iter().filter(|r| r.failed).count(),
                repeats: rows.len(),
            }
        })
        .collect();
    let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.median_error.map(|m| (r.epsilon, m))).collect();
    let max_error_ratio = pts.iter().filter(|p| p.0 > 0.0).map(|p| p.1 / p.0).reduce(f64::max);
    Ok((rows, SweepSummary { loglog_slope: loglog_slope(&pts), max_error_ratio }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    /// `bef` or `matrix`.
    pub kind: String,
    pub power: f64,
    pub start: usize,
    pub order: Option<f64>,
    /// Median of `e_{n+1} / e_n` over the usable residuals.
    pub observed_rate: Option<f64>,
    /// `|λ₂/λ₁|` for the matrix case.
    pub predicted_rate: Option<f64>,
    pub converged: bool,
}

fn residual_sequence<O: GradientOracle + ?Sized>(oracle: &O, u0: &UnitVector, steps: usize) -> Result<Vec<f64>> {
    let mut u = u0.clone();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let e = residual(oracle, &u)?;
        out.push(e);
        if e <= crate::iteration::ORDER_NOISE_FLOOR {
            break;
        }
        u = crate::iteration::gi_step(oracle, &u)?;
    }
    Ok(out)
}

fn median_ratio(errors: &[f64]) -> Option<f64> {
    let usable: Vec<f64> = errors.iter().copied().take_while(|e| *e > crate::iteration::ORDER_NOISE_FLOOR).collect();
    let ratios: Vec<f64> = usable.windows(2).map(|w| w[1] / w[0]).collect();
    median(&ratios)
}

/// Eigenvalues used for the matrix border case: `1, 0.6, 0.6², ...`.
pub const MATRIX_RATE: f64 = 0.6;

/// `convergence-order`: order estimates for canonical monomial BEFs with
/// random weights in `[0.5, 2]` and for a symmetric matrix with
/// `|λ₂/λ₁| = 0.6`.
pub fn run_convergence_order(spec: &ExperimentSpec) -> Result<Vec<OrderRow>> {
    spec.validate()?;
    let d = spec.dimension.unwrap_or(8);
    if d < 2 {
        return Err(Error::InvalidParameter("dimension must be >= 2".into()));
    }
    if spec.starts < 1 {
        return Err(Error::InvalidParameter("starts must be >= 1".into()));
    }
    for &r in &spec.powers {
        ContrastFunction::monomial(1.0, r)?;
    }
    let mut jobs: Vec<(Option<f64>, usize)> = spec.powers.iter().flat_map(|&r| (0..spec.starts).map(move |s| (Some(r), s))).collect();
    jobs.extend((0..spec.starts).map(|s| (None, s)));
    jobs.into_par_iter()
        .enumerate()
        .map(|(job, (power, start))| {
            let seed = split_seed(spec.repeat_seed(job), stream::START);
            let mut rng = rng_from_seed(seed);
            let q = random_orthogonal(d, &mut rng);
            let u0 = {
                use rand::Rng;
                UnitVector::normalize(DVector::from_fn(d, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal)))?
            };
            match power {
                Some(r) => {
                    let contrasts = (0..d)
                        .map(|_| {
                            use rand::Rng;
                            ContrastFunction::monomial(0.5 + 1.5 * rng.random::<f64>(), r)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let bef = ExactBef::new((0..d).map(|i| q.column(i).into_owned()).collect(), contrasts)?;
                    let report = run_to_convergence(&bef, &u0, 1e-15, 500)?;
                    let errors = residual_sequence(&bef, &u0, 500)?;
                    Ok(OrderRow {
                        kind: "bef".into(),
                        power: r,
                        start,
                        order: report.estimated_order,
                        observed_rate: median_ratio(&errors),
                        predicted_rate: None,
                        converged: report.final_residual <= 1e-8,
                    })
                }
                None => {
                    let lambdas = DVector::from_fn(d, |i, _| MATRIX_RATE.powi(i as i32));
                    let a = &q * DMatrix::from_diagonal(&lambdas) * q.transpose();
                    let oracle = MatrixOracle::new((&a + a.transpose()) * 0.5)?;
                    let report = run_to_convergence(&oracle, &u0, 1e-15, 500)?;
                    let errors = residual_sequence(&oracle, &u0, 500)?;
                    Ok(OrderRow {
                        kind: "matrix".into(),
                        power: 2.0,
                        start,
                        order: report.estimated_order,
                        observed_rate: median_ratio(&errors),
                        predicted_rate: Some(MATRIX_RATE),
                        converged: report.final_residual <= 1e-8,
                    })
                }
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointRow {
    pub support: Vec<usize>,
    pub point: UnitVector,
    pub residual: f64,
}

/// `fixed-points`: every support's fixed point for the configured BEF.
pub fn run_fixed_points(spec: &ExperimentSpec, tol: f64) -> Result<Vec<FixedPointRow>> {
    spec.validate()?;
    let bef = synthetic_bef(spec, spec.repeat_seed(0))?;
    enumerate_fixed_points(&bef, tol)?
        .into_iter()
        .map(|(support, point)| Ok(FixedPointRow { residual: residual(&bef, &point)?, support, point }))
        .collect()
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// Serializes rows with a header line.
pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fixed_points<W: Write>(out: W, rows: &[FixedPointRow]) -> Result<()> {
    let d = rows.first().map_or(0, |r| r.point.dim());
    let mut w = csv_writer(out);
    let mut header = vec!["support".to_string(), "residual".to_string()];
    header.extend((0..d).map(|i| format!("u_{i}")));
    w.write_record(&header)?;
    for r in rows {
        let support = r.support.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        let mut rec = vec![support, r.residual.to_string()];
        rec.extend(r.point.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `gen`: samples as headerless CSV (the input format), or an ODECO tensor
/// as `weight, z_0..z_{d-1}` rows with a header.
pub fn write_generated<W: Write>(out: W, generated: &Generated) -> Result<()> {
    match generated {
        Generated::Odeco { tensor } => {
            let mut w = csv_writer(out);
            let mut header = vec!["weight".to_string()];
            header.extend((0..tensor.dim()).map(|i| format!("z_{i}")));
            w.write_record(&header)?;
            for (wt, z) in tensor.weights().iter().zip(tensor.directions()) {
                let mut rec = vec![wt.to_string()];
                rec.extend(z.iter().map(|x| x.to_string()));
                w.write_record(&rec)?;
            }
            w.flush()?;
            Ok(())
        }
        other => other.samples().expect("sample generators").write_csv(out),
    }
}

/// `gen`: the configured generator at the root seed.
pub fn run_generate(spec: &ExperimentSpec) -> Result<Generated> {
    spec.validate()?;
    let gen = spec.generator.as_ref().ok_or_else(|| Error::InvalidParameter("gen needs a generator".into()))?;
    gen.generate(spec.seed)
}
