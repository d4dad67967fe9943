//! The gradient iteration `G(u) = ∇F(u)/|∇F(u)|` and tools around it.

use std::io::Write;

use nalgebra::DVector;
use serde::Serialize;

use crate::bef::ExactBef;
use crate::error::{check_dim, Error, Result};
use crate::oracle::GradientOracle;
use crate::sphere::{sign_distance, UnitVector};

/// Gradient norms at or below this are treated as `∇F(u) = 0`.
pub const ZERO_GRAD_TOL: f64 = 1e-14;
pub const DEFAULT_TOL: f64 = 1e-10;
/// Errors below this are dropped by [`estimate_convergence_order`].
pub const ORDER_NOISE_FLOOR: f64 = 1e-13;

/// Applies `G` to a raw vector and returns `(G(u), |∇F(u)|)`.
pub(crate) fn step_raw<O: GradientOracle + ?Sized>(oracle: &O, u: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let g = oracle.gradient(u)?;
    let n = g.norm();
    if !n.is_finite() {
        return Err(Error::OutOfDomain("oracle returned a non-finite gradient".into()));
    }
    if n <= ZERO_GRAD_TOL {
        return Ok((u.clone(), n));
    }
    Ok((g / n, n))
}

pub fn gi_step<O: GradientOracle + ?Sized>(oracle: &O, u: &UnitVector) -> Result<UnitVector> {
    check_dim(oracle.dim(), u.dim())?;
    let (next, _) = step_raw(oracle, u)?;
    Ok(UnitVector::new_unchecked(next))
}

/// `min(|G(u) - u|, |G(u) + u|)`.
pub fn residual<O: GradientOracle + ?Sized>(oracle: &O, u: &UnitVector) -> Result<f64> {
    let (g, _) = step_raw(oracle, u)?;
    Ok(sign_distance(&g, u))
}

/// Per-step record of a gradient-iteration run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct IterationTrace {
    /// `u(0), ..., u(n)`.
    pub states: Vec<DVector<f64>>,
    /// `|∇F(u(k))|` for each recorded state.
    pub grad_norms: Vec<f64>,
    pub class_dists_to_limit: Option<Vec<f64>>,
    pub steps: usize,
}

impl IterationTrace {
    /// Fills `class_dists_to_limit` against `limit` in the given basis.
    pub fn attach_class_distances(&mut self, limit: &DVector<f64>, basis: &[DVector<f64>]) -> Result<()> {
        let dists = self
            .states
            .iter()
            .map(|s| crate::sphere::class_distance(s, limit, basis))
            .collect::<Result<Vec<_>>>()?;
        self.class_dists_to_limit = Some(dists);
        Ok(())
    }

    /// CSV with columns `step, u_0..u_{d-1}, grad_norm`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let d = self.states.first().map_or(0, |s| s.len());
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["step".to_string()];
        header.extend((0..d).map(|i| format!("u_{i}")));
        header.push("grad_norm".into());
        w.write_record(&header)?;
        for (k, (s, g)) in self.states.iter().zip(&self.grad_norms).enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(s.iter().map(|x| x.to_string()));
            row.push(g.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `n` steps from `u0`, recording every state and its gradient norm.
pub fn gi_loop<O: GradientOracle + ?Sized>(oracle: &O, u0: &UnitVector, n: usize) -> Result<(UnitVector, IterationTrace)> {
    check_dim(oracle.dim(), u0.dim())?;
    let mut trace = IterationTrace { states: Vec::with_capacity(n + 1), grad_norms: Vec::with_capacity(n + 1), ..Default::default() };
    let mut u = u0.as_vector().clone();
    for _ in 0..n {
        let (next, norm) = step_raw(oracle, &u)?;
        trace.states.push(std::mem::replace(&mut u, next));
        trace.grad_norms.push(norm);
    }
    let last_norm = oracle.gradient(&u)?.norm();
    trace.states.push(u.clone());
    trace.grad_norms.push(last_norm);
    trace.steps = n;
    Ok((UnitVector::new_unchecked(u), trace))
}

/// Up to `n` steps without a trace. Stops once `G(u) == u` bit for bit, or
/// once a step moves the sign class by at most `stop_tol` (pass 0 to run
/// every step that changes `u`).
pub(crate) fn gi_loop_lean<O: GradientOracle + ?Sized>(oracle: &O, u: DVector<f64>, n: usize, stop_tol: f64) -> Result<DVector<f64>> {
    let mut u = u;
    for _ in 0..n {
        let (next, _) = step_raw(oracle, &u)?;
        if next == u {
            break;
        }
        let settled = stop_tol > 0.0 && sign_distance(&next, &u) <= stop_tol;
        u = next;
        if settled {
            break;
        }
    }
    Ok(u)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub limit: UnitVectorRepr,
    pub steps: usize,
    pub final_residual: f64,
    pub estimated_order: Option<f64>,
}

/// Serializable view of the limit point.
#[derive(Clone, Debug, Serialize)]
#[serde(transparent)]
pub struct UnitVectorRepr(pub Vec<f64>);

impl ConvergenceReport {
    pub fn limit_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.limit.0)
    }
}

/// Iterates until `min(|G(u) - u|, |G(u) + u|) <= tol` or `max_steps` is spent.
///
/// `steps` counts applications of `G`; the limit is the last iterate. When
/// enough residuals sit above the noise floor an order estimate is attached.
pub fn run_to_convergence<O: GradientOracle + ?Sized>(oracle: &O, u0: &UnitVector, tol: f64, max_steps: usize) -> Result<ConvergenceReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    check_dim(oracle.dim(), u0.dim())?;
    let mut u = u0.as_vector().clone();
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut steps = 0;
    let mut final_residual = f64::INFINITY;
    while steps < max_steps.max(1) {
        let (next, _) = step_raw(oracle, &u)?;
        final_residual = sign_distance(&next, &u);
        residuals.push(final_residual);
        u = next;
        steps += 1;
        if final_residual <= tol {
            converged = true;
            break;
        }
    }
    let estimated_order = estimate_convergence_order(&residuals).ok();
    Ok(ConvergenceReport { converged, limit: UnitVectorRepr(u.as_slice().to_vec()), steps, final_residual, estimated_order })
}

/// Least-squares slope of `log e_{n+1}` against `log e_n`.
///
/// The sequence is cut at the first value below [`ORDER_NOISE_FLOOR`]; at
/// least four values must remain.
pub fn estimate_convergence_order(errors: &[f64]) -> Result<f64> {
    let usable: Vec<f64> = errors.iter().copied().take_while(|&e| e > ORDER_NOISE_FLOOR && e.is_finite()).collect();
    if usable.len() < 4 {
        return Err(Error::TooFewPoints { needed: 4, have: usable.len() });
    }
    let xs: Vec<f64> = usable[..usable.len() - 1].iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = usable[1..].iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Degenerate("error sequence is constant".into()));
    }
    Ok(sxy / sxx)
}

/// Projected gradient ascent with the adaptive step `η = 1/<u, ∇F(u)>`.
///
/// Equals `gi_step` whenever `<u, ∇F(u)> > 0` and `-gi_step` when it is negative.
pub fn adaptive_ascent_step<O: GradientOracle + ?Sized>(oracle: &O, u: &UnitVector) -> Result<UnitVector> {
    check_dim(oracle.dim(), u.dim())?;
    let g = oracle.gradient(u)?;
    let ip = u.dot(&g);
    if ip == 0.0 || !ip.is_finite() {
        return Err(Error::Degenerate("<u, ∇F(u)> vanishes; the adaptive step is undefined".into()));
    }
    let projected = &g - u.as_vector() * ip;
    let next = u.as_vector() + projected / ip;
    UnitVector::normalize(next)
}

/// `max_i |h_i'(<u, Z_i>^2)|`, the progress measure of the exact iteration.
pub fn progress_measure(bef: &ExactBef, u: &DVector<f64>) -> Result<f64> {
    let coords = bef.coords(u)?;
    Ok(coords
        .iter()
        .zip(bef.contrasts())
        .map(|(c, g)| g.h_transform().dh(c * c).abs())
        .fold(0.0, f64::max))
}

/// The fixed point of `G` (up to sign) supported exactly on `support`, in the
/// positive orthant of the hidden coordinates.
///
/// Solves `|h_i'(v_i^2)| = λ` for all `i` in the support with `Σ v_i^2 = 1`.
/// A greedy mass allocation gives a starting bracket for `λ`, which is then
/// refined by bisection. When the `h_i'` differ in sign the point is a fixed
/// point of the sign-class dynamics.
pub fn fixed_point_for_support(bef: &ExactBef, support: &[usize], tol: f64) -> Result<UnitVector> {
    if support.is_empty() {
        return Err(Error::InvalidParameter("support must be non-empty".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != support.len() {
        return Err(Error::InvalidParameter("support has repeated indices".into()));
    }
    let mut hs = Vec::with_capacity(support.len());
    for &i in support {
        let g = bef.contrasts().get(i).ok_or(Error::IndexOutOfRange { index: i, dim: bef.m() })?;
        if g.certificate().is_none() {
            return Err(Error::NotCertified(format!("contrast {i} ({}) has no robustness certificate", g.name())));
        }
        hs.push(g.h_transform());
    }
    let phi = |k: usize, t: f64| hs[k].dh(t).abs();

    let t = if hs.len() == 1 {
        vec![1.0]
    } else {
        // Greedy allocation: repeatedly give mass 1/N to the smallest |h_k'|.
        let n_mass = 1000usize;
        let mut t = vec![0.0; hs.len()];
        for _ in 0..n_mass {
            let k = (0..hs.len())
                .min_by(|&a, &b| phi(a, t[a]).total_cmp(&phi(b, t[b])).then(a.cmp(&b)))
                .unwrap();
            t[k] += 1.0 / n_mass as f64;
        }
        let invert = |k: usize, level: f64| -> f64 {
            if phi(k, 1.0) <= level {
                return 1.0;
            }
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if phi(k, mid) < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let total = |level: f64| (0..hs.len()).map(|k| invert(k, level)).sum::<f64>();
        let step = 1.0 / n_mass as f64;
        let mut lo = (0..hs.len()).map(|k| phi(k, (t[k] - step).max(0.0))).fold(f64::INFINITY, f64::min);
        let mut hi = (0..hs.len()).map(|k| phi(k, (t[k] + step).min(1.0))).fold(0.0, f64::max);
        if !(total(lo) <= 1.0 && total(hi) >= 1.0) {
            lo = 0.0;
            hi = (0..hs.len()).map(|k| phi(k, 1.0)).fold(0.0, f64::max);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if total(mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let level = 0.5 * (lo + hi);
        let mut t: Vec<f64> = (0..hs.len()).map(|k| invert(k, level)).collect();
        let s: f64 = t.iter().sum();
        t.iter_mut().for_each(|x| *x /= s);
        let spread = {
            let vals: Vec<f64> = (0..hs.len()).map(|k| phi(k, t[k])).collect();
            let max = vals.iter().copied().fold(0.0, f64::max);
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            max - min
        };
        if spread > tol * level.max(1.0) {
            return Err(Error::Degenerate(format!("fixed-point level spread {spread:e} exceeds tolerance {tol:e}")));
        }
        t
    };
    // Magnitudes fix the class. Within it, pick coordinate signs so that
    // g_i'(x_i)/x_i shares one sign and G(u) = ±u holds exactly, if possible.
    let build = |signs: &[f64]| -> DVector<f64> {
        let mut v = DVector::zeros(bef.dim());
        for (k, &i) in support.iter().enumerate() {
            v.axpy(signs[k] * t[k].sqrt(), &bef.basis()[i], 1.0);
        }
        v
    };
    let ratio = |k: usize, s: f64| {
        let x = s * t[k].sqrt();
        bef.contrasts()[support[k]].dg(x) / x
    };
    let mut best = build(&vec![1.0; support.len()]);
    let mut best_res = sign_distance(&step_raw(bef, &best)?.0, &best);
    for target in [1.0, -1.0] {
        let signs: Option<Vec<f64>> = (0..support.len())
            .map(|k| [1.0, -1.0].into_iter().find(|&s| ratio(k, s) * target > 0.0))
            .collect();
        if let Some(signs) = signs {
            let v = build(&signs);
            let res = sign_distance(&step_raw(bef, &v)?.0, &v);
            if res < best_res {
                (best, best_res) = (v, res);
            }
        }
    }
    UnitVector::normalize(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::applications::matrix::MatrixOracle;
    use crate::contrast::ContrastFunction;
    use crate::seeding::rng_from_seed;
    use nalgebra::DMatrix;
    use rand::Rng;

    fn quartic(d: usize) -> ExactBef {
        ExactBef::canonical(d, vec![ContrastFunction::monomial(1.0, 4.0).unwrap(); d]).unwrap()
    }

    fn uv(v: &[f64]) -> UnitVector {
        UnitVector::normalize(DVector::from_column_slice(v)).unwrap()
    }

    fn random_unit(d: usize, rng: &mut impl Rng) -> UnitVector {
        uv(&(0..d).map(|_| rng.random::<f64>() - 0.5).collect::<Vec<_>>())
    }

    #[test]
    fn step_examples() {
        let bef = quartic(2);
        let s = gi_step(&bef, &uv(&[0.8, 0.6])).unwrap();
        let n = (0.512f64 * 0.512 + 0.216 * 0.216).sqrt();
        assert_close!(s[0], 0.512 / n, 1e-15);
        assert_close!(s[1], 0.216 / n, 1e-15);
        let e1 = UnitVector::canonical(2, 0);
        assert_eq!(gi_step(&bef, &e1).unwrap(), e1);

        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]));
        let m = MatrixOracle::new(a.clone()).unwrap();
        let u = uv(&[1.0, 1.0]);
        let s = gi_step(&m, &u).unwrap();
        let au = &a * u.as_vector();
        let pm = &au / au.norm();
        assert_close!(s[0], 0.948683, 1e-6);
        assert_close!(s[1], 0.316228, 1e-6);
        assert!((s.as_vector() - pm).norm() <= 1e-15);
    }

    #[test]
    fn zero_gradient_is_fixed() {
        let bef = ExactBef::canonical(3, vec![ContrastFunction::monomial(1.0, 4.0).unwrap()]).unwrap();
        let u = UnitVector::canonical(3, 2);
        assert_eq!(gi_step(&bef, &u).unwrap(), u);
    }

    #[test]
    fn loop_examples() {
        let bef = quartic(2);
        let u0 = uv(&[0.8, 0.6]);
        let (u, trace) = gi_loop(&bef, &u0, 0).unwrap();
        assert_eq!(u, u0);
        assert_eq!(trace.states.len(), 1);

        let (_, trace) = gi_loop(&bef, &u0, 3).unwrap();
        let ratios: Vec<f64> = trace.states.iter().map(|s| s[1] / s[0]).collect();
        // rho <- rho^3 for r = 4
        let mut want = 0.75f64;
        for got in &ratios {
            assert!((got - want).abs() <= 1e-13, "{got} vs {want}");
            want = want.powi(3);
        }
        let z2 = UnitVector::canonical(2, 1);
        let (_, trace) = gi_loop(&bef, &z2, 5).unwrap();
        assert!(trace.states.iter().all(|s| s == z2.as_vector()));
        assert_eq!(trace.grad_norms.len(), trace.states.len());
    }

    #[test]
    fn lean_loop_matches_traced_loop() {
        let bef = quartic(5);
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            let u0 = random_unit(5, &mut rng);
            let (u, _) = gi_loop(&bef, &u0, 30).unwrap();
            let lean = gi_loop_lean(&bef, u0.into_vector(), 30, 0.0).unwrap();
            assert_eq!(u.as_vector(), &lean);
        }
    }

    #[test]
    fn trace_csv_layout() {
        let bef = quartic(2);
        let (_, trace) = gi_loop(&bef, &uv(&[0.8, 0.6]), 2).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,u_0,u_1,grad_norm");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,0.8,0.6"));
    }

    #[test]
    fn convergence_examples() {
        let bef = quartic(2);
        let r = run_to_convergence(&bef, &UnitVector::canonical(2, 0), 1e-10, 100).unwrap();
        assert!(r.converged && r.steps <= 1);

        let sym = uv(&[1.0, 1.0]);
        let r = run_to_convergence(&bef, &sym, 1e-10, 100).unwrap();
        assert!(r.converged);
        assert!((r.limit_vector() - sym.as_vector()).norm() <= 1e-15);

        let bef = quartic(8);
        let mut rng = rng_from_seed(12);
        let mut steps = Vec::new();
        for _ in 0..50 {
            let r = run_to_convergence(&bef, &random_unit(8, &mut rng), 1e-10, 200).unwrap();
            assert!(r.converged);
            let lim = r.limit_vector();
            assert_close!(lim.amax(), 1.0, 1e-9);
            steps.push(r.steps);
        }
        steps.sort_unstable();
        assert!(steps[25] <= 12, "median steps {}", steps[25]);

        let r = run_to_convergence(&bef, &UnitVector::canonical(8, 0), 1e-10, 0).unwrap();
        assert!(r.converged);
        assert!(run_to_convergence(&bef, &UnitVector::canonical(8, 0), 0.0, 10).is_err());
    }

    #[test]
    fn max_steps_exhaustion_is_not_an_error() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.999]));
        let m = MatrixOracle::new(a).unwrap();
        let r = run_to_convergence(&m, &uv(&[1.0, 1.0]), 1e-12, 5).unwrap();
        assert!(!r.converged);
        assert_eq!(r.steps, 5);
    }

    #[test]
    fn order_estimator_examples() {
        let cubic: Vec<f64> = (0..4).map(|n| 0.5f64.powi(3i32.pow(n))).collect();
        assert_close!(estimate_convergence_order(&cubic).unwrap(), 3.0, 0.01);
        let linear: Vec<f64> = (0..20).map(|n| 0.5 * 0.5f64.powi(n)).collect();
        assert_close!(estimate_convergence_order(&linear).unwrap(), 1.0, 1e-9);
        assert!(estimate_convergence_order(&[0.5, 0.1, 1e-14, 1e-20]).is_err());
    }

    #[test]
    fn adaptive_step_matches_gi_step() {
        let mut rng = rng_from_seed(9);
        let bef = ExactBef::canonical(
            4,
            vec![
                ContrastFunction::monomial(1.0, 4.0).unwrap(),
                ContrastFunction::monomial(2.0, 3.0).unwrap(),
                ContrastFunction::cosh(1.0).unwrap(),
                ContrastFunction::monomial(0.5, 6.0).unwrap(),
            ],
        )
        .unwrap();
        for _ in 0..100 {
            let u = random_unit(4, &mut rng);
            let a = adaptive_ascent_step(&bef, &u).unwrap();
            let g = gi_step(&bef, &u).unwrap();
            let sign = u.dot(&bef.gradient(&u).unwrap()).signum();
            assert!((a.as_vector() - g.as_vector() * sign).norm() <= 1e-12);
        }
        let e = UnitVector::canonical(4, 2);
        assert!((adaptive_ascent_step(&bef, &e).unwrap().as_vector() - e.as_vector()).norm() <= 1e-15);
        let s = adaptive_ascent_step(&quartic(2), &uv(&[0.8, 0.6])).unwrap();
        assert_close!(s[0], 0.512 / (0.512f64 * 0.512 + 0.216 * 0.216).sqrt(), 1e-12);
        assert_close!(s[1], 0.216 / (0.512f64 * 0.512 + 0.216 * 0.216).sqrt(), 1e-12);
    }

    #[test]
    fn fixed_point_examples() {
        let bef = quartic(2);
        let v = fixed_point_for_support(&bef, &[0, 1], 1e-12).unwrap();
        assert_close!(v[0], 0.5f64.sqrt(), 1e-12);
        assert_close!(v[1], 0.5f64.sqrt(), 1e-12);

        let weighted = ExactBef::canonical(
            2,
            vec![ContrastFunction::monomial(1.0, 4.0).unwrap(), ContrastFunction::monomial(2.0, 4.0).unwrap()],
        )
        .unwrap();
        let v = fixed_point_for_support(&weighted, &[0, 1], 1e-12).unwrap();
        assert_close!(v[0], (2.0f64 / 3.0).sqrt(), 1e-10);
        assert_close!(v[1], (1.0f64 / 3.0).sqrt(), 1e-10);

        let v = fixed_point_for_support(&quartic(3), &[2], 1e-12).unwrap();
        assert_eq!(v.as_vector(), &DVector::from_vec(vec![0.0, 0.0, 1.0]));
    }

    #[test]
    fn fixed_point_rejects_bad_input() {
        let bef = quartic(2);
        assert!(fixed_point_for_support(&bef, &[], 1e-10).is_err());
        assert!(fixed_point_for_support(&bef, &[0, 0], 1e-10).is_err());
        assert!(fixed_point_for_support(&bef, &[2], 1e-10).is_err());
        let mat = ExactBef::canonical(2, vec![ContrastFunction::monomial(1.0, 2.0).unwrap(); 2]).unwrap();
        assert!(matches!(fixed_point_for_support(&mat, &[0, 1], 1e-10), Err(Error::NotCertified(_))));
    }

    #[test]
    fn fixed_points_are_fixed() {
        let bef = ExactBef::canonical(
            4,
            vec![
                ContrastFunction::monomial(1.0, 4.0).unwrap(),
                ContrastFunction::monomial(3.0, 3.0).unwrap(),
                ContrastFunction::cosh(2.0).unwrap(),
                ContrastFunction::monomial(0.7, 5.0).unwrap(),
            ],
        )
        .unwrap();
        for mask in 1u32..16 {
            let support: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
            let v = fixed_point_for_support(&bef, &support, 1e-11).unwrap();
            assert!(residual(&bef, &v).unwrap() <= 1e-9, "support {support:?}");
        }
    }

    #[test]
    fn negative_odd_contrast_gets_negative_coordinate() {
        let bef = ExactBef::canonical(
            3,
            vec![ContrastFunction::monomial(2.0, 4.0).unwrap(), ContrastFunction::monomial(-1.0, 3.0).unwrap()],
        )
        .unwrap();
        let v = fixed_point_for_support(&bef, &[0, 1], 1e-11).unwrap();
        assert!(v[0] * v[1] < 0.0);
        assert!(residual(&bef, &v).unwrap() <= 1e-12);
    }
}
