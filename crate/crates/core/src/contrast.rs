//! Scalar contrast functions, their `h`-transforms and robustness certificates.
//!
//! A contrast `g: [-1, 1] -> R` is admissible when it is even or odd, satisfies
//! `g(0) = 0`, has a vanishing right derivative of `x -> g(sqrt x)` at zero and
//! `x -> |g(sqrt x)|` is strictly convex on `[0, 1]`. The `h`-transform
//! `h(t) = g(sign(t) sqrt|t|)` turns that hidden convexity into ordinary
//! convexity, which is what drives every stability property of the gradient
//! iteration.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar map shared between threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Below this magnitude `h''` is not evaluated through the `g`-based identity,
/// which divides by `x^3` with `x = sqrt|t|`.
const IDENTITY_MIN_T: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;
const DEFAULT_CERT_GRID: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Even,
    Odd,
}

impl Symmetry {
    fn sign(self) -> f64 {
        match self {
            Symmetry::Even => 1.0,
            Symmetry::Odd => -1.0,
        }
    }
}

/// One term `weight * |x|^power`, reflected evenly or oddly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub weight: f64,
    pub power: f64,
}

/// Quantified hidden convexity: `beta x^(delta-1) <= |h''(x)| <= alpha x^(gamma-1)`
/// on `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCertificate {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl RobustnessCertificate {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma), ("delta", delta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if alpha < beta {
            return Err(Error::InvalidParameter(format!("alpha ({alpha}) < beta ({beta})")));
        }
        if gamma > delta {
            return Err(Error::InvalidParameter(format!("gamma ({gamma}) > delta ({delta})")));
        }
        Ok(Self { alpha, beta, gamma, delta })
    }

    pub fn lower_bound(&self, x: f64) -> f64 {
        self.beta * x.powf(self.delta - 1.0)
    }

    pub fn upper_bound(&self, x: f64) -> f64 {
        self.alpha * x.powf(self.gamma - 1.0)
    }

    /// Combined certificate for a family of contrasts: the weakest constants
    /// valid for every member.
    pub fn combine(certs: &[RobustnessCertificate]) -> Option<RobustnessCertificate> {
        let first = certs.first()?;
        let mut out = *first;
        for c in &certs[1..] {
            out.alpha = out.alpha.max(c.alpha);
            out.beta = out.beta.min(c.beta);
            out.gamma = out.gamma.min(c.gamma);
            out.delta = out.delta.max(c.delta);
        }
        Some(out)
    }
}

#[derive(Clone)]
enum Kind {
    Power { terms: Vec<PowerTerm> },
    Cosh { weight: f64 },
    Scaled { outer: f64, inner: f64, base: Box<ContrastFunction> },
    Custom { g: ScalarFn, dg: ScalarFn, d2g: ScalarFn },
}

/// A contrast function with analytic first and second derivatives.
#[derive(Clone)]
pub struct ContrastFunction {
    name: String,
    kind: Kind,
    symmetry: Symmetry,
    /// Raw `g(0)`, subtracted on evaluation.
    offset: f64,
    certificate: Option<RobustnessCertificate>,
}

impl fmt::Debug for ContrastFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContrastFunction")
            .field("name", &self.name)
            .field("symmetry", &self.symmetry)
            .field("certificate", &self.certificate)
            .finish()
    }
}

#[inline]
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p.fract() == 0.0 && p.abs() < 64.0 {
        a.powi(p as i32)
    } else {
        a.powf(p)
    }
}

fn parity_of(power: f64) -> Symmetry {
    if power.fract() == 0.0 && (power as i64) % 2 != 0 {
        Symmetry::Odd
    } else {
        Symmetry::Even
    }
}

/// `|x|^p` reflected with the given symmetry, and its derivatives.
fn term_value(sym: Symmetry, w: f64, p: f64, x: f64) -> f64 {
    match sym {
        Symmetry::Even => w * abs_pow(x, p),
        Symmetry::Odd => w * sgn(x) * abs_pow(x, p),
    }
}

fn term_d1(sym: Symmetry, w: f64, p: f64, x: f64) -> f64 {
    match sym {
        Symmetry::Even => w * p * sgn(x) * abs_pow(x, p - 1.0),
        Symmetry::Odd => w * p * abs_pow(x, p - 1.0),
    }
}

fn term_d2(sym: Symmetry, w: f64, p: f64, x: f64) -> f64 {
    let mag = w * p * (p - 1.0) * abs_pow(x, p - 2.0);
    match sym {
        Symmetry::Even => mag,
        Symmetry::Odd => sgn(x) * mag,
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

impl ContrastFunction {
    /// `weight * x^power`; non-integer or even powers give the even reflection
    /// `weight * |x|^power`, odd integer powers the odd one.
    pub fn monomial(weight: f64, power: f64) -> Result<Self> {
        Self::polynomial(vec![PowerTerm { weight, power }])
    }

    /// Sum of power terms sharing one parity.
    pub fn polynomial(terms: Vec<PowerTerm>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("polynomial contrast needs at least one term".into()))?;
        let symmetry = parity_of(first.power);
        for t in &terms {
            if !(t.weight.is_finite() && t.weight != 0.0) {
                return Err(Error::InvalidParameter(format!("contrast weight must be nonzero, got {}", t.weight)));
            }
            if !(t.power.is_finite() && t.power >= 2.0) {
                return Err(Error::InvalidParameter(format!("contrast power must be >= 2, got {}", t.power)));
            }
            if parity_of(t.power) != symmetry {
                return Err(Error::InvalidParameter("all polynomial terms must share one parity".into()));
            }
        }
        let name = if terms.len() == 1 {
            format!("monomial(w={}, r={})", terms[0].weight, terms[0].power)
        } else {
            let parts: Vec<String> = terms.iter().map(|t| format!("{}x^{}", t.weight, t.power)).collect();
            format!("polynomial({})", parts.join(" + "))
        };
        let certificate = power_certificate(&terms);
        Ok(Self { name, kind: Kind::Power { terms }, symmetry, offset: 0.0, certificate })
    }

    /// `weight * (cosh x - 1 - x^2/2)`, an even contrast whose `h` is the
    /// power series `weight * sum_{k>=2} t^k / (2k)!`.
    pub fn cosh(weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight != 0.0) {
            return Err(Error::InvalidParameter(format!("contrast weight must be nonzero, got {weight}")));
        }
        // h'' is increasing on (0, 1]: from weight/12 at 0 to weight*e^-1/4 at 1.
        let certificate = Some(RobustnessCertificate {
            alpha: weight.abs() * (-1.0f64).exp() / 4.0,
            beta: weight.abs() / 12.0,
            gamma: 1.0,
            delta: 1.0,
        });
        Ok(Self {
            name: format!("cosh(w={weight})"),
            kind: Kind::Cosh { weight },
            symmetry: Symmetry::Even,
            offset: 0.0,
            certificate,
        })
    }

    /// User-supplied contrast. `g(0)` is shifted away; symmetry and the
    /// vanishing derivative of `g(sqrt x)` at `0+` are checked numerically.
    pub fn custom(name: impl Into<String>, g: ScalarFn, dg: ScalarFn, d2g: ScalarFn, symmetry: Symmetry) -> Result<Self> {
        let offset = g(0.0);
        if !offset.is_finite() {
            return Err(Error::AssumptionViolated { assumption: "finiteness", detail: "g(0) is not finite".into() });
        }
        let out = Self {
            name: name.into(),
            kind: Kind::Custom { g, dg, d2g },
            symmetry,
            offset,
            certificate: None,
        };
        let s = symmetry.sign();
        for k in 0..=200 {
            let x = k as f64 / 200.0;
            let dev = (out.g(x) - s * out.g(-x)).abs();
            if dev > SYMMETRY_TOL {
                return Err(Error::AssumptionViolated {
                    assumption: "symmetry",
                    detail: format!("|g({x}) - ({s})g(-{x})| = {dev:e}"),
                });
            }
        }
        let h: f64 = 1e-10;
        let slope = (out.g(h.sqrt()) - out.g(0.0)) / h;
        if !(slope.abs() <= 1e-3) {
            return Err(Error::AssumptionViolated {
                assumption: "flat-origin",
                detail: format!("right derivative of g(sqrt x) at 0 is about {slope:e}"),
            });
        }
        Ok(out)
    }

    /// Attach a certificate after verifying it on the default grid.
    pub fn with_certificate(mut self, cert: RobustnessCertificate) -> Result<Self> {
        match certify_robustness(&self, &cert, DEFAULT_CERT_GRID)? {
            Certification::Valid => {
                self.certificate = Some(cert);
                Ok(self)
            }
            Certification::Violated { x, h2, lower, upper } => Err(Error::InvalidParameter(format!(
                "certificate fails at x={x:e}: |h''|={h2:e} not in [{lower:e}, {upper:e}]"
            ))),
        }
    }

    /// `t -> outer * g(inner * t)`.
    pub fn scaled(&self, outer: f64, inner: f64) -> Result<Self> {
        if !(outer.is_finite() && outer != 0.0 && inner.is_finite() && inner != 0.0) {
            return Err(Error::InvalidParameter("scale factors must be finite and nonzero".into()));
        }
        if let Kind::Power { terms } = &self.kind {
            let folded = terms
                .iter()
                .map(|t| {
                    let reflect = match self.symmetry {
                        Symmetry::Even => 1.0,
                        Symmetry::Odd => sgn(inner),
                    };
                    PowerTerm { weight: t.weight * outer * reflect * abs_pow(inner, t.power), power: t.power }
                })
                .collect();
            return Self::polynomial(folded);
        }
        Ok(Self {
            name: format!("{outer}*{}({inner}t)", self.name),
            kind: Kind::Scaled { outer, inner, base: Box::new(self.clone()) },
            symmetry: self.symmetry,
            offset: 0.0,
            certificate: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn certificate(&self) -> Option<&RobustnessCertificate> {
        self.certificate.as_ref()
    }

    pub fn g(&self, x: f64) -> f64 {
        let raw = match &self.kind {
            Kind::Power { terms } => terms.iter().map(|t| term_value(self.symmetry, t.weight, t.power, x)).sum(),
            Kind::Cosh { weight } => weight * cosh_minus_quadratic(x),
            Kind::Scaled { outer, inner, base } => outer * base.g(inner * x),
            Kind::Custom { g, .. } => g(x),
        };
        raw - self.offset
    }

    pub fn dg(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Power { terms } => terms.iter().map(|t| term_d1(self.symmetry, t.weight, t.power, x)).sum(),
            Kind::Cosh { weight } => weight * sinh_minus_linear(x),
            Kind::Scaled { outer, inner, base } => outer * inner * base.dg(inner * x),
            Kind::Custom { dg, .. } => dg(x),
        }
    }

    pub fn d2g(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Power { terms } => terms.iter().map(|t| term_d2(self.symmetry, t.weight, t.power, x)).sum(),
            Kind::Cosh { weight } => weight * 2.0 * (0.5 * x).sinh().powi(2),
            Kind::Scaled { outer, inner, base } => outer * inner * inner * base.d2g(inner * x),
            Kind::Custom { d2g, .. } => d2g(x),
        }
    }

    pub fn h_transform(&self) -> HTransform {
        HTransform { source: self.clone() }
    }

    /// Whether `h` is convex on `(0, 1]` (a "positive" contrast). Only
    /// meaningful for certified contrasts, where the sign of `h''` is constant.
    pub fn is_positive(&self) -> bool {
        self.h_transform().d2h(0.5).map(|v| v > 0.0).unwrap_or(false)
    }
}

fn power_certificate(terms: &[PowerTerm]) -> Option<RobustnessCertificate> {
    let positive = terms[0].weight > 0.0;
    if terms.iter().any(|t| (t.weight > 0.0) != positive || t.power <= 2.0) {
        return None;
    }
    // |h''(t)| = sum |w| q (q-1) t^(q-2) with q = p/2; every t^(q-2) <= t^(q_min-2) on (0, 1].
    let q_min = terms.iter().map(|t| t.power / 2.0).fold(f64::INFINITY, f64::min);
    let coef = |t: &PowerTerm| {
        let q = t.power / 2.0;
        t.weight.abs() * q * (q - 1.0)
    };
    let alpha = terms.iter().map(coef).sum();
    let beta = terms.iter().filter(|t| t.power / 2.0 == q_min).map(coef).sum();
    Some(RobustnessCertificate { alpha, beta, gamma: q_min - 1.0, delta: q_min - 1.0 })
}

fn cosh_minus_quadratic(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let t = x * x;
        (2..=8).map(|k| t.powi(k) / factorial(2 * k as u32)).sum()
    } else {
        2.0 * (0.5 * x).sinh().powi(2) - 0.5 * x * x
    }
}

fn sinh_minus_linear(x: f64) -> f64 {
    if x.abs() < 0.1 {
        (1..=7).map(|k| x.powi(2 * k + 1) / factorial(2 * k as u32 + 1)).sum()
    } else {
        x.sinh() - x
    }
}

/// `h(t) = g(sign(t) sqrt|t|)` together with its derivatives.
#[derive(Clone, Debug)]
pub struct HTransform {
    source: ContrastFunction,
}

impl HTransform {
    pub fn source(&self) -> &ContrastFunction {
        &self.source
    }

    pub fn h(&self, t: f64) -> f64 {
        self.source.g(sgn(t) * t.abs().sqrt())
    }

    /// `h'(t)`, with `h'(0) = 0`.
    pub fn dh(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let sym = self.source.symmetry;
        match &self.source.kind {
            Kind::Power { terms } => terms
                .iter()
                .map(|term| {
                    let q = term.power / 2.0;
                    let mag = term.weight * q * abs_pow(t, q - 1.0);
                    match sym {
                        Symmetry::Even => sgn(t) * mag,
                        Symmetry::Odd => mag,
                    }
                })
                .sum(),
            Kind::Cosh { weight } => {
                let a = t.abs();
                if a < 0.05 {
                    sgn(t) * weight * (2..=9).map(|k| k as f64 * a.powi(k - 1) / factorial(2 * k as u32)).sum::<f64>()
                } else {
                    let x = a.sqrt();
                    sgn(t) * weight * sinh_minus_linear(x) / (2.0 * x)
                }
            }
            Kind::Scaled { outer, inner, base } => {
                let reflect = self.scaled_reflection(*inner);
                outer * reflect * inner * inner * base.h_transform().dh(inner * inner * t)
            }
            Kind::Custom { .. } => {
                let x = sgn(t) * t.abs().sqrt();
                self.source.dg(x) / (2.0 * t.abs().sqrt())
            }
        }
    }

    /// `h''(t)` on `0 < |t| <= 1`. Refused at `t = 0`.
    pub fn d2h(&self, t: f64) -> Result<f64> {
        if t == 0.0 || !t.is_finite() {
            return Err(Error::OutOfDomain(format!("h''({t})")));
        }
        let sym = self.source.symmetry;
        Ok(match &self.source.kind {
            Kind::Power { terms } => terms
                .iter()
                .map(|term| {
                    let q = term.power / 2.0;
                    let mag = term.weight * q * (q - 1.0) * abs_pow(t, q - 2.0);
                    match sym {
                        Symmetry::Even => mag,
                        Symmetry::Odd => sgn(t) * mag,
                    }
                })
                .sum(),
            Kind::Cosh { weight } => {
                let a = t.abs();
                if a < 0.05 {
                    weight * (2..=9).map(|k| (k * (k - 1)) as f64 * a.powi(k - 2) / factorial(2 * k as u32)).sum::<f64>()
                } else {
                    let x = a.sqrt();
                    weight * 0.25 * (2.0 * (0.5 * x).sinh().powi(2) / (x * x) - sinh_minus_linear(x) / (x * x * x))
                }
            }
            Kind::Scaled { outer, inner, base } => {
                let reflect = self.scaled_reflection(*inner);
                let b2 = inner * inner;
                outer * reflect * b2 * b2 * base.h_transform().d2h(b2 * t)?
            }
            Kind::Custom { .. } => {
                if t.abs() < IDENTITY_MIN_T {
                    return Err(Error::OutOfDomain(format!("h''({t}) via the g-identity")));
                }
                let x = sgn(t) * t.abs().sqrt();
                0.25 * (self.source.d2g(x) / (x * x) - self.source.dg(x) / (x * x * x))
            }
        })
    }

    fn scaled_reflection(&self, inner: f64) -> f64 {
        match self.source.symmetry {
            Symmetry::Even => 1.0,
            Symmetry::Odd => sgn(inner),
        }
    }
}

/// Outcome of a sampled certificate check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Certification {
    Valid,
    Violated { x: f64, h2: f64, lower: f64, upper: f64 },
}

impl Certification {
    pub fn is_valid(&self) -> bool {
        matches!(self, Certification::Valid)
    }
}

/// Checks `beta x^(delta-1) <= |h''(x)| <= alpha x^(gamma-1)` on `grid_size`
/// log-spaced points of `[1e-8, 1]`.
pub fn certify_robustness(g: &ContrastFunction, cert: &RobustnessCertificate, grid_size: usize) -> Result<Certification> {
    if grid_size < 100 {
        return Err(Error::InvalidParameter(format!("grid_size must be >= 100, got {grid_size}")));
    }
    let h = g.h_transform();
    let rel = 1e-9;
    for k in 0..grid_size {
        let x = 10f64.powf(-8.0 + 8.0 * k as f64 / (grid_size - 1) as f64);
        let h2 = h.d2h(x)?.abs();
        let lower = cert.lower_bound(x);
        let upper = cert.upper_bound(x);
        if !h2.is_finite() || h2 < lower * (1.0 - rel) || h2 > upper * (1.0 + rel) {
            return Ok(Certification::Violated { x, h2, lower, upper });
        }
    }
    Ok(Certification::Valid)
}
