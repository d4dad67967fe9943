//! Hidden-basis recovery by gradient iteration on basis encoding functions.
//!
//! A basis encoding function (BEF) has the form `F(u) = Σ g_i(<u, Z_i>)` for an
//! unknown orthonormal set `Z_1..Z_m` and scalar contrasts `g_i` with a hidden
//! convexity property. The gradient iteration `u <- ∇F(u)/|∇F(u)|` generalizes
//! the matrix and tensor power methods and recovers the `Z_i` up to sign and
//! permutation. This crate provides:
//!
//! * [`contrast`] and [`bef`]: contrast functions, their `h`-transforms,
//!   robustness certificates and exact BEFs built from a known basis.
//! * [`oracle`]: the gradient-oracle abstraction and perturbed oracles.
//! * [`sphere`]: unit-sphere utilities (exponential map, tangent sampling,
//!   orthonormal complements, the sign-class metric).
//! * [`iteration`]: the gradient iteration itself, convergence detection,
//!   fixed-point construction and convergence-order estimation.
//! * [`recovery`]: the perturbation-robust recovery procedure with random
//!   jumps, theoretical parameter computation and basis matching.
//! * [`applications`]: oracles built from data for ICA, orthogonal tensor
//!   decomposition, spectral clustering, spherical Gaussian mixtures and the
//!   symmetric-matrix border case.
//! * [`test_oracles`]: brute-force references used to validate the above.
//! * [`synth`] and [`experiment`]: seeded synthetic problems and the
//!   experiment drivers used by the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(test)]
#[macro_use]
mod testutil {
    macro_rules! assert_close {
        ($a:expr, $b:expr, $tol:expr) => {{
            let (a, b): (f64, f64) = ($a, $b);
            assert!((a - b).abs() <= $tol, "{} vs {} (tol {:e})", a, b, $tol);
        }};
    }
}

pub mod applications;
pub mod bef;
pub mod contrast;
pub mod error;
pub mod experiment;
pub mod iteration;
pub mod oracle;
pub mod recovery;
pub mod seeding;
pub mod sphere;
pub mod synth;
pub mod test_oracles;

pub use bef::{BasisSpec, BefSpec, ContrastSpec, ExactBef};
pub use contrast::{certify_robustness, Certification, ContrastFunction, HTransform, RobustnessCertificate, Symmetry};
pub use error::{Error, Result};
pub use iteration::{gi_loop, gi_step, run_to_convergence, ConvergenceReport, IterationTrace};
pub use oracle::{perturb_oracle, GradientOracle, PerturbationMode, PerturbedOracle};
pub use recovery::{find_basis_element, match_basis, robust_gi_recovery, theoretical_params, MatchReport, RecoveredBasis, RecoveryConfig};
pub use sphere::{TangentVector, UnitVector};

pub use nalgebra::{DMatrix, DVector};
