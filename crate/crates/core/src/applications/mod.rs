//! Gradient oracles built from data.

pub mod gmm;
pub mod ica;
pub mod matrix;
pub mod samples;
pub mod spectral;
pub mod tensor;

pub use gmm::{gmm_recover, GmmEstimate, GmmOptions, MixtureMoments, PopulationMoments, ThirdMomentForm};
pub use ica::{ica_oracle, whiten, IcaGradientForm, IcaOracle, WhiteningTransform};
pub use matrix::{matrix_oracle, MatrixOracle};
pub use samples::SampleMatrix;
pub use spectral::{spectral_oracle, SpectralOracle};
pub use tensor::{dense_tensor_apply, tensor_oracle, DenseSymmetricTensor, OdecoTensor};
