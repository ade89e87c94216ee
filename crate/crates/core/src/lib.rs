//! Spectral learning of junta distributions, junta states and QAC⁰ Choi
//! states, with the dense linear algebra and simulators they need.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the double-precision instantiation used by the CLI.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist_learn;
pub mod error;
pub mod hypercube;
pub mod io;
pub mod linalg;
pub mod qac0;
pub mod qstate;
pub mod rng;
pub mod scalar;
pub mod shadows;
pub mod state_learn;
pub mod state_test;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type RealCubeFunction = hypercube::CubeFunction<f64>;
pub type RealFourierSpectrum = hypercube::FourierSpectrum<f64>;
pub type RealDistribution = hypercube::Distribution<f64>;
pub type Matrix = linalg::ComplexMatrix<f64>;
pub type State = qstate::DensityMatrix<f64>;
pub type RealPauliSpectrum = qstate::PauliSpectrum<f64>;
