//! Open-environment master equations: damped-oscillator baths, the weak-coupling
//! generators they induce on a system, and the classical Langevin analogue.

pub mod classical_bath;
pub mod damped_oscillator;
pub mod error;
pub mod lindblad_core;
pub mod linear_example;
pub mod quadrature;
pub mod scalar;
pub mod spectral_functions;
pub mod weak_coupling;

pub use error::{Error, Result};
pub use scalar::Real;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type ConstantsF64 = damped_oscillator::Constants<f64>;
pub type OscillatorParamsF64 = damped_oscillator::OscillatorParams<f64>;
pub type MomentStateF64 = damped_oscillator::MomentState<f64>;
pub type SpectralPairF64 = spectral_functions::SpectralPair<f64>;
