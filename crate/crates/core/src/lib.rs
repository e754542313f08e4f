//! Spectral-Galerkin simulation of slow-fast stochastic reaction-diffusion systems on (0, 1)
//! with homogeneous Dirichlet conditions, together with the averaged equation and the
//! Monte Carlo machinery that measures how fast the slow component approaches it.

pub mod averaging;
pub mod error;
pub mod experiments;
pub mod io;
pub mod model;
pub mod noise;
pub mod regression;
pub mod simulator;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{ModelSpec, ScanBox};
pub use noise::NoisePlan;
pub use simulator::{SlowFastState, StepperConfig};
pub use spectral::{GridField, OperatorSpec, SpectralField};
