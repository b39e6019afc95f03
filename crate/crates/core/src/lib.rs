//! Minimal Neumann Sturm-Liouville eigenvalue over `L_gamma` potential spheres.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod functional;
pub mod grid;
mod ode;
pub mod optimize;
pub mod period;
pub mod sample;
pub mod sturm;
mod tridiag;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{GammaParam, GridFunction, THRESHOLD_GAMMA};
pub use optimize::{OptimConfig, OptimReport};
pub use period::{PeriodProfile, Trajectory};
pub use sturm::SpectralResult;
