//! Reference methods the MSP array is compared against.

mod fpa;
mod pso;

pub use fpa::{fpa_mrc_snr, FpaConfig};
pub use pso::{pso_optimize, pso_optimize_objective, PsoConfig};
