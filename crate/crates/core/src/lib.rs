//! Movable superdirective pair (MSP) receive arrays.
//!
//! An MSP array is a row of closely spaced, strongly coupled antenna pairs.
//! Each pair is driven with its endfire-optimal superdirective currents and can
//! be rotated about its centre and slid along the `y` axis. This crate provides
//!
//! - the coupled-pair radiation model ([`array`]),
//! - seeded multipath scenes ([`channel`]),
//! - analytic gradients and the alternating Adam / projection optimizer
//!   ([`optimizer`]),
//! - fixed-array MRC and particle-swarm baselines ([`baselines`]),
//! - the Monte-Carlo experiment harness and its CSV outputs ([`experiments`]),
//! - flat key-value configuration and result files ([`config`], [`io`]).
//!
//! All lengths are expressed in wavelengths and all internal angles in radians.

pub mod array;
pub mod baselines;
pub mod channel;
pub mod config;
mod error;
pub mod experiments;
pub mod io;
pub mod objective;
pub mod optimizer;
pub mod rng;

pub use array::{
    coupling_matrix, directivity, element_positions, optimal_currents, pair_pattern,
    relative_steering, snr, steering_vector, total_field, ArrayGeometry, ComplexPair,
    CouplingModel, PairState, Position2D, SnrReport,
};
pub use channel::{fig2_scene, generate_scene, AmplitudeLaw, ChannelScene, Path, SceneSpec};
pub use error::{MspError, Result};
pub use objective::Objective;
pub use optimizer::{
    alternating_optimize, grad_theta, grad_y, initialize, project, GradientModel,
    OptimizationTrace, OptimizerConfig,
};

/// Crate version recorded in every result header.
pub const CODE_VERSION: &str = concat!("msp-core ", env!("CARGO_PKG_VERSION"));
