//! Coupled-pair array model.

mod coupling;
mod geometry;
mod pattern;

pub use coupling::{
    coupling_matrix, optimal_currents, optimal_currents_derivative, CouplingModel, DET_THRESHOLD,
};
pub use geometry::{
    angle_distance, element_positions, relative_steering, steering_vector, wrap_angle,
    ArrayGeometry, ComplexPair, PairState, Position2D,
};
pub(crate) use geometry::half_offset;
pub use pattern::{
    composite_pattern, directivity, directivity_profile, pair_pattern, phi_grid, snr, to_db,
    total_field, SnrReport, DEFAULT_GRID,
};
