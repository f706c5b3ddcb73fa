//! Pair geometry and steering vectors.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::{MspError, Result};

/// Two complex scalars: a per-pair steering vector or excitation.
pub type ComplexPair = [Complex64; 2];

/// Immutable array constants. Lengths are in wavelengths.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub num_pairs: usize,
    /// Spacing between the two elements of a pair.
    pub d_intra: f64,
    /// Spacing between adjacent pair centres along `x`.
    pub d_inter: f64,
    pub wavelength: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Input power budget of each pair.
    pub pair_power: f64,
}

impl ArrayGeometry {
    /// Geometry used throughout the reference experiments: 0.2λ intra-pair,
    /// 0.5λ inter-pair spacing, `y ∈ [-λ, λ]` and 0.5 input power per pair.
    pub fn reference(num_pairs: usize) -> Self {
        Self {
            num_pairs,
            d_intra: 0.2,
            d_inter: 0.5,
            wavelength: 1.0,
            y_min: -1.0,
            y_max: 1.0,
            pair_power: 0.5,
        }
    }

    pub fn with_num_pairs(mut self, num_pairs: usize) -> Self {
        self.num_pairs = num_pairs;
        self
    }

    pub fn with_y_bounds(mut self, y_min: f64, y_max: f64) -> Self {
        self.y_min = y_min;
        self.y_max = y_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(MspError::Geometry(msg));
        if self.num_pairs == 0 {
            return fail("num_pairs must be at least 1".into());
        }
        for (name, v) in [
            ("d_intra", self.d_intra),
            ("d_inter", self.d_inter),
            ("wavelength", self.wavelength),
            ("pair_power", self.pair_power),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.y_min.is_finite() && self.y_max.is_finite()) {
            return fail("y bounds must be finite".into());
        }
        // A zero-width range is allowed: it freezes the pairs on the x axis.
        if self.y_min > self.y_max {
            return fail(format!(
                "y_min ({}) must not exceed y_max ({})",
                self.y_min, self.y_max
            ));
        }
        Ok(())
    }

    /// Wave number `2π/λ`.
    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    /// `x` coordinate of the centre of pair `i` (0-based).
    pub fn center_x(&self, i: usize) -> f64 {
        i as f64 * self.d_inter
    }

    /// Fixed feed phase of pair `i`: adjacent pairs differ by π.
    pub fn feed_sign(&self, i: usize) -> f64 {
        if i % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i < self.num_pairs {
            Ok(())
        } else {
            Err(MspError::PairIndex {
                index: i,
                num_pairs: self.num_pairs,
            })
        }
    }
}

/// Rotation angle and `y` offset of every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    pub theta: Vec<f64>,
    pub y: Vec<f64>,
}

impl PairState {
    pub fn new(theta: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if theta.len() != y.len() {
            return Err(MspError::Geometry(format!(
                "theta has {} entries but y has {}",
                theta.len(),
                y.len()
            )));
        }
        Ok(Self { theta, y })
    }

    pub fn uniform(num_pairs: usize, theta: f64, y: f64) -> Self {
        Self {
            theta: vec![theta; num_pairs],
            y: vec![y; num_pairs],
        }
    }

    pub fn num_pairs(&self) -> usize {
        self.theta.len()
    }

    pub(crate) fn check_against(&self, geom: &ArrayGeometry) -> Result<()> {
        if self.theta.len() != geom.num_pairs || self.y.len() != geom.num_pairs {
            return Err(MspError::Geometry(format!(
                "state holds {} angles and {} offsets for {} pairs",
                self.theta.len(),
                self.y.len(),
                geom.num_pairs
            )));
        }
        Ok(())
    }

    /// True when every angle lies in `[0, 2π)` and every offset in the bounds.
    pub fn is_feasible(&self, geom: &ArrayGeometry) -> bool {
        self.theta.iter().all(|t| (0.0..TAU).contains(t))
            && self.y.iter().all(|y| (geom.y_min..=geom.y_max).contains(y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position2D {
    pub x: f64,
    pub y: f64,
}

impl Position2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Projection onto the unit vector `(cos φ, sin φ)`.
    pub fn project_on(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        self.x * c + self.y * s
    }
}

/// Half of the intra-pair separation vector, `(d/2)(cos θ, sin θ)`.
pub(crate) fn half_offset(theta: f64, d_intra: f64) -> Position2D {
    let (s, c) = theta.sin_cos();
    Position2D::new(0.5 * d_intra * c, 0.5 * d_intra * s)
}

/// Element positions `(r_ic − Δr, r_ic + Δr)` of pair `i` (0-based).
pub fn element_positions(
    geom: &ArrayGeometry,
    state: &PairState,
    i: usize,
) -> Result<(Position2D, Position2D)> {
    geom.check_index(i)?;
    if i >= state.num_pairs() {
        return Err(MspError::PairIndex {
            index: i,
            num_pairs: state.num_pairs(),
        });
    }
    let cx = geom.center_x(i);
    let cy = state.y[i];
    let dr = half_offset(state.theta[i], geom.d_intra);
    Ok((
        Position2D::new(cx - dr.x, cy - dr.y),
        Position2D::new(cx + dr.x, cy + dr.y),
    ))
}

/// Plane-wave phase response `exp(j k r·u(φ))` of both elements.
pub fn steering_vector(positions: (Position2D, Position2D), phi: f64, k: f64) -> ComplexPair {
    [
        Complex64::cis(k * positions.0.project_on(phi)),
        Complex64::cis(k * positions.1.project_on(phi)),
    ]
}

/// Position-independent steering vector of a pair rotated by `theta`, i.e.
/// the steering vector measured from the pair centre:
/// `(e^{−jkΔr·u}, e^{+jkΔr·u})`, so that `a_i(φ) = e^{jk r_ic·u(φ)} ã(φ; θ_i)`.
pub fn relative_steering(theta: f64, phi: f64, d_intra: f64, k: f64) -> ComplexPair {
    let phase = k * 0.5 * d_intra * (phi - theta).cos();
    let e = Complex64::cis(phase);
    [e.conj(), e]
}

/// Mathematical modulo into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Smallest absolute difference between two angles.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}
