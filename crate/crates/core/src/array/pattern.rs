//! Pair radiation patterns, received field and SNR.
//!
//! These are the definitional (unoptimized) evaluations. The optimizers use
//! [`crate::Objective`], which precomputes the same quantities and is checked
//! against this module in tests.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::coupling::{optimal_currents, CouplingModel};
use super::geometry::{element_positions, steering_vector, ArrayGeometry, PairState};
use crate::channel::ChannelScene;
use crate::{MspError, Result};

/// Default number of samples of a pattern over `[0, 2π]` (0.5° steps).
pub const DEFAULT_GRID: usize = 721;

/// Received SNR in linear and dB form together with `log2(1 + SNR)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport {
    pub linear: f64,
    pub db: f64,
    pub spectral_efficiency: f64,
}

impl SnrReport {
    pub fn from_linear(linear: f64) -> Self {
        Self {
            linear,
            db: to_db(linear),
            spectral_efficiency: (1.0 + linear).log2(),
        }
    }
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Far-field response `F_i(φ)` of pair `i` (0-based) including its feed sign.
pub fn pair_pattern(
    geom: &ArrayGeometry,
    state: &PairState,
    coupling: &CouplingModel,
    i: usize,
    phi: f64,
) -> Result<Complex64> {
    let k = geom.wavenumber();
    let positions = element_positions(geom, state, i)?;
    let a = steering_vector(positions, phi, k);
    let w = optimal_currents(state.theta[i], coupling, geom.pair_power, geom.d_intra, k)?;
    Ok((a[0] * w[0] + a[1] * w[1]) * geom.feed_sign(i))
}

/// Noise-free combiner output `Σ_i Σ_l A_l F_i(φ_l)`.
pub fn total_field(
    geom: &ArrayGeometry,
    state: &PairState,
    coupling: &CouplingModel,
    scene: &ChannelScene,
) -> Result<Complex64> {
    state.check_against(geom)?;
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..geom.num_pairs {
        for path in &scene.paths {
            s += pair_pattern(geom, state, coupling, i, path.aoa)? * path.amplitude;
        }
    }
    Ok(s)
}

/// `|S_total|² / (M σ²)`: each pair port adds independent noise of power σ².
pub fn snr(
    geom: &ArrayGeometry,
    state: &PairState,
    coupling: &CouplingModel,
    scene: &ChannelScene,
) -> Result<SnrReport> {
    let s = total_field(geom, state, coupling, scene)?;
    Ok(SnrReport::from_linear(
        s.norm_sqr() / (geom.num_pairs as f64 * scene.noise_power),
    ))
}

/// `n` uniformly spaced angles covering `[0, 2π]`, both ends included.
pub fn phi_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2, "a pattern grid needs at least two points");
    let step = TAU / (n - 1) as f64;
    (0..n).map(|j| j as f64 * step).collect()
}

/// Composite pattern `Σ_i F_i(φ)` sampled on `grid`.
pub fn composite_pattern(
    geom: &ArrayGeometry,
    state: &PairState,
    coupling: &CouplingModel,
    grid: &[f64],
) -> Result<Vec<Complex64>> {
    state.check_against(geom)?;
    grid.iter()
        .map(|&phi| {
            (0..geom.num_pairs).try_fold(Complex64::new(0.0, 0.0), |acc, i| {
                Ok(acc + pair_pattern(geom, state, coupling, i, phi)?)
            })
        })
        .collect()
}

/// Azimuthal directivity profile of a pattern sampled on [`phi_grid`]:
/// `D(φ) = 2π|F(φ)|² / ∫|F|²dφ`, integral by the trapezoidal rule.
pub fn directivity_profile(samples: &[Complex64]) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(MspError::Pattern("need at least two samples".into()));
    }
    let power: Vec<f64> = samples.iter().map(|f| f.norm_sqr()).collect();
    let step = TAU / (samples.len() - 1) as f64;
    let integral = trapezoid(&power, step);
    if !(integral > 0.0 && integral.is_finite()) {
        return Err(MspError::Pattern("pattern has no radiated power".into()));
    }
    Ok(power.iter().map(|p| TAU * p / integral).collect())
}

/// Directivity at `phi0`, linearly interpolating `|F|²` between grid points.
pub fn directivity(samples: &[Complex64], phi0: f64) -> Result<f64> {
    let profile = directivity_profile(samples)?;
    let step = TAU / (samples.len() - 1) as f64;
    let pos = super::geometry::wrap_angle(phi0) / step;
    let lo = (pos.floor() as usize).min(samples.len() - 2);
    let frac = pos - lo as f64;
    Ok(profile[lo] * (1.0 - frac) + profile[lo + 1] * frac)
}

pub(crate) fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    step * (inner + 0.5 * (values[0] + values[n - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::coupling::coupling_matrix;
    use crate::array::geometry::relative_steering;
    use crate::channel::Path;
    use approx::assert_abs_diff_eq;

    fn setup(m: usize) -> (ArrayGeometry, CouplingModel) {
        let geom = ArrayGeometry::reference(m);
        let coupling = coupling_matrix(geom.d_intra, geom.wavenumber()).unwrap();
        (geom, coupling)
    }

    fn scene(paths: &[(f64, f64)]) -> ChannelScene {
        ChannelScene {
            paths: paths
                .iter()
                .map(|&(amplitude, aoa)| Path { amplitude, aoa })
                .collect(),
            noise_power: 1.0,
        }
    }

    #[test]
    fn magnitude_ignores_translation() {
        let (geom, coupling) = setup(1);
        let a = PairState::uniform(1, 0.8, 0.0);
        let b = PairState::uniform(1, 0.8, 0.7);
        for phi in phi_grid(360) {
            let fa = pair_pattern(&geom, &a, &coupling, 0, phi).unwrap();
            let fb = pair_pattern(&geom, &b, &coupling, 0, phi).unwrap();
            assert_abs_diff_eq!(fa.norm(), fb.norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn single_pair_peaks_at_its_rotation() {
        let (geom, coupling) = setup(1);
        let theta = 142f64.to_radians();
        let state = PairState::uniform(1, theta, 0.0);
        let grid = phi_grid(DEFAULT_GRID);
        let (best, _) = grid
            .iter()
            .map(|&phi| {
                (
                    phi,
                    pair_pattern(&geom, &state, &coupling, 0, phi).unwrap().norm(),
                )
            })
            .fold((0.0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
        let step = TAU / (DEFAULT_GRID - 1) as f64;
        assert!((best - theta).abs() <= step);
    }

    #[test]
    fn endfire_gain_matches_quadratic_form() {
        // |F(θ)|² = 2 P_t ãᴴR⁻¹ã at the pair's own endfire.
        let (geom, coupling) = setup(1);
        let state = PairState::uniform(1, 2.2, -0.3);
        let f = pair_pattern(&geom, &state, &coupling, 0, 2.2).unwrap();
        let a = relative_steering(2.2, 2.2, geom.d_intra, geom.wavenumber());
        assert_abs_diff_eq!(
            f.norm_sqr(),
            2.0 * geom.pair_power * coupling.quad_r_inv(a),
            epsilon = 1e-12
        );
    }

    #[test]
    fn total_field_basics() {
        let (geom, coupling) = setup(1);
        let state = PairState::uniform(1, 1.0, 0.2);
        let empty = scene(&[]);
        assert_eq!(
            total_field(&geom, &state, &coupling, &empty).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        let one = scene(&[(1.0, 0.6)]);
        let s = total_field(&geom, &state, &coupling, &one).unwrap();
        let f = pair_pattern(&geom, &state, &coupling, 0, 0.6).unwrap();
        assert_abs_diff_eq!((s - f).norm(), 0.0, epsilon = 1e-15);
        let report = snr(&geom, &state, &coupling, &one).unwrap();
        assert_abs_diff_eq!(report.linear, f.norm_sqr(), epsilon = 1e-14);
    }

    #[test]
    fn total_field_is_linear_in_amplitudes() {
        let (geom, coupling) = setup(3);
        let state = PairState::new(vec![0.3, 2.0, 4.1], vec![0.1, -0.4, 0.9]).unwrap();
        let base = scene(&[(0.4, 0.5), (0.7, 1.9)]);
        let scaled = scene(&[(1.2, 0.5), (2.1, 1.9)]);
        let s1 = total_field(&geom, &state, &coupling, &base).unwrap();
        let s3 = total_field(&geom, &state, &coupling, &scaled).unwrap();
        assert_abs_diff_eq!((s1 * 3.0 - s3).norm(), 0.0, epsilon = 1e-12);

        let doubled = scene(&[(0.8, 0.5), (1.4, 1.9)]);
        let r1 = snr(&geom, &state, &coupling, &base).unwrap();
        let r2 = snr(&geom, &state, &coupling, &doubled).unwrap();
        assert_abs_diff_eq!(r2.linear, 4.0 * r1.linear, epsilon = 1e-10);
    }

    #[test]
    fn zero_field_reports_zero() {
        let r = SnrReport::from_linear(0.0);
        assert_eq!(r.spectral_efficiency, 0.0);
    }

    #[test]
    fn isotropic_directivity_is_one() {
        let samples = vec![Complex64::new(1.0, 0.0); 721];
        for phi in [0.0, 1.0, 3.0, 6.0] {
            assert_abs_diff_eq!(directivity(&samples, phi).unwrap(), 1.0, epsilon = 1e-12);
        }
        assert!(directivity(&vec![Complex64::new(0.0, 0.0); 721], 0.0).is_err());
    }

    #[test]
    fn directivity_profile_averages_to_one() {
        let (geom, coupling) = setup(4);
        let state = PairState::new(vec![0.3, 2.0, 4.1, 1.0], vec![0.1, -0.4, 0.9, 0.0]).unwrap();
        let grid = phi_grid(DEFAULT_GRID);
        let pattern = composite_pattern(&geom, &state, &coupling, &grid).unwrap();
        let profile = directivity_profile(&pattern).unwrap();
        let mean = trapezoid(&profile, TAU / (grid.len() - 1) as f64) / TAU;
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn superdirective_excitation_beats_uniform() {
        let (geom, coupling) = setup(1);
        let theta = 0.4;
        let state = PairState::uniform(1, theta, 0.0);
        let grid = phi_grid(DEFAULT_GRID);
        let optimal = composite_pattern(&geom, &state, &coupling, &grid).unwrap();
        let positions = element_positions(&geom, &state, 0).unwrap();
        let uniform: Vec<Complex64> = grid
            .iter()
            .map(|&phi| {
                let a = steering_vector(positions, phi, geom.wavenumber());
                a[0] + a[1]
            })
            .collect();
        let d_opt = directivity(&optimal, theta).unwrap();
        let d_uni = directivity(&uniform, theta).unwrap();
        assert!(d_opt > d_uni, "{d_opt} vs {d_uni}");
        // Two closely spaced in-phase isotropic elements are nearly isotropic.
        assert!(d_uni < 1.5);
    }
}
