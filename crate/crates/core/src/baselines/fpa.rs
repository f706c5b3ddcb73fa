use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::array::SnrReport;
use crate::channel::ChannelScene;

/// Fixed uniform linear array on the `x` axis with isotropic unit-gain elements.
#[derive(Debug, Clone, PartialEq)]
pub struct FpaConfig {
    pub num_elements: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl FpaConfig {
    /// Same element count as an array of `num_pairs` pairs, at λ/2 spacing.
    pub fn matching(num_pairs: usize) -> Self {
        Self {
            num_elements: 2 * num_pairs,
            spacing: 0.5,
        }
    }

    pub fn channel(&self, scene: &ChannelScene) -> Vec<Complex64> {
        (0..self.num_elements)
            .map(|n| {
                let x = n as f64 * self.spacing;
                scene
                    .paths
                    .iter()
                    .map(|p| Complex64::cis(TAU * x * p.aoa.cos()) * p.amplitude)
                    .sum()
            })
            .collect()
    }
}

/// Maximum-ratio combining over the fixed array: `SNR = Σ_n |h_n|² / σ²`.
pub fn fpa_mrc_snr(fpa: &FpaConfig, scene: &ChannelScene) -> SnrReport {
    let gain: f64 = fpa.channel(scene).iter().map(|h| h.norm_sqr()).sum();
    SnrReport::from_linear(gain / scene.noise_power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Path;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn scene(paths: &[(f64, f64)]) -> ChannelScene {
        ChannelScene::new(
            paths.iter().map(|&(amplitude, aoa)| Path { amplitude, aoa }).collect(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn single_plane_wave_gives_element_count() {
        for m in [1, 4, 9] {
            let r = fpa_mrc_snr(&FpaConfig::matching(m), &scene(&[(1.0, 0.83)]));
            assert_abs_diff_eq!(r.linear, 2.0 * m as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn amplitude_scaling_is_quadratic() {
        let s = scene(&[(0.3, 0.4), (0.5, 2.2), (0.2, 1.1)]);
        let fpa = FpaConfig::matching(5);
        let a = fpa_mrc_snr(&fpa, &s).linear;
        let b = fpa_mrc_snr(&fpa, &s.scaled(3.0)).linear;
        assert_abs_diff_eq!(b, 9.0 * a, epsilon = 1e-10);
    }

    #[test]
    fn two_element_two_path_by_hand() {
        let a = FRAC_1_SQRT_2;
        let (p1, p2) = (60f64.to_radians(), 120f64.to_radians());
        let s = scene(&[(a, p1), (a, p2)]);
        let fpa = FpaConfig {
            num_elements: 2,
            spacing: 0.5,
        };
        // h_1 = a + a = √2; h_2 = a e^{jπ cos60°} + a e^{jπ cos120°} = √2 cos(π/2) = 0
        let h1 = Complex64::new(2.0 * a, 0.0);
        let h2 = Complex64::cis(std::f64::consts::PI * p1.cos()) * a
            + Complex64::cis(std::f64::consts::PI * p2.cos()) * a;
        let want = h1.norm_sqr() + h2.norm_sqr();
        assert_abs_diff_eq!(fpa_mrc_snr(&fpa, &s).linear, want, epsilon = 1e-12);
        assert_abs_diff_eq!(want, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn global_phase_does_not_matter() {
        let s = scene(&[(0.6, 0.4), (0.8, 2.0)]);
        let fpa = FpaConfig::matching(3);
        let h = fpa.channel(&s);
        let rotated: f64 = h.iter().map(|x| (x * Complex64::cis(1.234)).norm_sqr()).sum();
        assert_abs_diff_eq!(rotated, fpa_mrc_snr(&fpa, &s).linear, epsilon = 1e-12);
    }
}
