//! Multipath scenes seen by the receive array.

use std::f64::consts::PI;

use rand::Rng;

use crate::rng::{self, Stream};
use crate::{MspError, Result};

/// One propagation path: effective strength and angle of arrival (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub amplitude: f64,
    pub aoa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScene {
    pub paths: Vec<Path>,
    /// Noise power σ² at each pair port.
    pub noise_power: f64,
}

impl ChannelScene {
    pub fn new(paths: Vec<Path>, noise_power: f64) -> Result<Self> {
        let scene = Self { paths, noise_power };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(MspError::Scene(format!(
                "noise power must be positive, got {}",
                self.noise_power
            )));
        }
        for (l, p) in self.paths.iter().enumerate() {
            if !(p.amplitude.is_finite() && p.amplitude >= 0.0) {
                return Err(MspError::Scene(format!(
                    "path {l}: amplitude must be finite and nonnegative, got {}",
                    p.amplitude
                )));
            }
            if !p.aoa.is_finite() {
                return Err(MspError::Scene(format!("path {l}: non-finite angle")));
            }
        }
        Ok(())
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    /// Index of the path with the largest amplitude (first one on ties).
    pub fn strongest_path(&self) -> Option<usize> {
        self.paths
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (l, p)| match best {
                Some((_, a)) if a >= p.amplitude => best,
                _ => Some((l, p.amplitude)),
            })
            .map(|(l, _)| l)
    }

    pub fn energy(&self) -> f64 {
        self.paths.iter().map(|p| p.amplitude * p.amplitude).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            paths: self
                .paths
                .iter()
                .map(|p| Path {
                    amplitude: p.amplitude * factor,
                    aoa: p.aoa,
                })
                .collect(),
            noise_power: self.noise_power,
        }
    }
}

/// Distribution of the raw path amplitudes before unit-energy normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeLaw {
    /// Uniform on (0, 1].
    #[default]
    Uniform,
    /// Rayleigh with unit scale.
    Rayleigh,
}

impl AmplitudeLaw {
    pub fn name(&self) -> &'static str {
        match self {
            AmplitudeLaw::Uniform => "uniform",
            AmplitudeLaw::Rayleigh => "rayleigh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(AmplitudeLaw::Uniform),
            "rayleigh" => Some(AmplitudeLaw::Rayleigh),
            _ => None,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        // gen::<f64>() is in [0, 1); flip it to (0, 1].
        let u = 1.0 - rng.gen::<f64>();
        match self {
            AmplitudeLaw::Uniform => u,
            AmplitudeLaw::Rayleigh => (-2.0 * u.ln()).sqrt(),
        }
    }
}

/// Parameters of the random scene generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub num_paths: usize,
    /// AoAs are drawn uniformly from `[angle_min, angle_max)` (radians).
    pub angle_min: f64,
    pub angle_max: f64,
    pub amplitude_law: AmplitudeLaw,
    pub noise_power: f64,
}

impl SceneSpec {
    pub fn new(num_paths: usize) -> Self {
        Self {
            num_paths,
            angle_min: 0.0,
            angle_max: PI,
            amplitude_law: AmplitudeLaw::Uniform,
            noise_power: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_paths == 0 {
            return Err(MspError::Scene("at least one path is required".into()));
        }
        if !(self.angle_min.is_finite()
            && self.angle_max.is_finite()
            && self.angle_min < self.angle_max)
        {
            return Err(MspError::Scene(format!(
                "invalid angle range [{}, {})",
                self.angle_min, self.angle_max
            )));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(MspError::Scene("noise power must be positive".into()));
        }
        Ok(())
    }
}

/// Draws a scene with i.i.d. angles and amplitudes, scaled to `Σ A_l² = 1`.
pub fn generate_scene(spec: &SceneSpec, seed: u64) -> Result<ChannelScene> {
    spec.validate()?;
    let mut rng = rng::stream(seed, Stream::Scene);
    let width = spec.angle_max - spec.angle_min;
    let mut paths: Vec<Path> = (0..spec.num_paths)
        .map(|_| {
            let aoa = spec.angle_min + width * rng.gen::<f64>();
            let amplitude = spec.amplitude_law.sample(&mut rng);
            Path { amplitude, aoa }
        })
        .collect();
    let norm = paths.iter().map(|p| p.amplitude * p.amplitude).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(MspError::Scene("all drawn amplitudes are zero".into()));
    }
    for p in &mut paths {
        p.amplitude /= norm;
    }
    ChannelScene::new(paths, spec.noise_power)
}

/// Fixed three-path scene of the pattern study, stored verbatim (its energy
/// is 0.9849, not 1).
pub fn fig2_scene() -> ChannelScene {
    let paths = [(0.4, 115.0), (0.85, 142.0), (0.32, 161.0)]
        .iter()
        .map(|&(amplitude, deg): &(f64, f64)| Path {
            amplitude,
            aoa: deg.to_radians(),
        })
        .collect();
    ChannelScene {
        paths,
        noise_power: 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn fig2_scene_is_verbatim() {
        let s = fig2_scene();
        assert_abs_diff_eq!(s.energy(), 0.9849, epsilon = 1e-12);
        assert_eq!(s.strongest_path(), Some(1));
        assert_eq!(s.paths[1].aoa, 142f64.to_radians());
        assert_eq!(s.noise_power, 1.0);
    }

    #[test]
    fn single_path_has_unit_amplitude() {
        for seed in 0..20 {
            let s = generate_scene(&SceneSpec::new(1), seed).unwrap();
            assert_eq!(s.paths[0].amplitude, 1.0);
        }
    }

    #[test]
    fn zero_paths_rejected() {
        assert!(generate_scene(&SceneSpec::new(0), 1).is_err());
    }

    #[test]
    fn same_seed_same_scene() {
        let spec = SceneSpec::new(5);
        assert_eq!(generate_scene(&spec, 11).unwrap(), generate_scene(&spec, 11).unwrap());
        assert_ne!(generate_scene(&spec, 11).unwrap(), generate_scene(&spec, 12).unwrap());
    }

    proptest! {
        #[test]
        fn generated_scenes_have_unit_energy(
            seed in any::<u64>(),
            l in 1usize..12,
            rayleigh in any::<bool>(),
        ) {
            let mut spec = SceneSpec::new(l);
            if rayleigh {
                spec.amplitude_law = AmplitudeLaw::Rayleigh;
            }
            let s = generate_scene(&spec, seed).unwrap();
            prop_assert!((s.energy() - 1.0).abs() < 1e-12);
            for p in &s.paths {
                prop_assert!(p.amplitude >= 0.0);
                prop_assert!(p.aoa >= 0.0 && p.aoa < PI);
            }
        }
    }
}
