//! Analytic gradients against central finite differences on random configurations.

use rand::Rng;

use crate::array::{coupling_matrix, ArrayGeometry, PairState};
use crate::channel::{generate_scene, SceneSpec};
use crate::objective::{Objective, OpCounter};
use crate::optimizer::GradientModel;
use crate::rng::{self, Stream};
use crate::{MspError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckSpec {
    pub trials: usize,
    pub max_pairs: usize,
    pub max_paths: usize,
    /// Central-difference step (radians for rotations, wavelengths for offsets).
    pub step: f64,
    pub tol_theta: f64,
    pub tol_y: f64,
    pub seed: u64,
    /// Template for spacings, bounds and power; `num_pairs` is drawn per trial.
    pub geometry: ArrayGeometry,
    pub gradient: GradientModel,
}

impl Default for GradcheckSpec {
    fn default() -> Self {
        Self {
            trials: 100,
            max_pairs: 8,
            max_paths: 7,
            step: 1e-6,
            tol_theta: 1e-6,
            tol_y: 1e-8,
            seed: 0,
            geometry: ArrayGeometry::reference(1),
            gradient: GradientModel::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub configs: usize,
    /// Largest `max_i |g_i − fd_i| / max(max_i |fd_i|, P_signal)` over the
    /// rotation block; this is the gated figure.
    pub max_rel_theta: f64,
    pub max_rel_y: f64,
    /// Same without the `P_signal` floor. Unbounded where a block's gradient
    /// vanishes (a lone pair under a single path cannot sense its offset).
    pub max_raw_theta: f64,
    pub max_raw_y: f64,
    pub tol_theta: f64,
    pub tol_y: f64,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_theta < self.tol_theta && self.max_rel_y < self.tol_y
    }
}

/// Block error `max_i |a_i − n_i| / max(max_i |n_i|, floor)`.
///
/// A central difference of `P` carries an absolute error of roughly
/// `ε·P/h + h²·P'''`, so near-stationary blocks are compared against the
/// objective's own magnitude instead of a vanishing gradient.
pub(crate) fn block_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    let diff = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs())
        .fold(0.0, f64::max);
    let scale = numeric.iter().map(|n| n.abs()).fold(floor, f64::max);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

pub fn run_gradcheck(spec: &GradcheckSpec) -> Result<GradcheckReport> {
    if spec.trials == 0 || spec.max_pairs == 0 || spec.max_paths == 0 {
        return Err(MspError::Config(
            "gradcheck: trials, max_pairs and max_paths must be positive".into(),
        ));
    }
    if !(spec.step.is_finite() && spec.step > 0.0) {
        return Err(MspError::Config(format!("gradcheck: step must be positive, got {}", spec.step)));
    }
    spec.geometry.validate()?;
    let mut rng = rng::stream(spec.seed, Stream::GradCheck);
    let mut report = GradcheckReport {
        configs: spec.trials,
        max_rel_theta: 0.0,
        max_rel_y: 0.0,
        max_raw_theta: 0.0,
        max_raw_y: 0.0,
        tol_theta: spec.tol_theta,
        tol_y: spec.tol_y,
    };
    for _ in 0..spec.trials {
        let m = rng.gen_range(1..=spec.max_pairs);
        let l = rng.gen_range(1..=spec.max_paths);
        let geom = spec.geometry.clone().with_num_pairs(m);
        let scene = generate_scene(&SceneSpec::new(l), rng.gen())?;
        let theta = (0..m).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let y = (0..m).map(|_| rng.gen_range(geom.y_min..=geom.y_max)).collect();
        let state = PairState::new(theta, y)?;

        let coupling = coupling_matrix(geom.d_intra, geom.wavenumber())?;
        let objective = Objective::new(&geom, &coupling, &scene)?;
        let grad = objective.gradient(&state, spec.gradient, &mut OpCounter::default());

        let h = spec.step;
        let central = |perturb: &dyn Fn(&mut PairState, f64)| {
            let (mut plus, mut minus) = (state.clone(), state.clone());
            perturb(&mut plus, h);
            perturb(&mut minus, -h);
            (objective.p_signal(&plus) - objective.p_signal(&minus)) / (2.0 * h)
        };
        let fd_theta: Vec<f64> = (0..m).map(|i| central(&|s, d| s.theta[i] += d)).collect();
        let fd_y: Vec<f64> = (0..m).map(|i| central(&|s, d| s.y[i] += d)).collect();

        let p = grad.p_signal.abs();
        report.max_rel_theta = report.max_rel_theta.max(block_error(&grad.theta, &fd_theta, p));
        report.max_rel_y = report.max_rel_y.max(block_error(&grad.y, &fd_y, p));
        report.max_raw_theta = report.max_raw_theta.max(block_error(&grad.theta, &fd_theta, 0.0));
        report.max_raw_y = report.max_raw_y.max(block_error(&grad.y, &fd_y, 0.0));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_error_scales_by_reference() {
        assert_eq!(block_error(&[1.0, 2.0], &[1.0, 2.0], 0.0), 0.0);
        assert!((block_error(&[1.0, 2.02], &[1.0, 2.0], 0.0) - 0.01).abs() < 1e-12);
        assert!((block_error(&[1.0, 2.02], &[1.0, 2.0], 4.0) - 0.005).abs() < 1e-12);
        assert_eq!(block_error(&[1e-3], &[0.0], 0.0), 1e-3);
    }

    #[test]
    fn small_check_passes() {
        let r = run_gradcheck(&GradcheckSpec { trials: 10, ..GradcheckSpec::default() }).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(run_gradcheck(&GradcheckSpec { trials: 0, ..GradcheckSpec::default() }).is_err());
    }
}
