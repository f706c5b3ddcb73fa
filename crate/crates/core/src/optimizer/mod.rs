//! Alternating Adam / gradient-projection maximization of `P_signal`.

mod adam;
mod ao;
mod gradient;

pub use adam::{adam_delta, AdamState};
pub use ao::{alternating_optimize, alternating_optimize_with, initialize, project, project_in_place};
pub use gradient::{grad_theta, grad_y};

use crate::array::PairState;
use crate::{MspError, Result};

/// Which derivative of the pair pattern with respect to rotation is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientModel {
    /// Differentiates steering vector, normalizer and excitation.
    #[default]
    Full,
    /// Holds the excitation currents fixed and differentiates only the
    /// element positions.
    FrozenCurrents,
}

impl GradientModel {
    pub fn name(&self) -> &'static str {
        match self {
            GradientModel::Full => "full",
            GradientModel::FrozenCurrents => "frozen",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(GradientModel::Full),
            "frozen" => Some(GradientModel::FrozenCurrents),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Adam step size for rotations (radians).
    pub alpha_theta: f64,
    /// Adam step size for offsets (wavelengths).
    pub alpha_y: f64,
    /// Adam steps per variable block in one outer iteration.
    pub inner_steps: usize,
    pub max_outer_iters: usize,
    /// Relative improvement of the best objective that resets the patience window.
    pub rel_tol: f64,
    pub patience: usize,
    /// Half-width of the uniform jitter around the strongest path (radians).
    pub init_jitter: f64,
    pub gradient: GradientModel,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            alpha_theta: 0.05,
            alpha_y: 0.02,
            inner_steps: 1,
            max_outer_iters: 500,
            rel_tol: 1e-6,
            patience: 50,
            init_jitter: 2f64.to_radians(),
            gradient: GradientModel::Full,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(MspError::OptimizerConfig(msg));
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return fail(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("alpha_theta", self.alpha_theta),
            ("alpha_y", self.alpha_y),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if self.inner_steps == 0 {
            return fail("inner_steps must be at least 1".into());
        }
        if !(self.rel_tol.is_finite() && self.rel_tol >= 0.0) {
            return fail(format!("rel_tol must be nonnegative, got {}", self.rel_tol));
        }
        if !(self.init_jitter.is_finite() && self.init_jitter >= 0.0) {
            return fail("init_jitter must be nonnegative".into());
        }
        Ok(())
    }
}

/// Best-so-far progress of one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub p_signal: f64,
    pub snr_db: f64,
    pub elapsed_s: f64,
}

/// Result of an optimization run. `records` hold the best objective seen so
/// far, so they never decrease.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub records: Vec<TraceRecord>,
    pub initial_state: PairState,
    pub best_state: PairState,
    pub initial_p_signal: f64,
    pub best_p_signal: f64,
    pub iterations: usize,
    /// Path-term evaluations spent on gradients.
    pub gradient_ops: u64,
    pub elapsed_s: f64,
}
