/// First and second moment estimates of one block of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Steps taken by this block.
    pub t: u32,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    /// Starts a new step of the whole block.
    pub fn advance(&mut self) {
        self.t += 1;
    }

    /// Ascent step for variable `idx` given its gradient.
    pub fn step(&mut self, idx: usize, grad: f64, alpha: f64, beta1: f64, beta2: f64, eps: f64) -> f64 {
        adam_delta(grad, &mut self.m[idx], &mut self.v[idx], self.t, alpha, beta1, beta2, eps)
    }
}

/// Bias-corrected Adam update for a single variable at step `t ≥ 1`.
///
/// The objective is maximized, so the returned delta points along
/// `+m̂/(√v̂ + ε)`.
#[allow(clippy::too_many_arguments)]
pub fn adam_delta(
    grad: f64,
    m: &mut f64,
    v: &mut f64,
    t: u32,
    alpha: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> f64 {
    debug_assert!(t >= 1, "Adam step counter starts at 1");
    *m = beta1 * *m + (1.0 - beta1) * grad;
    *v = beta2 * *v + (1.0 - beta2) * grad * grad;
    let m_hat = *m / (1.0 - beta1.powi(t as i32));
    let v_hat = *v / (1.0 - beta2.powi(t as i32));
    alpha * m_hat / (v_hat.sqrt() + eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_step_is_alpha() {
        let (mut m, mut v) = (0.0, 0.0);
        let d = adam_delta(1.0, &mut m, &mut v, 1, 0.01, 0.9, 0.999, 1e-8);
        assert_abs_diff_eq!(d, 0.01 / (1.0 + 1e-8), epsilon = 1e-15);
        assert!(d > 0.0);
    }

    #[test]
    fn zero_gradient_does_not_move() {
        let mut s = AdamState::new(3);
        s.advance();
        assert_eq!(s.step(1, 0.0, 0.1, 0.9, 0.999, 1e-8), 0.0);
    }

    #[test]
    fn constant_gradient_step_tends_to_alpha() {
        let mut s = AdamState::new(1);
        let mut last = 0.0;
        for _ in 0..5000 {
            s.advance();
            last = s.step(0, -3.5, 0.02, 0.9, 0.999, 1e-8);
        }
        assert_abs_diff_eq!(last, -0.02, epsilon = 1e-9);
        assert!(s.v[0] >= 0.0);
    }
}
