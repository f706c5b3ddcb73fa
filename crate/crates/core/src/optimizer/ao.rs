use std::time::Instant;

use rand::Rng;

use super::{AdamState, OptimizationTrace, OptimizerConfig, TraceRecord};
use crate::array::{to_db, wrap_angle, ArrayGeometry, CouplingModel, PairState};
use crate::channel::ChannelScene;
use crate::objective::{Objective, OpCounter};
use crate::rng::{self, Stream};
use crate::{MspError, Result};

/// Wraps every angle into `[0, 2π)` and clamps every offset into the bounds.
pub fn project(state: &PairState, geom: &ArrayGeometry) -> PairState {
    let mut out = state.clone();
    project_in_place(&mut out, geom);
    out
}

pub fn project_in_place(state: &mut PairState, geom: &ArrayGeometry) {
    for t in &mut state.theta {
        *t = wrap_angle(*t);
    }
    for y in &mut state.y {
        *y = y.clamp(geom.y_min, geom.y_max);
    }
}

/// Points every pair at the strongest path, plus uniform jitter in
/// `±jitter`, with all pairs on the `x` axis (or the nearest feasible offset).
pub fn initialize(
    scene: &ChannelScene,
    geom: &ArrayGeometry,
    jitter: f64,
    seed: u64,
) -> Result<PairState> {
    let strongest = scene
        .strongest_path()
        .ok_or_else(|| MspError::Scene("cannot initialize from an empty scene".into()))?;
    let aim = scene.paths[strongest].aoa;
    let mut rng = rng::stream(seed, Stream::InitJitter);
    let theta = (0..geom.num_pairs)
        .map(|_| {
            if jitter > 0.0 {
                aim + rng.gen_range(-jitter..=jitter)
            } else {
                aim
            }
        })
        .collect();
    let mut state = PairState::new(theta, vec![0.0; geom.num_pairs])?;
    project_in_place(&mut state, geom);
    Ok(state)
}

/// Runs the alternating optimizer from the strongest-path initialization.
pub fn alternating_optimize(
    geom: &ArrayGeometry,
    coupling: &CouplingModel,
    scene: &ChannelScene,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationTrace> {
    let start = Instant::now();
    let objective = Objective::new(geom, coupling, scene)?;
    let init = initialize(scene, geom, config.init_jitter, seed)?;
    alternating_optimize_with(&objective, init, config, start)
}

/// Alternating optimization from a given state.
///
/// Each outer iteration takes `inner_steps` Adam steps on every rotation
/// (pair by pair, each followed by projection), then the same on every offset.
/// The run stops once the best objective has not improved by a factor
/// `1 + rel_tol` for `patience` iterations, or after `max_outer_iters`.
/// Adam is not monotone, so the best state visited is returned.
pub fn alternating_optimize_with(
    objective: &Objective,
    initial: PairState,
    config: &OptimizerConfig,
    start: Instant,
) -> Result<OptimizationTrace> {
    config.validate()?;
    let geom = objective.geometry();
    initial.check_against(geom)?;
    let m = geom.num_pairs;

    let mut state = project(&initial, geom);
    let mut ops = OpCounter::default();
    let mut cache = objective.cache(&state, &mut ops);
    let initial_p = cache.p_signal();
    if !initial_p.is_finite() {
        return Err(MspError::NonFinite {
            iteration: 0,
            state,
        });
    }

    let mut adam_theta = AdamState::new(m);
    let mut adam_y = AdamState::new(m);
    let (b1, b2, eps) = (config.beta1, config.beta2, config.epsilon);

    let mut best_p = initial_p;
    let mut best_state = state.clone();
    let mut reference = initial_p;
    let mut last_improvement = 0;
    let mut records = vec![TraceRecord {
        iter: 0,
        p_signal: best_p,
        snr_db: to_db(objective.snr_from_power(best_p)),
        elapsed_s: start.elapsed().as_secs_f64(),
    }];
    let mut gradient_ops = 0;
    let mut iterations = 0;

    for iter in 1..=config.max_outer_iters {
        iterations = iter;
        let before = ops.0;
        for _ in 0..config.inner_steps {
            adam_theta.advance();
            for i in 0..m {
                let g = objective.grad_theta_cached(&cache, i, state.theta[i], config.gradient, &mut ops);
                let delta = adam_theta.step(i, g, config.alpha_theta, b1, b2, eps);
                state.theta[i] = wrap_angle(state.theta[i] + delta);
                objective.refresh_pair(&mut cache, i, state.theta[i], state.y[i], &mut ops);
            }
        }
        for _ in 0..config.inner_steps {
            adam_y.advance();
            for i in 0..m {
                let g = objective.grad_y_cached(&cache, i, &mut ops);
                let delta = adam_y.step(i, g, config.alpha_y, b1, b2, eps);
                let moved = (state.y[i] + delta).clamp(geom.y_min, geom.y_max);
                let dy = moved - state.y[i];
                state.y[i] = moved;
                if dy != 0.0 {
                    objective.shift_pair(&mut cache, i, dy, &mut ops);
                }
            }
        }
        gradient_ops += ops.0 - before;
        cache.resync();

        let p = cache.p_signal();
        if !p.is_finite() {
            return Err(MspError::NonFinite {
                iteration: iter,
                state,
            });
        }
        if p > best_p {
            best_p = p;
            best_state.clone_from(&state);
        }
        records.push(TraceRecord {
            iter,
            p_signal: best_p,
            snr_db: to_db(objective.snr_from_power(best_p)),
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        if best_p > reference * (1.0 + config.rel_tol) {
            reference = best_p;
            last_improvement = iter;
        } else if iter - last_improvement >= config.patience {
            break;
        }
    }

    // Score the returned state on the shared evaluation path.
    let best_p_signal = objective.p_signal(&best_state);
    Ok(OptimizationTrace {
        records,
        initial_state: project(&initial, geom),
        best_state,
        initial_p_signal: initial_p,
        best_p_signal,
        iterations,
        gradient_ops,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::coupling_matrix;
    use crate::channel::{fig2_scene, generate_scene, SceneSpec};
    use std::f64::consts::TAU;

    #[test]
    fn projection_examples() {
        let geom = ArrayGeometry::reference(2);
        let s = PairState::new(vec![-0.1, 7.0], vec![1.4, -3.0]).unwrap();
        let p = project(&s, &geom);
        assert!((p.theta[0] - (TAU - 0.1)).abs() < 1e-15);
        assert!((p.theta[1] - (7.0 - TAU)).abs() < 1e-15);
        assert_eq!(p.y, vec![1.0, -1.0]);
        assert_eq!(project(&p, &geom), p);
        assert!(p.is_feasible(&geom));
    }

    #[test]
    fn init_aims_at_strongest_path() {
        let geom = ArrayGeometry::reference(8);
        let state = initialize(&fig2_scene(), &geom, 2f64.to_radians(), 3).unwrap();
        for (t, y) in state.theta.iter().zip(&state.y) {
            assert!((t.to_degrees() - 142.0).abs() <= 2.0 + 1e-9);
            assert_eq!(*y, 0.0);
        }
        let exact = initialize(&fig2_scene(), &geom, 0.0, 3).unwrap();
        assert!(exact.theta.iter().all(|&t| t == 142f64.to_radians()));
    }

    #[test]
    fn init_respects_offset_bounds() {
        let geom = ArrayGeometry::reference(2).with_y_bounds(0.25, 0.5);
        let state = initialize(&fig2_scene(), &geom, 0.0, 0).unwrap();
        assert_eq!(state.y, vec![0.25, 0.25]);
    }

    #[test]
    fn run_improves_and_is_deterministic() {
        let geom = ArrayGeometry::reference(6);
        let c = coupling_matrix(geom.d_intra, geom.wavenumber()).unwrap();
        let scene = generate_scene(&SceneSpec::new(4), 21).unwrap();
        let cfg = OptimizerConfig::default();
        let a = alternating_optimize(&geom, &c, &scene, &cfg, 9).unwrap();
        let b = alternating_optimize(&geom, &c, &scene, &cfg, 9).unwrap();
        assert!(a.best_p_signal >= a.initial_p_signal);
        assert_eq!(a.best_state, b.best_state);
        assert!(a.records.windows(2).all(|w| w[1].p_signal >= w[0].p_signal));
        assert!(a.best_state.is_feasible(&geom));
    }

    #[test]
    fn zero_width_range_freezes_offsets() {
        let geom = ArrayGeometry::reference(4).with_y_bounds(0.0, 0.0);
        let c = coupling_matrix(geom.d_intra, geom.wavenumber()).unwrap();
        let scene = generate_scene(&SceneSpec::new(3), 5).unwrap();
        let t = alternating_optimize(&geom, &c, &scene, &OptimizerConfig::default(), 1).unwrap();
        assert!(t.best_state.y.iter().all(|&y| y == 0.0));
    }
}
