//! Global-best particle swarm over `(θ_1..θ_M, y_1..y_M)`.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::Rng;

use crate::array::{to_db, wrap_angle, ArrayGeometry, CouplingModel, PairState};
use crate::channel::ChannelScene;
use crate::objective::Objective;
use crate::optimizer::{OptimizationTrace, TraceRecord};
use crate::rng::{self, Stream};
use crate::{MspError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Maximum speed per dimension as a fraction of that dimension's range.
    pub velocity_clamp: f64,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 50,
            iterations: 200,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            velocity_clamp: 0.2,
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        // A single particle is allowed; it simply drifts with its own velocity.
        if self.swarm_size == 0 {
            return Err(MspError::OptimizerConfig("swarm_size must be at least 1".into()));
        }
        for (name, v) in [
            ("inertia", self.inertia),
            ("cognitive", self.cognitive),
            ("social", self.social),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(MspError::OptimizerConfig(format!(
                    "pso.{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.velocity_clamp.is_finite() && self.velocity_clamp >= 0.0) {
            return Err(MspError::OptimizerConfig(
                "pso.velocity_clamp must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    best_position: Vec<f64>,
    best_value: f64,
}

fn to_state(x: &[f64], m: usize) -> PairState {
    PairState {
        theta: x[..m].to_vec(),
        y: x[m..].to_vec(),
    }
}

pub fn pso_optimize(
    geom: &ArrayGeometry,
    coupling: &CouplingModel,
    scene: &ChannelScene,
    config: &PsoConfig,
) -> Result<OptimizationTrace> {
    let start = Instant::now();
    let objective = Objective::new(geom, coupling, scene)?;
    pso_optimize_objective(&objective, config, start)
}

/// Runs the swarm against an existing objective. Positions are kept feasible:
/// angles wrap modulo 2π and offsets are clamped.
pub fn pso_optimize_objective(
    objective: &Objective,
    config: &PsoConfig,
    start: Instant,
) -> Result<OptimizationTrace> {
    config.validate()?;
    let geom = objective.geometry();
    let m = geom.num_pairs;
    let dims = 2 * m;
    let lower: Vec<f64> = (0..dims).map(|d| if d < m { 0.0 } else { geom.y_min }).collect();
    let range: Vec<f64> = (0..dims)
        .map(|d| if d < m { TAU } else { geom.y_max - geom.y_min })
        .collect();
    let vmax: Vec<f64> = range.iter().map(|r| r * config.velocity_clamp).collect();

    let mut rng = rng::stream(config.seed, Stream::Pso);
    let mut swarm: Vec<Particle> = (0..config.swarm_size)
        .map(|_| {
            let position: Vec<f64> = (0..dims)
                .map(|d| {
                    let x = lower[d] + range[d] * rng.gen::<f64>();
                    if d < m {
                        wrap_angle(x)
                    } else {
                        x.clamp(geom.y_min, geom.y_max)
                    }
                })
                .collect();
            let velocity = (0..dims)
                .map(|d| if vmax[d] > 0.0 { rng.gen_range(-vmax[d]..=vmax[d]) } else { 0.0 })
                .collect();
            Particle {
                best_position: position.clone(),
                position,
                velocity,
                best_value: f64::NEG_INFINITY,
            }
        })
        .collect();

    let mut global_best = Vec::new();
    let mut global_value = f64::NEG_INFINITY;
    for p in &mut swarm {
        let value = objective.p_signal(&to_state(&p.position, m));
        check_finite(value, 0, &p.position, m)?;
        p.best_value = value;
        if value > global_value {
            global_value = value;
            global_best.clone_from(&p.position);
        }
    }
    let initial_state = to_state(&global_best, m);
    let initial_p = global_value;

    let mut records = vec![TraceRecord {
        iter: 0,
        p_signal: global_value,
        snr_db: to_db(objective.snr_from_power(global_value)),
        elapsed_s: start.elapsed().as_secs_f64(),
    }];

    for iter in 1..=config.iterations {
        for p in &mut swarm {
            for d in 0..dims {
                let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
                let v = config.inertia * p.velocity[d]
                    + config.cognitive * r1 * (p.best_position[d] - p.position[d])
                    + config.social * r2 * (global_best[d] - p.position[d]);
                p.velocity[d] = v.clamp(-vmax[d], vmax[d]);
                let x = p.position[d] + p.velocity[d];
                p.position[d] = if d < m {
                    wrap_angle(x)
                } else {
                    x.clamp(geom.y_min, geom.y_max)
                };
            }
        }
        // Evaluate, then fold the global best in particle order.
        for p in &mut swarm {
            let value = objective.p_signal(&to_state(&p.position, m));
            check_finite(value, iter, &p.position, m)?;
            if value > p.best_value {
                p.best_value = value;
                p.best_position.clone_from(&p.position);
            }
        }
        for p in &swarm {
            if p.best_value > global_value {
                global_value = p.best_value;
                global_best.clone_from(&p.best_position);
            }
        }
        records.push(TraceRecord {
            iter,
            p_signal: global_value,
            snr_db: to_db(objective.snr_from_power(global_value)),
            elapsed_s: start.elapsed().as_secs_f64(),
        });
    }

    let best_state = to_state(&global_best, m);
    Ok(OptimizationTrace {
        records,
        initial_state,
        best_p_signal: objective.p_signal(&best_state),
        best_state,
        initial_p_signal: initial_p,
        iterations: config.iterations,
        gradient_ops: 0,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

fn check_finite(value: f64, iteration: usize, x: &[f64], m: usize) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(MspError::NonFinite {
            iteration,
            state: to_state(x, m),
        })
    }
}
