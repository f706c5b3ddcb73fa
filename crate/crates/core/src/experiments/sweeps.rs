//! Monte-Carlo sweeps: spectral efficiency vs M and L, SNR vs movement
//! range, and runtime / SNR against PSO.

use std::time::Instant;

use rayon::prelude::*;

use super::{AggregateResult, ExperimentKind, ExperimentSpec, Method, Metric, TrialRecord};
use crate::array::{coupling_matrix, ArrayGeometry, SnrReport};
use crate::baselines::{fpa_mrc_snr, pso_optimize, FpaConfig, PsoConfig};
use crate::channel::{generate_scene, ChannelScene, SceneSpec};
use crate::io::SceneFile;
use crate::objective::Objective;
use crate::optimizer::{alternating_optimize, OptimizerConfig};
use crate::{MspError, Result};

struct Trial {
    index: usize,
    seed: u64,
    scene: ChannelScene,
    sha: String,
}

impl Trial {
    fn draw(spec: &ExperimentSpec, num_paths: usize, index: usize) -> Result<Self> {
        let seed = spec.trial_seed(index);
        let scene_spec = SceneSpec { num_paths, ..spec.scene.clone() };
        let scene = generate_scene(&scene_spec, seed)?;
        let sha = SceneFile::new(scene.clone(), Some(seed)).sha256();
        Ok(Self { index, seed, scene, sha })
    }

    fn record(
        &self,
        geom: &ArrayGeometry,
        gamma: Option<f64>,
        method: Method,
        report: SnrReport,
        iterations: usize,
        elapsed_s: f64,
    ) -> TrialRecord {
        TrialRecord {
            trial: self.index,
            seed: self.seed,
            scene_sha256: self.sha.clone(),
            num_pairs: geom.num_pairs,
            num_paths: self.scene.num_paths(),
            gamma,
            method,
            snr_linear: report.linear,
            snr_db: report.db,
            spectral_efficiency: report.spectral_efficiency,
            iterations,
            elapsed_s,
        }
    }
}

fn msp(geom: &ArrayGeometry, trial: &Trial, cfg: &OptimizerConfig, gamma: Option<f64>) -> Result<TrialRecord> {
    let coupling = coupling_matrix(geom.d_intra, geom.wavenumber())?;
    let trace = alternating_optimize(geom, &coupling, &trial.scene, cfg, trial.seed)?;
    let report = Objective::new(geom, &coupling, &trial.scene)?.snr(&trace.best_state);
    Ok(trial.record(geom, gamma, Method::MspAo, report, trace.iterations, trace.elapsed_s))
}

fn pso(geom: &ArrayGeometry, trial: &Trial, cfg: &PsoConfig) -> Result<TrialRecord> {
    let coupling = coupling_matrix(geom.d_intra, geom.wavenumber())?;
    let cfg = PsoConfig { seed: trial.seed, ..cfg.clone() };
    let trace = pso_optimize(geom, &coupling, &trial.scene, &cfg)?;
    let report = Objective::new(geom, &coupling, &trial.scene)?.snr(&trace.best_state);
    Ok(trial.record(geom, None, Method::Pso, report, trace.iterations, trace.elapsed_s))
}

fn fpa(geom: &ArrayGeometry, trial: &Trial) -> TrialRecord {
    let start = Instant::now();
    let report = fpa_mrc_snr(&FpaConfig::matching(geom.num_pairs), &trial.scene);
    trial.record(geom, None, Method::FpaMrc, report, 0, start.elapsed().as_secs_f64())
}

fn expect_kind(spec: &ExperimentSpec, kind: ExperimentKind) -> Result<()> {
    if spec.kind != kind {
        return Err(MspError::Config(format!(
            "expected a {} spec, got {}",
            kind.name(),
            spec.kind.name()
        )));
    }
    spec.validate()
}

/// Runs `job` for every index on the spec's worker pool and concatenates
/// the results in index order.
fn parallel<T, F>(spec: &ExperimentSpec, jobs: &[T], job: F) -> Result<Vec<TrialRecord>>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<TrialRecord>> + Sync,
{
    let pool = super::thread_pool(spec.threads)?;
    let per_job: Vec<Vec<TrialRecord>> =
        pool.install(|| jobs.par_iter().map(&job).collect::<Result<_>>())?;
    Ok(per_job.into_iter().flatten().collect())
}

/// Mean spectral efficiency of the optimized MSP array and of the fixed
/// MRC array over `(M, L)`, both evaluated on the same scenes.
pub fn run_fig3(spec: &ExperimentSpec) -> Result<AggregateResult> {
    expect_kind(spec, ExperimentKind::Fig3)?;
    let mut jobs = Vec::new();
    for &m in &spec.m_values {
        for &l in &spec.l_values {
            for t in 0..spec.trials {
                jobs.push((m, l, t));
            }
        }
    }
    let records = parallel(spec, &jobs, |&(m, l, t)| {
        let geom = spec.geometry.clone().with_num_pairs(m);
        let trial = Trial::draw(spec, l, t)?;
        Ok(vec![msp(&geom, &trial, &spec.optimizer, None)?, fpa(&geom, &trial)])
    })?;
    // Present cells grouped by (M, L) with both methods adjacent.
    let mut ordered = Vec::with_capacity(records.len());
    for chunk in records.chunks(2 * spec.trials) {
        ordered.extend(chunk.iter().filter(|r| r.method == Method::MspAo).cloned());
        ordered.extend(chunk.iter().filter(|r| r.method == Method::FpaMrc).cloned());
    }
    Ok(AggregateResult::from_trials(ExperimentKind::Fig3, Metric::SpectralEfficiency, ordered))
}

/// Mean optimized SNR (dB) versus the movement range `γ`, offsets bounded to
/// `[−γ, γ]`. Trial `t` uses the same scene for every `(γ, M)`.
pub fn run_fig4(spec: &ExperimentSpec) -> Result<AggregateResult> {
    expect_kind(spec, ExperimentKind::Fig4)?;
    let l = match spec.l_values.as_slice() {
        [l] => *l,
        _ => return Err(MspError::Config("fig4: exactly one L value is required".into())),
    };
    let mut jobs = Vec::new();
    for &gamma in &spec.gamma_values {
        for &m in &spec.m_values {
            for t in 0..spec.trials {
                jobs.push((gamma, m, t));
            }
        }
    }
    let records = parallel(spec, &jobs, |&(gamma, m, t)| {
        let geom = spec.geometry.clone().with_num_pairs(m).with_y_bounds(-gamma, gamma);
        let trial = Trial::draw(spec, l, t)?;
        Ok(vec![msp(&geom, &trial, &spec.optimizer, Some(gamma))?])
    })?;
    Ok(AggregateResult::from_trials(ExperimentKind::Fig4, Metric::SnrDb, records))
}

/// Optimized SNR and wall time of the alternating optimizer and of PSO.
///
/// Runs on the calling thread only, so the two runtimes are measured under
/// the same conditions.
pub fn run_table1(spec: &ExperimentSpec) -> Result<AggregateResult> {
    expect_kind(spec, ExperimentKind::Table1)?;
    let mut records = Vec::new();
    for &m in &spec.m_values {
        let geom = spec.geometry.clone().with_num_pairs(m);
        for &l in &spec.l_values {
            let mut ao = Vec::with_capacity(spec.trials);
            let mut swarm = Vec::with_capacity(spec.trials);
            for t in 0..spec.trials {
                let trial = Trial::draw(spec, l, t)?;
                ao.push(msp(&geom, &trial, &spec.optimizer, None)?);
                swarm.push(pso(&geom, &trial, &spec.pso)?);
            }
            records.extend(ao);
            records.extend(swarm);
        }
    }
    Ok(AggregateResult::from_trials(ExperimentKind::Table1, Metric::SnrDb, records))
}
