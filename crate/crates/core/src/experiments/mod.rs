//! Monte-Carlo experiment harness.
//!
//! Every trial `t` draws its scene from seed `base_seed + t`, so all methods
//! and all grid cells of one trial see the same scene; the SHA-256 of the
//! serialized scene is stored with each per-trial record to make the pairing
//! checkable. Trials run on a worker pool and are reduced in trial order, so
//! outputs do not depend on the number of workers.

mod fig2;
mod gradcheck;
mod sweeps;

pub use fig2::{pattern_csv, run_fig2, Fig2Result};
pub use gradcheck::{run_gradcheck, GradcheckReport, GradcheckSpec};
pub use sweeps::{run_fig3, run_fig4, run_table1};

use std::fmt::Write as _;

use crate::array::ArrayGeometry;
use crate::baselines::PsoConfig;
use crate::channel::SceneSpec;
use crate::io::fmt_f64;
use crate::optimizer::OptimizerConfig;
use crate::{MspError, Result};

/// Method tag carried by every result row and state file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MspAo,
    Pso,
    FpaMrc,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::MspAo => "msp-ao",
            Method::Pso => "pso",
            Method::FpaMrc => "fpa-mrc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "msp-ao" => Some(Method::MspAo),
            "pso" => Some(Method::Pso),
            "fpa-mrc" => Some(Method::FpaMrc),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Fig2,
    Fig3,
    Fig4,
    Table1,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Fig3 => "fig3",
            ExperimentKind::Fig4 => "fig4",
            ExperimentKind::Table1 => "table1",
        }
    }
}

/// Grid, trial count and solver settings of one experiment.
///
/// `geometry` and `scene` are templates: the number of pairs, number of
/// paths and (for movement-range sweeps) the offset bounds are overridden per
/// cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub m_values: Vec<usize>,
    pub l_values: Vec<usize>,
    /// Movement ranges γ in wavelengths; offsets are bounded to `[−γ, γ]`.
    pub gamma_values: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    pub geometry: ArrayGeometry,
    pub scene: SceneSpec,
    pub optimizer: OptimizerConfig,
    pub pso: PsoConfig,
    /// Worker threads; 0 uses all available cores.
    pub threads: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(MspError::Config(format!("{}: {msg}", self.kind.name())));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return fail("M values must be a nonempty list of positive integers".into());
        }
        if self.l_values.is_empty() || self.l_values.contains(&0) {
            return fail("L values must be a nonempty list of positive integers".into());
        }
        if self.kind == ExperimentKind::Fig4 {
            if self.gamma_values.is_empty() {
                return fail("gamma values must be nonempty".into());
            }
            if let Some(g) = self.gamma_values.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
                return fail(format!("gamma values must be finite and nonnegative, got {g}"));
            }
        }
        for &m in &self.m_values {
            self.geometry.clone().with_num_pairs(m).validate()?;
        }
        self.scene.validate()?;
        self.optimizer.validate()?;
        self.pso.validate()
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        trial_seed(self.base_seed, trial)
    }
}

/// Seed of trial `t`: `base_seed + t` (wrapping).
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed.wrapping_add(trial as u64)
}

/// Outcome of one method on one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub scene_sha256: String,
    pub num_pairs: usize,
    pub num_paths: usize,
    pub gamma: Option<f64>,
    pub method: Method,
    pub snr_linear: f64,
    pub snr_db: f64,
    pub spectral_efficiency: f64,
    pub iterations: usize,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    SpectralEfficiency,
    SnrDb,
}

impl Metric {
    pub fn of(&self, r: &TrialRecord) -> f64 {
        match self {
            Metric::SpectralEfficiency => r.spectral_efficiency,
            Metric::SnrDb => r.snr_db,
        }
    }
}

/// Mean, standard error (sample standard deviation over `√n`) and range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { n, mean: f64::NAN, stderr: f64::NAN, min: f64::NAN, max: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Rounding can push a mean of identical values a hair outside the range.
        Self { n, mean: mean.clamp(min, max), stderr, min, max }
    }
}

/// One grid cell of an aggregate table.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub num_pairs: usize,
    pub num_paths: usize,
    pub gamma: Option<f64>,
    pub method: Method,
    pub summary: Summary,
    pub mean_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub kind: ExperimentKind,
    pub metric: Metric,
    pub cells: Vec<Cell>,
    pub trials: Vec<TrialRecord>,
}

impl AggregateResult {
    /// Groups records by `(M, L, γ, method)` in first-appearance order.
    pub fn from_trials(kind: ExperimentKind, metric: Metric, trials: Vec<TrialRecord>) -> Self {
        type Key = (usize, usize, Option<u64>, Method);
        let mut order: Vec<Key> = Vec::new();
        let mut groups: Vec<Vec<&TrialRecord>> = Vec::new();
        for r in &trials {
            let key = (r.num_pairs, r.num_paths, r.gamma.map(f64::to_bits), r.method);
            match order.iter().position(|k| *k == key) {
                Some(i) => groups[i].push(r),
                None => {
                    order.push(key);
                    groups.push(vec![r]);
                }
            }
        }
        let cells = groups
            .iter()
            .map(|g| {
                let values: Vec<f64> = g.iter().map(|r| metric.of(r)).collect();
                Cell {
                    num_pairs: g[0].num_pairs,
                    num_paths: g[0].num_paths,
                    gamma: g[0].gamma,
                    method: g[0].method,
                    summary: Summary::of(&values),
                    mean_time_s: g.iter().map(|r| r.elapsed_s).sum::<f64>() / g.len() as f64,
                }
            })
            .collect();
        Self { kind, metric, cells, trials }
    }

    pub fn cell(&self, num_pairs: usize, num_paths: usize, gamma: Option<f64>, method: Method) -> Option<&Cell> {
        self.cells.iter().find(|c| {
            c.num_pairs == num_pairs && c.num_paths == num_paths && c.gamma == gamma && c.method == method
        })
    }

    /// Plot-ready table in the experiment's own column layout.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        match self.kind {
            ExperimentKind::Fig3 => {
                s.push_str("M,L,method,mean_se,stderr\n");
                for c in &self.cells {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{}",
                        c.num_pairs,
                        c.num_paths,
                        c.method.name(),
                        fmt_f64(c.summary.mean),
                        fmt_f64(c.summary.stderr)
                    );
                }
            }
            ExperimentKind::Fig4 => {
                s.push_str("gamma_over_lambda,M,mean_snr_db,stderr\n");
                for c in &self.cells {
                    let _ = writeln!(
                        s,
                        "{},{},{},{}",
                        fmt_f64(c.gamma.unwrap_or(f64::NAN)),
                        c.num_pairs,
                        fmt_f64(c.summary.mean),
                        fmt_f64(c.summary.stderr)
                    );
                }
            }
            ExperimentKind::Table1 | ExperimentKind::Fig2 => {
                s.push_str("M,L,method,trials,mean_snr_db,stderr,mean_runtime_s,machine\n");
                let machine = machine_descriptor();
                for c in &self.cells {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{machine}",
                        c.num_pairs,
                        c.num_paths,
                        c.method.name(),
                        c.summary.n,
                        fmt_f64(c.summary.mean),
                        fmt_f64(c.summary.stderr),
                        fmt_f64(c.mean_time_s)
                    );
                }
            }
        }
        s
    }

    /// Full per-trial records.
    pub fn trials_csv(&self) -> String {
        let mut s = String::from(
            "trial,seed,scene_sha256,M,L,gamma_over_lambda,method,snr_db,se,iterations,elapsed_s\n",
        );
        for r in &self.trials {
            let gamma = r.gamma.map(fmt_f64).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{gamma},{},{},{},{},{}",
                r.trial,
                r.seed,
                r.scene_sha256,
                r.num_pairs,
                r.num_paths,
                r.method.name(),
                fmt_f64(r.snr_db),
                fmt_f64(r.spectral_efficiency),
                r.iterations,
                fmt_f64(r.elapsed_s)
            );
        }
        s
    }
}

/// Columns holding wall-clock times; everything else in the CSVs is
/// reproducible bit for bit.
pub const WALL_TIME_COLUMNS: &[&str] = &["elapsed_s", "mean_runtime_s"];

/// `os-arch-Ncpu`, recorded with timing results.
pub fn machine_descriptor() -> String {
    let cpus = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!("{}-{}-{cpus}cpu", std::env::consts::OS, std::env::consts::ARCH)
}

pub(crate) fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| MspError::Config(format!("cannot start worker pool: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(m: usize, method: Method, se: f64) -> TrialRecord {
        TrialRecord {
            trial: 0,
            seed: 0,
            scene_sha256: String::new(),
            num_pairs: m,
            num_paths: 3,
            gamma: None,
            method,
            snr_linear: 2f64.powf(se) - 1.0,
            snr_db: 0.0,
            spectral_efficiency: se,
            iterations: 0,
            elapsed_s: 0.5,
        }
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!((s.min, s.max), (1.0, 4.0));
        assert_eq!(Summary::of(&[7.0]).stderr, 0.0);
        let same = Summary::of(&[0.1; 7]);
        assert!(same.mean >= same.min && same.mean <= same.max);
    }

    #[test]
    fn aggregation_groups_in_order() {
        let trials = vec![
            record(4, Method::MspAo, 5.0),
            record(4, Method::FpaMrc, 3.0),
            record(4, Method::MspAo, 6.0),
            record(8, Method::MspAo, 7.0),
        ];
        let agg = AggregateResult::from_trials(ExperimentKind::Fig3, Metric::SpectralEfficiency, trials);
        assert_eq!(agg.cells.len(), 3);
        assert_eq!(agg.cells[0].summary.mean, 5.5);
        assert_eq!(agg.cells[1].method, Method::FpaMrc);
        assert_eq!(agg.cell(8, 3, None, Method::MspAo).unwrap().summary.n, 1);
        let csv = agg.to_csv();
        assert!(csv.starts_with("M,L,method,mean_se,stderr\n4,3,msp-ao,5.5,"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::MspAo, Method::Pso, Method::FpaMrc] {
            assert_eq!(Method::parse(m.name()), Some(m));
        }
        assert_eq!(Method::parse("ga"), None);
    }

    #[test]
    fn trial_seeds_are_offsets() {
        assert_eq!(trial_seed(10, 5), 15);
        assert_eq!(trial_seed(u64::MAX, 1), 0);
    }
}
