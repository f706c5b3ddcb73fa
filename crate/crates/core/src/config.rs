//! Flat key-value configuration shared by every subcommand.
//!
//! A config file is a list of `key = value` lines (TOML syntax). Experiment
//! keys are namespaced (`fig3.trials`); writing them as `[fig3]` tables is
//! equivalent. Unknown keys are errors. A scene or state file is also a valid
//! config: its `amplitudes` / `theta_deg` keys pin the scene and array state.
//!
//! Angles are given in degrees here and converted to radians on load.

use std::fmt::Write as _;
use std::path::Path as FsPath;

use toml::{Table, Value};

use crate::array::{coupling_matrix, ArrayGeometry, PairState, DEFAULT_GRID};
use crate::baselines::PsoConfig;
use crate::channel::{AmplitudeLaw, SceneSpec};
use crate::experiments::{ExperimentKind, ExperimentSpec, GradcheckSpec, Method};
use crate::io::{self, fmt_f64, SceneFile, StateFile, SCENE_KEYS, STATE_KEYS};
use crate::optimizer::{GradientModel, OptimizerConfig};
use crate::rng::RNG_ALGORITHM;
use crate::{MspError, Result, CODE_VERSION};

/// Documentation of one config key.
#[derive(Debug, Clone, Copy)]
pub struct KeyDoc {
    pub key: &'static str,
    pub unit: &'static str,
    pub help: &'static str,
}

const fn doc(key: &'static str, unit: &'static str, help: &'static str) -> KeyDoc {
    KeyDoc { key, unit, help }
}

/// Every accepted key, in echo order.
pub const KEYS: &[KeyDoc] = &[
    doc("code_version", "-", "informational; written into every echo, ignored on load"),
    doc("rng", "-", "random generator (only \"chacha20\")"),
    doc("seed", "-", "base seed; Monte-Carlo trial t uses seed + t"),
    doc("threads", "count", "worker threads for trial pools, 0 = all cores"),
    doc("grid", "points", "pattern samples over [0, 360] deg, both ends included"),
    doc("method", "-", "method for `optimize`: msp-ao | pso | fpa-mrc"),
    doc("num_pairs", "count", "number of pairs M"),
    doc("d_intra", "lambda", "spacing of the two elements of a pair"),
    doc("d_inter", "lambda", "spacing of adjacent pair centres along x"),
    doc("wavelength", "lambda", "carrier wavelength (lengths are in wavelengths)"),
    doc("y_min", "lambda", "lower bound of the pair offsets"),
    doc("y_max", "lambda", "upper bound of the pair offsets"),
    doc("pair_power", "-", "input power per pair P_t"),
    doc("num_paths", "count", "paths L of generated scenes"),
    doc("noise_power", "-", "noise power per port sigma^2 of generated scenes"),
    doc("aoa_min_deg", "deg", "lower end of the arrival-angle range"),
    doc("aoa_max_deg", "deg", "upper end of the arrival-angle range"),
    doc("amplitude_law", "-", "raw path amplitudes: uniform | rayleigh"),
    doc("optimizer.alpha_theta", "rad", "Adam step size for rotations"),
    doc("optimizer.alpha_y", "lambda", "Adam step size for offsets"),
    doc("optimizer.beta1", "-", "Adam first-moment decay"),
    doc("optimizer.beta2", "-", "Adam second-moment decay"),
    doc("optimizer.epsilon", "-", "Adam denominator guard"),
    doc("optimizer.inner_steps", "count", "Adam steps per block and outer iteration"),
    doc("optimizer.max_outer_iters", "count", "outer iteration cap"),
    doc("optimizer.rel_tol", "-", "relative improvement that resets patience"),
    doc("optimizer.patience", "count", "outer iterations without improvement before stopping"),
    doc("optimizer.init_jitter_deg", "deg", "half-width of the jitter around the strongest path"),
    doc("optimizer.gradient", "-", "rotation gradient: full | frozen"),
    doc("pso.swarm_size", "count", "particles"),
    doc("pso.iterations", "count", "swarm iterations"),
    doc("pso.inertia", "-", "inertia weight w"),
    doc("pso.cognitive", "-", "cognitive weight c1"),
    doc("pso.social", "-", "social weight c2"),
    doc("pso.velocity_clamp", "-", "max speed as a fraction of each dimension's range"),
    doc("fig2.num_pairs", "count", "pairs in the pattern study"),
    doc("fig3.m_values", "count", "pair counts M"),
    doc("fig3.l_values", "count", "path counts L"),
    doc("fig3.trials", "count", "scenes per cell"),
    doc("fig4.m_values", "count", "pair counts M"),
    doc("fig4.gamma_values", "lambda", "movement ranges; offsets bounded to [-gamma, gamma]"),
    doc("fig4.num_paths", "count", "paths L"),
    doc("fig4.trials", "count", "scenes per cell"),
    doc("table1.m_values", "count", "pair counts M"),
    doc("table1.num_paths", "count", "paths L"),
    doc("table1.trials", "count", "scenes per cell"),
    doc("gradcheck.trials", "count", "random configurations"),
    doc("gradcheck.max_pairs", "count", "M is drawn from 1..=max_pairs"),
    doc("gradcheck.max_paths", "count", "L is drawn from 1..=max_paths"),
    doc("gradcheck.step", "-", "central-difference step"),
    doc("gradcheck.tol_theta", "-", "tolerance on the rotation-gradient error"),
    doc("gradcheck.tol_y", "-", "tolerance on the offset-gradient error"),
];

/// Grid and trial count of one Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub m_values: Vec<usize>,
    pub l_values: Vec<usize>,
    pub gamma_values: Vec<f64>,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckSettings {
    pub trials: usize,
    pub max_pairs: usize,
    pub max_paths: usize,
    pub step: f64,
    pub tol_theta: f64,
    pub tol_y: f64,
}

/// Effective configuration of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub seed: u64,
    pub threads: usize,
    pub grid: usize,
    pub method: Method,
    pub geometry: ArrayGeometry,
    pub scene: SceneSpec,
    pub optimizer: OptimizerConfig,
    pub pso: PsoConfig,
    /// Degree-valued keys as given; the radian fields above are derived
    /// from these so an echo reloads bit for bit.
    pub aoa_min_deg: f64,
    pub aoa_max_deg: f64,
    pub init_jitter_deg: f64,
    pub fig2_num_pairs: usize,
    pub fig3: SweepSettings,
    pub fig4: SweepSettings,
    pub table1: SweepSettings,
    pub gradcheck: GradcheckSettings,
    /// Scene pinned by the file, if it carried one.
    pub scene_file: Option<SceneFile>,
    /// Array state pinned by the file, if it carried one.
    pub state: Option<PairState>,
}

impl Default for Config {
    fn default() -> Self {
        let gradcheck = GradcheckSpec::default();
        Self {
            seed: 0,
            threads: 0,
            grid: DEFAULT_GRID,
            method: Method::MspAo,
            geometry: ArrayGeometry::reference(8),
            scene: SceneSpec::new(5),
            optimizer: OptimizerConfig::default(),
            pso: PsoConfig::default(),
            aoa_min_deg: 0.0,
            aoa_max_deg: 180.0,
            init_jitter_deg: 2.0,
            fig2_num_pairs: 8,
            fig3: SweepSettings {
                m_values: vec![4, 8, 12, 16, 20],
                l_values: vec![3, 5, 7],
                gamma_values: Vec::new(),
                trials: 100,
            },
            fig4: SweepSettings {
                m_values: vec![10, 20, 30],
                l_values: vec![5],
                gamma_values: (0..=12).map(|j| j as f64 * 0.125).collect(),
                trials: 100,
            },
            table1: SweepSettings {
                m_values: vec![20, 30],
                l_values: vec![5],
                gamma_values: Vec::new(),
                trials: 100,
            },
            gradcheck: GradcheckSettings {
                trials: gradcheck.trials,
                max_pairs: gradcheck.max_pairs,
                max_paths: gradcheck.max_paths,
                step: gradcheck.step,
                tol_theta: gradcheck.tol_theta,
                tol_y: gradcheck.tol_y,
            },
            scene_file: None,
            state: None,
        }
    }
}

fn err(msg: impl Into<String>) -> MspError {
    MspError::Config(msg.into())
}

fn float(key: &str, v: &Value) -> Result<f64> {
    let x = io::as_f64(key, v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(err(format!("`{key}` must be finite")))
    }
}

fn count(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        Value::Integer(i) => Err(err(format!("`{key}` must be nonnegative, got {i}"))),
        other => Err(err(format!("`{key}` expects an integer, got {}", other.type_str()))),
    }
}

fn positive(key: &str, v: &Value) -> Result<usize> {
    match count(key, v)? {
        0 => Err(err(format!("`{key}` must be at least 1"))),
        n => Ok(n),
    }
}

fn string<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| err(format!("`{key}` expects a string, got {}", v.type_str())))
}

fn counts(key: &str, v: &Value) -> Result<Vec<usize>> {
    let items = v
        .as_array()
        .ok_or_else(|| err(format!("`{key}` expects a list, got {}", v.type_str())))?;
    let out: Vec<usize> = items.iter().map(|x| positive(key, x)).collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(err(format!("`{key}` must not be empty")));
    }
    Ok(out)
}

fn floats(key: &str, v: &Value) -> Result<Vec<f64>> {
    let items = v
        .as_array()
        .ok_or_else(|| err(format!("`{key}` expects a list, got {}", v.type_str())))?;
    let out: Vec<f64> = items.iter().map(|x| float(key, x)).collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(err(format!("`{key}` must not be empty")));
    }
    Ok(out)
}

fn list<T: ToString>(xs: &[T]) -> String {
    let items: Vec<String> = xs.iter().map(ToString::to_string).collect();
    format!("[{}]", items.join(", "))
}

fn quoted(s: &str) -> String {
    format!("\"{s}\"")
}

/// Flattens nested tables into dotted keys.
fn flatten(prefix: &str, table: &Table, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(inner) => flatten(&key, inner, out),
            other => out.push((key, other.clone())),
        }
    }
}

impl Config {
    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let text = io::read_text(path)?;
        Self::from_str(&text).map_err(|e| match e {
            MspError::Config(msg) => MspError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses config text; an empty string yields [`Config::default`].
    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self> {
        let table = io::parse_kv(text)?;
        let mut config = Self::default();
        let mut num_pairs_given = false;
        let mut entries = Vec::new();
        flatten("", &table, &mut entries);
        for (key, value) in &entries {
            if SCENE_KEYS.contains(&key.as_str()) || STATE_KEYS.contains(&key.as_str()) {
                continue;
            }
            num_pairs_given |= key == "num_pairs";
            config.set(key, value)?;
        }
        config.scene_file = SceneFile::from_table(&table)?;
        if let Some(file) = &mut config.scene_file {
            // A pinned scene is tagged with the run's seed.
            file.seed = Some(config.seed);
        }
        if let Some((state, method)) = StateFile::state_from_table(&table)? {
            if config.scene_file.is_none() {
                return Err(err("a state needs its scene (`amplitudes`, `aoas_deg`)"));
            }
            if num_pairs_given && config.geometry.num_pairs != state.num_pairs() {
                return Err(err(format!(
                    "num_pairs = {} but the state lists {} pairs",
                    config.geometry.num_pairs,
                    state.num_pairs()
                )));
            }
            config.geometry.num_pairs = state.num_pairs();
            if let Some(method) = method {
                config.method = method;
            }
            config.state = Some(state);
        }
        config.validate()?;
        Ok(config)
    }

    /// Sets one key from a parsed value.
    pub fn set(&mut self, key: &str, v: &Value) -> Result<()> {
        let g = &mut self.geometry;
        let o = &mut self.optimizer;
        let p = &mut self.pso;
        match key {
            "code_version" => {
                string(key, v)?;
            }
            "rng" => {
                let name = string(key, v)?;
                if name != RNG_ALGORITHM {
                    return Err(err(format!("unsupported rng `{name}` (only `{RNG_ALGORITHM}`)")));
                }
            }
            "seed" => self.seed = count(key, v)? as u64,
            "threads" => self.threads = count(key, v)?,
            "grid" => self.grid = count(key, v)?,
            "method" => {
                let name = string(key, v)?;
                self.method = Method::parse(name).ok_or_else(|| {
                    err(format!("unknown method `{name}` (msp-ao | pso | fpa-mrc)"))
                })?;
            }
            "num_pairs" => g.num_pairs = positive(key, v)?,
            "d_intra" => g.d_intra = float(key, v)?,
            "d_inter" => g.d_inter = float(key, v)?,
            "wavelength" => g.wavelength = float(key, v)?,
            "y_min" => g.y_min = float(key, v)?,
            "y_max" => g.y_max = float(key, v)?,
            "pair_power" => g.pair_power = float(key, v)?,
            "num_paths" => self.scene.num_paths = positive(key, v)?,
            "noise_power" => self.scene.noise_power = float(key, v)?,
            "aoa_min_deg" => {
                self.aoa_min_deg = float(key, v)?;
                self.scene.angle_min = self.aoa_min_deg.to_radians();
            }
            "aoa_max_deg" => {
                self.aoa_max_deg = float(key, v)?;
                self.scene.angle_max = self.aoa_max_deg.to_radians();
            }
            "amplitude_law" => {
                let name = string(key, v)?;
                self.scene.amplitude_law = AmplitudeLaw::parse(name).ok_or_else(|| {
                    err(format!("unknown amplitude_law `{name}` (uniform | rayleigh)"))
                })?;
            }
            "optimizer.alpha_theta" => o.alpha_theta = float(key, v)?,
            "optimizer.alpha_y" => o.alpha_y = float(key, v)?,
            "optimizer.beta1" => o.beta1 = float(key, v)?,
            "optimizer.beta2" => o.beta2 = float(key, v)?,
            "optimizer.epsilon" => o.epsilon = float(key, v)?,
            "optimizer.inner_steps" => o.inner_steps = count(key, v)?,
            "optimizer.max_outer_iters" => o.max_outer_iters = count(key, v)?,
            "optimizer.rel_tol" => o.rel_tol = float(key, v)?,
            "optimizer.patience" => o.patience = count(key, v)?,
            "optimizer.init_jitter_deg" => {
                self.init_jitter_deg = float(key, v)?;
                o.init_jitter = self.init_jitter_deg.to_radians();
            }
            "optimizer.gradient" => {
                let name = string(key, v)?;
                o.gradient = GradientModel::parse(name)
                    .ok_or_else(|| err(format!("unknown gradient `{name}` (full | frozen)")))?;
            }
            "pso.swarm_size" => p.swarm_size = count(key, v)?,
            "pso.iterations" => p.iterations = count(key, v)?,
            "pso.inertia" => p.inertia = float(key, v)?,
            "pso.cognitive" => p.cognitive = float(key, v)?,
            "pso.social" => p.social = float(key, v)?,
            "pso.velocity_clamp" => p.velocity_clamp = float(key, v)?,
            "fig2.num_pairs" => self.fig2_num_pairs = positive(key, v)?,
            "fig3.m_values" => self.fig3.m_values = counts(key, v)?,
            "fig3.l_values" => self.fig3.l_values = counts(key, v)?,
            "fig3.trials" => self.fig3.trials = count(key, v)?,
            "fig4.m_values" => self.fig4.m_values = counts(key, v)?,
            "fig4.gamma_values" => self.fig4.gamma_values = floats(key, v)?,
            "fig4.num_paths" => self.fig4.l_values = vec![positive(key, v)?],
            "fig4.trials" => self.fig4.trials = count(key, v)?,
            "table1.m_values" => self.table1.m_values = counts(key, v)?,
            "table1.num_paths" => self.table1.l_values = vec![positive(key, v)?],
            "table1.trials" => self.table1.trials = count(key, v)?,
            "gradcheck.trials" => self.gradcheck.trials = count(key, v)?,
            "gradcheck.max_pairs" => self.gradcheck.max_pairs = positive(key, v)?,
            "gradcheck.max_paths" => self.gradcheck.max_paths = positive(key, v)?,
            "gradcheck.step" => self.gradcheck.step = float(key, v)?,
            "gradcheck.tol_theta" => self.gradcheck.tol_theta = float(key, v)?,
            "gradcheck.tol_y" => self.gradcheck.tol_y = float(key, v)?,
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Current value of `key` in config syntax.
    pub fn get(&self, key: &str) -> Option<String> {
        let g = &self.geometry;
        let o = &self.optimizer;
        let p = &self.pso;
        let f = |x: f64| fmt_f64(x);
        let value = match key {
            "code_version" => quoted(CODE_VERSION),
            "rng" => quoted(RNG_ALGORITHM),
            "seed" => self.seed.to_string(),
            "threads" => self.threads.to_string(),
            "grid" => self.grid.to_string(),
            "method" => quoted(self.method.name()),
            "num_pairs" => g.num_pairs.to_string(),
            "d_intra" => f(g.d_intra),
            "d_inter" => f(g.d_inter),
            "wavelength" => f(g.wavelength),
            "y_min" => f(g.y_min),
            "y_max" => f(g.y_max),
            "pair_power" => f(g.pair_power),
            "num_paths" => self.scene.num_paths.to_string(),
            "noise_power" => f(self.scene.noise_power),
            "aoa_min_deg" => f(self.aoa_min_deg),
            "aoa_max_deg" => f(self.aoa_max_deg),
            "amplitude_law" => quoted(self.scene.amplitude_law.name()),
            "optimizer.alpha_theta" => f(o.alpha_theta),
            "optimizer.alpha_y" => f(o.alpha_y),
            "optimizer.beta1" => f(o.beta1),
            "optimizer.beta2" => f(o.beta2),
            "optimizer.epsilon" => f(o.epsilon),
            "optimizer.inner_steps" => o.inner_steps.to_string(),
            "optimizer.max_outer_iters" => o.max_outer_iters.to_string(),
            "optimizer.rel_tol" => f(o.rel_tol),
            "optimizer.patience" => o.patience.to_string(),
            "optimizer.init_jitter_deg" => f(self.init_jitter_deg),
            "optimizer.gradient" => quoted(o.gradient.name()),
            "pso.swarm_size" => p.swarm_size.to_string(),
            "pso.iterations" => p.iterations.to_string(),
            "pso.inertia" => f(p.inertia),
            "pso.cognitive" => f(p.cognitive),
            "pso.social" => f(p.social),
            "pso.velocity_clamp" => f(p.velocity_clamp),
            "fig2.num_pairs" => self.fig2_num_pairs.to_string(),
            "fig3.m_values" => list(&self.fig3.m_values),
            "fig3.l_values" => list(&self.fig3.l_values),
            "fig3.trials" => self.fig3.trials.to_string(),
            "fig4.m_values" => list(&self.fig4.m_values),
            "fig4.gamma_values" => io::fmt_list(&self.fig4.gamma_values),
            "fig4.num_paths" => self.fig4.l_values.first()?.to_string(),
            "fig4.trials" => self.fig4.trials.to_string(),
            "table1.m_values" => list(&self.table1.m_values),
            "table1.num_paths" => self.table1.l_values.first()?.to_string(),
            "table1.trials" => self.table1.trials.to_string(),
            "gradcheck.trials" => self.gradcheck.trials.to_string(),
            "gradcheck.max_pairs" => self.gradcheck.max_pairs.to_string(),
            "gradcheck.max_paths" => self.gradcheck.max_paths.to_string(),
            "gradcheck.step" => f(self.gradcheck.step),
            "gradcheck.tol_theta" => f(self.gradcheck.tol_theta),
            "gradcheck.tol_y" => f(self.gradcheck.tol_y),
            _ => return None,
        };
        Some(value)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        coupling_matrix(self.geometry.d_intra, self.geometry.wavenumber())?;
        self.scene.validate()?;
        self.optimizer.validate()?;
        self.pso.validate()?;
        if self.grid < 2 {
            return Err(err(format!("`grid` must be at least 2, got {}", self.grid)));
        }
        for (name, s) in [("fig3", &self.fig3), ("fig4", &self.fig4), ("table1", &self.table1)] {
            if s.trials == 0 {
                return Err(err(format!("`{name}.trials` must be at least 1")));
            }
        }
        if let Some(g) = self.fig4.gamma_values.iter().find(|g| **g < 0.0) {
            return Err(err(format!("`fig4.gamma_values` must be nonnegative, got {g}")));
        }
        if let Some(state) = &self.state {
            state.check_against(&self.geometry)?;
        }
        Ok(())
    }

    /// Effective configuration, one `key = value` per line, followed by the
    /// pinned scene/state (if any) and derived quantities as comments.
    /// Loading the echo reproduces this config.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        for k in KEYS {
            if let Some(v) = self.get(k.key) {
                let _ = writeln!(s, "{} = {v}", k.key);
            }
        }
        match (&self.scene_file, &self.state) {
            (Some(scene), Some(state)) => {
                let file = StateFile { scene: scene.clone(), state: state.clone(), method: self.method };
                s.push_str(&strip_shared(&file.to_kv()));
            }
            (Some(scene), None) => s.push_str(&strip_shared(&scene.to_kv())),
            _ => {}
        }
        let k = self.geometry.wavenumber();
        if let Ok(c) = coupling_matrix(self.geometry.d_intra, k) {
            let _ = writeln!(s, "# derived: k = {}, rho = {:.6}", fmt_f64(k), c.rho());
        }
        let _ = writeln!(
            s,
            "# derived: gradient model = {}, fpa = 2M isotropic unit-gain elements at 0.5 lambda, MRC",
            self.optimizer.gradient.name()
        );
        s
    }

    /// The echo as a `#` comment block, prepended to every result file.
    pub fn header(&self) -> String {
        io::comment_block(&self.echo())
    }

    pub fn experiment(&self, kind: ExperimentKind) -> ExperimentSpec {
        let (sweep, geometry) = match kind {
            ExperimentKind::Fig2 => (
                SweepSettings {
                    m_values: vec![self.fig2_num_pairs],
                    l_values: vec![3],
                    gamma_values: Vec::new(),
                    trials: 1,
                },
                self.geometry.clone(),
            ),
            ExperimentKind::Fig3 => (self.fig3.clone(), self.geometry.clone()),
            ExperimentKind::Fig4 => (self.fig4.clone(), self.geometry.clone()),
            ExperimentKind::Table1 => (self.table1.clone(), self.geometry.clone()),
        };
        ExperimentSpec {
            kind,
            m_values: sweep.m_values,
            l_values: sweep.l_values,
            gamma_values: sweep.gamma_values,
            trials: sweep.trials,
            base_seed: self.seed,
            geometry,
            scene: self.scene.clone(),
            optimizer: self.optimizer.clone(),
            pso: self.pso.clone(),
            threads: self.threads,
        }
    }

    pub fn gradcheck_spec(&self) -> GradcheckSpec {
        GradcheckSpec {
            trials: self.gradcheck.trials,
            max_pairs: self.gradcheck.max_pairs,
            max_paths: self.gradcheck.max_paths,
            step: self.gradcheck.step,
            tol_theta: self.gradcheck.tol_theta,
            tol_y: self.gradcheck.tol_y,
            seed: self.seed,
            geometry: self.geometry.clone(),
            gradient: self.optimizer.gradient,
        }
    }
}

/// Drops the lines a scene or state file shares with the config keys.
fn strip_shared(kv: &str) -> String {
    kv.lines()
        .filter(|l| !["seed =", "rng =", "method ="].iter().any(|p| l.starts_with(p)))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// `key  default  [unit]  help` table for `--help`.
pub fn key_reference() -> String {
    let defaults = Config::default();
    let width = KEYS.iter().map(|k| k.key.len()).max().unwrap_or(0);
    let mut s = String::new();
    for k in KEYS {
        let value = defaults.get(k.key).unwrap_or_default();
        let _ = writeln!(s, "  {:width$}  = {value}  [{}] {}", k.key, k.unit, k.help);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::fig2_scene;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::from_str("").unwrap(), Config::default());
    }

    #[test]
    fn every_key_has_a_value_and_round_trips() {
        let c = Config::default();
        for k in KEYS {
            let v = c.get(k.key).unwrap_or_else(|| panic!("no value for {}", k.key));
            let parsed = io::parse_kv(&format!("x = {v}")).unwrap();
            let mut d = Config::default();
            d.set(k.key, &parsed["x"]).unwrap();
            assert_eq!(d, c, "{}", k.key);
        }
        assert!(c.get("nope").is_none());
    }

    #[test]
    fn echo_reloads_to_same_config() {
        let text = "seed = 7\nd_intra = 0.25\ny_min = -0.5\n[fig3]\ntrials = 3\nm_values = [2, 4]\n\
                    [optimizer]\ngradient = \"frozen\"\ninit_jitter_deg = 1.5\n";
        let c = Config::from_str(text).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.fig3.m_values, vec![2, 4]);
        assert_eq!(c.optimizer.gradient, GradientModel::FrozenCurrents);
        assert_eq!(Config::from_str(&c.echo()).unwrap(), c);
        // The header is the echo behind `# `.
        let stripped: String = c.header().lines().map(|l| format!("{}\n", &l[2..])).collect();
        assert_eq!(Config::from_str(&stripped).unwrap(), c);
    }

    #[test]
    fn echo_reports_coupling() {
        let c = Config::from_str("d_intra=0.2").unwrap();
        assert!(c.echo().contains("rho = 0.756827"), "{}", c.echo());
    }

    #[test]
    fn fail_closed() {
        for text in [
            "bogus = 1",
            "[fig3]\nbogus = 1",
            "d_intra = \"wide\"",
            "y_min = 1.0\ny_max = -1.0",
            "num_pairs = 0",
            "fig3.trials = 0",
            "fig3.m_values = []",
            "rng = \"pcg\"",
            "optimizer.gradient = \"half\"",
            "method = \"ga\"",
            "seed = -1",
            "d_intra = 0.0",
            "grid = 1",
            "theta_deg = [10]\n",
            "not toml at all",
        ] {
            assert!(Config::from_str(text).is_err(), "{text}");
        }
    }

    #[test]
    fn range_errors_are_reported() {
        let e = Config::from_str("y_min = 1.0\ny_max = -1.0").unwrap_err();
        assert!(e.to_string().contains("y_min"), "{e}");
    }

    #[test]
    fn scene_and_state_files_are_configs() {
        let file = StateFile {
            scene: SceneFile::new(fig2_scene(), Some(3)),
            state: PairState::uniform(3, 1.0, 0.25),
            method: Method::Pso,
        };
        let c = Config::from_str(&file.to_kv()).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.geometry.num_pairs, 3);
        assert_eq!(c.method, Method::Pso);
        assert_eq!(c.state.as_ref(), Some(&file.state));
        assert_eq!(c.scene_file.as_ref().unwrap().scene, fig2_scene());
        assert_eq!(Config::from_str(&c.echo()).unwrap(), c);
        let mismatch = format!("num_pairs = 4\n{}", file.to_kv());
        assert!(Config::from_str(&mismatch).is_err());
    }

    #[test]
    fn degrees_become_radians() {
        let c = Config::from_str("aoa_min_deg = 90\noptimizer.init_jitter_deg = 0").unwrap();
        assert_eq!(c.scene.angle_min, std::f64::consts::FRAC_PI_2);
        assert_eq!(c.optimizer.init_jitter, 0.0);
    }

    #[test]
    fn reference_lists_every_key() {
        let r = key_reference();
        for k in KEYS {
            assert!(r.contains(k.key));
        }
    }
}
