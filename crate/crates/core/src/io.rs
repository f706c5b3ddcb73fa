//! Key-value scene and state files, CSV traces and result headers.
//!
//! Scene and state files are flat `key = value` text that doubles as a config
//! file, so a written scene can be fed straight back to the CLI. Floats are
//! written in shortest round-trip form; radians are stored next to degrees so
//! reading a file back is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path as FsPath;

use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::array::PairState;
use crate::channel::{ChannelScene, Path};
use crate::experiments::Method;
use crate::optimizer::OptimizationTrace;
use crate::rng::RNG_ALGORITHM;
use crate::{MspError, Result};

/// Keys owned by scene files.
pub const SCENE_KEYS: &[&str] = &["L", "sigma2", "amplitudes", "aoas_deg", "aoas_rad"];
/// Extra keys owned by state files.
pub const STATE_KEYS: &[&str] = &["theta_deg", "theta_rad", "y", "method"];

/// Shortest round-trip rendering that always parses back as a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn fmt_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", items.join(", "))
}

/// A scene together with the seed and generator that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFile {
    pub scene: ChannelScene,
    pub seed: Option<u64>,
}

impl SceneFile {
    pub fn new(scene: ChannelScene, seed: Option<u64>) -> Self {
        Self { scene, seed }
    }

    pub fn to_kv(&self) -> String {
        let amps: Vec<f64> = self.scene.paths.iter().map(|p| p.amplitude).collect();
        let rad: Vec<f64> = self.scene.paths.iter().map(|p| p.aoa).collect();
        let deg: Vec<f64> = rad.iter().map(|a| a.to_degrees()).collect();
        let mut s = String::new();
        let _ = writeln!(s, "L = {}", self.scene.num_paths());
        let _ = writeln!(s, "sigma2 = {}", fmt_f64(self.scene.noise_power));
        let _ = writeln!(s, "amplitudes = {}", fmt_list(&amps));
        let _ = writeln!(s, "aoas_deg = {}", fmt_list(&deg));
        let _ = writeln!(s, "aoas_rad = {}", fmt_list(&rad));
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed = {seed}");
        }
        let _ = writeln!(s, "rng = \"{RNG_ALGORITHM}\"");
        s
    }

    /// Hex SHA-256 of [`SceneFile::to_kv`]; equal hashes mean byte-identical scenes.
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_kv().as_bytes()))
    }

    /// Extracts a scene from a parsed file. Returns `None` when the table
    /// carries no scene keys at all.
    pub fn from_table(table: &Table) -> Result<Option<Self>> {
        if !SCENE_KEYS.iter().any(|k| table.contains_key(*k)) {
            return Ok(None);
        }
        let amps = float_list(table, "amplitudes")?
            .ok_or_else(|| bad("scene file needs `amplitudes`"))?;
        let aoas = match (float_list(table, "aoas_rad")?, float_list(table, "aoas_deg")?) {
            (Some(rad), Some(deg)) => {
                check_degrees_match(&rad, &deg, "aoas")?;
                rad
            }
            (Some(rad), None) => rad,
            (None, Some(deg)) => deg.iter().map(|d| d.to_radians()).collect(),
            (None, None) => return Err(bad("scene file needs `aoas_deg` or `aoas_rad`")),
        };
        if amps.len() != aoas.len() {
            return Err(bad(format!(
                "{} amplitudes but {} arrival angles",
                amps.len(),
                aoas.len()
            )));
        }
        if let Some(l) = int(table, "L")? {
            if l as usize != amps.len() {
                return Err(bad(format!("L = {l} but {} paths listed", amps.len())));
            }
        }
        let noise = float(table, "sigma2")?.unwrap_or(1.0);
        let paths = amps
            .into_iter()
            .zip(aoas)
            .map(|(amplitude, aoa)| Path { amplitude, aoa })
            .collect();
        let scene = ChannelScene::new(paths, noise)?;
        let seed = int(table, "seed")?.map(|s| s as u64);
        Ok(Some(Self { scene, seed }))
    }
}

/// Final (or initial) array state, stored in scene-file format plus the
/// per-pair variables.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub scene: SceneFile,
    pub state: PairState,
    pub method: Method,
}

impl StateFile {
    pub fn to_kv(&self) -> String {
        let mut s = self.scene.to_kv();
        let deg: Vec<f64> = self.state.theta.iter().map(|t| t.to_degrees()).collect();
        let _ = writeln!(s, "method = \"{}\"", self.method.name());
        let _ = writeln!(s, "theta_deg = {}", fmt_list(&deg));
        let _ = writeln!(s, "theta_rad = {}", fmt_list(&self.state.theta));
        let _ = writeln!(s, "y = {}", fmt_list(&self.state.y));
        s
    }

    /// Extracts the pair variables from a parsed file, if present.
    pub fn state_from_table(table: &Table) -> Result<Option<(PairState, Option<Method>)>> {
        let theta = match (float_list(table, "theta_rad")?, float_list(table, "theta_deg")?) {
            (Some(rad), Some(deg)) => {
                check_degrees_match(&rad, &deg, "theta")?;
                Some(rad)
            }
            (Some(rad), None) => Some(rad),
            (None, Some(deg)) => Some(deg.iter().map(|d| d.to_radians()).collect()),
            (None, None) => None,
        };
        let y = float_list(table, "y")?;
        let method = match table.get("method") {
            None => None,
            Some(Value::String(s)) => Some(
                Method::parse(s).ok_or_else(|| bad(format!("unknown method `{s}`")))?,
            ),
            Some(_) => return Err(bad("`method` must be a string")),
        };
        match (theta, y) {
            (None, None) => Ok(None),
            (Some(theta), y) => {
                let y = y.unwrap_or_else(|| vec![0.0; theta.len()]);
                Ok(Some((PairState::new(theta, y)?, method)))
            }
            (None, Some(_)) => Err(bad("state file lists `y` without `theta_deg`/`theta_rad`")),
        }
    }
}

fn check_degrees_match(rad: &[f64], deg: &[f64], what: &str) -> Result<()> {
    let consistent = rad.len() == deg.len()
        && rad.iter().zip(deg).all(|(r, d)| (r.to_degrees() - d).abs() <= 1e-9);
    if consistent {
        Ok(())
    } else {
        Err(bad(format!("{what}_deg and {what}_rad disagree")))
    }
}

fn bad(msg: impl Into<String>) -> MspError {
    MspError::Config(msg.into())
}

pub(crate) fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(bad(format!("`{key}` expects a number, got {}", other.type_str()))),
    }
}

fn float(table: &Table, key: &str) -> Result<Option<f64>> {
    table.get(key).map(|v| as_f64(key, v)).transpose()
}

fn int(table: &Table, key: &str) -> Result<Option<i64>> {
    match table.get(key) {
        None => Ok(None),
        Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i)),
        Some(other) => Err(bad(format!("`{key}` expects a nonnegative integer, got {other}"))),
    }
}

fn float_list(table: &Table, key: &str) -> Result<Option<Vec<f64>>> {
    match table.get(key) {
        None => Ok(None),
        Some(Value::Array(items)) => items.iter().map(|v| as_f64(key, v)).collect::<Result<_>>().map(Some),
        Some(other) => Err(bad(format!("`{key}` expects a list, got {}", other.type_str()))),
    }
}

/// Parses flat key-value text.
pub fn parse_kv(text: &str) -> Result<Table> {
    toml::from_str::<Table>(text).map_err(|e| MspError::Config(e.to_string().trim_end().to_string()))
}

pub fn read_text(path: impl AsRef<FsPath>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| MspError::io(path, e))
}

pub fn read_scene(path: impl AsRef<FsPath>) -> Result<SceneFile> {
    let table = parse_kv(&read_text(&path)?)?;
    SceneFile::from_table(&table)?
        .ok_or_else(|| bad(format!("{} holds no scene", path.as_ref().display())))
}

/// Writes `header` (already `#`-prefixed) followed by `body`, creating
/// parent directories as needed.
pub fn write_text(path: impl AsRef<FsPath>, header: &str, body: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| MspError::io(dir, e))?;
    }
    let mut text = String::with_capacity(header.len() + body.len());
    text.push_str(header);
    text.push_str(body);
    fs::write(path, text).map_err(|e| MspError::io(path, e))
}

/// Prefixes every line with `# `.
pub fn comment_block(lines: &str) -> String {
    lines.lines().map(|l| format!("# {l}\n")).collect()
}

/// Per-iteration trace, `iter,P_signal,snr_db,elapsed_s`.
pub fn trace_csv(trace: &OptimizationTrace) -> String {
    let mut s = String::from("iter,P_signal,snr_db,elapsed_s\n");
    for r in &trace.records {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.iter,
            fmt_f64(r.p_signal),
            fmt_f64(r.snr_db),
            fmt_f64(r.elapsed_s)
        );
    }
    s
}
