//! Config files, flag overrides and the keys shared by every subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::invalid;

pub const DEFAULT_OUT_DIR: &str = "kinfp-out";
const LOG_LEVELS: [&str; 6] = ["off", "error", "warn", "info", "debug", "trace"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Common {
    pub dim: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub log_level: String,
}

/// Flag values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub log_level: Option<String>,
    /// Subcommand keys set from flags.
    pub keys: Vec<(&'static str, Value)>,
}

pub fn read_config(path: Option<&Path>) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    if !path.is_file() {
        return Err(invalid(format!("config not found: {}", path.display())));
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(invalid(format!("config {} must be a JSON object", path.display()))),
        Err(e) => Err(invalid(format!("config {} is not valid JSON: {e}", path.display()))),
    }
}

fn take<T: DeserializeOwned>(map: &mut Map<String, Value>, key: &str) -> Result<Option<T>> {
    map.remove(key)
        .map(|v| serde_json::from_value(v).map_err(|e| invalid(format!("key `{key}`: {e}"))))
        .transpose()
}

/// Splits the common keys off `map`, applying flags and `KINFP_OUT`
/// (flag, then environment, then file).
pub fn resolve_common(map: &mut Map<String, Value>, ov: &Overrides, env_out: Option<PathBuf>) -> Result<Common> {
    let dim = match ov.dim {
        Some(d) => {
            map.remove("dim");
            d
        }
        None => take(map, "dim")?.unwrap_or(1),
    };
    if !(1..=2).contains(&dim) {
        return Err(invalid(format!("dim must be 1 or 2, got {dim}")));
    }
    let seed = match ov.seed {
        Some(s) => {
            map.remove("seed");
            s
        }
        None => take(map, "seed")?.unwrap_or(0),
    };
    let file_out: Option<PathBuf> = take(map, "out_dir")?;
    let out_dir = ov
        .out_dir
        .clone()
        .or(env_out)
        .or(file_out)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let file_level: Option<String> = take(map, "log_level")?;
    let log_level = ov.log_level.clone().or(file_level).unwrap_or_else(|| "warn".into());
    if !LOG_LEVELS.contains(&log_level.as_str()) {
        return Err(invalid(format!("log_level must be one of {LOG_LEVELS:?}, got {log_level:?}")));
    }
    for (k, v) in &ov.keys {
        map.insert((*k).to_string(), v.clone());
    }
    Ok(Common {
        dim,
        seed,
        out_dir,
        log_level,
    })
}

/// Deserializes the subcommand keys, rejecting unknown ones.
pub fn parse_section<T: DeserializeOwned>(map: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(map)).map_err(|e| invalid(format!("invalid config: {e}")))
}

/// Phase-space grid; absent entries take the defaults for the dimension.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseGridSpec {
    pub nx: Option<usize>,
    pub nv: Option<usize>,
    pub x_period: Option<f64>,
    pub v_max: Option<f64>,
    pub t0: Option<f64>,
}

impl PhaseGridSpec {
    pub fn resolve(&mut self, dim: usize) {
        let (nx, nv) = if dim == 1 { (64, 128) } else { (32, 48) };
        self.nx.get_or_insert(nx);
        self.nv.get_or_insert(nv);
        self.x_period.get_or_insert(kinfp_core::fields::DEFAULT_X_PERIOD);
        self.v_max.get_or_insert(kinfp_core::fields::DEFAULT_V_MAX);
        self.t0.get_or_insert(0.0);
    }

    pub fn grid(&self, dim: usize) -> Result<kinfp_core::Grid> {
        let mut s = self.clone();
        s.resolve(dim);
        Ok(kinfp_core::Grid::phase(
            dim,
            s.nx.unwrap_or_default(),
            s.nv.unwrap_or_default(),
            s.t0.unwrap_or_default(),
            s.x_period.unwrap_or_default(),
            s.v_max.unwrap_or_default(),
        )?)
    }
}

/// Space-time grid for sampled fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub nt: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub nx: usize,
    pub nv: usize,
    pub x_period: f64,
    pub v_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nt: 65,
            t_min: -1.0,
            t_max: 0.0,
            nx: 16,
            nv: 65,
            x_period: kinfp_core::fields::DEFAULT_X_PERIOD,
            v_max: 1.0,
        }
    }
}

impl GridSpec {
    pub fn grid(&self, dim: usize) -> Result<kinfp_core::Grid> {
        Ok(kinfp_core::Grid::new(
            dim,
            (self.nt, self.nx, self.nv),
            (self.t_min, self.t_max),
            self.x_period,
            self.v_max,
        )?)
    }
}

/// Merges the common keys and the subcommand section into one object.
pub fn resolved<T: Serialize>(common: &Common, section: &T) -> Result<Value> {
    let mut out = match serde_json::to_value(common)? {
        Value::Object(m) => m,
        _ => unreachable!("common keys serialize to an object"),
    };
    if let Value::Object(m) = serde_json::to_value(section)? {
        out.extend(m);
    }
    Ok(Value::Object(out))
}
