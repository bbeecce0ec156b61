//! Run configuration as a flat map of dotted keys.
//!
//! A config file is TOML (`array.n_h = 62` or an `[array]` table, both
//! work) or JSON (either a plain object or an experiment sidecar, whose
//! `config` member is used). Keys carry their unit as a suffix
//! (`carrier_hz`, `bs_height_m`, `noise_power_dbm`). Command-line
//! overrides are applied on top of the file, and the file on top of the
//! built-in defaults. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::channel::ChannelModel;
use crate::combining::CombinerScheme;
use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

/// Flat view of a configuration: dotted key to JSON value.
pub type FlatConfig = BTreeMap<String, Value>;

/// Name accepted by the CLI in place of a path to mean "built-in defaults".
pub const DEFAULTS_NAME: &str = "defaults";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationParams {
    pub carriers_hz: Vec<f64>,
    pub ue_position_m: [f64; 3],
}

impl Default for DeviationParams {
    fn default() -> Self {
        Self {
            carriers_hz: vec![5e9, 28e9, 71e9],
            ue_position_m: [0.0, -10.0, 30.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainParams {
    pub carriers_hz: Vec<f64>,
    pub distance_min_m: f64,
    pub distance_max_m: f64,
    /// Log-spaced sample count between the two distances.
    pub num_distances: usize,
}

impl Default for GainParams {
    fn default() -> Self {
        Self {
            carriers_hz: vec![5e9, 28e9, 71e9, 300e9],
            distance_min_m: 10.0,
            distance_max_m: 500.0,
            num_distances: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceParams {
    pub ue1_position_m: [f64; 3],
    pub x_min_m: f64,
    pub x_max_m: f64,
    pub z_min_m: f64,
    pub z_max_m: f64,
    pub nx: usize,
    pub nz: usize,
    /// Side of the magnified window around UE 1, in wavelengths.
    pub zoom_side_wavelengths: f64,
    /// Samples per axis of the magnified window.
    pub zoom_n: usize,
    pub schemes: Vec<CombinerScheme>,
    pub design_models: Vec<ChannelModel>,
}

impl Default for InterferenceParams {
    fn default() -> Self {
        Self {
            ue1_position_m: [0.0, -10.0, 20.0],
            x_min_m: -30.0,
            x_max_m: 30.0,
            z_min_m: 0.0,
            z_max_m: 60.0,
            nx: 201,
            nz: 201,
            zoom_side_wavelengths: 100.0,
            zoom_n: 101,
            schemes: CombinerScheme::ALL.to_vec(),
            design_models: ChannelModel::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeCdfParams {
    pub carriers_hz: Vec<f64>,
    pub k_values: Vec<usize>,
}

impl Default for SeCdfParams {
    fn default() -> Self {
        Self {
            carriers_hz: vec![5e9, 28e9, 71e9],
            k_values: vec![100],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeVsKParams {
    pub k_values: Vec<usize>,
}

impl Default for SeVsKParams {
    fn default() -> Self {
        Self {
            k_values: vec![1, 10, 25, 50, 75, 100, 125, 150],
        }
    }
}

/// Everything a pipeline run needs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub scenario: ScenarioConfig,
    pub deviation: DeviationParams,
    pub gain: GainParams,
    pub interference: InterferenceParams,
    pub se: SeCdfParams,
    pub se_vs_k: SeVsKParams,
}

impl RunConfig {
    /// Flat dotted-key view of this configuration.
    pub fn to_flat(&self) -> FlatConfig {
        let value = serde_json::to_value(self).expect("config serializes");
        let mut out = FlatConfig::new();
        flatten_into("", &value, &mut out);
        out
    }

    /// Builds a configuration from flat keys layered over the defaults.
    pub fn from_flat(flat: &FlatConfig) -> Result<Self> {
        let mut merged = RunConfig::default().to_flat();
        for (k, v) in flat {
            set_known(&mut merged, k, v.clone())?;
        }
        let nested = unflatten(&merged)?;
        let config: RunConfig = serde_json::from_value(nested)
            .map_err(|e| Error::Config(format!("invalid configuration: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        let g = &self.gain;
        if !(g.distance_min_m > 0.0 && g.distance_max_m > g.distance_min_m) {
            return Err(Error::Config(
                "gain distances must satisfy 0 < distance_min_m < distance_max_m".into(),
            ));
        }
        if g.num_distances < 2 {
            return Err(Error::Config(
                "gain.num_distances must be at least 2".into(),
            ));
        }
        let i = &self.interference;
        if !(i.x_max_m > i.x_min_m && i.z_max_m > i.z_min_m) {
            return Err(Error::Config(
                "interference grid ranges must be nonempty".into(),
            ));
        }
        if i.nx < 2 || i.nz < 2 || i.zoom_n < 2 {
            return Err(Error::Config(
                "interference grids need at least 2 samples per axis".into(),
            ));
        }
        if !(i.zoom_side_wavelengths > 0.0) {
            return Err(Error::Config(
                "interference.zoom_side_wavelengths must be positive".into(),
            ));
        }
        let carriers = self
            .deviation
            .carriers_hz
            .iter()
            .chain(&self.gain.carriers_hz)
            .chain(&self.se.carriers_hz);
        for &f in carriers {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::Config(format!(
                    "carrier frequencies must be positive, got {f}"
                )));
            }
        }
        if self.se.k_values.contains(&0) || self.se_vs_k.k_values.contains(&0) {
            return Err(Error::Config("UE counts must be positive".into()));
        }
        Ok(())
    }
}

fn flatten_into(prefix: &str, value: &Value, out: &mut FlatConfig) {
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_into(&key, v, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn unflatten(flat: &FlatConfig) -> Result<Value> {
    let mut root = Map::new();
    for (key, value) in flat {
        let mut node = &mut root;
        let mut parts = key.split('.').peekable();
        while let Some(part) = parts.next() {
            if parts.peek().is_none() {
                node.insert(part.to_string(), value.clone());
            } else {
                let entry = node
                    .entry(part.to_string())
                    .or_insert_with(|| Value::Object(Map::new()));
                node = entry
                    .as_object_mut()
                    .ok_or_else(|| Error::Config(format!("key '{key}' conflicts with a scalar")))?;
            }
        }
    }
    Ok(Value::Object(root))
}

fn set_known(flat: &mut FlatConfig, key: &str, value: Value) -> Result<()> {
    match flat.get_mut(key) {
        Some(slot) => {
            *slot = value;
            Ok(())
        }
        None => Err(Error::Config(format!("unknown configuration key '{key}'"))),
    }
}

fn toml_to_json(value: toml::Value) -> Value {
    match value {
        toml::Value::String(s) => Value::String(s),
        toml::Value::Integer(i) => Value::from(i),
        toml::Value::Float(f) => serde_json::Number::from_f64(f)
            .map(Value::Number)
            .unwrap_or(Value::Null),
        toml::Value::Boolean(b) => Value::Bool(b),
        toml::Value::Datetime(d) => Value::String(d.to_string()),
        toml::Value::Array(a) => Value::Array(a.into_iter().map(toml_to_json).collect()),
        toml::Value::Table(t) => {
            Value::Object(t.into_iter().map(|(k, v)| (k, toml_to_json(v))).collect())
        }
    }
}

/// Parses a config document. JSON sidecars are recognised by their
/// `config` member.
pub fn parse_config_str(text: &str, is_json: bool) -> Result<FlatConfig> {
    let value = if is_json {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid JSON config: {e}")))?;
        match v {
            Value::Object(mut map)
                if map.contains_key("config") && map.contains_key("schema_version") =>
            {
                map.remove("config").unwrap_or(Value::Null)
            }
            other => other,
        }
    } else {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid TOML config: {e}")))?;
        toml_to_json(toml::Value::Table(table))
    };
    if !value.is_object() {
        return Err(Error::Config(
            "configuration must be a table of keys".into(),
        ));
    }
    let mut flat = FlatConfig::new();
    flatten_into("", &value, &mut flat);
    Ok(flat)
}

/// Reads a config file, or returns no keys for [`DEFAULTS_NAME`].
pub fn read_config_file(path: &Path) -> Result<FlatConfig> {
    if path.as_os_str() == DEFAULTS_NAME {
        return Ok(FlatConfig::new());
    }
    let text = std::fs::read_to_string(path).map_err(|source| Error::ConfigFile {
        path: path.to_path_buf(),
        source,
    })?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    parse_config_str(&text, is_json)
}

/// Parses one `key=value` override. The value is read as a TOML value
/// (numbers, booleans, arrays) and falls back to a bare string.
pub fn parse_override(spec: &str) -> Result<(String, Value)> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{spec}' is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override '{spec}' has an empty key")));
    }
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => toml_to_json(t.remove("v").expect("parsed key")),
        Err(_) => Value::String(raw.to_string()),
    };
    Ok((key.to_string(), value))
}

/// File keys, then overrides, layered over the defaults.
pub fn load(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<RunConfig> {
    let mut flat = read_config_file(path)?;
    for spec in overrides {
        let (k, v) = parse_override(spec)?;
        flat.insert(k, v);
    }
    if let Some(seed) = seed {
        flat.insert("seed".into(), Value::from(seed));
    }
    RunConfig::from_flat(&flat)
}
