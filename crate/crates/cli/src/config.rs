//! JSON configuration handling: `--set` overrides, strict parsing and the
//! provenance hash stamped on every output file.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use scalelab::config::RunConfig;

use crate::error::CliError;

/// Splits `key=value`; the value is read as JSON when it parses, as a plain
/// string otherwise.
pub fn parse_override(text: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("override `{text}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Validation(format!("override `{text}` has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

/// Sets `value` at a dotted `path`, creating intermediate objects.
pub fn apply_override(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if !node.is_object() {
            return Err(CliError::Validation(format!(
                "override `{path}`: `{}` is not an object",
                parts[..i].join(".")
            )));
        }
        let map = node.as_object_mut().expect("checked above");
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("paths have at least one segment")
}

/// Parses JSON text (empty text is an empty object) and applies overrides.
pub fn load_value(text: &str, overrides: &[String]) -> Result<Value, CliError> {
    let mut value = if text.trim().is_empty() {
        Value::Object(Map::new())
    } else {
        serde_json::from_str(text).map_err(|e| {
            CliError::Validation(format!("config parse error at line {}, column {}: {e}", e.line(), e.column()))
        })?
    };
    if !value.is_object() {
        return Err(CliError::Validation("config must be a JSON object".into()));
    }
    for o in overrides {
        let (k, v) = parse_override(o)?;
        apply_override(&mut value, &k, v)?;
    }
    Ok(value)
}

/// Strict typed view of a configuration value.
pub fn typed<T: DeserializeOwned>(value: Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Validation(format!("config: {e}")))
}

/// Parses and validates a run configuration, returning it with `eta` and
/// `dt` filled in.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let config: RunConfig = typed(load_value(text, &[])?)?;
    Ok(config.prepare()?.config)
}

/// SHA-256 of the compact JSON form of a configuration, in hex.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let text = serde_json::to_string(config).expect("configurations serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn default_tolerance() -> f64 {
    1e-12
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterCheckConfig {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualStudy {
    /// `max|e|` on filter maps.
    Defect,
    /// Relative gap between `e` and the Fréchet contraction on non-filtered families.
    Frechet,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualCheckConfig {
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default = "default_study")]
    pub study: ResidualStudy,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Finest spacing; the sweep uses `2^{levels-1}·h, …, 2h, h`.
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_min_order")]
    pub min_order: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_family() -> String {
    "taylor-green".into()
}
fn default_study() -> ResidualStudy {
    ResidualStudy::Defect
}
fn default_eta() -> f64 {
    0.1
}
fn default_h() -> f64 {
    0.005
}
fn default_levels() -> usize {
    3
}
fn default_min_order() -> f64 {
    1.9
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureCheckConfig {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Allowed excess of the bound's left side over its right side.
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_manufactured_epsilon")]
    pub manufactured_epsilon: f64,
    #[serde(default = "default_manufactured_eta0")]
    pub manufactured_eta0: f64,
    #[serde(default = "default_burgers_t")]
    pub burgers_t: f64,
    #[serde(default = "default_burgers_epsilon")]
    pub burgers_epsilon: f64,
    #[serde(default = "default_burgers_eta0")]
    pub burgers_eta0: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_nodes() -> usize {
    33
}
fn default_slack() -> f64 {
    0.10
}
fn default_manufactured_epsilon() -> f64 {
    0.005
}
fn default_manufactured_eta0() -> f64 {
    0.5
}
fn default_burgers_t() -> f64 {
    0.3
}
fn default_burgers_epsilon() -> f64 {
    1e-3
}
fn default_burgers_eta0() -> f64 {
    0.05
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuhamelCheckConfig {
    #[serde(default = "default_duhamel_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_eta_end")]
    pub eta_end: f64,
    #[serde(default = "default_counts")]
    pub counts: Vec<usize>,
    #[serde(default = "default_duhamel_order")]
    pub min_order: f64,
    #[serde(default = "default_bound_slack")]
    pub bound_slack: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_duhamel_epsilon() -> f64 {
    0.01
}
fn default_eta_end() -> f64 {
    0.3
}
fn default_counts() -> Vec<usize> {
    vec![9, 17, 33]
}
fn default_duhamel_order() -> f64 {
    1.5
}
fn default_bound_slack() -> f64 {
    0.05
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeriveSourceConfig {
    /// `fluid`, `burgers`, or the text of a core.
    #[serde(default = "default_core")]
    pub core: String,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_core() -> String {
    "burgers".into()
}
fn default_dim() -> usize {
    2
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersConfig {
    #[serde(default = "default_burgers_size")]
    pub grid_size: usize,
    #[serde(default = "default_burgers_end")]
    pub t_end: f64,
    #[serde(default = "default_burgers_dt")]
    pub dt: f64,
}

fn default_burgers_size() -> usize {
    1024
}
fn default_burgers_end() -> f64 {
    0.5
}
fn default_burgers_dt() -> f64 {
    2e-3
}

#[cfg(test)]
mod tests {
    use super::*;
    use scalelab::evolve::ClosureMode;

    #[test]
    fn overrides_follow_dotted_paths() {
        let v = load_value(
            r#"{"eta": 0.1, "psi": {"enabled": false}}"#,
            &["psi.enabled=true".into(), "output.csv=run.csv".into(), "t_end=0.5".into()],
        )
        .unwrap();
        assert_eq!(v["psi"]["enabled"], Value::Bool(true));
        assert_eq!(v["output"]["csv"], Value::String("run.csv".into()));
        assert_eq!(v["t_end"], serde_json::json!(0.5));
        assert!(parse_override("novalue").is_err());
        assert!(parse_override("a..b=1").is_err());
        assert!(load_value(r#"{"eta": 1}"#, &["eta.x=1".into()]).is_err());
    }

    #[test]
    fn minimal_config_defaults() {
        let c = parse_config(r#"{"eta": 0.05, "t_end": 0.1}"#).unwrap();
        assert_eq!(c.closure, ClosureMode::Helmholtz);
        assert!(c.dt.unwrap() > 0.0);
    }

    #[test]
    fn beta_delta_echo_eta() {
        let c = parse_config(r#"{"beta": 0.5, "delta": 0.2, "t_end": 0.1}"#).unwrap();
        assert!((c.eta.unwrap() - 0.02).abs() < 1e-16);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"eta\":0.02"));
    }

    #[test]
    fn errors_name_the_field() {
        let err = parse_config(r#"{"eta": -0.1, "t_end": 0.1}"#).unwrap_err();
        assert!(err.to_string().contains("eta"), "{err}");
        let err = parse_config(r#"{"eta": 0.1, "t_end": 0.1, "bogus": 1}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = parse_config("{\"eta\": 0.1,\n \"t_end\": }").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = parse_config(r#"{"eta": 0.05, "t_end": 0.1}"#).unwrap();
        let b = parse_config(r#"{"t_end": 0.1, "eta": 0.05}"#).unwrap();
        let c = parse_config(r#"{"eta": 0.05, "t_end": 0.2}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&c));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
