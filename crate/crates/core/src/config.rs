//! Scenario files: TOML with `[scenario]`, `[phy]`, `[channel]`, `[rlc]`,
//! `[app]`, `[headers]` and an optional `[sweep]` section.
//!
//! ```toml
//! [sweep]
//! seeds = 20                       # or an explicit list [1, 5, 9]
//! "scenario.distance_m" = [25, 100, 500]
//! "phy.mcs" = [0, 14, 28]
//! ```
//!
//! Every sweep key is a dotted path into the base config; the run set is the
//! cross product of all axes in file order, last axis varying fastest.

use std::path::Path;

use toml::{Table, Value};

use crate::scenario::{ScenarioError, SimConfig};

/// Environment variables starting with this prefix override config keys:
/// `V2VSIM_RLC__T_REORDERING_MS=50` sets `rlc.t_reordering_ms`.
pub const ENV_PREFIX: &str = "V2VSIM_";

pub const DEFAULT_SEEDS: u64 = 20;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("{key}: {message}")]
    Schema { key: String, message: String },
}

fn schema(key: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Schema {
        key: key.into(),
        message: message.into(),
    }
}

/// One resolved point of the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    /// Axis values in axis order.
    pub values: Vec<Value>,
    pub config: SimConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Dotted keys of the sweep axes.
    pub axes: Vec<String>,
    pub points: Vec<SweepPoint>,
    pub seeds: Vec<u64>,
    pub confidence: f64,
}

impl SweepSpec {
    pub fn run_count(&self) -> usize {
        self.points.len() * self.seeds.len()
    }

    /// `(point index, seed)` for every run, point-major.
    pub fn runs(&self) -> Vec<(usize, u64)> {
        (0..self.points.len())
            .flat_map(|p| self.seeds.iter().map(move |&s| (p, s)))
            .collect()
    }
}

/// Seeds given either as a count (`20` → 1..=20) or a comma list.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, ConfigError> {
    let bad = |m: &str| schema("seeds", format!("{m}: `{text}`"));
    let text = text.trim();
    if text.contains(',') {
        let seeds = text
            .split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| bad("not an integer list")))
            .collect::<Result<Vec<_>, _>>()?;
        return check_seeds(seeds).map_err(|m| bad(&m));
    }
    let n: u64 = text.parse().map_err(|_| bad("expected a count or a comma-separated list"))?;
    if n == 0 {
        return Err(bad("seed count must be positive"));
    }
    Ok((1..=n).collect())
}

fn check_seeds(seeds: Vec<u64>) -> Result<Vec<u64>, String> {
    if seeds.is_empty() {
        return Err("empty seed list".into());
    }
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != seeds.len() {
        return Err("duplicate seeds".into());
    }
    Ok(seeds)
}

pub fn parse_config(path: &Path) -> Result<SweepSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let table = parse_table(&text, &path.display().to_string())?;
    resolve(table)
}

pub fn parse_table(text: &str, origin: &str) -> Result<Table, ConfigError> {
    text.parse::<Table>().map_err(|e| ConfigError::Parse {
        origin: origin.to_owned(),
        message: e.to_string(),
    })
}

pub fn parse_str(text: &str) -> Result<SweepSpec, ConfigError> {
    resolve(parse_table(text, "<string>")?)
}

/// Parses an override value as a TOML scalar or array, falling back to a
/// bare string.
fn override_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_owned()))
}

/// Applies `PREFIX_SECTION__KEY=value` overrides to a raw config table.
/// Returns the dotted keys that were set.
pub fn apply_env_overrides<I, K, V>(table: &mut Table, vars: I) -> Result<Vec<String>, ConfigError>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let mut applied = Vec::new();
    let mut vars: Vec<(String, String)> = vars
        .into_iter()
        .filter_map(|(k, v)| {
            let key = k.as_ref().strip_prefix(ENV_PREFIX)?;
            Some((key.to_ascii_lowercase(), v.as_ref().to_owned()))
        })
        .collect();
    vars.sort();
    for (key, raw) in vars {
        let path: Vec<&str> = key.split("__").collect();
        if path.len() < 2 || path.iter().any(|p| p.is_empty()) {
            return Err(schema(
                format!("{ENV_PREFIX}{}", key.to_ascii_uppercase()),
                "expected SECTION__KEY",
            ));
        }
        let dotted = path.join(".");
        set_path(table, &path, override_value(&raw)).map_err(|m| schema(&dotted, m))?;
        applied.push(dotted);
    }
    Ok(applied)
}

fn set_path(table: &mut Table, path: &[&str], value: Value) -> Result<(), String> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| format!("`{p}` is not a section"))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn deserialize_config(table: Table) -> Result<SimConfig, ConfigError> {
    let cfg: SimConfig = serde_path_to_error::deserialize(Value::Table(table)).map_err(|e| {
        let path = e.path().to_string();
        schema(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })?;
    cfg.validate().map_err(|e| match e {
        ScenarioError::Invalid { key, message } => schema(key, message),
        other => schema("", other.to_string()),
    })?;
    Ok(cfg)
}

/// Expands the `[sweep]` section and builds a validated config per point.
pub fn resolve(mut table: Table) -> Result<SweepSpec, ConfigError> {
    let sweep = match table.remove("sweep") {
        None => Table::new(),
        Some(Value::Table(t)) => t,
        Some(_) => return Err(schema("sweep", "must be a section")),
    };
    let mut seeds: Vec<u64> = (1..=DEFAULT_SEEDS).collect();
    let mut confidence = DEFAULT_CONFIDENCE;
    let mut axes: Vec<(String, Vec<Value>)> = Vec::new();
    for (key, value) in sweep {
        match key.as_str() {
            "seeds" => {
                seeds = match value {
                    Value::Integer(n) if n > 0 => (1..=n as u64).collect(),
                    Value::Array(list) => {
                        let parsed: Option<Vec<u64>> = list
                            .iter()
                            .map(|v| v.as_integer().and_then(|i| u64::try_from(i).ok()))
                            .collect();
                        let parsed = parsed.ok_or_else(|| schema("sweep.seeds", "expected non-negative integers"))?;
                        check_seeds(parsed).map_err(|m| schema("sweep.seeds", m))?
                    }
                    _ => return Err(schema("sweep.seeds", "expected a positive count or a list")),
                }
            }
            "confidence" => {
                confidence = value
                    .as_float()
                    .filter(|c| *c > 0.0 && *c < 1.0)
                    .ok_or_else(|| schema("sweep.confidence", "expected a number in (0, 1)"))?;
            }
            _ => {
                let list = match value {
                    Value::Array(list) if !list.is_empty() => list,
                    _ => return Err(schema(format!("sweep.{key}"), "expected a non-empty list")),
                };
                if key.split('.').count() < 2 {
                    return Err(schema(format!("sweep.{key}"), "expected a dotted key such as `phy.mcs`"));
                }
                axes.push((key, list));
            }
        }
    }

    let mut points = Vec::new();
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    for index in 0..total {
        let mut rem = index;
        let mut values = vec![Value::Boolean(false); axes.len()];
        for (a, (_, list)) in axes.iter().enumerate().rev() {
            values[a] = list[rem % list.len()].clone();
            rem /= list.len();
        }
        let mut t = table.clone();
        for ((key, _), v) in axes.iter().zip(&values) {
            let path: Vec<&str> = key.split('.').collect();
            set_path(&mut t, &path, v.clone()).map_err(|m| schema(key, m))?;
        }
        points.push(SweepPoint {
            config: deserialize_config(t)?,
            values,
        });
    }

    Ok(SweepSpec {
        axes: axes.into_iter().map(|(k, _)| k).collect(),
        points,
        seeds,
        confidence,
    })
}

/// Axis value as written in CSV cells: bare strings, shortest floats.
pub fn format_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        Value::Boolean(b) => b.to_string(),
        other => other.to_string(),
    }
}
