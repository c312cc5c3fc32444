use std::fmt;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::solver::DataKind;

/// Flat `key = value` run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub box_length: f64,
    pub epsilon: f64,
    pub mu: f64,
    /// Final time (key `T`).
    pub horizon: f64,
    /// Fixed step; `None` derives the step from `cfl`.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub data: DataKind,
    pub seed: u64,
    /// Steps between stored snapshots and written checkpoints.
    pub cadence: usize,
    pub out_dir: PathBuf,
    pub name: String,
}

const KEYS: [&str; 12] = [
    "n", "box_length", "epsilon", "mu", "T", "dt", "cfl", "data", "seed", "cadence", "out_dir", "name",
];

#[derive(Default)]
struct Draft {
    n: Option<usize>,
    box_length: Option<f64>,
    epsilon: Option<f64>,
    mu: Option<f64>,
    horizon: Option<f64>,
    dt: Option<f64>,
    cfl: Option<f64>,
    data: Option<DataKind>,
    seed: Option<u64>,
    cadence: Option<usize>,
    out_dir: Option<PathBuf>,
    name: Option<String>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn positive(line: usize, key: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .parse()
        .map_err(|_| err(line, format!("{key}: expected a number, got {raw:?}")))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(err(line, format!("{key} must be positive, got {raw}")));
    }
    Ok(v)
}

fn integer<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| err(line, format!("{key}: expected a nonnegative integer, got {raw:?}")))
}

fn unquote(raw: &str) -> &str {
    raw.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(raw)
}

/// Parses a configuration document. Lines are `key = value`; `#` starts a
/// comment. Unknown or repeated keys are errors.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut d = Draft::default();
    let mut lines = std::collections::HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = match raw.find('#') {
            Some(pos) if !raw[..pos].contains('"') => &raw[..pos],
            _ => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key = value`, got {content:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(err(line, format!("unknown key {key:?}")));
        }
        if let Some(prev) = lines.insert(key.to_string(), line) {
            return Err(err(line, format!("key {key:?} already set on line {prev}")));
        }
        if value.is_empty() {
            return Err(err(line, format!("{key}: missing value")));
        }
        match key {
            "n" => {
                let n: usize = integer(line, key, value)?;
                if n < 8 || !n.is_power_of_two() {
                    return Err(err(line, format!("n must be a power of two >= 8, got {n}")));
                }
                d.n = Some(n);
            }
            "box_length" => d.box_length = Some(positive(line, key, value)?),
            "epsilon" => d.epsilon = Some(positive(line, key, value)?),
            "mu" => {
                let v: f64 = value
                    .parse()
                    .map_err(|_| err(line, format!("mu: expected a number, got {value:?}")))?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(err(line, format!("mu must be nonnegative, got {value}")));
                }
                d.mu = Some(v);
            }
            "T" => d.horizon = Some(positive(line, key, value)?),
            "dt" => d.dt = Some(positive(line, key, value)?),
            "cfl" => d.cfl = Some(positive(line, key, value)?),
            "data" => {
                d.data = Some(
                    unquote(value)
                        .parse()
                        .map_err(|_| err(line, format!("data must be well_prepared or ill_prepared, got {value}")))?,
                );
                if d.data == Some(DataKind::Custom) {
                    return Err(err(line, "custom data cannot be described in a config file"));
                }
            }
            "seed" => d.seed = Some(integer(line, key, value)?),
            "cadence" => {
                let c: usize = integer(line, key, value)?;
                if c == 0 {
                    return Err(err(line, "cadence must be at least 1"));
                }
                d.cadence = Some(c);
            }
            "out_dir" => d.out_dir = Some(PathBuf::from(unquote(value))),
            "name" => {
                let name = unquote(value);
                if name.is_empty() || name.contains('"') {
                    return Err(err(line, format!("invalid name {value:?}")));
                }
                d.name = Some(name.to_string());
            }
            _ => unreachable!(),
        }
    }
    let end = text.lines().count().max(1);
    let missing = |k: &str| err(end, format!("missing required key {k:?}"));
    Ok(RunConfig {
        n: d.n.ok_or_else(|| missing("n"))?,
        box_length: d.box_length.unwrap_or(2.0 * std::f64::consts::PI),
        epsilon: d.epsilon.ok_or_else(|| missing("epsilon"))?,
        mu: d.mu.unwrap_or(1.0),
        horizon: d.horizon.ok_or_else(|| missing("T"))?,
        dt: d.dt,
        cfl: d.cfl.unwrap_or(0.5),
        data: d.data.unwrap_or(DataKind::WellPrepared),
        seed: d.seed.unwrap_or(0),
        cadence: d.cadence.unwrap_or(1),
        out_dir: d.out_dir.unwrap_or_else(|| PathBuf::from("out")),
        name: d.name.unwrap_or_else(|| "run".to_string()),
    })
}

impl fmt::Display for RunConfig {
    /// Re-parseable rendering; floats use the shortest exact representation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "box_length = {:?}", self.box_length)?;
        writeln!(f, "epsilon = {:?}", self.epsilon)?;
        writeln!(f, "mu = {:?}", self.mu)?;
        writeln!(f, "T = {:?}", self.horizon)?;
        if let Some(dt) = self.dt {
            writeln!(f, "dt = {dt:?}")?;
        }
        writeln!(f, "cfl = {:?}", self.cfl)?;
        writeln!(f, "data = {}", self.data)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "cadence = {}", self.cadence)?;
        writeln!(f, "out_dir = \"{}\"", self.out_dir.display())?;
        writeln!(f, "name = \"{}\"", self.name)
    }
}
