use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::certificates::{CheckOptions, RegionalGainBundle, Theorem2Options};
use crate::scalar_fn::ComparisonFunction;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemName {
    Example1,
    LinearPair,
}

/// Problem description read from `--problem`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub schema: u32,
    pub system: SystemName,
    /// Replaces the built-in gains and thresholds of `system`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<RegionalGainBundle>,
    #[serde(default)]
    pub check: CheckOptions,
    #[serde(default)]
    pub theorem2: Theorem2Options,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bridge: Option<BridgeConfig>,
}

impl ProblemConfig {
    pub fn builtin(system: SystemName) -> Self {
        ProblemConfig {
            schema: SCHEMA,
            system,
            bundle: None,
            check: CheckOptions::default(),
            theorem2: Theorem2Options { allow_threshold_swap: system == SystemName::Example1, ..Default::default() },
            simulate: SimulateConfig::default(),
            bridge: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub radius: f64,
    pub count: usize,
    pub step: f64,
    /// Defaults to 200 for radii up to `M_ℓ` and 500 beyond.
    pub horizon: Option<f64>,
    pub record_dt: f64,
    /// Defaults to `1e-3` for radii up to `M_ℓ` and `1e-2` beyond.
    pub origin_tol: Option<f64>,
    pub workers: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { radius: 0.236, count: 16, step: 1e-3, horizon: None, record_dt: 0.1, origin_tol: None, workers: 1 }
    }
}

/// A bridge between user-supplied comparison functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BridgeConfig {
    /// `α < β̃` everywhere, `β̃ < β⁻¹` on `[p, q]`.
    Kinf {
        alpha: Arc<ComparisonFunction>,
        beta: Arc<ComparisonFunction>,
        p: f64,
        q: f64,
        #[serde(default)]
        epsilon: Option<f64>,
    },
    /// `lower < σ < upper` at and between `knots`.
    Smooth {
        lower: Arc<ComparisonFunction>,
        upper: Arc<ComparisonFunction>,
        knots: Vec<f64>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid problem description: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema {0}, expected {SCHEMA}")]
    Schema(u32),
    #[error("{0}")]
    Invalid(String),
}

/// Built-in name or path to a JSON description.
pub fn load_problem(problem: &str) -> Result<ProblemConfig, ConfigError> {
    match problem {
        "example1" => return Ok(ProblemConfig::builtin(SystemName::Example1)),
        "linear-pair" => return Ok(ProblemConfig::builtin(SystemName::LinearPair)),
        _ => {}
    }
    let text = std::fs::read_to_string(Path::new(problem))
        .map_err(|source| ConfigError::Read { path: problem.to_string(), source })?;
    parse_problem(&text)
}

pub fn parse_problem(text: &str) -> Result<ProblemConfig, ConfigError> {
    let mut value: Value = serde_json::from_str(text)?;
    numeric_strings(&mut value);
    let cfg: ProblemConfig = serde_json::from_value(value)?;
    if cfg.schema != SCHEMA {
        return Err(ConfigError::Schema(cfg.schema));
    }
    Ok(cfg)
}

/// Decimal strings such as `"0.236"` or `"-1e-3"` become numbers; every
/// other string is left alone.
fn numeric_strings(v: &mut Value) {
    match v {
        Value::String(s) if is_decimal(s) => {
            let integer = s.bytes().all(|b| b.is_ascii_digit() || b == b'-' || b == b'+');
            let n = if integer {
                s.trim_start_matches('+').parse::<i64>().ok().map(Number::from)
            } else {
                s.parse::<f64>().ok().and_then(Number::from_f64)
            };
            if let Some(n) = n {
                *v = Value::Number(n);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(numeric_strings),
        Value::Object(map) => map.values_mut().for_each(numeric_strings),
        _ => {}
    }
}

fn is_decimal(s: &str) -> bool {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    let (mantissa, exponent) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, Some(e.strip_prefix(['-', '+']).unwrap_or(e))),
        None => (body, None),
    };
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let mantissa_ok = match mantissa.split_once('.') {
        Some((a, b)) => (digits(a) || a.is_empty()) && (digits(b) || b.is_empty()) && !(a.is_empty() && b.is_empty()),
        None => digits(mantissa),
    };
    mantissa_ok && exponent.map_or(true, digits)
}
