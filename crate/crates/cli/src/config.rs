//! Line-oriented `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use stark_qed_core::Method;

use crate::error::{RunError, RunResult};

pub const KEYS: [&str; 11] =
    ["experiment", "F", "g", "omega0", "n0", "N", "auto_size", "t_max", "dt_out", "method", "out_dir"];

/// Raw configuration as written; unset keys fall back to preset defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub force: Option<f64>,
    pub coupling: Option<f64>,
    pub omega0: Option<f64>,
    pub n0: Option<i64>,
    pub sites: Option<usize>,
    pub auto_size: Option<bool>,
    pub t_max: Option<f64>,
    pub dt_out: Option<f64>,
    pub method: Option<Method>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Self {
        ExperimentConfig { experiment: name.to_string(), ..Default::default() }
    }

    pub fn load(path: &Path) -> RunResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        text.parse()
    }
}

impl FromStr for ExperimentConfig {
    type Err = RunError;

    fn from_str(text: &str) -> RunResult<Self> {
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| invalid(lineno, format!("expected `key = value`, got `{line}`")))?;
            let key = KEYS
                .iter()
                .copied()
                .find(|k| *k == key)
                .ok_or_else(|| invalid(lineno, format!("unknown key `{key}` (allowed: {})", KEYS.join(", "))))?;
            if let Some(prev) = seen.insert(key, lineno) {
                return Err(invalid(lineno, format!("`{key}` already set on line {prev}")));
            }
            if value.is_empty() {
                return Err(invalid(lineno, format!("`{key}` has no value")));
            }
            match key {
                "experiment" => cfg.experiment = value.to_string(),
                "F" => cfg.force = Some(number(lineno, key, value)?),
                "g" => cfg.coupling = Some(number(lineno, key, value)?),
                "omega0" => cfg.omega0 = Some(number(lineno, key, value)?),
                "n0" => {
                    cfg.n0 = Some(
                        value.parse().map_err(|_| invalid(lineno, format!("n0 must be an integer, got `{value}`")))?,
                    )
                }
                "N" => {
                    cfg.sites = Some(
                        value
                            .parse()
                            .map_err(|_| invalid(lineno, format!("N must be a positive integer, got `{value}`")))?,
                    )
                }
                "auto_size" => {
                    cfg.auto_size = Some(match value {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        _ => return Err(invalid(lineno, format!("auto_size must be true or false, got `{value}`"))),
                    })
                }
                "t_max" => cfg.t_max = Some(number(lineno, key, value)?),
                "dt_out" => cfg.dt_out = Some(number(lineno, key, value)?),
                "method" => {
                    cfg.method = Some(match value {
                        "eigen" => Method::Eigen,
                        "chebyshev" => Method::Chebyshev,
                        _ => return Err(invalid(lineno, format!("method must be eigen or chebyshev, got `{value}`"))),
                    })
                }
                "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
                _ => unreachable!(),
            }
        }
        if cfg.experiment.is_empty() {
            return Err(RunError::Validation("config does not name an `experiment`".into()));
        }
        Ok(cfg)
    }
}

fn invalid(line: usize, msg: String) -> RunError {
    RunError::Validation(format!("config line {line}: {msg}"))
}

fn number(line: usize, key: &str, value: &str) -> RunResult<f64> {
    let v: f64 = value.parse().map_err(|_| invalid(line, format!("`{key}` must be a number, got `{value}`")))?;
    if !v.is_finite() {
        return Err(invalid(line, format!("`{key}` must be finite")));
    }
    Ok(v)
}
