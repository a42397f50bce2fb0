//! Run configuration and the envelope every report is wrapped in.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{LabError, Result};
use crate::expander::cheeger::MAX_EXACT_VERTICES;
use crate::finite::{DEFAULT_CLOSURE_CAP, DEFAULT_MAX_PRIME};
use crate::matrix::NormIndex;

/// Largest graph handed to the dense eigensolver.
pub const DEFAULT_MAX_GRAPH_VERTICES: usize = 6000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(LabError::Parse(format!(
                "unknown format '{other}' (expected json or csv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    pub max_prime: u64,
    pub closure_cap: usize,
    pub max_graph_vertices: usize,
    pub max_exact_vertices: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_prime: DEFAULT_MAX_PRIME,
            closure_cap: DEFAULT_CLOSURE_CAP,
            max_graph_vertices: DEFAULT_MAX_GRAPH_VERTICES,
            max_exact_vertices: MAX_EXACT_VERTICES,
        }
    }
}

/// Everything that determines a report. Two runs with equal configs produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub primes: Vec<u64>,
    pub p: NormIndex,
    pub trials: usize,
    /// Sample pairs per modulus-of-continuity estimate.
    pub samples: usize,
    /// Inclusive matrix dimension range for random Mazur-map inputs.
    pub dims: (usize, usize),
    pub caps: Caps,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            primes: vec![2, 3],
            p: NormIndex::Two,
            trials: 1000,
            samples: 2000,
            dims: (2, 16),
            caps: Caps::default(),
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.primes.is_empty() {
            return Err(LabError::Precondition("need at least one prime".into()));
        }
        for &l in &self.primes {
            crate::finite::Prime::bounded(l, self.caps.max_prime)?;
        }
        let c = &self.caps;
        if c.max_prime == 0
            || c.closure_cap == 0
            || c.max_graph_vertices == 0
            || c.max_exact_vertices == 0
        {
            return Err(LabError::Precondition("caps must be positive".into()));
        }
        if self.dims.0 == 0 || self.dims.0 > self.dims.1 {
            return Err(LabError::Precondition(format!(
                "bad dimension range {:?}",
                self.dims
            )));
        }
        Ok(())
    }

    /// Parses and validates a JSON config; missing fields take their defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A finished experiment: the machine-readable result plus its CSV rendering.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: &'static str,
    pub seed: u64,
    pub config: RunConfig,
    pub passed: bool,
    pub notes: Vec<String>,
    pub result: Value,
    #[serde(skip)]
    pub csv: String,
}

impl Report {
    pub fn new<T: Serialize>(
        experiment: &'static str,
        config: &RunConfig,
        passed: bool,
        notes: Vec<String>,
        result: &T,
        csv: String,
    ) -> Result<Self> {
        Ok(Report {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            experiment,
            seed: config.seed,
            config: config.clone(),
            passed,
            notes,
            result: serde_json::to_value(result)?,
            csv,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// CSV body preceded by `#` comment lines carrying the envelope.
    pub fn to_csv(&self) -> String {
        format!(
            "# tool={} version={} experiment={} seed={} passed={}\n{}",
            self.tool, self.version, self.experiment, self.seed, self.passed, self.csv
        )
    }

    pub fn render(&self) -> String {
        match self.config.format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_defaults_and_round_trip() {
        let cfg = RunConfig::from_json(r#"{"seed": 5, "p": "inf"}"#).unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.p, NormIndex::Inf);
        assert_eq!(cfg.primes, vec![2, 3]);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
        assert!(RunConfig::from_json(r#"{"primes": [4]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"sede": 1}"#).is_err());
    }
}
