//! Run configuration shared by the command line and the scenario suite.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "jsonl" => Ok(Self::Jsonl),
            other => param(format!("unknown output format '{other}' (expected csv or jsonl)")),
        }
    }
}

/// Every knob of a run. Optional fields fall back to per-command or
/// per-scenario defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub k: f64,
    pub window_t: Option<f64>,
    pub window_x: Option<f64>,
    pub t_lo: Option<f64>,
    pub t_hi: Option<f64>,
    /// Overrides the primary replica count of a scenario.
    pub replicas: Option<u64>,
    pub seed: u64,
    pub scenarios: Vec<String>,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub emit_raw: bool,
    pub jobs: Option<usize>,
    /// Thinning probability for V3; `None` means `1/k`.
    pub thin_p: Option<f64>,
    /// Run each scenario's deliberately violated configuration.
    pub control: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k: 2.0,
            window_t: None,
            window_x: None,
            t_lo: None,
            t_hi: None,
            replicas: None,
            seed: 42,
            scenarios: Vec::new(),
            output_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
            emit_raw: false,
            jobs: None,
            thin_p: None,
            control: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return param(format!("k must be a positive real, got {}", self.k));
        }
        for (name, v) in [
            ("window_t", self.window_t),
            ("window_x", self.window_x),
            ("t_lo", self.t_lo),
            ("t_hi", self.t_hi),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return param(format!("{name} must be a positive real, got {v}"));
                }
            }
        }
        match (self.t_lo, self.t_hi) {
            (Some(lo), Some(hi)) if lo >= hi => {
                return param(format!("t_lo must be below t_hi, got {lo} >= {hi}"))
            }
            (Some(_), None) | (None, Some(_)) => {
                return param("t_lo and t_hi must be given together")
            }
            _ => {}
        }
        if self.replicas == Some(0) {
            return param("replicas must be positive");
        }
        if let Some(p) = self.thin_p {
            if !(0.0..=1.0).contains(&p) {
                return param(format!("thin_p must lie in [0, 1], got {p}"));
            }
        }
        if self.jobs == Some(0) {
            return param("jobs must be positive");
        }
        Ok(())
    }

    /// `k` as an integer, as planar extraction requires.
    pub fn planar_k(&self) -> Result<usize> {
        if self.k >= 1.0 && self.k.fract() == 0.0 && self.k <= u32::MAX as f64 {
            Ok(self.k as usize)
        } else {
            param(format!("planar extraction needs an integer k >= 1, got {}", self.k))
        }
    }
}
