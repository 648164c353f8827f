//! Config file shapes and loading.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use specmix_compare::{RangePolicy, DEFAULT_GATE};
use specmix_core::{GammaSpec, IdLaw, K_MOMENT_MAX};
use specmix_lab::EnsembleSpec;

use crate::CliError;

fn four() -> usize {
    4
}

fn gate() -> f64 {
    DEFAULT_GATE
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaFile {
    pub gamma: GammaSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub law: IdLaw,
    pub gamma: GammaSpec,
    pub k_max: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub ensemble: EnsembleSpec,
    pub repetitions: usize,
    #[serde(default = "four")]
    pub k_max: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    pub bins: usize,
    /// Defaults to `quantile(0.99)` for heavy-tailed vectors, `full` otherwise.
    #[serde(default)]
    pub range: Option<RangePolicy>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareCase {
    pub label: String,
    pub ensemble: EnsembleSpec,
    pub law: IdLaw,
    pub gamma: GammaSpec,
    pub repetitions: usize,
    #[serde(default = "four")]
    pub k_max: usize,
    #[serde(default = "gate")]
    pub gate: f64,
    #[serde(default)]
    pub histogram: Option<HistogramConfig>,
    /// Points `[re, im]` with `im > 0`.
    #[serde(default)]
    pub cauchy_grid: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub cases: Vec<CompareCase>,
}

pub fn load<T: DeserializeOwned>(path: Option<&Path>) -> Result<T, CliError> {
    let path = path.ok_or_else(|| CliError::Config("this command needs --config".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// `K_MOMENT_MAX`, or `SPECMIX_KMAX` when set.
pub fn moment_cap() -> Result<usize, CliError> {
    match std::env::var("SPECMIX_KMAX") {
        Err(_) => Ok(K_MOMENT_MAX),
        Ok(v) => {
            let cap: usize = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("SPECMIX_KMAX must be a positive integer, got {v:?}")))?;
            if cap == 0 {
                return Err(CliError::Config("SPECMIX_KMAX must be at least 1".into()));
            }
            eprintln!(
                "{}",
                serde_json::json!({
                    "warning": format!("SPECMIX_KMAX overrides the moment cap {K_MOMENT_MAX} with {cap}; partition counts grow like Bell numbers")
                })
            );
            Ok(cap)
        }
    }
}
