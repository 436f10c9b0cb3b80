//! Run manifests: the resolved configuration written alongside every output
//! set. A manifest deserializes as an ordinary config file, so re-running the
//! same subcommand with `--config <manifest>` reproduces the outputs
//! byte-identically.

use crate::errors::CliError;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub k_plus: Vec<f64>,
    pub k_minus: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_jumps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_guard: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_only: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vary: Option<Vec<String>>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, rates: &copoly::RateSet) -> Self {
        RunManifest {
            artifact: "copoly".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            k_plus: rates.attach_rates().to_vec(),
            k_minus: rates.detach_rates().to_vec(),
            seed: None,
            t_max: None,
            max_jumps: None,
            tol: None,
            record_stride: None,
            replicas: None,
            grid: None,
            burn_in: None,
            tail_guard: None,
            svg: None,
            root_only: None,
            vary: None,
            outputs: Vec::new(),
        }
    }

    pub fn with_stop(mut self, stop: copoly::StopRule) -> Self {
        match stop {
            copoly::StopRule::MaxTime(t) => self.t_max = Some(t),
            copoly::StopRule::MaxJumps(n) => self.max_jumps = Some(n),
        }
        self
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Internal(format!("manifest serialization: {e}")))?;
        text.push('\n');
        std::fs::write(path, text).map_err(crate::errors::io_at(path))?;
        Ok(())
    }
}
