//! JSON config files and flag merging. One schema serves every subcommand,
//! and run manifests embed the same keys, so `--config run.manifest.json`
//! reproduces a previous run. Flags always override file values.

use crate::errors::CliError;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Default, Clone, Deserialize)]
pub struct ConfigFile {
    pub k_plus: Option<Vec<f64>>,
    pub k_minus: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub t_max: Option<f64>,
    pub max_jumps: Option<u64>,
    pub tol: Option<f64>,
    pub record_stride: Option<u64>,
    pub replicas: Option<u64>,
    pub grid: Option<u64>,
    pub burn_in: Option<f64>,
    pub tail_guard: Option<u64>,
    pub svg: Option<bool>,
    pub root_only: Option<bool>,
    pub vary: Option<Vec<String>>,
}

pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Parses a comma-separated rate list such as `1,1.2`.
pub fn parse_rate_list(which: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .map(|item| {
            item.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{which}: `{item}` is not a number")))
        })
        .collect()
}

/// Rates from flags (which win) or the config file.
pub fn resolve_rates(
    flag_k_plus: Option<&str>,
    flag_k_minus: Option<&str>,
    config: &ConfigFile,
) -> Result<copoly::RateSet, CliError> {
    let k_plus = match flag_k_plus {
        Some(text) => parse_rate_list("--k-plus", text)?,
        None => config
            .k_plus
            .clone()
            .ok_or_else(|| CliError::Usage("attachment rates required (--k-plus or config)".into()))?,
    };
    let k_minus = match flag_k_minus {
        Some(text) => parse_rate_list("--k-minus", text)?,
        None => config
            .k_minus
            .clone()
            .ok_or_else(|| CliError::Usage("detachment rates required (--k-minus or config)".into()))?,
    };
    copoly::RateSet::new(k_plus, k_minus).map_err(|e| CliError::Usage(e.to_string()))
}

/// Stop condition: exactly one of `--t-max` / `--max-jumps`; flags override
/// the config pair as a whole.
pub fn resolve_stop(
    flag_t_max: Option<f64>,
    flag_max_jumps: Option<u64>,
    config: &ConfigFile,
) -> Result<copoly::StopRule, CliError> {
    let (t_max, max_jumps) = if flag_t_max.is_some() || flag_max_jumps.is_some() {
        (flag_t_max, flag_max_jumps)
    } else {
        (config.t_max, config.max_jumps)
    };
    match (t_max, max_jumps) {
        (Some(t), None) if t >= 0.0 && t.is_finite() => Ok(copoly::StopRule::MaxTime(t)),
        (Some(t), None) => Err(CliError::Usage(format!("--t-max must be finite and >= 0, got {t}"))),
        (None, Some(n)) => Ok(copoly::StopRule::MaxJumps(n)),
        (None, None) => Err(CliError::Usage(
            "a stop condition is required: --t-max or --max-jumps".into(),
        )),
        (Some(_), Some(_)) => Err(CliError::Usage(
            "--t-max and --max-jumps are mutually exclusive".into(),
        )),
    }
}
