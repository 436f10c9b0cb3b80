//! Parameter sweeps over the classification and growth laws.
//!
//! A vary spec looks like `k_plus[1]=0.1:3:0.05` (1-based monomer index,
//! `start:stop:step`) or `k_plus[1]=0.5` for a single point.

use crate::errors::CliError;
use copoly::{RateSet, RegimeClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Attach,
    Detach,
}

#[derive(Debug, Clone)]
pub struct VarySpec {
    pub kind: RateKind,
    /// 0-based monomer index.
    pub index: usize,
    pub values: Vec<f64>,
}

impl VarySpec {
    pub fn parse(text: &str, dim: usize) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Usage(format!("malformed --vary `{text}`: {why}"));
        let (target, range) = text
            .split_once('=')
            .ok_or_else(|| bad("expected `name[index]=start:stop:step`"))?;
        let (name, rest) = target
            .split_once('[')
            .ok_or_else(|| bad("expected `name[index]`"))?;
        let kind = match name.trim() {
            "k_plus" => RateKind::Attach,
            "k_minus" => RateKind::Detach,
            other => return Err(bad(&format!("unknown parameter `{other}`"))),
        };
        let index_text = rest
            .strip_suffix(']')
            .ok_or_else(|| bad("missing `]` after index"))?;
        let label: usize = index_text
            .trim()
            .parse()
            .map_err(|_| bad("index is not an integer"))?;
        if label == 0 || label > dim {
            return Err(bad(&format!("index {label} outside 1..={dim}")));
        }

        let parts: Vec<&str> = range.split(':').collect();
        let values = match parts.as_slice() {
            [single] => {
                let v: f64 = single
                    .trim()
                    .parse()
                    .map_err(|_| bad("value is not a number"))?;
                vec![v]
            }
            [start, stop, step] => {
                let start: f64 = start.trim().parse().map_err(|_| bad("bad start"))?;
                let stop: f64 = stop.trim().parse().map_err(|_| bad("bad stop"))?;
                let step: f64 = step.trim().parse().map_err(|_| bad("bad step"))?;
                if !(step > 0.0 && step.is_finite()) {
                    return Err(bad("step must be > 0"));
                }
                if stop < start {
                    return Err(bad("stop is below start"));
                }
                let mut values = Vec::new();
                let mut i = 0u64;
                loop {
                    let v = start + i as f64 * step;
                    if v > stop + 1e-9 * step {
                        break;
                    }
                    values.push(v);
                    i += 1;
                }
                values
            }
            _ => return Err(bad("expected `start:stop:step` or a single value")),
        };
        Ok(VarySpec {
            kind,
            index: label - 1,
            values,
        })
    }
}

/// One grid cell of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub param1: f64,
    pub param2: Option<f64>,
    pub alpha: f64,
    pub regime: RegimeClass,
    pub m: Option<f64>,
    pub velocity: Option<f64>,
    pub sigma_bar: Option<Vec<f64>>,
}

pub fn apply(base: &RateSet, spec: &VarySpec, value: f64) -> Result<RateSet, CliError> {
    let mut k_plus = base.attach_rates().to_vec();
    let mut k_minus = base.detach_rates().to_vec();
    match spec.kind {
        RateKind::Attach => k_plus[spec.index] = value,
        RateKind::Detach => k_minus[spec.index] = value,
    }
    RateSet::new(k_plus, k_minus).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn evaluate_cell(
    base: &RateSet,
    specs: &[VarySpec],
    values: (f64, Option<f64>),
    tol: f64,
) -> Result<SweepRow, CliError> {
    let mut rates = apply(base, &specs[0], values.0)?;
    if let Some(v2) = values.1 {
        rates = apply(&rates, &specs[1], v2)?;
    }
    let summary = copoly::theory::summarize(&rates, tol)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let transient = summary.transient.as_ref();
    Ok(SweepRow {
        param1: values.0,
        param2: values.1,
        alpha: summary.alpha,
        regime: summary.regime,
        m: transient.map(|t| t.m),
        velocity: transient.map(|t| t.velocity),
        sigma_bar: transient.map(|t| t.sigma_bar.clone()),
    })
}

pub fn render_csv(rows: &[SweepRow], dim: usize) -> String {
    let mut text = String::from("param1,param2,alpha,regime,m,v");
    for i in 1..=dim {
        text.push_str(&format!(",sigma_bar_{i}"));
    }
    text.push('\n');
    for row in rows {
        text.push_str(&format!("{}", row.param1));
        text.push(',');
        if let Some(p2) = row.param2 {
            text.push_str(&format!("{p2}"));
        }
        text.push_str(&format!(",{},{}", row.alpha, row.regime.as_str()));
        match (&row.m, &row.velocity) {
            (Some(m), Some(v)) => text.push_str(&format!(",{m},{v}")),
            _ => text.push_str(",,"),
        }
        match &row.sigma_bar {
            Some(sigma) => {
                for s in sigma {
                    text.push_str(&format!(",{s}"));
                }
            }
            None => {
                for _ in 0..dim {
                    text.push(',');
                }
            }
        }
        text.push('\n');
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_range() {
        let spec = VarySpec::parse("k_plus[1]=0.1:0.3:0.1", 2).unwrap();
        assert_eq!(spec.kind, RateKind::Attach);
        assert_eq!(spec.index, 0);
        assert_eq!(spec.values.len(), 3);
        assert!((spec.values[2] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn parses_single_point() {
        let spec = VarySpec::parse("k_minus[2]=0.5:0.5:0.1", 2).unwrap();
        assert_eq!(spec.values, vec![0.5]);
        let spec = VarySpec::parse("k_minus[2]=0.7", 2).unwrap();
        assert_eq!(spec.values, vec![0.7]);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "k_plus=0.1:1:0.1",
            "k_plus[0]=0.1:1:0.1",
            "k_plus[3]=0.1:1:0.1",
            "k_plus[1]=1:0.1:0.1",
            "k_plus[1]=0.1:1:-0.1",
            "k_plus[1]=0.1:1",
            "gamma[1]=0.1:1:0.1",
        ] {
            assert!(VarySpec::parse(bad, 2).is_err(), "accepted {bad}");
        }
    }
}
