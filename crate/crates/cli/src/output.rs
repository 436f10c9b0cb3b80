//! File formats: event CSV, comparison report CSV, boundary CSV, empirical
//! matrix JSON, and the analyze JSON printed to stdout.
//!
//! Event times are written with 17 significant digits so the decimal text
//! round-trips to the exact binary value; everything else uses Rust's
//! shortest round-trip formatting.

use crate::errors::{io_at, CliError};
use copoly::analysis::{BoundaryView, EmpiricalMatrix, GrowthComparison, RootOccupationComparison};
use copoly::theory::TheorySummary;
use copoly::{Event, Trajectory};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

fn buffered(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, CliError> {
    Ok(std::io::BufWriter::new(
        std::fs::File::create(path).map_err(io_at(path))?,
    ))
}

/// `n,time,event,monomer,length` with `A`/`D` events, 1-based monomer labels
/// (empty for detach), and post-event lengths.
pub fn write_event_csv(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let mut out = buffered(path)?;
    let err = io_at(path);
    writeln!(out, "n,time,event,monomer,length").map_err(&err)?;
    let mut length = 0i64;
    for (n, (event, time)) in traj.events().iter().zip(traj.jump_times()).enumerate() {
        let (code, monomer) = match event {
            Event::Attach(m) => {
                length += 1;
                ("A", m.label().to_string())
            }
            Event::Detach => {
                length -= 1;
                ("D", String::new())
            }
        };
        writeln!(out, "{},{:.16e},{},{},{}", n + 1, time, code, monomer, length).map_err(&err)?;
    }
    out.flush().map_err(&err)?;
    Ok(())
}

/// `t,sigma_emp_1..d,sigma_theory_1..d,len,vel_emp,vel_theory`.
pub fn write_report_csv(
    path: &Path,
    grid: &[f64],
    growth: &GrowthComparison,
) -> Result<(), CliError> {
    let mut out = buffered(path)?;
    let err = io_at(path);
    let d = growth.sigma_theory.len();
    let mut header = String::from("t");
    for i in 1..=d {
        header.push_str(&format!(",sigma_emp_{i}"));
    }
    for i in 1..=d {
        header.push_str(&format!(",sigma_theory_{i}"));
    }
    header.push_str(",len,vel_emp,vel_theory");
    writeln!(out, "{header}").map_err(&err)?;
    for (g, &t) in grid.iter().enumerate() {
        let mut row = format!("{t}");
        for i in 0..d {
            row.push_str(&format!(",{}", growth.sigma_mean[g][i]));
        }
        for i in 0..d {
            row.push_str(&format!(",{}", growth.sigma_theory[i]));
        }
        row.push_str(&format!(
            ",{},{},{}",
            growth.mean_length[g], growth.velocity_mean[g], growth.velocity_theory
        ));
        writeln!(out, "{row}").map_err(&err)?;
    }
    out.flush().map_err(&err)?;
    Ok(())
}

/// `k,e_k,tip,provisional` with a 1-based tip label, empty at level zero.
pub fn write_boundary_csv(path: &Path, boundary: &BoundaryView) -> Result<(), CliError> {
    let mut out = buffered(path)?;
    let err = io_at(path);
    writeln!(out, "k,e_k,tip,provisional").map_err(&err)?;
    for level in &boundary.levels {
        let tip = level.tip.map_or(String::new(), |m| m.label().to_string());
        writeln!(
            out,
            "{},{},{},{}",
            level.level, level.jump_index, tip, level.provisional
        )
        .map_err(&err)?;
    }
    out.flush().map_err(&err)?;
    Ok(())
}

#[derive(Serialize)]
struct MatrixJson<'a> {
    rows: &'a [Option<Vec<f64>>],
    counts: &'a [u64],
}

/// `{rows, counts}` with `null` for rows that had no observed departures.
pub fn write_cone_json(path: &Path, matrix: &EmpiricalMatrix) -> Result<(), CliError> {
    let json = MatrixJson {
        rows: &matrix.rows,
        counts: &matrix.counts,
    };
    let mut text = serde_json::to_string_pretty(&json)
        .map_err(|e| CliError::Internal(format!("matrix serialization: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_at(path))?;
    Ok(())
}

/// `replica,root_occupation,root_mass_theory` for recurrent-regime runs.
pub fn write_root_csv(path: &Path, root: &RootOccupationComparison) -> Result<(), CliError> {
    let mut out = buffered(path)?;
    let err = io_at(path);
    writeln!(out, "replica,root_occupation,root_mass_theory").map_err(&err)?;
    for (i, occupation) in root.per_replica.iter().enumerate() {
        writeln!(out, "{},{},{}", i + 1, occupation, root.theory).map_err(&err)?;
    }
    out.flush().map_err(&err)?;
    Ok(())
}

#[derive(Serialize)]
struct AnalyzeJson<'a> {
    alpha: f64,
    regime: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    root_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    escape: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_bar: Option<&'a [f64]>,
    #[serde(rename = "v", skip_serializing_if = "Option::is_none")]
    velocity: Option<f64>,
    #[serde(rename = "v_bar", skip_serializing_if = "Option::is_none")]
    discrete_velocity: Option<f64>,
    #[serde(rename = "V", skip_serializing_if = "Option::is_none")]
    cone_matrix: Option<&'a [Vec<f64>]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    level_fractions: Option<&'a [f64]>,
    mean_holding: &'a [f64],
}

/// The stable JSON rendering of a [`TheorySummary`]; transient-only keys are
/// omitted in the recurrent regimes.
pub fn summary_json(summary: &TheorySummary) -> Result<String, CliError> {
    let transient = summary.transient.as_ref();
    let json = AnalyzeJson {
        alpha: summary.alpha,
        regime: summary.regime.as_str(),
        root_mass: summary.root_mass,
        m: transient.map(|t| t.m),
        escape: transient.map(|t| t.escape.as_slice()),
        sigma_bar: transient.map(|t| t.sigma_bar.as_slice()),
        velocity: transient.map(|t| t.velocity),
        discrete_velocity: transient.map(|t| t.discrete_velocity),
        cone_matrix: transient.map(|t| t.cone_matrix.as_slice()),
        level_fractions: transient.map(|t| t.level_fractions.as_slice()),
        mean_holding: &summary.mean_holding,
    };
    serde_json::to_string_pretty(&json)
        .map_err(|e| CliError::Internal(format!("summary serialization: {e}")))
}
