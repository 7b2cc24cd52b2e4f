//! File output helpers: atomic writes and the CSV schemas for tables,
//! Husimi grids, and Ramsey scans. Floats are written with shortest
//! round-trip formatting, so re-reading a table reproduces the values
//! bit for bit.

use std::path::Path;

use xsqueeze_core::{HusimiGrid, SweepRow, SweepTable};

use crate::CliError;

/// Write to a sibling temp file, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("cannot move {} into place: {e}", tmp.display())))?;
    Ok(())
}

pub const SWEEP_HEADER: &str =
    "n_atoms,contrast,q_tilde,epsilon,xi2,xi2_corrected,gain_db,omega_over_chi";

fn opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.n_atoms,
            opt(row.contrast_target),
            opt(row.q_tilde),
            opt(row.epsilon),
            row.xi2,
            opt(row.xi2_corrected),
            row.gain_db,
            opt(row.omega_over_chi),
        ));
    }
    out
}

/// Parse a sweep CSV produced by [`sweep_csv`]; used by --resume.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == SWEEP_HEADER => {}
        other => {
            return Err(CliError::Io(format!(
                "resume file has unexpected header {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(CliError::Io(format!(
                "resume file row {} has {} fields",
                idx + 2,
                fields.len()
            )));
        }
        let parse_opt = |s: &str| -> Result<Option<f64>, CliError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>()
                    .map(Some)
                    .map_err(|e| CliError::Io(format!("resume file row {}: {e}", idx + 2)))
            }
        };
        let parse_f64 = |s: &str| -> Result<f64, CliError> {
            s.parse::<f64>()
                .map_err(|e| CliError::Io(format!("resume file row {}: {e}", idx + 2)))
        };
        rows.push(SweepRow {
            n_atoms: fields[0]
                .parse()
                .map_err(|e| CliError::Io(format!("resume file row {}: {e}", idx + 2)))?,
            contrast_target: parse_opt(fields[1])?,
            q_tilde: parse_opt(fields[2])?,
            epsilon: parse_opt(fields[3])?,
            xi2: parse_f64(fields[4])?,
            xi2_corrected: parse_opt(fields[5])?,
            gain_db: parse_f64(fields[6])?,
            omega_over_chi: parse_opt(fields[7])?,
        });
    }
    Ok(rows)
}

pub fn husimi_csv(grid: &HusimiGrid) -> String {
    let mut out = String::from("theta,phi,weight,value\n");
    for i in 0..grid.n_theta() {
        let weight = grid.node_weight(i);
        for j in 0..grid.n_phi() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                grid.theta[i],
                grid.phi[j],
                weight,
                grid.value(i, j)
            ));
        }
    }
    out
}
