//! CSV emission. Numbers are written in scientific notation with 13
//! significant digits so files round-trip losslessly and are byte-identical
//! across runs of the same configuration.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hilbert::FockBasis;
use crate::propagate::Trajectory;

pub fn format_sci(x: f64) -> String {
    format!("{:.12e}", x)
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format_sci(*x)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| Error::Config(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

pub fn trajectory_header(basis: FockBasis) -> Vec<String> {
    let mut header = vec!["time".to_string()];
    for idx in 0..basis.dimension() {
        let (j, n) = basis.level_photon(idx).expect("index in range");
        header.push(format!("pop_{j}{n}"));
    }
    header.push("norm".to_string());
    header
}

pub fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.times
        .iter()
        .zip(traj.populations.iter())
        .zip(traj.norms.iter())
        .map(|((t, pops), norm)| {
            let mut row = Vec::with_capacity(pops.len() + 2);
            row.push(*t);
            row.extend_from_slice(pops);
            row.push(*norm);
            row
        })
        .collect()
}

pub fn write_trajectory(path: &Path, basis: FockBasis, traj: &Trajectory) -> Result<()> {
    write_csv(path, &trajectory_header(basis), &trajectory_rows(traj))
}
