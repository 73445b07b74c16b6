//! Metric import/export: `theta,q,p` and `theta,w` with a sidecar holding r_o.

use std::fs;
use std::path::{Path, PathBuf};

use super::conformal::ConformalData;
use super::grid::PolarGrid;
use super::metric::AxisymMetric;
use crate::error::{Error, Result};
use crate::table;

/// Samples must sit on the Gauss nodes of some [`PolarGrid`].
fn grid_for(theta: &[f64]) -> Result<PolarGrid> {
    let g = PolarGrid::new(theta.len())?;
    let dev = g
        .theta()
        .iter()
        .zip(theta)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if dev > 1e-12 {
        return Err(Error::GridMismatch(format!(
            "theta column is not the {}-node polar grid (max deviation {dev:e})",
            theta.len()
        )));
    }
    Ok(g)
}

pub fn write_metric<P: AsRef<Path>>(m: &AxisymMetric, path: P) -> Result<()> {
    let rows: Vec<Vec<f64>> = (0..m.len())
        .map(|i| vec![m.grid.theta()[i], m.q[i], m.p[i]])
        .collect();
    table::write_numeric(path, &["theta", "q", "p"], &rows)
}

pub fn read_metric<P: AsRef<Path>>(path: P) -> Result<AxisymMetric> {
    let mut c = table::read_columns(path, &["theta", "q", "p"])?;
    let p = c.pop().unwrap();
    let q = c.pop().unwrap();
    let g = grid_for(&c[0])?;
    AxisymMetric::new(&g, q, p)
}

/// Sidecar path `<file>.r_o`.
pub fn radius_sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".r_o");
    PathBuf::from(s)
}

pub fn write_conformal<P: AsRef<Path>>(cd: &ConformalData, path: P) -> Result<()> {
    let path = path.as_ref();
    let rows: Vec<Vec<f64>> = (0..cd.w.len())
        .map(|i| vec![cd.grid.theta()[i], cd.w[i]])
        .collect();
    table::write_numeric(path, &["theta", "w"], &rows)?;
    fs::write(radius_sidecar(path), format!("{}\n", table::fmt(cd.r_o)))?;
    Ok(())
}

/// Reads `theta,w`; r_o comes from the sidecar unless given explicitly.
pub fn read_conformal<P: AsRef<Path>>(path: P, r_o: Option<f64>) -> Result<ConformalData> {
    let path = path.as_ref();
    let c = table::read_columns(path, &["theta", "w"])?;
    let g = grid_for(&c[0])?;
    let r_o = match r_o {
        Some(r) => r,
        None => fs::read_to_string(radius_sidecar(path))?
            .trim()
            .parse()
            .map_err(|e| Error::Format(format!("r_o sidecar: {e}")))?,
    };
    ConformalData::new(&g, c[1].clone(), r_o)
}
