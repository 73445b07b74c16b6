//! Output directory layout: `report.json`, `collar.csv`, `slices.csv`,
//! `profile.csv`, `junctions.json`.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::build::{Extension, RunReport};
use super::verify::{CollarData, ExtensionData, ExtensionParams};
use crate::error::{Error, Result};
use crate::rotsym::RadialProfile;
use crate::sphere::{AxisymMetric, PolarGrid};
use crate::table;

pub const REPORT: &str = "report.json";
pub const COLLAR: &str = "collar.csv";
pub const SLICES: &str = "slices.csv";
pub const PROFILE: &str = "profile.csv";
pub const JUNCTIONS: &str = "junctions.json";

pub fn write_json<T: Serialize, P: AsRef<Path>>(value: &T, path: P) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn write_report<P: AsRef<Path>>(dir: P, run: &RunReport) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_json(run, dir.join(REPORT))
}

pub fn write_extension<P: AsRef<Path>>(dir: P, ext: &Extension, run: &RunReport) -> Result<()> {
    let dir = dir.as_ref();
    write_report(dir, run)?;
    ext.collar.write_collar_csv(dir.join(COLLAR))?;
    ext.collar.write_slices_csv(dir.join(SLICES))?;
    ext.attached.profile.write_csv(dir.join(PROFILE))?;
    write_json(&ext.attached.report, dir.join(JUNCTIONS))
}

/// Parameters block of a `report.json`.
pub fn read_params<P: AsRef<Path>>(path: P) -> Result<ExtensionParams> {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let p = v
        .get("params")
        .filter(|p| !p.is_null())
        .ok_or_else(|| Error::Format("report has no `params` block".into()))?;
    Ok(serde_json::from_value(p.clone())?)
}

/// Groups `t,theta,v,q,p` rows into time slices on a common polar grid.
pub fn read_collar<P: AsRef<Path>>(path: P) -> Result<CollarData> {
    let c = table::read_columns(path, &["t", "theta", "v", "q", "p"])?;
    let rows = c[0].len();
    let mut starts = vec![0];
    for i in 1..rows {
        if c[0][i] != c[0][i - 1] {
            starts.push(i);
        }
    }
    let n = if starts.len() > 1 { starts[1] } else { rows };
    if n == 0 || rows % n != 0 || starts.len() != rows / n {
        return Err(Error::Format("collar rows do not form equal time slices".into()));
    }
    let grid = PolarGrid::new(n)?;
    let dev = (0..rows).map(|i| (c[1][i] - grid.theta()[i % n]).abs()).fold(0.0, f64::max);
    if dev > 1e-12 {
        return Err(Error::GridMismatch(format!("collar theta column deviates from the polar grid by {dev:e}")));
    }
    let mut out = CollarData { t: Vec::new(), v: Vec::new(), slices: Vec::new() };
    for &s in &starts {
        let r = s..s + n;
        out.t.push(c[0][s]);
        out.v.push(c[2][r.clone()].to_vec());
        out.slices.push(AxisymMetric::new(&grid, c[3][r.clone()].to_vec(), c[4][r].to_vec())?);
    }
    Ok(out)
}

/// Loads a dumped extension; `collar.csv` is optional (profile-only data).
pub fn read_extension<P: AsRef<Path>>(dir: P) -> Result<ExtensionData> {
    let dir = dir.as_ref();
    let params = read_params(dir.join(REPORT))?;
    let collar_path = dir.join(COLLAR);
    let collar = if collar_path.exists() { Some(read_collar(collar_path)?) } else { None };
    let profile = RadialProfile::read_csv(dir.join(PROFILE), 2, params.q_o)?;
    Ok(ExtensionData { params, collar, profile })
}
