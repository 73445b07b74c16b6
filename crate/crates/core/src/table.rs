//! Numeric CSV tables. Floats are written with 17 significant digits so a
//! dump reloads bit-exactly.

use std::path::Path;

use crate::error::{Error, Result};

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header and rows of already formatted cells.
pub fn write<P: AsRef<Path>>(path: P, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_numeric<P: AsRef<Path>>(path: P, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(|v| fmt(*v)).collect())
        .collect();
    write(path, header, &rows)
}

/// Header plus raw string cells.
pub fn read<P: AsRef<Path>>(path: P) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header = r.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_owned).collect());
    }
    Ok((header, rows))
}

/// Reads the named numeric columns, in the order requested.
pub fn read_columns<P: AsRef<Path>>(path: P, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let (header, rows) = read(path)?;
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::Format(format!("missing column `{n}`")))
        })
        .collect::<Result<_>>()?;
    let mut cols = vec![Vec::with_capacity(rows.len()); names.len()];
    for (line, row) in rows.iter().enumerate() {
        for (c, &i) in idx.iter().enumerate() {
            let v: f64 = row
                .get(i)
                .ok_or_else(|| Error::Format(format!("short row {}", line + 2)))?
                .parse()
                .map_err(|e| Error::Format(format!("row {}: {e}", line + 2)))?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}
