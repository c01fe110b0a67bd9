//! Plot-ready writers: CSV with a fixed header row, and JSON.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use defect_fields::FieldGrid;
use serde::Serialize;

use crate::error::CliError;

/// Locale-independent float with 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".to_string()
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Rows of named columns.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::io(path, e.into());
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| num(v))).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One row per node: `i,j,k,x1,x2,x3,<components>,flag`; flagged rows carry `nan`.
pub fn write_grid_csv(path: &Path, field: &FieldGrid) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::io(path, e.into());
    let grid = field.grid();
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["i", "j", "k", "x1", "x2", "x3"];
    header.extend_from_slice(field.rank().component_names());
    header.push("flag");
    w.write_record(&header).map_err(io)?;
    for p in 0..grid.len() {
        let ijk = grid.ijk(p);
        let x = grid.point_at(p);
        let mut rec: Vec<String> = ijk.iter().map(|v| v.to_string()).collect();
        rec.extend((0..3).map(|a| num(x[a])));
        rec.extend(field.at(p).iter().map(|&v| num(v)));
        rec.push(if field.is_flagged(p) { "1" } else { "0" }.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct GridJson<'a> {
    provenance: &'a str,
    rank: &'a str,
    origin: [f64; 3],
    spacing: f64,
    dims: [usize; 3],
    components: &'a [&'a str],
    /// Point-major values; flagged points are `null`.
    values: Vec<Option<f64>>,
    flags: &'a [bool],
}

pub fn write_grid_json(path: &Path, field: &FieldGrid) -> Result<(), CliError> {
    let g = field.grid();
    let doc = GridJson {
        provenance: field.provenance(),
        rank: field.rank().name(),
        origin: g.origin(),
        spacing: g.spacing(),
        dims: g.dims(),
        components: field.rank().component_names(),
        values: field.values().iter().map(|v| v.is_finite().then_some(*v)).collect(),
        flags: field.flags(),
    };
    write_json(path, &doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::TAU, -1.2345678901234567e-300, 4.9e-324] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert!(!s.contains(','));
        }
        assert_eq!(num(f64::NAN), "nan");
    }
}
