//! CSV snapshots, metric series and JSON manifests.
//!
//! Snapshot files have header `x_center,y_center,value` and one row per
//! cell, `j`-major then `i`. Floats carry 17 significant digits so that
//! values round-trip exactly.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::{CenterField, MetricSeries};
use crate::error::{Error, Result};

pub const SNAPSHOT_HEADER: &str = "x_center,y_center,value";

/// Snapshot file name `<label>_<field>_t<time>.csv`.
pub fn snapshot_name(label: &str, field: &str, t: f64) -> String {
    format!("{label}_{field}_t{t}.csv")
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn create(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    File::create(path).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Parse {
            path: path.display().to_string(),
            line,
            reason: format!("{kind:?}"),
        },
    }
}

fn write_rows<R, I>(path: &Path, header: &[&str], rows: I) -> Result<usize>
where
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
    I: IntoIterator<Item = R>,
{
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    let mut count = 0;
    for row in rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
        count += 1;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(count)
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a cell-center field; returns `(data rows, columns)`.
pub fn write_center_csv(path: &Path, field: &CenterField) -> Result<(usize, usize)> {
    let g = *field.grid();
    let n = g.n();
    let rows = (0..g.num_cells()).map(|k| {
        let (i, j) = (k % n, k / n);
        let (x, y) = g.center(i, j);
        [sci(x), sci(y), sci(field.get(i, j))]
    });
    Ok((write_rows(path, &SNAPSHOT_HEADER.split(',').collect::<Vec<_>>(), rows)?, 3))
}

/// Writes `t,value` rows for a metric series.
pub fn write_series_csv(path: &Path, series: &MetricSeries) -> Result<(usize, usize)> {
    let rows = series.times.iter().zip(&series.values).map(|(t, v)| [sci(*t), sci(*v)]);
    Ok((write_rows(path, &["t", "value"], rows)?, 2))
}

/// Writes arbitrary rows under a header; every row must match the header width.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(usize, usize)> {
    debug_assert!(rows.iter().all(|r| r.len() == header.len()));
    Ok((write_rows(path, header, rows)?, header.len()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parsed numeric CSV: header names and rows of floats.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Reads a numeric CSV, rejecting ragged or non-numeric rows with the line number.
pub fn read_numeric_csv(path: &Path) -> Result<NumericTable> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| csv_error(path, e))?.iter().map(String::from).collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            reason: "missing header".into(),
        });
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line,
                reason: "non-numeric field".into(),
            })?;
        rows.push(row);
    }
    Ok(NumericTable { header, rows })
}

/// A file written by a run, with its declared shape.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub rows: usize,
    pub columns: usize,
}
