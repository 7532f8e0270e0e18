//! CSV ingestion and output.

use std::fs::File;
use std::path::Path;

use covadmm::matrix::SymMatrix;
use covadmm::sim::DataMatrix;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Numeric CSV table. A first line with no numeric cell is taken to be a
/// header and skipped. Rows are numbered by their line in the file.
pub fn read_table(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(index as u64 + 1, |p| p.line());
            CliError::input(path, format!("row {line}: {e}"))
        })?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if index == 0 && record.iter().all(|cell| cell.parse::<f64>().is_err()) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CliError::input(
                path,
                format!("row {line} has {} fields, expected {expected}", record.len()),
            ));
        }
        let mut row = Vec::with_capacity(expected);
        for (col, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| {
                CliError::input(path, format!("row {line}, column {}: {cell:?} is not a number", col + 1))
            })?;
            if !value.is_finite() {
                return Err(CliError::input(
                    path,
                    format!("row {line}, column {}: {cell:?} is not finite", col + 1),
                ));
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::input(path, "no data rows"));
    }
    Ok(rows)
}

/// Observations, one per row.
pub fn read_data(path: &Path) -> CliResult<DataMatrix> {
    let rows = read_table(path)?;
    if rows.len() < 2 {
        return Err(CliError::input(path, format!("need at least 2 observations, got {}", rows.len())));
    }
    DataMatrix::from_rows(&rows).map_err(|e| CliError::input(path, e.to_string()))
}

/// Square symmetric matrix.
pub fn read_covariance(path: &Path) -> CliResult<SymMatrix> {
    let rows = read_table(path)?;
    let p = rows.len();
    if rows[0].len() != p {
        return Err(CliError::input(
            path,
            format!("covariance must be square, got {p} rows of {} columns", rows[0].len()),
        ));
    }
    SymMatrix::from_rows(&rows).map_err(|e| CliError::input(path, e.to_string()))
}

/// Scientific notation with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> CliResult<csv::Writer<File>> {
    let file = File::create(path).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Write {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

pub fn write_matrix(path: &Path, m: &SymMatrix) -> CliResult<()> {
    let mut w = writer(path)?;
    for j in 0..m.dim() {
        w.write_record(m.row(j).iter().map(|&v| format_float(v)))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_rows<R: Serialize>(path: &Path, rows: &[R]) -> CliResult<()> {
    let mut w = writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}
