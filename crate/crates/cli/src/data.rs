//! Comma-separated tables with a mandatory header.

use std::path::Path;

use crate::error::{CliError, Result};
use crate::json::sig17;

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Source line of each row.
    pub lines: Vec<u64>,
}

/// Reads a table; `None` for a file with no header at all.
pub fn read_table(path: &Path) -> Result<Option<Table>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() {
        return Ok(None);
    }
    if let Some(k) = header.iter().position(String::is_empty) {
        return Err(CliError::data(path, 1, format!("column {} has an empty name", k + 1)));
    }
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(CliError::data(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let row = record
            .iter()
            .zip(&header)
            .map(|(cell, name)| parse_cell(cell, name).map_err(|m| CliError::data(path, line, m)))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
        lines.push(line);
    }
    Ok(Some(Table { header, rows, lines }))
}

fn parse_cell(cell: &str, column: &str) -> std::result::Result<f64, String> {
    if cell.is_empty() {
        return Err(format!("missing value in column {column}"));
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("non-finite value '{cell}' in column {column}")),
        Err(_) => Err(format!("cannot parse '{cell}' in column {column} as a number")),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        csv::ErrorKind::Utf8 { .. } => CliError::data(path, line, "invalid UTF-8"),
        other => CliError::data(path, line, format!("{other:?}")),
    }
}

/// Number of leading columns named `{prefix}_1, {prefix}_2, …`.
pub fn prefix_run(header: &[String], start: usize, prefix: &str) -> usize {
    header[start..]
        .iter()
        .enumerate()
        .take_while(|(k, name)| **name == format!("{prefix}_{}", k + 1))
        .count()
}

/// Splits a training header `x_1..x_d, y_1..y_n` into `(d, n)`.
pub fn training_layout(path: &Path, header: &[String]) -> Result<(usize, usize)> {
    let d = prefix_run(header, 0, "x");
    let n = prefix_run(header, d, "y");
    if d == 0 || n == 0 || d + n != header.len() {
        return Err(CliError::data(
            path,
            1,
            format!(
                "header must be x_1..x_d followed by y_1..y_n, got '{}'",
                header.join(",")
            ),
        ));
    }
    Ok((d, n))
}

/// Copies every input column and appends `f_1..f_n`.
pub fn write_predictions(path: &Path, table: Option<&Table>, n: usize, predictions: &[Vec<f64>]) -> Result<()> {
    let Some(table) = table else {
        return std::fs::write(path, b"").map_err(|e| CliError::io(path, e));
    };
    let mut out = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = table.header.clone();
    header.extend((1..=n).map(|k| format!("f_{k}")));
    out.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (row, pred) in table.rows.iter().zip(predictions) {
        out.write_record(row.iter().chain(pred).map(|v| sig17(*v)))
            .map_err(|e| csv_error(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}
