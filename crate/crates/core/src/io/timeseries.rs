use std::path::Path;

use ndarray::Array2;

use super::{format_real, SignalMatrix};
use crate::error::{ParseError, Result};

/// Reads a time-series CSV: a header of node names, then one row of `N` reals
/// per sample.
pub fn read_timeseries_csv(path: impl AsRef<Path>) -> Result<SignalMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_timeseries_csv(&text)
}

/// Parses time-series CSV text. Row and column numbers in errors are 1-based
/// and count the header as row 1.
pub fn parse_timeseries_csv(text: &str) -> Result<SignalMatrix> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty.into());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = records
        .next()
        .ok_or(ParseError::Empty)?
        .map_err(ParseError::from)?;
    let names: Vec<String> = header.iter().map(str::to_owned).collect();
    let n = names.len();
    if n == 0 || names.iter().all(String::is_empty) {
        return Err(ParseError::NoColumns.into());
    }

    let mut values = Vec::new();
    let mut m = 0;
    for (idx, record) in records.enumerate() {
        let record = record.map_err(ParseError::from)?;
        let row = idx + 2;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != n {
            return Err(ParseError::Ragged {
                row,
                expected: n,
                found: record.len(),
            }
            .into());
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| ParseError::NotNumeric {
                row,
                col: c + 1,
                cell: cell.to_owned(),
            })?;
            if !v.is_finite() {
                return Err(ParseError::NonFinite { row, col: c + 1 }.into());
            }
            values.push(v);
        }
        m += 1;
    }
    if m == 0 {
        return Err(ParseError::NoRows.into());
    }
    let x = Array2::from_shape_vec((m, n), values).expect("row lengths checked");
    SignalMatrix::new(x, Some(names))
}

/// Writes the header (node names) and one line per sample, LF-terminated.
pub fn write_timeseries_csv(x: &SignalMatrix) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer
        .write_record(x.names_or_default())
        .map_err(ParseError::from)?;
    for row in x.values().rows() {
        writer
            .write_record(row.iter().map(|&v| format_real(v)))
            .map_err(ParseError::from)?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
