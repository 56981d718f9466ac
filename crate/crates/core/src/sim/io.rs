//! CSV input of samples and CSV output of experiment tables.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::data::SampleMatrix;
use crate::error::{Error, Result};
use crate::sim::ExperimentResult;

/// Reads one observation per row. A first row containing any non-numeric cell is taken
/// as a header and skipped. Rows and columns in errors are 1-based file positions.
pub fn read_sample_csv(path: &Path, expected_columns: Option<usize>) -> Result<SampleMatrix> {
    let file = File::open(path).map_err(|e| Error::DataFile(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut values = Vec::new();
    let mut width: Option<usize> = expected_columns;
    let mut n = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Data {
            row,
            col: 0,
            msg: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if idx == 0 && record.iter().any(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                return Err(Error::Data {
                    row,
                    col: record.len().min(w) + 1,
                    msg: format!("expected {w} columns, found {}", record.len()),
                })
            }
            None => width = Some(record.len()),
            _ => {}
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Data {
                row,
                col: c + 1,
                msg: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Data {
                    row,
                    col: c + 1,
                    msg: format!("'{cell}' is not finite"),
                });
            }
            values.push(v);
        }
        n += 1;
    }
    let d = width.unwrap_or(0);
    if n < 2 {
        return Err(Error::DataFile(format!(
            "{}: need at least 2 observations, found {n}",
            path.display()
        )));
    }
    SampleMatrix::new(n, d, values)
}

fn real(v: f64) -> String {
    format!("{v:.6}")
}

fn rate(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v == 1.0 {
        "1".into()
    } else {
        real(v)
    }
}

pub const RESULT_COLUMNS: [&str; 11] = [
    "example",
    "family",
    "gamma",
    "n",
    "p",
    "q",
    "param",
    "delta",
    "rejection_rate",
    "trials",
    "seed",
];

/// One row per cell. Reals carry 6 decimals; rates of exactly 0 or 1 print as `0`/`1`.
pub fn write_results_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    let io_err = |e: std::io::Error| Error::DataFile(format!("{}: {e}", path.display()));
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let csv_err = |e: csv::Error| Error::DataFile(format!("{}: {e}", path.display()));
        w.write_record(RESULT_COLUMNS).map_err(csv_err)?;
        for c in &result.cells {
            w.write_record([
                c.example.name().to_string(),
                c.family.name().to_string(),
                real(c.gamma),
                c.n.to_string(),
                c.p.to_string(),
                c.q.map(|q| q.to_string()).unwrap_or_default(),
                real(c.param),
                real(c.delta),
                rate(c.rejection_rate),
                c.trials.to_string(),
                c.seed.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(io_err)?;
    }
    File::create(path).and_then(|mut f| f.write_all(&out)).map_err(io_err)
}
