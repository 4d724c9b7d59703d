use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{DiscaError, Result};
use crate::sample::SampleMatrix;

/// Rows per aggregation block when weekly averaging is requested.
pub const WEEK: usize = 7;

fn csv_err(location: impl Into<String>, message: impl Into<String>) -> DiscaError {
    DiscaError::Csv {
        location: location.into(),
        message: message.into(),
    }
}

/// Reads the named columns of a headed, comma-separated numeric file.
///
/// With `weekly` set, consecutive blocks of seven rows are replaced by their
/// means and a trailing partial block is dropped.
pub fn load_csv(path: &Path, x_cols: &[String], y_cols: &[String], weekly: bool) -> Result<(SampleMatrix, SampleMatrix)> {
    let file = File::open(path).map_err(|e| DiscaError::Io(format!("{}: {e}", path.display())))?;
    read_csv(file, x_cols, y_cols, weekly)
}

/// [`load_csv`] over any reader.
pub fn read_csv<R: Read>(input: R, x_cols: &[String], y_cols: &[String], weekly: bool) -> Result<(SampleMatrix, SampleMatrix)> {
    if x_cols.is_empty() || y_cols.is_empty() {
        return Err(DiscaError::InvalidInput("x and y column lists must be nonempty".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| csv_err("header", e.to_string()))?
        .clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(csv_err("header", "file is empty"));
    }
    let index_of = |name: &String| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| csv_err("header", format!("missing column `{name}`")))
    };
    let xi: Vec<usize> = x_cols.iter().map(index_of).collect::<Result<_>>()?;
    let yi: Vec<usize> = y_cols.iter().map(index_of).collect::<Result<_>>()?;

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or_else(|| "unknown line".to_string(), |p| format!("line {}", p.line()));
            csv_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |c: usize| -> Result<f64> {
            let raw = record.get(c).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| csv_err(format!("line {line}, column `{}`", &headers[c]), format!("`{raw}` is not a number")))
        };
        for &c in &xi {
            xs.push(cell(c)?);
        }
        for &c in &yi {
            ys.push(cell(c)?);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(csv_err("line 2", "no data rows"));
    }
    let mut x = DMatrix::from_row_slice(rows, xi.len(), &xs);
    let mut y = DMatrix::from_row_slice(rows, yi.len(), &ys);
    if weekly {
        x = weekly_means(&x)?;
        y = weekly_means(&y)?;
    }
    Ok((SampleMatrix::new(x)?, SampleMatrix::new(y)?))
}

/// Means of consecutive non-overlapping 7-row blocks.
pub fn weekly_means(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let weeks = m.nrows() / WEEK;
    if weeks == 0 {
        return Err(DiscaError::InvalidInput(format!("{} rows do not fill a single week", m.nrows())));
    }
    Ok(DMatrix::from_fn(weeks, m.ncols(), |w, c| {
        m.view((w * WEEK, c), (WEEK, 1)).sum() / WEEK as f64
    }))
}
