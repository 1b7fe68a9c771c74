use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{Complex, ComplexMatrix};

/// Column order of the bundled iris data.
pub const IRIS_COLUMNS: [&str; 4] = ["sepal_length", "sepal_width", "petal_length", "petal_width"];

const IRIS_CSV: &str = include_str!("../../data/iris.csv");

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CsvOptions {
    pub has_header: bool,
    /// Keep only the first rows.
    pub take_rows: Option<usize>,
    /// Scale each column to unit l2 norm (zero columns are left alone).
    pub normalize: bool,
}

/// Reads a CSV of real numbers, one sample per row.
pub fn load_csv_matrix(path: impl AsRef<Path>, options: CsvOptions) -> Result<ComplexMatrix> {
    load_csv_str(&std::fs::read_to_string(path)?, options)
}

pub fn load_csv_str(text: &str, options: CsvOptions) -> Result<ComplexMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let values = record
            .iter()
            .map(|cell| {
                let x: f64 = cell
                    .parse()
                    .map_err(|_| Error::parse(line, format!("not a number: {cell:?}")))?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(Error::parse(line, format!("non-finite value {cell:?}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != values.len() {
                return Err(Error::parse(
                    line,
                    format!("expected {} columns, got {}", first.len(), values.len()),
                ));
            }
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::parse(1, "no data rows"));
    }
    if let Some(take) = options.take_rows {
        if take == 0 || take > rows.len() {
            return Err(Error::InvalidArgument(format!(
                "take_rows {take} but {} rows are available",
                rows.len()
            )));
        }
        rows.truncate(take);
    }
    let cols = rows[0].len();
    let mut m = ComplexMatrix::from_fn(rows.len(), cols, |r, c| Complex::new(rows[r][c], 0.0));
    if options.normalize {
        for c in 0..cols {
            let norm = (0..m.rows()).map(|r| m[(r, c)].norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                for r in 0..m.rows() {
                    m[(r, c)] /= norm;
                }
            }
        }
    }
    Ok(m)
}

/// The bundled iris measurements (150 samples, columns [`IRIS_COLUMNS`]).
pub fn iris(take_rows: Option<usize>) -> Result<ComplexMatrix> {
    load_csv_str(
        IRIS_CSV,
        CsvOptions {
            has_header: true,
            take_rows,
            normalize: false,
        },
    )
}
