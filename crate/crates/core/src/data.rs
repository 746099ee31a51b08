//! CSV input and output.
//!
//! Input files have a header row and numeric columns only. One column may
//! be named as the response; all others are predictors in file order.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;

use crate::interface::PointSummary;
use crate::Error;

/// Predictors, with the response split off when one was requested.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub predictor_names: Vec<String>,
    pub x: Array2<f64>,
    pub y: Option<Vec<f64>>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }
}

/// Reads a dataset. A response name missing from the header is a usage
/// error.
pub fn read_dataset(path: &Path, response: Option<&str>) -> Result<Dataset, Error> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let y_col = match response {
        Some(name) => Some(header.iter().position(|h| h == name).ok_or_else(|| {
            Error::Usage(format!("response column `{name}` not found in {}", path.display()))
        })?),
        None => None,
    };
    let predictor_cols: Vec<usize> = (0..header.len()).filter(|&c| Some(c) != y_col).collect();
    let mut values = Vec::new();
    let mut y = Vec::new();
    let mut n = 0;
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |c: usize| -> Result<f64, Error> {
            let field = record.get(c).unwrap_or("");
            field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                Error::Data(format!(
                    "row {}: column `{}` holds `{field}`, not a finite number",
                    line + 1,
                    header[c]
                ))
            })
        };
        for &c in &predictor_cols {
            values.push(parse(c)?);
        }
        if let Some(c) = y_col {
            y.push(parse(c)?);
        }
        n += 1;
    }
    let x = Array2::from_shape_vec((n, predictor_cols.len()), values)
        .map_err(|e| Error::Shape(e.to_string()))?;
    Ok(Dataset {
        predictor_names: predictor_cols.iter().map(|&c| header[c].clone()).collect(),
        x,
        y: y_col.map(|_| y),
    })
}

/// Writes predictors `x1..xp` followed by the named extra columns.
pub fn write_dataset(path: &Path, x: &Array2<f64>, extra: &[(&str, &[f64])]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
    header.extend(extra.iter().map(|(name, _)| name.to_string()));
    w.write_record(&header)?;
    for (i, row) in x.rows().into_iter().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.extend(extra.iter().map(|(_, col)| col[i].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Posterior summary table: `point,mean,sd,lower,upper`.
pub fn write_summary(path: &Path, rows: &[PointSummary]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Appends `rows` to a report CSV, writing the header only when the file is
/// new or empty.
pub fn append_report<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), Error> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `rows` as CSV to any sink, header first.
pub fn write_report<T: Serialize, W: Write>(sink: W, rows: &[T]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
