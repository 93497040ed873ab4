//! CSV ingestion and fixed-precision numeric output.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Price-to-observation transform applied at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    None,
    LogReturn,
    LogReturnX100,
}

impl Transform {
    pub fn as_str(self) -> &'static str {
        match self {
            Transform::None => "none",
            Transform::LogReturn => "log_return",
            Transform::LogReturnX100 => "log_return_x100",
        }
    }

    /// Applies the transform; return transforms need at least two positive prices.
    pub fn apply(self, raw: &[f64]) -> Result<Vec<f64>> {
        let scale = match self {
            Transform::None => return Ok(raw.to_vec()),
            Transform::LogReturn => 1.0,
            Transform::LogReturnX100 => 100.0,
        };
        if raw.len() < 2 {
            return Err(Error::Data(format!("{} needs at least 2 rows, got {}", self.as_str(), raw.len())));
        }
        if let Some(i) = raw.iter().position(|&p| p <= 0.0) {
            return Err(Error::Data(format!("non-positive price {} at row {i}", raw[i])));
        }
        Ok(raw.windows(2).map(|w| scale * (w[1].ln() - w[0].ln())).collect())
    }
}

impl std::fmt::Display for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Transform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Transform::None),
            "log_return" => Ok(Transform::LogReturn),
            "log_return_x100" => Ok(Transform::LogReturnX100),
            _ => Err(Error::InvalidArgument(format!(
                "unknown transform '{s}' (expected none, log_return or log_return_x100)"
            ))),
        }
    }
}

/// Column selector: a header name or a zero-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl Default for Column {
    fn default() -> Self {
        Column::Index(0)
    }
}

impl FromStr for Column {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    /// Chronological and finite.
    pub observations: Vec<f64>,
    pub transform: Transform,
    pub source: Option<PathBuf>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Shortest text with 17 significant digits; parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_cell(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Reads one numeric column. A first row is treated as a header when the
/// selected cell is not numeric; rows are reported one-based as in the file.
pub fn ingest_csv(path: &Path, column: &Column, transform: Transform) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
    let mut records = rdr.records().enumerate().peekable();

    let mut idx = match column {
        Column::Index(i) => Some(*i),
        Column::Name(_) => None,
    };
    if let Some((_, first)) = records.peek() {
        let first = first.as_ref().map_err(|e| Error::Data(format!("row 1: {e}")))?;
        let probe = idx.unwrap_or(0);
        let is_header = first.get(probe).map(|c| parse_cell(c).is_none()).unwrap_or(true)
            || matches!(column, Column::Name(_));
        if is_header {
            if let Column::Name(name) = column {
                idx = Some(first.iter().position(|h| h.trim() == name).ok_or_else(|| {
                    Error::Data(format!("column '{name}' not found in header of {}", path.display()))
                })?);
            }
            records.next();
        }
    }
    let idx = idx.ok_or_else(|| Error::Data(format!("{} is empty", path.display())))?;

    let mut raw = Vec::new();
    for (i, rec) in records {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Data(format!("row {row}: {e}")))?;
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let cell = rec
            .get(idx)
            .ok_or_else(|| Error::Data(format!("row {row}: column {idx} missing")))?;
        raw.push(parse_cell(cell).ok_or_else(|| Error::Data(format!("row {row}: non-numeric cell '{cell}'")))?);
    }
    if raw.is_empty() {
        return Err(Error::Data(format!("{}: no observations", path.display())));
    }
    let observations = transform.apply(&raw)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Dataset { name, observations, transform, source: Some(path.to_path_buf()) })
}

/// Writes a single named column with [`fmt_f64`] formatting.
pub fn write_series<W: Write>(w: W, header: &str, values: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([header])?;
    for &x in values {
        wtr.write_record([fmt_f64(x)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes several equal-length columns with [`fmt_f64`] formatting.
pub fn write_columns<W: Write>(w: W, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    let n = columns.first().map_or(0, |c| c.len());
    if headers.len() != columns.len() || columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument("column lengths or header count disagree".into()));
    }
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(headers)?;
    for i in 0..n {
        wtr.write_record(columns.iter().map(|c| fmt_f64(c[i])))?;
    }
    wtr.flush()?;
    Ok(())
}
