//! Daily closing-price series read from CSV.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::SeriesError;

#[derive(Clone, Debug, PartialEq)]
pub struct PriceSeries {
    /// Present when the source had a date column.
    pub dates: Option<Vec<NaiveDate>>,
    pub closes: Vec<f64>,
}

impl PriceSeries {
    /// Series without dates.
    pub fn from_closes(closes: Vec<f64>) -> Self {
        PriceSeries {
            dates: None,
            closes,
        }
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    pub fn require_len(&self, required: usize) -> Result<(), SeriesError> {
        if self.len() < required {
            Err(SeriesError::TooShort {
                len: self.len(),
                required,
            })
        } else {
            Ok(())
        }
    }

    pub fn date(&self, index: usize) -> Option<NaiveDate> {
        self.dates.as_ref().map(|d| d[index])
    }
}

/// Column names and optional date range.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSpec {
    /// `None` reads closes only and keeps file order.
    pub date_column: Option<String>,
    pub close_column: String,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        SeriesSpec {
            date_column: Some("date".into()),
            close_column: "close".into(),
            start: None,
            end: None,
        }
    }
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

pub fn load_series(path: &Path, spec: &SeriesSpec) -> Result<PriceSeries, SeriesError> {
    let file = File::open(path).map_err(|source| SeriesError::MissingFile {
        path: path.to_path_buf(),
        source,
    })?;
    parse_series(file, spec)
}

/// Reads a headed CSV. Rows are sorted by date when a date column is used,
/// then restricted to the inclusive `start..=end` range. Errors name the
/// 1-based line of the offending row.
pub fn parse_series<R: Read>(reader: R, spec: &SeriesSpec) -> Result<PriceSeries, SeriesError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| SeriesError::MissingColumn(name.to_string()))
    };
    let close_idx = column(&spec.close_column)?;
    let date_idx = spec.date_column.as_deref().map(column).transpose()?;

    let mut rows: Vec<(Option<NaiveDate>, f64)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let raw = record.get(close_idx).unwrap_or("");
        let close: f64 = raw.parse().map_err(|_| SeriesError::NonNumericClose {
            row,
            value: raw.to_string(),
        })?;
        if !(close > 0.0) || !close.is_finite() {
            return Err(SeriesError::NonPositiveClose { row, value: close });
        }
        let date = match date_idx {
            Some(i) => {
                let raw = record.get(i).unwrap_or("");
                Some(parse_date(raw).ok_or_else(|| SeriesError::InvalidDate {
                    row,
                    value: raw.to_string(),
                })?)
            }
            None => None,
        };
        rows.push((date, close));
    }

    if date_idx.is_some() {
        rows.sort_by_key(|r| r.0);
        rows.retain(|(d, _)| {
            let d = d.expect("dated rows");
            spec.start.is_none_or(|s| d >= s) && spec.end.is_none_or(|e| d <= e)
        });
    }
    let closes = rows.iter().map(|r| r.1).collect();
    let dates = date_idx.map(|_| rows.iter().map(|r| r.0.expect("dated rows")).collect());
    Ok(PriceSeries { dates, closes })
}
