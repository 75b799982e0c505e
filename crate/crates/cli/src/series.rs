//! Series ingestion from CSV.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};

use crate::error::{DataError, DataResult};

/// Values treated as missing observations.
pub const MISSING_MARKERS: [&str; 3] = [".", "", "NA"];
/// Share of unparseable rows tolerated before ingestion fails.
pub const DEFAULT_MAX_INVALID_SHARE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frequency {
    Monthly,
    Daily,
    Irregular,
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frequency::Monthly => "monthly",
            Frequency::Daily => "daily",
            Frequency::Irregular => "irregular",
        })
    }
}

impl FromStr for Frequency {
    type Err = DataError;

    fn from_str(s: &str) -> DataResult<Self> {
        match s {
            "monthly" => Ok(Frequency::Monthly),
            "daily" => Ok(Frequency::Daily),
            "irregular" => Ok(Frequency::Irregular),
            _ => Err(DataError::Invalid(format!("unknown frequency '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFrame {
    pub name: String,
    pub timestamps: Option<Vec<NaiveDate>>,
    pub values: Vec<f64>,
    pub frequency: Frequency,
}

impl SeriesFrame {
    pub fn from_values(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            timestamps: None,
            values,
            frequency: Frequency::Irregular,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Guess the sampling frequency from consecutive dates.
pub fn infer_frequency(dates: &[NaiveDate]) -> Frequency {
    if dates.len() < 2 {
        return Frequency::Irregular;
    }
    let monthly = dates.windows(2).all(|w| {
        let months = (w[1].year() - w[0].year()) * 12 + w[1].month() as i32 - w[0].month() as i32;
        months == 1 && w[1].day() == w[0].day()
    });
    if monthly {
        return Frequency::Monthly;
    }
    // trading days: gaps of at most a long weekend
    let daily = dates.windows(2).all(|w| (1..=4).contains(&(w[1] - w[0]).num_days()));
    if daily {
        Frequency::Daily
    } else {
        Frequency::Irregular
    }
}

/// A column picked by header name or 0-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl FromStr for ColumnRef {
    type Err = DataError;

    fn from_str(s: &str) -> DataResult<Self> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSpec {
    /// Date column; `None` reads values only.
    pub date: Option<ColumnRef>,
    pub value: ColumnRef,
    pub max_invalid_share: f64,
}

impl Default for ColumnSpec {
    /// Dates in the first column, values in the second.
    fn default() -> Self {
        Self {
            date: Some(ColumnRef::Index(0)),
            value: ColumnRef::Index(1),
            max_invalid_share: DEFAULT_MAX_INVALID_SHARE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub frame: SeriesFrame,
    pub dropped_missing: usize,
    /// 1-based file line numbers of rows that could not be parsed.
    pub invalid_lines: Vec<usize>,
}

fn resolve(headers: &csv::StringRecord, col: &ColumnRef) -> DataResult<usize> {
    match col {
        ColumnRef::Index(i) if *i < headers.len() => Ok(*i),
        ColumnRef::Index(i) => Err(DataError::Ingest {
            message: format!("column {i} does not exist ({} columns)", headers.len()),
            lines: vec![1],
        }),
        ColumnRef::Name(n) => headers
            .iter()
            .position(|h| h.trim() == n)
            .ok_or_else(|| DataError::Ingest {
                message: format!("no column named '{n}'"),
                lines: vec![1],
            }),
    }
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(&format!("{s}-01"), "%Y-%m-%d"))
        .ok()
}

/// Parse a headed CSV from any reader.
pub fn read_series_from(reader: impl Read, name: &str, spec: &ColumnSpec) -> DataResult<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let vcol = resolve(&headers, &spec.value)?;
    let dcol = spec.date.as_ref().map(|c| resolve(&headers, c)).transpose()?;

    let mut values = Vec::new();
    let mut dates = Vec::new();
    let mut dropped_missing = 0;
    let mut invalid_lines = Vec::new();
    let mut rows = 0usize;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        rows += 1;
        let rec = match rec {
            Ok(r) => r,
            Err(_) => {
                invalid_lines.push(line);
                continue;
            }
        };
        let raw = rec.get(vcol).map(str::trim);
        if raw.is_some_and(|v| MISSING_MARKERS.contains(&v)) {
            dropped_missing += 1;
            continue;
        }
        let value = raw.and_then(|v| v.parse::<f64>().ok()).filter(|v| v.is_finite());
        let date = match dcol {
            Some(c) => rec.get(c).and_then(parse_date).map(Some),
            None => Some(None),
        };
        match (value, date) {
            (Some(v), Some(d)) => {
                values.push(v);
                if let Some(d) = d {
                    dates.push(d);
                }
            }
            _ => invalid_lines.push(line),
        }
    }
    if invalid_lines.len() as f64 > spec.max_invalid_share * rows as f64 {
        return Err(DataError::Ingest {
            message: format!("{} of {rows} rows could not be parsed", invalid_lines.len()),
            lines: invalid_lines,
        });
    }
    let timestamps = if dcol.is_some() {
        if let Some(k) = dates.windows(2).position(|w| w[1] <= w[0]) {
            return Err(DataError::Ingest {
                message: format!("dates not strictly increasing at {} -> {}", dates[k], dates[k + 1]),
                lines: vec![],
            });
        }
        Some(dates)
    } else {
        None
    };
    let frequency = timestamps.as_deref().map_or(Frequency::Irregular, infer_frequency);
    Ok(Ingested {
        frame: SeriesFrame {
            name: name.to_string(),
            timestamps,
            values,
            frequency,
        },
        dropped_missing,
        invalid_lines,
    })
}

pub fn read_csv_series(path: &Path, spec: &ColumnSpec) -> DataResult<Ingested> {
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    read_series_from(std::fs::File::open(path)?, &name, spec)
}

/// Round-trip exact float formatting: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `date,value` (or `t,value` without timestamps) CSV text.
pub fn series_to_csv(frame: &SeriesFrame) -> String {
    let mut out = String::new();
    match &frame.timestamps {
        Some(ts) => {
            out.push_str("date,value\n");
            for (d, v) in ts.iter().zip(&frame.values) {
                out.push_str(&format!("{},{}\n", d.format("%Y-%m-%d"), fmt_f64(*v)));
            }
        }
        None => {
            out.push_str("t,value\n");
            for (i, v) in frame.values.iter().enumerate() {
                out.push_str(&format!("{},{}\n", i + 1, fmt_f64(*v)));
            }
        }
    }
    out
}
