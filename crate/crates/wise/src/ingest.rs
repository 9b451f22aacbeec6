//! Utilization series parsing and aggregation.
//!
//! Input is row-oriented: CSV with header
//! `machine_id,machine_type,metric,timestamp,rate`, or a JSON array of
//! objects with the same field names. Rows are grouped into one series per
//! (machine_id, metric); within a series timestamps must strictly increase
//! and every rate must lie in [0,100]. Parse errors carry the offending
//! line (CSV) or record number (JSON).
//!
//! Aggregation reduces a series to a single reading: `avg` is the
//! arithmetic mean, `p<k>` the nearest-rank percentile, the value at the
//! 1-based index ceil(k*n/100) of the sorted rates. Percentiles therefore
//! always return an observed sample.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scoring::ResourceReading;

pub const UTILIZATION_COLUMNS: [&str; 5] =
    ["machine_id", "machine_type", "metric", "timestamp", "rate"];

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("cannot read '{path}': {cause}")]
    Io { path: String, cause: String },
    #[error("header: {0}")]
    Header(String),
    #[error("line {line}: {problem}")]
    Row { line: u64, problem: String },
    #[error("document: {0}")]
    Document(String),
    #[error("no data rows")]
    NoRows,
    #[error("series {machine_id}/{metric} is empty")]
    EmptySeries { machine_id: String, metric: String },
    #[error("aggregation asks for metric '{requested}' but series holds '{actual}'")]
    MetricMismatch { requested: String, actual: String },
    #[error("bad aggregation '{0}' (expected avg or p1..p99)")]
    BadAggregation(String),
}

/// All samples of one metric on one machine, in time order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilizationSeries {
    pub machine_id: String,
    pub machine_type: String,
    pub metric: String,
    /// (epoch seconds, utilization percentage), timestamps strictly increasing.
    pub samples: Vec<(i64, f64)>,
}

impl UtilizationSeries {
    pub fn rates(&self) -> Vec<f64> {
        self.samples.iter().map(|(_, r)| *r).collect()
    }
}

/// How to reduce a series to one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AggregationKind {
    Avg,
    /// Nearest-rank percentile, k in 1..=99.
    Percentile(u8),
}

impl std::fmt::Display for AggregationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AggregationKind::Avg => f.write_str("avg"),
            AggregationKind::Percentile(k) => write!(f, "p{k}"),
        }
    }
}

impl std::str::FromStr for AggregationKind {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "avg" {
            return Ok(AggregationKind::Avg);
        }
        if let Some(digits) = s.strip_prefix('p') {
            if let Ok(k) = digits.parse::<u8>() {
                if (1..=99).contains(&k) && digits == k.to_string() {
                    return Ok(AggregationKind::Percentile(k));
                }
            }
        }
        Err(IngestError::BadAggregation(s.to_string()))
    }
}

/// A metric plus the statistic to take over it, e.g. cpu + p95.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregationRequest {
    pub metric: String,
    pub kind: AggregationKind,
}

impl AggregationRequest {
    /// Splits a spec name like "cpu/avg" or "disk/io/p95" at its last slash.
    pub fn from_spec_name(name: &str) -> Result<Self, IngestError> {
        let (metric, kind) = name
            .rsplit_once('/')
            .ok_or_else(|| IngestError::BadAggregation(name.to_string()))?;
        if metric.is_empty() {
            return Err(IngestError::BadAggregation(name.to_string()));
        }
        Ok(AggregationRequest {
            metric: metric.to_string(),
            kind: kind.parse()?,
        })
    }

    pub fn spec_name(&self) -> String {
        format!("{}/{}", self.metric, self.kind)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRow {
    machine_id: String,
    machine_type: String,
    metric: String,
    timestamp: i64,
    rate: f64,
}

fn group_rows(
    rows: impl Iterator<Item = Result<(u64, RawRow), IngestError>>,
) -> Result<Vec<UtilizationSeries>, IngestError> {
    let mut series: Vec<UtilizationSeries> = Vec::new();
    let mut machine_types: Vec<(String, String)> = Vec::new();
    let mut any = false;
    for item in rows {
        let (line, row) = item?;
        any = true;
        if !row.rate.is_finite() || !(0.0..=100.0).contains(&row.rate) {
            return Err(IngestError::Row {
                line,
                problem: format!("rate {} outside [0,100]", row.rate),
            });
        }
        match machine_types.iter().find(|(id, _)| *id == row.machine_id) {
            Some((_, known)) if *known != row.machine_type => {
                return Err(IngestError::Row {
                    line,
                    problem: format!(
                        "machine '{}' changes machine_type from '{}' to '{}'",
                        row.machine_id, known, row.machine_type
                    ),
                });
            }
            Some(_) => {}
            None => machine_types.push((row.machine_id.clone(), row.machine_type.clone())),
        }
        match series
            .iter_mut()
            .find(|s| s.machine_id == row.machine_id && s.metric == row.metric)
        {
            Some(existing) => {
                let last = existing.samples.last().map(|(t, _)| *t);
                if last.is_some_and(|t| row.timestamp <= t) {
                    return Err(IngestError::Row {
                        line,
                        problem: format!(
                            "timestamp {} not after previous sample for {}/{}",
                            row.timestamp, row.machine_id, row.metric
                        ),
                    });
                }
                existing.samples.push((row.timestamp, row.rate));
            }
            None => series.push(UtilizationSeries {
                machine_id: row.machine_id,
                machine_type: row.machine_type,
                metric: row.metric,
                samples: vec![(row.timestamp, row.rate)],
            }),
        }
    }
    if !any {
        return Err(IngestError::NoRows);
    }
    Ok(series)
}

/// Parses utilization CSV; series come back in first-appearance order.
pub fn parse_series_csv(text: &str) -> Result<Vec<UtilizationSeries>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IngestError::Header(e.to_string()))?
        .clone();
    for column in headers.iter() {
        if !UTILIZATION_COLUMNS.contains(&column) {
            return Err(IngestError::Header(format!("unknown column '{column}'")));
        }
    }
    let mut index = [0usize; 5];
    for (slot, needed) in index.iter_mut().zip(UTILIZATION_COLUMNS) {
        *slot = headers
            .iter()
            .position(|c| c == needed)
            .ok_or_else(|| IngestError::Header(format!("missing column '{needed}'")))?;
    }
    let rows = reader.into_records().map(|result| {
        let record = result.map_err(|e| match e.position() {
            Some(p) => IngestError::Row {
                line: p.line(),
                problem: e.to_string(),
            },
            None => IngestError::Document(e.to_string()),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |slot: usize| record.get(index[slot]).unwrap_or("");
        let timestamp: i64 = field(3).parse().map_err(|_| IngestError::Row {
            line,
            problem: format!("timestamp '{}' is not an integer", field(3)),
        })?;
        let rate: f64 = field(4).parse().map_err(|_| IngestError::Row {
            line,
            problem: format!("rate '{}' is not a number", field(4)),
        })?;
        Ok((
            line,
            RawRow {
                machine_id: field(0).to_string(),
                machine_type: field(1).to_string(),
                metric: field(2).to_string(),
                timestamp,
                rate,
            },
        ))
    });
    group_rows(rows)
}

/// Parses the JSON equivalent: an array of objects with the CSV field names.
/// Error positions count records, 1-based.
pub fn parse_series_json(text: &str) -> Result<Vec<UtilizationSeries>, IngestError> {
    let rows: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| IngestError::Document(e.to_string()))?;
    let rows = rows.into_iter().enumerate().map(|(i, value)| {
        let row: RawRow = serde_json::from_value(value).map_err(|e| IngestError::Row {
            line: i as u64 + 1,
            problem: e.to_string(),
        })?;
        Ok((i as u64 + 1, row))
    });
    group_rows(rows)
}

pub fn load_series(path: &std::path::Path) -> Result<Vec<UtilizationSeries>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        cause: e.to_string(),
    })?;
    if path.extension().is_some_and(|ext| ext == "json") {
        parse_series_json(&text)
    } else {
        parse_series_csv(&text)
    }
}

/// Renders series back into the canonical CSV, rates with 4 decimals.
pub fn series_to_csv(series: &[UtilizationSeries]) -> String {
    let mut out = String::from("machine_id,machine_type,metric,timestamp,rate\n");
    for s in series {
        for (timestamp, rate) in &s.samples {
            out.push_str(&format!(
                "{},{},{},{},{:.4}\n",
                s.machine_id, s.machine_type, s.metric, timestamp, rate
            ));
        }
    }
    out
}

/// Reduces a series to a reading named `<metric>/<kind>`.
///
/// The mean sums a value-sorted copy so aggregates are invariant under
/// sample reordering down to the last bit.
pub fn aggregate(
    series: &UtilizationSeries,
    request: &AggregationRequest,
) -> Result<ResourceReading, IngestError> {
    if series.metric != request.metric {
        return Err(IngestError::MetricMismatch {
            requested: request.metric.clone(),
            actual: series.metric.clone(),
        });
    }
    if series.samples.is_empty() {
        return Err(IngestError::EmptySeries {
            machine_id: series.machine_id.clone(),
            metric: series.metric.clone(),
        });
    }
    let mut rates = series.rates();
    rates.sort_by(|a, b| a.partial_cmp(b).expect("rates are finite"));
    let value = match request.kind {
        AggregationKind::Avg => rates.iter().sum::<f64>() / rates.len() as f64,
        AggregationKind::Percentile(k) => {
            let n = rates.len();
            let rank = (k as usize * n).div_ceil(100);
            rates[rank - 1]
        }
    };
    Ok(ResourceReading {
        name: request.spec_name(),
        rate: value,
    })
}
