//! Benchmark-based validation of score quality.
//!
//! Ground truth comes from measured performance alone: records whose latency
//! or duration exceeds Q3 + 1.5*IQR are dropped as overloaded outliers
//! (latency pass first, then duration), and of the survivors only those
//! within 3x the cheapest cost remain, sorted by cost. The predicted set
//! keeps machines that pass a score threshold and cost at most 2x the
//! cheapest passer, ordered best score first. The two lists meet in
//! precision/recall and rank-biased overlap.
//!
//! Quartiles are Tukey hinges: median of each half with the median itself
//! included in both halves when the count is odd. The filter pass on a
//! metric is skipped when fewer than four records remain, because hinges
//! below that size degenerate.

use std::collections::HashSet;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scoring::{classify, ClassificationThresholds, MachineScoreReport, Variant};

#[derive(Debug, Error, PartialEq)]
pub enum ValidationError {
    #[error("cannot read '{path}': {cause}")]
    Io { path: String, cause: String },
    #[error("header: {0}")]
    Header(String),
    #[error("line {line}: {problem}")]
    Row { line: u64, problem: String },
    #[error("no data rows")]
    NoRows,
    #[error("outlier filter needs at least 4 records, got {0}")]
    TooFewRecords(usize),
    #[error("no benchmark records")]
    NoRecords,
    #[error("every record was filtered out; no ground truth remains")]
    AllFiltered,
    #[error("ground truth is empty while predictions exist")]
    EmptyTruth,
    #[error("rank-biased overlap needs p strictly between 0 and 1, got {0}")]
    BadPersistence(f64),
    #[error("ranked list contains '{0}' twice")]
    DuplicateItem(String),
}

/// One benchmarked instance type: how the workload performed and what the
/// instance costs per hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub instance_type: String,
    pub duration: f64,
    pub latency: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub throughput: Option<f64>,
    pub cost: f64,
}

/// Which metric an outlier pass inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierMetric {
    Latency,
    Duration,
}

impl OutlierMetric {
    fn value(self, record: &BenchmarkRecord) -> f64 {
        match self {
            OutlierMetric::Latency => record.latency,
            OutlierMetric::Duration => record.duration,
        }
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Tukey hinges of a sorted slice: medians of the lower and upper halves,
/// with an odd-length input's median belonging to both halves.
fn tukey_hinges(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len();
    let half = n / 2;
    let (lower, upper) = if n % 2 == 0 {
        (&sorted[..half], &sorted[half..])
    } else {
        (&sorted[..=half], &sorted[half..])
    };
    (median(lower), median(upper))
}

/// Drops records whose metric exceeds Q3 + 1.5*IQR. Only the high side is
/// fenced; fast outliers are a virtue in a performance benchmark.
pub fn iqr_filter(
    records: &[BenchmarkRecord],
    metric: OutlierMetric,
) -> Result<Vec<BenchmarkRecord>, ValidationError> {
    if records.len() < 4 {
        return Err(ValidationError::TooFewRecords(records.len()));
    }
    let mut values: Vec<f64> = records.iter().map(|r| metric.value(r)).collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("metrics are finite"));
    let (q1, q3) = tukey_hinges(&values);
    let fence = q3 + 1.5 * (q3 - q1);
    Ok(records
        .iter()
        .filter(|r| metric.value(r) <= fence)
        .cloned()
        .collect())
}

/// Performance-only optimal list: outlier passes on latency then duration
/// (each skipped under 4 records), then the 3x cheapest-cost band, sorted by
/// ascending cost with ties broken by instance_type.
pub fn ground_truth(records: &[BenchmarkRecord]) -> Result<Vec<String>, ValidationError> {
    if records.is_empty() {
        return Err(ValidationError::NoRecords);
    }
    let mut survivors = records.to_vec();
    for metric in [OutlierMetric::Latency, OutlierMetric::Duration] {
        if survivors.len() >= 4 {
            survivors = iqr_filter(&survivors, metric)?;
        }
    }
    let min_cost = survivors
        .iter()
        .map(|r| r.cost)
        .fold(f64::INFINITY, f64::min);
    let mut kept: Vec<&BenchmarkRecord> = survivors
        .iter()
        .filter(|r| r.cost <= 3.0 * min_cost)
        .collect();
    if kept.is_empty() {
        return Err(ValidationError::AllFiltered);
    }
    kept.sort_by(|a, b| {
        a.cost
            .partial_cmp(&b.cost)
            .expect("costs are finite")
            .then_with(|| a.instance_type.cmp(&b.instance_type))
    });
    Ok(kept.into_iter().map(|r| r.instance_type.clone()).collect())
}

/// Score-only optimal list: machines passing the variant threshold, within
/// 2x the cheapest passer's cost, best score first (ascending for s1/s2,
/// descending for s3/s4), ties broken by machine id. May be empty.
pub fn predicted_set(
    scored: &[(&MachineScoreReport, f64)],
    variant: Variant,
    thresholds: &ClassificationThresholds,
) -> Vec<String> {
    let passers: Vec<&(&MachineScoreReport, f64)> = scored
        .iter()
        .filter(|(report, _)| classify(report, thresholds).variant_pass(variant))
        .collect();
    if passers.is_empty() {
        return Vec::new();
    }
    let min_cost = passers
        .iter()
        .map(|(_, cost)| *cost)
        .fold(f64::INFINITY, f64::min);
    let mut kept: Vec<&(&MachineScoreReport, f64)> = passers
        .into_iter()
        .filter(|(_, cost)| *cost <= 2.0 * min_cost)
        .collect();
    kept.sort_by(|(a, _), (b, _)| {
        let (sa, sb) = (a.variant(variant), b.variant(variant));
        let score_order = if variant.lower_is_better() {
            sa.partial_cmp(&sb)
        } else {
            sb.partial_cmp(&sa)
        };
        score_order
            .expect("scores are finite")
            .then_with(|| a.machine_id.cmp(&b.machine_id))
    });
    kept.into_iter()
        .map(|(report, _)| report.machine_id.clone())
        .collect()
}

/// Set-overlap quality of a prediction. `precision` is absent when nothing
/// was predicted against a non-empty truth: 0/0 carries no information, so
/// it is flagged instead of faked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecall {
    pub precision: Option<f64>,
    pub recall: f64,
}

pub fn precision_recall(
    truth: &[String],
    predicted: &[String],
) -> Result<PrecisionRecall, ValidationError> {
    if truth.is_empty() {
        // Nothing to find and nothing found is vacuous agreement; anything
        // predicted against an empty truth is a setup problem.
        return if predicted.is_empty() {
            Ok(PrecisionRecall {
                precision: Some(1.0),
                recall: 1.0,
            })
        } else {
            Err(ValidationError::EmptyTruth)
        };
    }
    let truth_set: HashSet<&String> = truth.iter().collect();
    let hits = predicted.iter().filter(|p| truth_set.contains(p)).count() as f64;
    let precision = if predicted.is_empty() {
        None
    } else {
        Some(hits / predicted.len() as f64)
    };
    let recall = if predicted.is_empty() {
        0.0
    } else {
        hits / truth.len() as f64
    };
    Ok(PrecisionRecall { precision, recall })
}

/// Top-weighted agreement of two duplicate-free rankings, in [0,1].
///
/// Evaluated to depth k = max of the lengths; the overlap proportion at
/// depth d is the prefix intersection size over d, with the shorter list's
/// prefix frozen once exhausted. Depth weights are p^(d-1), and the sum is
/// divided by the total weight, so identical lists score exactly 1 and
/// disjoint lists exactly 0.
pub fn rank_biased_overlap<T: Eq + Hash + std::fmt::Display>(
    a: &[T],
    b: &[T],
    p: f64,
) -> Result<f64, ValidationError> {
    if !p.is_finite() || p <= 0.0 || p >= 1.0 {
        return Err(ValidationError::BadPersistence(p));
    }
    for list in [a, b] {
        let mut seen: HashSet<&T> = HashSet::with_capacity(list.len());
        for item in list {
            if !seen.insert(item) {
                return Err(ValidationError::DuplicateItem(item.to_string()));
            }
        }
    }
    if a.is_empty() && b.is_empty() {
        return Ok(1.0);
    }
    let k = a.len().max(b.len());
    let mut seen_a: HashSet<&T> = HashSet::with_capacity(a.len());
    let mut seen_b: HashSet<&T> = HashSet::with_capacity(b.len());
    let mut overlap = 0usize;
    let mut weight = 1.0f64;
    let mut numerator = 0.0f64;
    let mut denominator = 0.0f64;
    for d in 1..=k {
        if let Some(x) = a.get(d - 1) {
            if seen_b.contains(x) {
                overlap += 1;
            }
            seen_a.insert(x);
        }
        if let Some(y) = b.get(d - 1) {
            if seen_a.contains(y) {
                overlap += 1;
            }
            seen_b.insert(y);
        }
        // Agreement first, then the weight product: identical lists give an
        // agreement of exactly 1.0 at every depth, making numerator and
        // denominator bit-equal and the result exactly 1.0.
        let agreement = overlap as f64 / d as f64;
        numerator += weight * agreement;
        denominator += weight;
        weight *= p;
    }
    Ok(numerator / denominator)
}

/// Parses benchmark CSV with header `instance_type,duration,latency,throughput,cost`.
/// The throughput cell may be empty. Instance types must be unique.
pub fn parse_benchmarks_csv(text: &str) -> Result<Vec<BenchmarkRecord>, ValidationError> {
    const COLUMNS: [&str; 5] = ["instance_type", "duration", "latency", "throughput", "cost"];
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| ValidationError::Header(e.to_string()))?
        .clone();
    for column in headers.iter() {
        if !COLUMNS.contains(&column) {
            return Err(ValidationError::Header(format!("unknown column '{column}'")));
        }
    }
    let mut index = [0usize; 5];
    for (slot, needed) in index.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|c| c == needed)
            .ok_or_else(|| ValidationError::Header(format!("missing column '{needed}'")))?;
    }
    let mut records: Vec<BenchmarkRecord> = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| match e.position() {
            Some(p) => ValidationError::Row {
                line: p.line(),
                problem: e.to_string(),
            },
            None => ValidationError::Header(e.to_string()),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |slot: usize| record.get(index[slot]).unwrap_or("");
        let number = |slot: usize, name: &str| -> Result<f64, ValidationError> {
            field(slot).parse::<f64>().map_err(|_| ValidationError::Row {
                line,
                problem: format!("{name} '{}' is not a number", field(slot)),
            })
        };
        let positive = |value: f64, name: &str| -> Result<f64, ValidationError> {
            if value.is_finite() && value > 0.0 {
                Ok(value)
            } else {
                Err(ValidationError::Row {
                    line,
                    problem: format!("{name} must be > 0, got {value}"),
                })
            }
        };
        let instance_type = field(0).to_string();
        if instance_type.is_empty() {
            return Err(ValidationError::Row {
                line,
                problem: "instance_type must not be empty".to_string(),
            });
        }
        if records.iter().any(|r| r.instance_type == instance_type) {
            return Err(ValidationError::Row {
                line,
                problem: format!("duplicate instance_type '{instance_type}'"),
            });
        }
        let throughput = if field(3).is_empty() {
            None
        } else {
            Some(positive(number(3, "throughput")?, "throughput")?)
        };
        records.push(BenchmarkRecord {
            instance_type,
            duration: positive(number(1, "duration")?, "duration")?,
            latency: positive(number(2, "latency")?, "latency")?,
            throughput,
            cost: positive(number(4, "cost")?, "cost")?,
        });
    }
    if records.is_empty() {
        return Err(ValidationError::NoRows);
    }
    Ok(records)
}

pub fn load_benchmarks(path: &std::path::Path) -> Result<Vec<BenchmarkRecord>, ValidationError> {
    let text = std::fs::read_to_string(path).map_err(|e| ValidationError::Io {
        path: path.display().to_string(),
        cause: e.to_string(),
    })?;
    parse_benchmarks_csv(&text)
}

/// Renders benchmark records into the canonical CSV.
pub fn benchmarks_to_csv(records: &[BenchmarkRecord]) -> String {
    let mut out = String::from("instance_type,duration,latency,throughput,cost\n");
    for r in records {
        let throughput = r
            .throughput
            .map(|t| format!("{t:.4}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{:.4},{:.4},{},{:.4}\n",
            r.instance_type, r.duration, r.latency, throughput, r.cost
        ));
    }
    out
}
