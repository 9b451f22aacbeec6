//! Fleet scoring: from parsed series to classified per-machine reports.
//!
//! For each machine the profile is resolved against its machine_type, every
//! spec name is split into (metric, statistic), the matching series is
//! aggregated, and the readings are scored and classified. Machines come
//! back sorted by machine_id so downstream output is deterministic.
//!
//! Series whose metric no resolved spec mentions are ignored; a spec whose
//! metric has no series for some machine is a hard error, because silently
//! scoring fewer resources would shift the indices.

use thiserror::Error;

use crate::ingest::{aggregate, AggregationRequest, IngestError, UtilizationSeries};
use crate::profile::ScoringProfile;
use crate::scoring::{wise_scores, MachineScoreReport, ResourceReading, ScoringError};

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("machine '{machine_id}': no series for metric '{metric}' (needed by '{spec}')")]
    MissingSeries {
        machine_id: String,
        metric: String,
        spec: String,
    },
}

impl PipelineError {
    /// Configuration problems point at the profile; everything else is bad
    /// or missing input data.
    pub fn is_configuration(&self) -> bool {
        match self {
            PipelineError::Ingest(IngestError::BadAggregation(_)) => true,
            PipelineError::Ingest(_) => false,
            PipelineError::Scoring(e) => e.is_configuration(),
            PipelineError::MissingSeries { .. } => false,
        }
    }
}

/// One machine's classified score report plus its type.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredMachine {
    pub machine_id: String,
    pub machine_type: String,
    pub report: MachineScoreReport,
}

/// Scores every machine present in `series` under `profile`.
pub fn score_fleet(
    profile: &ScoringProfile,
    series: &[UtilizationSeries],
) -> Result<Vec<ScoredMachine>, PipelineError> {
    let mut machines: Vec<(String, String)> = Vec::new();
    for s in series {
        if !machines.iter().any(|(id, _)| *id == s.machine_id) {
            machines.push((s.machine_id.clone(), s.machine_type.clone()));
        }
    }
    machines.sort();

    let mut scored = Vec::with_capacity(machines.len());
    for (machine_id, machine_type) in machines {
        let specs = profile.resolve(&machine_type);
        let mut readings: Vec<ResourceReading> = Vec::with_capacity(specs.len());
        for spec in &specs {
            let request = AggregationRequest::from_spec_name(&spec.name)?;
            let matching = series
                .iter()
                .find(|s| s.machine_id == machine_id && s.metric == request.metric)
                .ok_or_else(|| PipelineError::MissingSeries {
                    machine_id: machine_id.clone(),
                    metric: request.metric.clone(),
                    spec: spec.name.clone(),
                })?;
            readings.push(aggregate(matching, &request)?);
        }
        let report =
            wise_scores(&machine_id, &readings, &specs)?.classified(&profile.thresholds);
        scored.push(ScoredMachine {
            machine_id,
            machine_type,
            report,
        });
    }
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_series_csv;

    fn fleet_csv() -> String {
        // Two machines: m1 exactly on every target, m2 with ram average at
        // its limit. Three samples per metric keep aggregates obvious:
        // p95 of three samples is the maximum.
        let mut rows = String::from("machine_id,machine_type,metric,timestamp,rate\n");
        let mut push = |id: &str, ty: &str, metric: &str, rates: [f64; 3]| {
            for (i, r) in rates.iter().enumerate() {
                rows.push_str(&format!("{id},{ty},{metric},{},{r}\n", 1000 + 60 * i as i64));
            }
        };
        // m1: cpu avg (25+25+70)/3 = 40, p95 = 70; ram avg (40+40+70)/3 = 50,
        // p95 = 70; net avg 30.
        push("m1", "c5.large", "cpu", [25.0, 25.0, 70.0]);
        push("m1", "c5.large", "ram", [40.0, 40.0, 70.0]);
        push("m1", "c5.large", "net", [30.0, 30.0, 30.0]);
        // m2: ram avg (95+95+95)/3 = 95 trips the limit.
        push("m2", "c5.large", "cpu", [25.0, 25.0, 70.0]);
        push("m2", "c5.large", "ram", [95.0, 95.0, 95.0]);
        push("m2", "c5.large", "net", [30.0, 30.0, 30.0]);
        rows
    }

    #[test]
    fn scores_and_sorts_machines() {
        let profile = ScoringProfile::builtin_default();
        let series = parse_series_csv(&fleet_csv()).unwrap();
        let scored = score_fleet(&profile, &series).unwrap();
        assert_eq!(scored.len(), 2);
        assert_eq!(scored[0].machine_id, "m1");
        assert_eq!(scored[0].report.s1, 0.0);
        assert_eq!(scored[0].report.s3, 1.0);
        assert!(scored[0].report.verdicts.as_ref().unwrap().s1_pass);
        assert_eq!(scored[1].machine_id, "m2");
        assert_eq!(scored[1].report.s1, 1.0);
        assert_eq!(scored[1].report.s3, 0.0);
        assert!(!scored[1].report.verdicts.as_ref().unwrap().s1_pass);
    }

    #[test]
    fn missing_metric_series_is_an_error() {
        let profile = ScoringProfile::builtin_default();
        let csv = "\
machine_id,machine_type,metric,timestamp,rate
m1,c5.large,cpu,1000,40.0
";
        let series = parse_series_csv(csv).unwrap();
        let err = score_fleet(&profile, &series).unwrap_err();
        match &err {
            PipelineError::MissingSeries { machine_id, metric, .. } => {
                assert_eq!(machine_id, "m1");
                assert_eq!(metric, "ram");
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(!err.is_configuration());
    }

    #[test]
    fn unparseable_spec_name_is_configuration() {
        let mut profile = ScoringProfile::builtin_default();
        profile.global_specs[0].name = "plainname".to_string();
        let series = parse_series_csv(&fleet_csv()).unwrap();
        let err = score_fleet(&profile, &series).unwrap_err();
        assert!(err.is_configuration());
    }

    #[test]
    fn extra_series_are_ignored() {
        let profile = ScoringProfile::builtin_default();
        let mut csv = fleet_csv();
        csv.push_str("m1,c5.large,disk,1000,55.0\n");
        let series = parse_series_csv(&csv).unwrap();
        let scored = score_fleet(&profile, &series).unwrap();
        assert_eq!(scored.len(), 2);
        assert_eq!(scored[0].report.details.len(), 5);
    }
}
