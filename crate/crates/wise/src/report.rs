//! Run records and output rendering.
//!
//! Every command writes a manifest next to its outputs. The manifest holds
//! the resolved run parameters (inputs as given, profile, thresholds after
//! overrides, seed) plus the names of the numeric methods in play, and
//! deliberately excludes anything environmental such as timestamps or the
//! output directory, so re-running a manifest byte-reproduces the outputs.
//!
//! Rendering is split between machine documents (JSON) and terminal tables;
//! both are produced from the same scored data.

use serde::{Deserialize, Serialize};

use crate::pipeline::ScoredMachine;
use crate::scoring::{ClassificationThresholds, MachineScoreReport, Variant};

/// Names of the numeric procedures a run relied on. Recorded so a stored
/// result can never be re-read under a different convention unnoticed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Methods {
    pub percentile: String,
    pub quartiles: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking_overlap: Option<String>,
}

impl Methods {
    pub fn scoring() -> Self {
        Methods {
            percentile: "nearest-rank".to_string(),
            quartiles: "tukey-hinges".to_string(),
            ranking_overlap: None,
        }
    }

    pub fn validation() -> Self {
        Methods {
            ranking_overlap: Some("rbo-truncated-normalized".to_string()),
            ..Self::scoring()
        }
    }
}

/// Replayable description of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_name: Option<String>,
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<ClassificationThresholds>,
    pub methods: Methods,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rbo_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_algorithm: Option<String>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("manifest serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Serialize)]
struct ScoreDocument<'a> {
    manifest: &'a RunManifest,
    machines: Vec<MachineEntry<'a>>,
}

#[derive(Serialize)]
struct MachineEntry<'a> {
    machine_type: &'a str,
    #[serde(flatten)]
    score: &'a MachineScoreReport,
}

pub fn score_document_json(manifest: &RunManifest, machines: &[ScoredMachine]) -> String {
    let doc = ScoreDocument {
        manifest,
        machines: machines
            .iter()
            .map(|m| MachineEntry {
                machine_type: &m.machine_type,
                score: &m.report,
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("score document serializes");
    out.push('\n');
    out
}

/// Per-machine score rows in CSV form. One row per machine and window; the
/// single supported window is 0. Resource columns are the union of every
/// resolved resource in first-appearance order, with empty cells where a
/// machine lacks the resource or the column does not apply (penalty-only
/// resources have no deviation scores).
pub fn timeline_csv(machines: &[ScoredMachine]) -> String {
    let mut resource_names: Vec<&str> = Vec::new();
    for machine in machines {
        for detail in &machine.report.details {
            if !resource_names.contains(&detail.name.as_str()) {
                resource_names.push(&detail.name);
            }
        }
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "machine_id".to_string(),
        "window".to_string(),
        "s1".to_string(),
        "s2".to_string(),
        "s3".to_string(),
        "s4".to_string(),
    ];
    for name in &resource_names {
        header.push(format!("{name}:tanh"));
        header.push(format!("{name}:exp"));
        header.push(format!("{name}:penalty"));
    }
    writer.write_record(&header).expect("csv row");
    for machine in machines {
        let report = &machine.report;
        let mut row = vec![
            report.machine_id.clone(),
            "0".to_string(),
            format!("{:.6}", report.s1),
            format!("{:.6}", report.s2),
            format!("{:.6}", report.s3),
            format!("{:.6}", report.s4),
        ];
        for name in &resource_names {
            match report.details.iter().find(|d| d.name == *name) {
                Some(detail) => {
                    let cell = |v: Option<f64>| match v {
                        Some(x) => format!("{x:.6}"),
                        None => String::new(),
                    };
                    row.push(cell(detail.score_tanh));
                    row.push(cell(detail.score_exp));
                    row.push(format!("{:.6}", detail.penalty));
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        writer.write_record(&row).expect("csv row");
    }
    String::from_utf8(writer.into_inner().expect("csv flush")).expect("csv is utf8")
}

/// Terminal-friendly score summary, one line per machine with pass/fail for
/// each requested variant.
pub fn score_table(machines: &[ScoredMachine], variants: &[Variant]) -> String {
    let id_width = machines
        .iter()
        .map(|m| m.machine_id.len())
        .chain(std::iter::once("machine".len()))
        .max()
        .unwrap_or(7);
    let mut out = String::new();
    out.push_str(&format!(
        "{:<id_width$}      s1      s2      s3      s4  verdicts\n",
        "machine"
    ));
    for machine in machines {
        let report = &machine.report;
        let verdicts = report
            .verdicts
            .as_ref()
            .map(|v| {
                variants
                    .iter()
                    .map(|&variant| {
                        let word = if v.variant_pass(variant) { "pass" } else { "FAIL" };
                        format!("{variant}={word}")
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .unwrap_or_default();
        out.push_str(&format!(
            "{:<id_width$}  {:.4}  {:.4}  {:.4}  {:.4}  {verdicts}\n",
            machine.machine_id, report.s1, report.s2, report.s3, report.s4
        ));
    }
    out
}

/// One benchmark comparison, for a single variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub variant: String,
    /// Machine-level threshold the variant was classified against.
    pub threshold: f64,
    pub truth: Vec<String>,
    pub predicted: Vec<String>,
    /// Absent when no machine was predicted, which leaves precision undefined.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    pub recall: f64,
    pub rank_overlap: f64,
}

#[derive(Serialize)]
struct ValidationDocument<'a> {
    manifest: &'a RunManifest,
    reports: &'a [ValidationReport],
}

pub fn validation_document_json(manifest: &RunManifest, reports: &[ValidationReport]) -> String {
    let doc = ValidationDocument { manifest, reports };
    let mut out = serde_json::to_string_pretty(&doc).expect("validation document serializes");
    out.push('\n');
    out
}

pub fn validation_table(reports: &[ValidationReport]) -> String {
    let mut out = String::new();
    for report in reports {
        out.push_str(&format!(
            "variant {} (threshold {:.4})\n",
            report.variant, report.threshold
        ));
        out.push_str(&format!("  truth:     {}\n", report.truth.join(", ")));
        out.push_str(&format!("  predicted: {}\n", report.predicted.join(", ")));
        let precision = match report.precision {
            Some(p) => format!("{p:.3}"),
            None => "undefined".to_string(),
        };
        out.push_str(&format!(
            "  precision: {precision}   recall: {:.3}   rank-overlap: {:.3}\n",
            report.recall, report.rank_overlap
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ScoringProfile;
    use crate::scoring::{wise_scores, ResourceReading, ResourceSpec};

    fn scored_pair() -> Vec<ScoredMachine> {
        let specs = vec![
            ResourceSpec::target_bearing("cpu/avg", 40.0, 30.0),
            ResourceSpec::penalty_only("net/avg", 80.0),
        ];
        let thresholds = ClassificationThresholds::default();
        let mut machines = Vec::new();
        for (id, cpu, net) in [("m1", 40.0, 10.0), ("m2", 70.0, 85.0)] {
            let readings = vec![
                ResourceReading::new("cpu/avg", cpu),
                ResourceReading::new("net/avg", net),
            ];
            let report = wise_scores(id, &readings, &specs)
                .unwrap()
                .classified(&thresholds);
            machines.push(ScoredMachine {
                machine_id: id.to_string(),
                machine_type: format!("{id}.type"),
                report,
            });
        }
        machines
    }

    fn manifest() -> RunManifest {
        RunManifest {
            tool: "wise".to_string(),
            version: "0.0.0-test".to_string(),
            command: "score".to_string(),
            profile_path: None,
            profile_name: Some(ScoringProfile::builtin_default().name),
            inputs: vec!["fleet.csv".to_string()],
            variants: vec!["s1".to_string()],
            thresholds: Some(ClassificationThresholds::default()),
            methods: Methods::scoring(),
            rbo_p: None,
            seed: None,
            rng_algorithm: None,
        }
    }

    #[test]
    fn manifest_json_round_trips() {
        let original = manifest();
        let json = original.to_json();
        assert!(json.ends_with('\n'));
        let back = RunManifest::from_json(&json).unwrap();
        assert_eq!(back, original);
    }

    #[test]
    fn absent_fields_stay_out_of_the_manifest() {
        let json = manifest().to_json();
        assert!(!json.contains("seed"));
        assert!(!json.contains("rbo_p"));
        assert!(!json.contains("out_dir"));
    }

    #[test]
    fn score_document_flattens_machine_fields() {
        let machines = scored_pair();
        let json = score_document_json(&manifest(), &machines);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let first = &value["machines"][0];
        assert_eq!(first["machine_id"], "m1");
        assert_eq!(first["machine_type"], "m1.type");
        assert!(first["s1"].is_number());
        assert_eq!(value["manifest"]["command"], "score");
    }

    #[test]
    fn timeline_leaves_deviation_cells_empty_for_penalty_only_resources() {
        let machines = scored_pair();
        let csv = timeline_csv(&machines);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(
            header,
            "machine_id,window,s1,s2,s3,s4,\
             cpu/avg:tanh,cpu/avg:exp,cpu/avg:penalty,\
             net/avg:tanh,net/avg:exp,net/avg:penalty"
        );
        let m1 = lines.next().unwrap();
        let cells: Vec<&str> = m1.split(',').collect();
        assert_eq!(cells[0], "m1");
        assert_eq!(cells[1], "0");
        assert_eq!(cells[9], "");
        assert_eq!(cells[10], "");
        assert_eq!(cells[11], "0.000000");
        let m2 = lines.next().unwrap();
        let cells: Vec<&str> = m2.split(',').collect();
        assert_eq!(cells[11], "1.000000");
    }

    #[test]
    fn tables_mark_failures() {
        let machines = scored_pair();
        let table = score_table(&machines, &[Variant::S1, Variant::S3]);
        assert!(table.contains("s1=pass s3=pass"));
        assert!(table.contains("s1=FAIL s3=FAIL"));

        let report = ValidationReport {
            variant: "s1".to_string(),
            threshold: 0.76,
            truth: vec!["a".to_string(), "b".to_string()],
            predicted: vec!["a".to_string()],
            precision: Some(1.0),
            recall: 0.5,
            rank_overlap: 0.9,
        };
        let rendered = validation_table(std::slice::from_ref(&report));
        assert!(rendered.contains("variant s1 (threshold 0.7600)"));
        assert!(rendered.contains("precision: 1.000   recall: 0.500"));

        let undefined = ValidationReport {
            precision: None,
            ..report
        };
        assert!(validation_table(&[undefined]).contains("precision: undefined"));
    }
}
