//! Resource scores, penalties, and the four machine-level indices.
//!
//! Each reading is normalized against its spec: `z = (rate - target) / range`.
//! Two squashing functions turn z into a bounded per-resource score. `tanh(z)`
//! keeps the sign, so negative means under-utilized and positive means
//! over-utilized. `exp(-|z|)` rewards proximity to the target and peaks at 1.
//! A resource with a hard limit adds a penalty of `penalty_weight` whenever
//! `rate >= resource_max`; the boundary itself counts as a violation.
//!
//! The indices combine the n target-bearing resources. Penalty-only resources
//! (limit but no target) are excluded from n and from the score sums; they
//! contribute to the penalty sum only.
//!
//! ```text
//! s1 = min[ (1/n) * sum_i w_i * |tanh z_i|            + sum P , 1 ]   0 is best
//! s2 = min[ (1/n) * sqrt(sum_i (w_i tanh z_i)^2)      + sum P , 1 ]   0 is best
//! s3 = max[ (1/n) * sum_i w_i * exp(-|z_i|)           - sum P , 0 ]   1 is best
//! s4 = max[ (1/n) * sqrt(sum_i (w_i exp(-|z_i|))^2)   - sum P , 0 ]   1 is best
//! ```
//!
//! Weights are applied as given, never renormalized; the divisor is n. All
//! four indices are clamped into [0,1], so weights above 1 cannot push s3 or
//! s4 past 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("resource '{name}': {problem}")]
    InvalidSpec { name: String, problem: String },
    #[error("resource '{0}' is penalty-only; z-score needs a target and range")]
    PenaltyOnly(String),
    #[error("reading '{name}': rate {rate} is not a finite non-negative number")]
    InvalidRate { name: String, rate: f64 },
    #[error("duplicate reading for resource '{0}'")]
    DuplicateReading(String),
    #[error("reading '{0}' matches no resource spec")]
    UnmatchedReading(String),
    #[error("resource '{0}' has no reading")]
    MissingReading(String),
    #[error("no target-bearing resource to score")]
    NothingToScore,
}

impl ScoringError {
    /// Whether the error points at the spec set rather than the data fed in.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            ScoringError::InvalidSpec { .. }
                | ScoringError::PenaltyOnly(_)
                | ScoringError::UnmatchedReading(_)
                | ScoringError::NothingToScore
        )
    }
}

/// Expected running levels for one resource aggregate, e.g. "cpu/avg".
///
/// `target`/`range` define the z-score; both absent makes the spec
/// penalty-only, in which case `resource_max` must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<f64>,
    #[serde(default = "default_weight")]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource_max: Option<f64>,
    #[serde(default = "default_weight")]
    pub penalty_weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

impl ResourceSpec {
    /// Spec with a target and range, unit weight, no limit.
    pub fn target_bearing(name: &str, target: f64, range: f64) -> Self {
        ResourceSpec {
            name: name.to_string(),
            target: Some(target),
            range: Some(range),
            weight: 1.0,
            resource_max: None,
            penalty_weight: 1.0,
        }
    }

    /// Spec that only penalizes rates at or above `resource_max`.
    pub fn penalty_only(name: &str, resource_max: f64) -> Self {
        ResourceSpec {
            name: name.to_string(),
            target: None,
            range: None,
            weight: 1.0,
            resource_max: Some(resource_max),
            penalty_weight: 1.0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_limit(mut self, resource_max: f64) -> Self {
        self.resource_max = Some(resource_max);
        self
    }

    pub fn with_penalty_weight(mut self, penalty_weight: f64) -> Self {
        self.penalty_weight = penalty_weight;
        self
    }

    pub fn is_target_bearing(&self) -> bool {
        self.target.is_some()
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        let fail = |problem: &str| {
            Err(ScoringError::InvalidSpec {
                name: self.name.clone(),
                problem: problem.to_string(),
            })
        };
        if self.name.is_empty() {
            return fail("name must not be empty");
        }
        match (self.target, self.range) {
            (Some(t), Some(r)) => {
                if !t.is_finite() || !(0.0..=100.0).contains(&t) {
                    return fail("target must lie in [0,100]");
                }
                if !r.is_finite() || r <= 0.0 {
                    return fail("range must be a finite number > 0");
                }
            }
            (None, None) => {
                if self.resource_max.is_none() {
                    return fail("needs a target or a resource_max; the spec is inert without either");
                }
            }
            (Some(_), None) => return fail("target requires a range"),
            (None, Some(_)) => return fail("range requires a target"),
        }
        if let Some(m) = self.resource_max {
            if !m.is_finite() || m <= 0.0 || m > 100.0 {
                return fail("resource_max must lie in (0,100]");
            }
        }
        if !self.weight.is_finite() || self.weight < 0.0 {
            return fail("weight must be a finite number >= 0");
        }
        if !self.penalty_weight.is_finite() || self.penalty_weight < 0.0 {
            return fail("penalty_weight must be a finite number >= 0");
        }
        Ok(())
    }
}

/// One aggregated utilization rate, named after the spec it feeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReading {
    pub name: String,
    pub rate: f64,
}

impl ResourceReading {
    pub fn new(name: &str, rate: f64) -> Self {
        ResourceReading {
            name: name.to_string(),
            rate,
        }
    }
}

/// Per-resource scoring breakdown. The z and squashed scores are absent for
/// penalty-only resources; `penalty` is 0 unless the spec has a limit and the
/// rate reached it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceScoreDetail {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score_tanh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score_exp: Option<f64>,
    pub penalty: f64,
    pub over_limit: bool,
}

/// Which of the four indices to read or gate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    S1,
    S2,
    S3,
    S4,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::S1, Variant::S2, Variant::S3, Variant::S4];

    /// Lower is better for the tanh pair (s1, s2); higher for the exp pair.
    pub fn lower_is_better(self) -> bool {
        matches!(self, Variant::S1 | Variant::S2)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Variant::S1 => "s1",
            Variant::S2 => "s2",
            Variant::S3 => "s3",
            Variant::S4 => "s4",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Variant::S1),
            "s2" => Ok(Variant::S2),
            "s3" => Ok(Variant::S3),
            "s4" => Ok(Variant::S4),
            other => Err(format!("unknown variant '{other}' (expected s1|s2|s3|s4)")),
        }
    }
}

/// Pass bounds for machine indices and per-resource scores.
///
/// Machine level: s1 and s2 pass when <= `tanh_overall`; s3 and s4 pass when
/// >= `exp_overall`. Resource level: |score_tanh| <= `tanh_resource` and
/// score_exp >= `exp_resource`. All comparisons are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationThresholds {
    pub tanh_overall: f64,
    pub tanh_resource: f64,
    pub exp_overall: f64,
    pub exp_resource: f64,
}

impl Default for ClassificationThresholds {
    fn default() -> Self {
        ClassificationThresholds {
            tanh_overall: 0.76,
            tanh_resource: 0.76,
            exp_overall: 0.36,
            exp_resource: 0.36,
        }
    }
}

impl ClassificationThresholds {
    pub fn validate(&self) -> Result<(), ScoringError> {
        let fields = [
            ("tanh_overall", self.tanh_overall),
            ("tanh_resource", self.tanh_resource),
            ("exp_overall", self.exp_overall),
            ("exp_resource", self.exp_resource),
        ];
        for (field, value) in fields {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(ScoringError::InvalidSpec {
                    name: format!("thresholds.{field}"),
                    problem: "must lie in [0,1]".to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Threshold verdict for one resource. For penalty-only resources both flags
/// carry the same information: the limit was not tripped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceVerdict {
    pub name: String,
    pub tanh_pass: bool,
    pub exp_pass: bool,
}

/// Machine- and resource-level threshold verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineVerdicts {
    pub s1_pass: bool,
    pub s2_pass: bool,
    pub s3_pass: bool,
    pub s4_pass: bool,
    pub resources: Vec<ResourceVerdict>,
}

impl MachineVerdicts {
    pub fn variant_pass(&self, variant: Variant) -> bool {
        match variant {
            Variant::S1 => self.s1_pass,
            Variant::S2 => self.s2_pass,
            Variant::S3 => self.s3_pass,
            Variant::S4 => self.s4_pass,
        }
    }
}

/// Full scoring result for one machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineScoreReport {
    pub machine_id: String,
    pub details: Vec<ResourceScoreDetail>,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    /// Count of target-bearing resources, the n in the index formulas.
    pub n_scored: usize,
    /// Populated by [`classify`]; absent until thresholds are applied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<MachineVerdicts>,
}

impl MachineScoreReport {
    pub fn variant(&self, variant: Variant) -> f64 {
        match variant {
            Variant::S1 => self.s1,
            Variant::S2 => self.s2,
            Variant::S3 => self.s3,
            Variant::S4 => self.s4,
        }
    }

    /// Returns the report with verdicts filled in for the given thresholds.
    pub fn classified(mut self, thresholds: &ClassificationThresholds) -> Self {
        self.verdicts = Some(classify(&self, thresholds));
        self
    }
}

/// Number of deviations of `rate` from the spec's target: (rate - target) / range.
pub fn z_score(rate: f64, spec: &ResourceSpec) -> Result<f64, ScoringError> {
    spec.validate()?;
    match (spec.target, spec.range) {
        (Some(target), Some(range)) => Ok((rate - target) / range),
        _ => Err(ScoringError::PenaltyOnly(spec.name.clone())),
    }
}

/// Signed squashed score in (-1,1); 0 on target, sign tracks the deviation.
pub fn score_tanh(z: f64) -> f64 {
    z.tanh()
}

/// Proximity score in (0,1]; 1 exactly on target, decaying with |z|.
pub fn score_exp(z: f64) -> f64 {
    (-z.abs()).exp()
}

/// Limit penalty: `penalty_weight` when rate >= resource_max, else 0.
/// The boundary counts as a violation. Specs without a limit never penalize.
pub fn penalty(rate: f64, spec: &ResourceSpec) -> f64 {
    match spec.resource_max {
        Some(max) if rate >= max => spec.penalty_weight,
        _ => 0.0,
    }
}

/// Scores one machine: every spec must have exactly one reading, every
/// reading must match a spec, and at least one spec must be target-bearing.
///
/// A missing reading is a hard error even for penalty-only specs; silently
/// shrinking n would change the indices without any visible signal.
pub fn wise_scores(
    machine_id: &str,
    readings: &[ResourceReading],
    specs: &[ResourceSpec],
) -> Result<MachineScoreReport, ScoringError> {
    for spec in specs {
        spec.validate()?;
    }
    let mut seen: Vec<&str> = Vec::with_capacity(readings.len());
    for reading in readings {
        if !reading.rate.is_finite() || reading.rate < 0.0 {
            return Err(ScoringError::InvalidRate {
                name: reading.name.clone(),
                rate: reading.rate,
            });
        }
        if seen.contains(&reading.name.as_str()) {
            return Err(ScoringError::DuplicateReading(reading.name.clone()));
        }
        seen.push(&reading.name);
        if !specs.iter().any(|s| s.name == reading.name) {
            return Err(ScoringError::UnmatchedReading(reading.name.clone()));
        }
    }

    let mut details = Vec::with_capacity(specs.len());
    let mut n = 0usize;
    let mut sum_tanh = 0.0f64;
    let mut sum_tanh_sq = 0.0f64;
    let mut sum_exp = 0.0f64;
    let mut sum_exp_sq = 0.0f64;
    let mut sum_penalty = 0.0f64;

    for spec in specs {
        let reading = readings
            .iter()
            .find(|r| r.name == spec.name)
            .ok_or_else(|| ScoringError::MissingReading(spec.name.clone()))?;
        let p = penalty(reading.rate, spec);
        let over_limit = spec.resource_max.is_some_and(|max| reading.rate >= max);
        sum_penalty += p;
        let (z, st, se) = if spec.is_target_bearing() {
            let z = z_score(reading.rate, spec)?;
            let st = score_tanh(z);
            let se = score_exp(z);
            n += 1;
            sum_tanh += spec.weight * st.abs();
            sum_tanh_sq += (spec.weight * st) * (spec.weight * st);
            sum_exp += spec.weight * se;
            sum_exp_sq += (spec.weight * se) * (spec.weight * se);
            (Some(z), Some(st), Some(se))
        } else {
            (None, None, None)
        };
        details.push(ResourceScoreDetail {
            name: spec.name.clone(),
            z,
            score_tanh: st,
            score_exp: se,
            penalty: p,
            over_limit,
        });
    }

    if n == 0 {
        return Err(ScoringError::NothingToScore);
    }

    let nf = n as f64;
    let s1 = (sum_tanh / nf + sum_penalty).clamp(0.0, 1.0);
    let s2 = (sum_tanh_sq.sqrt() / nf + sum_penalty).clamp(0.0, 1.0);
    let s3 = (sum_exp / nf - sum_penalty).clamp(0.0, 1.0);
    let s4 = (sum_exp_sq.sqrt() / nf - sum_penalty).clamp(0.0, 1.0);

    Ok(MachineScoreReport {
        machine_id: machine_id.to_string(),
        details,
        s1,
        s2,
        s3,
        s4,
        n_scored: n,
        verdicts: None,
    })
}

/// Applies thresholds to a scored machine.
///
/// Machine verdicts gate on the four indices. Resource verdicts judge the
/// squashed scores only; a tripped limit surfaces through `over_limit` and
/// the machine indices, except for penalty-only resources, which have no
/// scores and pass exactly when their limit held.
pub fn classify(
    report: &MachineScoreReport,
    thresholds: &ClassificationThresholds,
) -> MachineVerdicts {
    let resources = report
        .details
        .iter()
        .map(|d| match (d.score_tanh, d.score_exp) {
            (Some(st), Some(se)) => ResourceVerdict {
                name: d.name.clone(),
                tanh_pass: st.abs() <= thresholds.tanh_resource,
                exp_pass: se >= thresholds.exp_resource,
            },
            _ => ResourceVerdict {
                name: d.name.clone(),
                tanh_pass: !d.over_limit,
                exp_pass: !d.over_limit,
            },
        })
        .collect();
    MachineVerdicts {
        s1_pass: report.s1 <= thresholds.tanh_overall,
        s2_pass: report.s2 <= thresholds.tanh_overall,
        s3_pass: report.s3 >= thresholds.exp_overall,
        s4_pass: report.s4 >= thresholds.exp_overall,
        resources,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Frozen from the closed forms (e^2-1)/(e^2+1) and 1/e, evaluated to 17
    // significant digits; both are the nearest-f64 literals.
    const TANH_1: f64 = 0.7615941559557649;
    const EXP_NEG_1: f64 = 0.36787944117144233;

    fn default_specs() -> Vec<ResourceSpec> {
        vec![
            ResourceSpec::target_bearing("cpu/avg", 40.0, 30.0),
            ResourceSpec::target_bearing("cpu/p95", 70.0, 20.0),
            ResourceSpec::target_bearing("ram/avg", 50.0, 20.0).with_limit(90.0),
            ResourceSpec::target_bearing("ram/p95", 70.0, 30.0),
            ResourceSpec::penalty_only("net/avg", 80.0),
        ]
    }

    fn on_target_readings() -> Vec<ResourceReading> {
        vec![
            ResourceReading::new("cpu/avg", 40.0),
            ResourceReading::new("cpu/p95", 70.0),
            ResourceReading::new("ram/avg", 50.0),
            ResourceReading::new("ram/p95", 70.0),
            ResourceReading::new("net/avg", 30.0),
        ]
    }

    fn readings_with(name: &str, rate: f64) -> Vec<ResourceReading> {
        let mut readings = on_target_readings();
        readings.iter_mut().find(|r| r.name == name).unwrap().rate = rate;
        readings
    }

    #[test]
    fn z_score_worked_examples() {
        let spec = ResourceSpec::target_bearing("cpu/avg", 50.0, 30.0);
        assert_eq!(z_score(80.0, &spec).unwrap(), 1.0);
        assert_eq!(z_score(20.0, &spec).unwrap(), -1.0);
        let on_target = ResourceSpec::target_bearing("cpu/avg", 40.0, 30.0);
        assert_eq!(z_score(40.0, &on_target).unwrap(), 0.0);
    }

    #[test]
    fn z_score_rejects_penalty_only_spec() {
        let spec = ResourceSpec::penalty_only("net/avg", 80.0);
        assert_eq!(
            z_score(30.0, &spec),
            Err(ScoringError::PenaltyOnly("net/avg".to_string()))
        );
    }

    #[test]
    fn tanh_score_values() {
        assert_eq!(score_tanh(0.0), 0.0);
        let e2 = std::f64::consts::E * std::f64::consts::E;
        let oracle = (e2 - 1.0) / (e2 + 1.0);
        assert!((score_tanh(1.0) - oracle).abs() < 1e-15);
        assert!((score_tanh(1.0) - TANH_1).abs() < 1e-15);
        assert!((score_tanh(-1.0) + TANH_1).abs() < 1e-15);
    }

    #[test]
    fn exp_score_values() {
        assert_eq!(score_exp(0.0), 1.0);
        let oracle = 1.0 / std::f64::consts::E;
        assert!((score_exp(1.0) - oracle).abs() < 1e-15);
        assert!((score_exp(1.0) - EXP_NEG_1).abs() < 1e-15);
        assert!((score_exp(-1.0) - EXP_NEG_1).abs() < 1e-15);
    }

    #[test]
    fn penalty_boundary_is_inclusive() {
        let spec = ResourceSpec::penalty_only("ram/avg", 90.0);
        assert_eq!(penalty(95.0, &spec), 1.0);
        assert_eq!(penalty(89.9, &spec), 0.0);
        let half = ResourceSpec::penalty_only("ram/avg", 90.0).with_penalty_weight(0.5);
        assert_eq!(penalty(90.0, &half), 0.5);
    }

    #[test]
    fn all_on_target_scores() {
        let report = wise_scores("m1", &on_target_readings(), &default_specs()).unwrap();
        assert_eq!(report.n_scored, 4);
        assert_eq!(report.s1, 0.0);
        assert_eq!(report.s2, 0.0);
        assert_eq!(report.s3, 1.0);
        // (1/4) * sqrt(4 * 1^2) with unit weights.
        assert_eq!(report.s4, 0.5);
    }

    #[test]
    fn limit_violation_saturates_all_indices() {
        let report = wise_scores("m1", &readings_with("ram/avg", 95.0), &default_specs()).unwrap();
        assert_eq!((report.s1, report.s2, report.s3, report.s4), (1.0, 1.0, 0.0, 0.0));
        let detail = report.details.iter().find(|d| d.name == "ram/avg").unwrap();
        assert!(detail.over_limit);
        assert_eq!(detail.penalty, 1.0);
    }

    #[test]
    fn single_deviation_hand_evaluation() {
        // cpu/avg at 70 gives z = 1; the other three targets sit at z = 0.
        let report = wise_scores("m1", &readings_with("cpu/avg", 70.0), &default_specs()).unwrap();
        assert!((report.s1 - TANH_1 / 4.0).abs() < 1e-12);
        assert!((report.s1 - 0.19039853898894123).abs() < 1e-12);
        assert!((report.s2 - TANH_1 / 4.0).abs() < 1e-12);
        assert!((report.s3 - (EXP_NEG_1 + 3.0) / 4.0).abs() < 1e-12);
        let s4_direct = (EXP_NEG_1 * EXP_NEG_1 + 3.0).sqrt() / 4.0;
        assert!((report.s4 - s4_direct).abs() < 1e-12);
    }

    #[test]
    fn reading_errors_are_distinguished() {
        let specs = default_specs();
        let mut extra = on_target_readings();
        extra.push(ResourceReading::new("disk/avg", 10.0));
        assert_eq!(
            wise_scores("m1", &extra, &specs),
            Err(ScoringError::UnmatchedReading("disk/avg".to_string()))
        );

        let missing: Vec<_> = on_target_readings()
            .into_iter()
            .filter(|r| r.name != "net/avg")
            .collect();
        assert_eq!(
            wise_scores("m1", &missing, &specs),
            Err(ScoringError::MissingReading("net/avg".to_string()))
        );

        let mut doubled = on_target_readings();
        doubled.push(ResourceReading::new("cpu/avg", 41.0));
        assert_eq!(
            wise_scores("m1", &doubled, &specs),
            Err(ScoringError::DuplicateReading("cpu/avg".to_string()))
        );

        let penalty_only = vec![ResourceSpec::penalty_only("net/avg", 80.0)];
        let net_reading = vec![ResourceReading::new("net/avg", 30.0)];
        assert_eq!(
            wise_scores("m1", &net_reading, &penalty_only),
            Err(ScoringError::NothingToScore)
        );
    }

    #[test]
    fn spec_validation_rejects_inconsistent_fields() {
        let mut spec = ResourceSpec::target_bearing("cpu/avg", 40.0, 30.0);
        spec.range = None;
        assert!(spec.validate().is_err());

        let mut inert = ResourceSpec::penalty_only("net/avg", 80.0);
        inert.resource_max = None;
        assert!(inert.validate().is_err());

        let negative = ResourceSpec::target_bearing("cpu/avg", 40.0, 30.0).with_weight(-1.0);
        assert!(negative.validate().is_err());

        let bad_max = ResourceSpec::target_bearing("cpu/avg", 40.0, 30.0).with_limit(101.0);
        assert!(bad_max.validate().is_err());
    }

    #[test]
    fn machine_thresholds_are_inclusive() {
        let thresholds = ClassificationThresholds::default();
        let mut report = wise_scores("m1", &on_target_readings(), &default_specs()).unwrap();
        report.s1 = 0.76;
        report.s2 = 0.7600000001;
        report.s3 = 0.36;
        report.s4 = 0.3599999999;
        let verdicts = classify(&report, &thresholds);
        assert!(verdicts.s1_pass);
        assert!(!verdicts.s2_pass);
        assert!(verdicts.s3_pass);
        assert!(!verdicts.s4_pass);
    }

    #[test]
    fn resource_can_fail_while_machine_passes() {
        // cpu/avg at 82 gives z = 1.4: the resource breaks the band while the
        // averaged machine index stays under the overall bound.
        let report = wise_scores("m1", &readings_with("cpu/avg", 82.0), &default_specs())
            .unwrap()
            .classified(&ClassificationThresholds::default());
        let verdicts = report.verdicts.as_ref().unwrap();
        assert!(verdicts.s1_pass);
        let cpu = verdicts.resources.iter().find(|r| r.name == "cpu/avg").unwrap();
        assert!(!cpu.tanh_pass);
        assert!(!cpu.exp_pass);
    }

    #[test]
    fn penalty_only_resource_verdict_tracks_limit() {
        let thresholds = ClassificationThresholds::default();
        let ok = wise_scores("m1", &on_target_readings(), &default_specs()).unwrap();
        let verdicts = classify(&ok, &thresholds);
        let net = verdicts.resources.iter().find(|r| r.name == "net/avg").unwrap();
        assert!(net.tanh_pass && net.exp_pass);

        let tripped = wise_scores("m1", &readings_with("net/avg", 80.0), &default_specs()).unwrap();
        let verdicts = classify(&tripped, &thresholds);
        let net = verdicts.resources.iter().find(|r| r.name == "net/avg").unwrap();
        assert!(!net.tanh_pass && !net.exp_pass);
    }

    // Brute-force re-evaluation of the four index formulas, written against
    // the formulas alone so it cannot share a bug with wise_scores.
    fn brute_force_indices(
        rates: &[f64],
        specs: &[ResourceSpec],
    ) -> (f64, f64, f64, f64) {
        let mut n = 0.0f64;
        let mut l1_tanh = 0.0f64;
        let mut l2_tanh = 0.0f64;
        let mut l1_exp = 0.0f64;
        let mut l2_exp = 0.0f64;
        let mut penalties = 0.0f64;
        for (rate, spec) in rates.iter().zip(specs) {
            if let Some(max) = spec.resource_max {
                if *rate >= max {
                    penalties += spec.penalty_weight;
                }
            }
            if let (Some(t), Some(r)) = (spec.target, spec.range) {
                let z = (rate - t) / r;
                n += 1.0;
                l1_tanh += spec.weight * z.tanh().abs();
                l2_tanh += (spec.weight * z.tanh()).powi(2);
                l1_exp += spec.weight * (-z.abs()).exp();
                l2_exp += (spec.weight * (-z.abs()).exp()).powi(2);
            }
        }
        let s1 = (l1_tanh / n + penalties).min(1.0);
        let s2 = (l2_tanh.sqrt() / n + penalties).min(1.0);
        let s3 = (l1_exp / n - penalties).max(0.0).min(1.0);
        let s4 = (l2_exp.sqrt() / n - penalties).max(0.0).min(1.0);
        (s1, s2, s3, s4)
    }

    proptest! {
        // Ranges are chosen to keep |z| <= 10: f64 tanh saturates to exactly
        // 1.0 near |z| = 19, which would break the strict (-1,1) bound.
        #[test]
        fn indices_stay_bounded(
            rates in proptest::collection::vec(0.0f64..=100.0, 5),
            targets in proptest::collection::vec(0.0f64..=100.0, 5),
            ranges in proptest::collection::vec(10.0f64..=50.0, 5),
            weights in proptest::collection::vec(0.0f64..=1.0, 5),
        ) {
            let specs: Vec<ResourceSpec> = (0..5)
                .map(|i| {
                    ResourceSpec::target_bearing(&format!("r{i}/avg"), targets[i], ranges[i])
                        .with_weight(weights[i])
                })
                .collect();
            let readings: Vec<ResourceReading> = (0..5)
                .map(|i| ResourceReading::new(&format!("r{i}/avg"), rates[i]))
                .collect();
            let report = wise_scores("m", &readings, &specs).unwrap();
            for s in [report.s1, report.s2, report.s3, report.s4] {
                prop_assert!((0.0..=1.0).contains(&s));
            }
            for d in &report.details {
                let st = d.score_tanh.unwrap();
                let se = d.score_exp.unwrap();
                prop_assert!(st > -1.0 && st < 1.0);
                prop_assert!(se > 0.0 && se <= 1.0);
            }
        }

        #[test]
        fn matches_brute_force_evaluation(
            rates in proptest::collection::vec(0.0f64..=100.0, 5),
            weights in proptest::collection::vec(0.0f64..=1.0, 5),
        ) {
            let mut specs = default_specs();
            for (spec, w) in specs.iter_mut().zip(&weights) {
                spec.weight = *w;
            }
            let names: Vec<String> = specs.iter().map(|s| s.name.clone()).collect();
            let readings: Vec<ResourceReading> = names
                .iter()
                .zip(&rates)
                .map(|(n, r)| ResourceReading::new(n, *r))
                .collect();
            let report = wise_scores("m", &readings, &specs).unwrap();
            let (s1, s2, s3, s4) = brute_force_indices(&rates, &specs);
            prop_assert!((report.s1 - s1).abs() < 1e-12);
            prop_assert!((report.s2 - s2).abs() < 1e-12);
            prop_assert!((report.s3 - s3).abs() < 1e-12);
            prop_assert!((report.s4 - s4).abs() < 1e-12);
        }

        #[test]
        fn reflection_about_target_preserves_indices(
            deltas in proptest::collection::vec(-20.0f64..=20.0, 3),
        ) {
            let specs = vec![
                ResourceSpec::target_bearing("a/avg", 50.0, 15.0),
                ResourceSpec::target_bearing("b/avg", 40.0, 12.0),
                ResourceSpec::target_bearing("c/avg", 60.0, 18.0),
            ];
            let mirror = |sign: f64| -> Vec<ResourceReading> {
                vec![
                    ResourceReading::new("a/avg", 50.0 + sign * deltas[0]),
                    ResourceReading::new("b/avg", 40.0 + sign * deltas[1]),
                    ResourceReading::new("c/avg", 60.0 + sign * deltas[2]),
                ]
            };
            let plus = wise_scores("m", &mirror(1.0), &specs).unwrap();
            let minus = wise_scores("m", &mirror(-1.0), &specs).unwrap();
            prop_assert!((plus.s1 - minus.s1).abs() < 1e-12);
            prop_assert!((plus.s2 - minus.s2).abs() < 1e-12);
            prop_assert!((plus.s3 - minus.s3).abs() < 1e-12);
            prop_assert!((plus.s4 - minus.s4).abs() < 1e-12);
            for (p, m) in plus.details.iter().zip(&minus.details) {
                let (pt, mt) = (p.score_tanh.unwrap(), m.score_tanh.unwrap());
                prop_assert!((pt + mt).abs() < 1e-12, "tanh sign must flip");
            }
        }

        #[test]
        fn penalty_saturation(
            rates in proptest::collection::vec(0.0f64..=100.0, 4),
            limit in 10.0f64..=90.0,
        ) {
            let mut specs = default_specs();
            specs[0].resource_max = Some(limit);
            let mut readings = on_target_readings();
            // First resource forced to its limit; the rest roam freely.
            readings[0].rate = limit;
            for (reading, rate) in readings.iter_mut().skip(1).zip(&rates) {
                reading.rate = *rate;
            }
            let report = wise_scores("m", &readings, &specs).unwrap();
            prop_assert_eq!(
                (report.s1, report.s2, report.s3, report.s4),
                (1.0, 1.0, 0.0, 0.0)
            );
        }

        #[test]
        fn l2_ceiling_under_unit_weights(
            rates in proptest::collection::vec(0.0f64..=100.0, 1..=8),
        ) {
            let n = rates.len();
            let specs: Vec<ResourceSpec> = (0..n)
                .map(|i| ResourceSpec::target_bearing(&format!("r{i}/avg"), 50.0, 10.0))
                .collect();
            let readings: Vec<ResourceReading> = rates
                .iter()
                .enumerate()
                .map(|(i, r)| ResourceReading::new(&format!("r{i}/avg"), *r))
                .collect();
            let report = wise_scores("m", &readings, &specs).unwrap();
            let ceiling = 1.0 / (n as f64).sqrt() + 1e-12;
            prop_assert!(report.s2 <= ceiling);
            prop_assert!(report.s4 <= ceiling);
        }
    }

    #[test]
    fn moving_away_from_target_degrades_monotonically() {
        let specs = vec![ResourceSpec::target_bearing("cpu/avg", 50.0, 20.0)];
        let mut last: Option<MachineScoreReport> = None;
        for step in 0..=10 {
            let rate = 50.0 + 5.0 * step as f64;
            let readings = vec![ResourceReading::new("cpu/avg", rate)];
            let report = wise_scores("m", &readings, &specs).unwrap();
            if let Some(prev) = &last {
                assert!(report.s1 > prev.s1, "s1 must rise, step {step}");
                assert!(report.s2 > prev.s2, "s2 must rise, step {step}");
                assert!(report.s3 < prev.s3, "s3 must fall, step {step}");
                assert!(report.s4 < prev.s4, "s4 must fall, step {step}");
            }
            last = Some(report);
        }
    }
}
