//! Deterministic synthetic fleets with planted verdicts.
//!
//! A scenario lists instances with a planted class: `optimal` machines run
//! near every target, `under` and `over` machines sit far below or above
//! them (2.5 ranges away where the 0..100 scale allows), and a
//! `limit-breaker` runs one penalized metric at or past its limit while
//! looking healthy otherwise. Benchmark records are shaped to match:
//! limit-breakers post extreme latency, over-utilized machines extreme
//! duration, and oversized (`under`) machines perform fine but cost too
//! much, so the performance-side truth comes out as exactly the optimal
//! instances.
//!
//! Series are built so the aggregates land where the class table says: a
//! constant ceiling block pins the p95 sample exactly, and the remaining
//! samples take pairwise mirrored jitter around the level that yields the
//! requested average. Rates are rounded to 4 decimals at creation, so the
//! average drifts from its target by at most half a unit in the fourth
//! decimal. The bursty profile reshapes the cpu series into duty-cycle
//! plateaus at the p95 level with quiet valleys between bursts.
//!
//! Generation is driven entirely by the scenario seed through a fixed-order
//! ChaCha8 stream (recorded as "chacha8/uniform-v1"), so equal seeds give
//! byte-identical files. Before returning, the generator replays its own
//! output through scoring and the benchmark truth pipeline and refuses to
//! emit a fleet whose outcomes contradict the planted classes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{series_to_csv, UtilizationSeries};
use crate::pipeline::score_fleet;
use crate::profile::ScoringProfile;
use crate::validation::{benchmarks_to_csv, ground_truth, BenchmarkRecord};

/// Identifier of the sample-generation algorithm, recorded in manifests so a
/// fixture mismatch after a dependency change is diagnosable.
pub const GENERATOR_ALGORITHM: &str = "chacha8/uniform-v1";

const SAMPLE_INTERVAL_SECS: i64 = 60;
const SERIES_START_EPOCH: i64 = 1_700_000_000;
const BASE_JITTER: f64 = 2.5;
const PERF_JITTER: f64 = 0.05;
const LATENCY_OUTLIER_FACTOR: f64 = 20.0;
const DURATION_OUTLIER_FACTOR: f64 = 8.0;
const METRICS: [&str; 3] = ["cpu", "ram", "net"];

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("cannot read scenario '{path}': {cause}")]
    Io { path: String, cause: String },
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario invalid: {0}")]
    Invalid(String),
    #[error("scenario is contradictory: {0}")]
    Contradictory(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorkloadProfile {
    SteadyCpu,
    BurstyCpu,
    NetworkHeavy,
}

impl std::fmt::Display for WorkloadProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            WorkloadProfile::SteadyCpu => "steady-cpu",
            WorkloadProfile::BurstyCpu => "bursty-cpu",
            WorkloadProfile::NetworkHeavy => "network-heavy",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantedClass {
    Under,
    Optimal,
    Over,
    LimitBreaker,
}

impl std::fmt::Display for PlantedClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PlantedClass::Under => "under",
            PlantedClass::Optimal => "optimal",
            PlantedClass::Over => "over",
            PlantedClass::LimitBreaker => "limit-breaker",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstancePlan {
    #[serde(rename = "type")]
    pub instance_type: String,
    pub cost: f64,
    pub class: PlantedClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetScenario {
    pub seed: u64,
    pub profile: WorkloadProfile,
    /// Samples per series.
    pub duration: usize,
    /// Fraction of time spent in bursts; required for bursty-cpu, forbidden
    /// otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burst_duty: Option<f64>,
    #[serde(rename = "instance")]
    pub instances: Vec<InstancePlan>,
}

impl FleetScenario {
    pub fn from_toml_str(text: &str) -> Result<Self, SimulateError> {
        let scenario: FleetScenario =
            toml::from_str(text).map_err(|e| SimulateError::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, SimulateError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimulateError::Io {
            path: path.display().to_string(),
            cause: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), SimulateError> {
        let fail = |msg: String| Err(SimulateError::Invalid(msg));
        if self.duration < 40 {
            return fail(format!(
                "duration {} is too short; need at least 40 samples per series",
                self.duration
            ));
        }
        if self.instances.is_empty() {
            return fail("instance list is empty".to_string());
        }
        let mut types: Vec<&str> = Vec::new();
        for plan in &self.instances {
            if plan.instance_type.is_empty() {
                return fail("instance type must not be empty".to_string());
            }
            if types.contains(&plan.instance_type.as_str()) {
                return fail(format!("duplicate instance type '{}'", plan.instance_type));
            }
            types.push(&plan.instance_type);
            if !plan.cost.is_finite() || plan.cost <= 0.0 {
                return fail(format!(
                    "instance '{}': cost must be > 0, got {}",
                    plan.instance_type, plan.cost
                ));
            }
        }
        if !self.instances.iter().any(|p| p.class == PlantedClass::Optimal) {
            return fail("scenario needs at least one optimal instance".to_string());
        }
        match (self.profile, self.burst_duty) {
            (WorkloadProfile::BurstyCpu, None) => {
                fail("bursty-cpu requires burst_duty".to_string())
            }
            (WorkloadProfile::BurstyCpu, Some(d)) if !(d.is_finite() && 0.0 < d && d < 1.0) => {
                fail(format!("burst_duty must lie strictly inside (0,1), got {d}"))
            }
            (WorkloadProfile::BurstyCpu, Some(_)) => Ok(()),
            (_, Some(d)) => fail(format!(
                "burst_duty {d} is only meaningful for the bursty-cpu profile"
            )),
            (_, None) => Ok(()),
        }
    }
}

/// Everything one scenario produces: series, benchmark records, and the
/// planted truth in ascending cost order.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedFleet {
    pub series: Vec<UtilizationSeries>,
    pub benchmarks: Vec<BenchmarkRecord>,
    pub truth: Vec<String>,
}

impl GeneratedFleet {
    pub fn utilization_csv(&self) -> String {
        series_to_csv(&self.series)
    }

    pub fn benchmark_csv(&self) -> String {
        benchmarks_to_csv(&self.benchmarks)
    }

    pub fn truth_text(&self) -> String {
        let mut out = String::new();
        for t in &self.truth {
            out.push_str(t);
            out.push('\n');
        }
        out
    }
}

/// Aggregate targets one series must hit.
#[derive(Debug, Clone, Copy)]
struct SeriesTargets {
    avg: f64,
    p95: f64,
}

fn t(avg: f64, p95: f64) -> SeriesTargets {
    SeriesTargets { avg, p95 }
}

/// Where each class places its cpu/ram/net aggregates, per workload shape.
/// Calibrated against the default profile: optimal lands on the targets,
/// under/over sit far outside the band on every target-bearing resource
/// (never tripping a limit), and limit-breakers cross exactly one limit
/// (ram for cpu-bound shapes, net for the network-heavy shape).
fn class_targets(
    profile: WorkloadProfile,
    class: PlantedClass,
) -> [(&'static str, SeriesTargets); 3] {
    use PlantedClass::*;
    use WorkloadProfile::*;
    match (profile, class) {
        (SteadyCpu | BurstyCpu, Optimal) => {
            [("cpu", t(40.0, 70.0)), ("ram", t(50.0, 70.0)), ("net", t(30.0, 45.0))]
        }
        (SteadyCpu, Under) => {
            [("cpu", t(5.0, 20.0)), ("ram", t(5.0, 10.0)), ("net", t(10.0, 20.0))]
        }
        // The duty-cycle floor (avg >= duty * p95) rules out a 5% average
        // under typical duties, so the bursty under class idles at 8%.
        (BurstyCpu, Under) => {
            [("cpu", t(8.0, 20.0)), ("ram", t(5.0, 10.0)), ("net", t(10.0, 20.0))]
        }
        (SteadyCpu | BurstyCpu, Over) => {
            [("cpu", t(85.0, 97.0)), ("ram", t(85.0, 95.0)), ("net", t(60.0, 75.0))]
        }
        (SteadyCpu | BurstyCpu, LimitBreaker) => {
            [("cpu", t(40.0, 70.0)), ("ram", t(92.0, 96.0)), ("net", t(30.0, 45.0))]
        }
        (NetworkHeavy, Optimal) => {
            [("cpu", t(40.0, 70.0)), ("ram", t(50.0, 70.0)), ("net", t(55.0, 70.0))]
        }
        (NetworkHeavy, Under) => {
            [("cpu", t(5.0, 20.0)), ("ram", t(5.0, 10.0)), ("net", t(15.0, 25.0))]
        }
        (NetworkHeavy, Over) => {
            [("cpu", t(85.0, 97.0)), ("ram", t(85.0, 95.0)), ("net", t(75.0, 79.0))]
        }
        (NetworkHeavy, LimitBreaker) => {
            [("cpu", t(40.0, 70.0)), ("ram", t(50.0, 70.0)), ("net", t(85.0, 99.0))]
        }
    }
}

fn perf_base(profile: WorkloadProfile) -> (f64, f64) {
    // (latency ms, duration s)
    match profile {
        WorkloadProfile::SteadyCpu => (120.0, 300.0),
        WorkloadProfile::BurstyCpu => (150.0, 330.0),
        WorkloadProfile::NetworkHeavy => (95.0, 280.0),
    }
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

/// Samples at and above this sorted position (1-based nearest-rank p95)
/// must equal the p95 target; everything below must stay under it.
fn tail_count(n: usize) -> usize {
    n - (95 * n).div_ceil(100) + 1
}

/// Leveled series: a constant ceiling block of `tail_count` samples pins the
/// p95, the rest jitter around the base level in mirrored pairs so the sum
/// stays put. Ceiling samples are spread evenly through time.
fn steady_series(
    rng: &mut ChaCha8Rng,
    n: usize,
    targets: SeriesTargets,
) -> Result<Vec<f64>, SimulateError> {
    let tail = tail_count(n);
    let base_n = n - tail;
    let base = (n as f64 * targets.avg - tail as f64 * targets.p95) / base_n as f64;
    if !base.is_finite() || base < 0.0 || base > targets.p95 {
        return Err(SimulateError::Invalid(format!(
            "aggregate targets avg={} p95={} are unreachable: the base level comes out at {base:.3}",
            targets.avg, targets.p95
        )));
    }
    let amp = BASE_JITTER.min(base).min(targets.p95 - base).max(0.0);
    let mut base_values = Vec::with_capacity(base_n);
    for _ in 0..base_n / 2 {
        let u = rng.random::<f64>() * amp;
        base_values.push(base + u);
        base_values.push(base - u);
    }
    if base_n % 2 == 1 {
        base_values.push(base);
    }
    let mut values = Vec::with_capacity(n);
    let mut next_base = 0;
    for i in 0..n {
        let is_ceiling = (i + 1) * tail / n > i * tail / n;
        if is_ceiling {
            values.push(targets.p95);
        } else {
            values.push(base_values[next_base]);
            next_base += 1;
        }
    }
    Ok(values.into_iter().map(round4).collect())
}

/// Duty-cycle series: four burst plateaus at the p95 level, valleys at the
/// level that yields the requested average. The plateau count never drops
/// below the p95 tail size, so the percentile still reads the plateau.
fn bursty_series(
    rng: &mut ChaCha8Rng,
    n: usize,
    targets: SeriesTargets,
    duty: f64,
) -> Result<Vec<f64>, SimulateError> {
    let tail = tail_count(n);
    let high_n = ((duty * n as f64).round() as usize).clamp(tail, n - 1);
    let low_n = n - high_n;
    let low = (n as f64 * targets.avg - high_n as f64 * targets.p95) / low_n as f64;
    if !low.is_finite() || low < 0.0 || low > targets.p95 {
        return Err(SimulateError::Invalid(format!(
            "bursty targets avg={} p95={} with duty {duty} are unreachable: \
             the valley level comes out at {low:.3}",
            targets.avg, targets.p95
        )));
    }
    let amp = BASE_JITTER.min(low).min(targets.p95 - low).max(0.0);
    let mut low_values = Vec::with_capacity(low_n);
    for _ in 0..low_n / 2 {
        let u = rng.random::<f64>() * amp;
        low_values.push(low + u);
        low_values.push(low - u);
    }
    if low_n % 2 == 1 {
        low_values.push(low);
    }
    const CYCLES: usize = 4;
    let mut values = Vec::with_capacity(n);
    let mut next_low = 0;
    let mut highs_left = high_n;
    for cycle in 0..CYCLES {
        let start = cycle * n / CYCLES;
        let end = (cycle + 1) * n / CYCLES;
        let cycle_len = end - start;
        let cycles_left = CYCLES - cycle;
        let high_here = highs_left.div_ceil(cycles_left).min(cycle_len);
        for i in 0..cycle_len {
            if i < high_here {
                values.push(targets.p95);
            } else {
                values.push(low_values[next_low]);
                next_low += 1;
            }
        }
        highs_left -= high_here;
    }
    debug_assert_eq!(highs_left, 0);
    debug_assert_eq!(next_low, low_n);
    Ok(values.into_iter().map(round4).collect())
}

/// Builds the whole fleet, then refuses to hand it over unless scoring the
/// series classifies every instance according to its planted class and the
/// benchmark pipeline returns exactly the planted optimal set.
pub fn generate(scenario: &FleetScenario) -> Result<GeneratedFleet, SimulateError> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let n = scenario.duration;

    let mut series = Vec::with_capacity(scenario.instances.len() * METRICS.len());
    for plan in &scenario.instances {
        let targets = class_targets(scenario.profile, plan.class);
        for (metric, series_targets) in targets {
            let values = match (scenario.profile, metric) {
                (WorkloadProfile::BurstyCpu, "cpu") => bursty_series(
                    &mut rng,
                    n,
                    series_targets,
                    scenario.burst_duty.expect("validated"),
                )?,
                _ => steady_series(&mut rng, n, series_targets)?,
            };
            series.push(UtilizationSeries {
                machine_id: plan.instance_type.clone(),
                machine_type: plan.instance_type.clone(),
                metric: metric.to_string(),
                samples: values
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| (SERIES_START_EPOCH + SAMPLE_INTERVAL_SECS * i as i64, v))
                    .collect(),
            });
        }
    }

    let (base_latency, base_duration) = perf_base(scenario.profile);
    let mut benchmarks = Vec::with_capacity(scenario.instances.len());
    for plan in &scenario.instances {
        let latency_jitter = 1.0 + (rng.random::<f64>() * 2.0 - 1.0) * PERF_JITTER;
        let duration_jitter = 1.0 + (rng.random::<f64>() * 2.0 - 1.0) * PERF_JITTER;
        let latency_factor = match plan.class {
            PlantedClass::LimitBreaker => LATENCY_OUTLIER_FACTOR,
            _ => 1.0,
        };
        let duration_factor = match plan.class {
            PlantedClass::Over => DURATION_OUTLIER_FACTOR,
            _ => 1.0,
        };
        let latency = round4(base_latency * latency_jitter * latency_factor);
        let duration = round4(base_duration * duration_jitter * duration_factor);
        benchmarks.push(BenchmarkRecord {
            instance_type: plan.instance_type.clone(),
            duration,
            latency,
            throughput: Some(round4(1_000_000.0 / latency)),
            cost: plan.cost,
        });
    }

    let fleet = GeneratedFleet {
        series,
        benchmarks,
        truth: planted_truth(scenario),
    };
    self_check(scenario, &fleet)?;
    Ok(fleet)
}

fn planted_truth(scenario: &FleetScenario) -> Vec<String> {
    let mut optimal: Vec<&InstancePlan> = scenario
        .instances
        .iter()
        .filter(|p| p.class == PlantedClass::Optimal)
        .collect();
    optimal.sort_by(|a, b| {
        a.cost
            .partial_cmp(&b.cost)
            .expect("costs are finite")
            .then_with(|| a.instance_type.cmp(&b.instance_type))
    });
    optimal.into_iter().map(|p| p.instance_type.clone()).collect()
}

fn self_check(scenario: &FleetScenario, fleet: &GeneratedFleet) -> Result<(), SimulateError> {
    let computed_truth = ground_truth(&fleet.benchmarks).map_err(|e| {
        SimulateError::Contradictory(format!("benchmark truth cannot be derived: {e}"))
    })?;
    if computed_truth != fleet.truth {
        return Err(SimulateError::Contradictory(format!(
            "benchmark pipeline yields {computed_truth:?} but the planted optimal set is {:?}",
            fleet.truth
        )));
    }
    let profile = ScoringProfile::builtin_default();
    let scored = score_fleet(&profile, &fleet.series)
        .map_err(|e| SimulateError::Contradictory(format!("generated fleet fails to score: {e}")))?;
    for machine in &scored {
        let plan = scenario
            .instances
            .iter()
            .find(|p| p.instance_type == machine.machine_id)
            .expect("scored machine comes from the scenario");
        let passes = machine
            .report
            .verdicts
            .as_ref()
            .expect("pipeline classifies")
            .s1_pass;
        let should_pass = plan.class == PlantedClass::Optimal;
        if passes != should_pass {
            return Err(SimulateError::Contradictory(format!(
                "instance '{}' is planted {} but its s1 of {:.4} {} the threshold",
                plan.instance_type,
                plan.class,
                machine.report.s1,
                if passes { "passes" } else { "fails" }
            )));
        }
        if plan.class == PlantedClass::LimitBreaker && machine.report.s1 != 1.0 {
            return Err(SimulateError::Contradictory(format!(
                "limit-breaker '{}' must saturate s1, got {}",
                plan.instance_type, machine.report.s1
            )));
        }
    }
    Ok(())
}
