//! Command-line front end.
//!
//! Three subcommands: `score` evaluates a fleet's utilization against a
//! profile, `validate` compares scoring verdicts with benchmark-derived
//! truth, and `simulate` generates a synthetic fleet from a scenario. Each
//! writes its outputs plus a replayable manifest into the output directory,
//! only after the whole computation has succeeded, so a failing run leaves
//! no partial files behind.
//!
//! Exit codes: 0 success, 1 data error (unreadable or malformed inputs),
//! 2 usage or configuration error, 3 scoring threshold failure. `score`
//! returns 3 when any machine fails any requested variant.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ingest::load_series;
use crate::pipeline::{score_fleet, PipelineError, ScoredMachine};
use crate::profile::ScoringProfile;
use crate::report::{
    score_document_json, score_table, timeline_csv, validation_document_json, validation_table,
    Methods, RunManifest, ValidationReport,
};
use crate::scoring::{ClassificationThresholds, Variant};
use crate::simulate::{generate, FleetScenario, SimulateError, GENERATOR_ALGORITHM};
use crate::validation::{
    ground_truth, load_benchmarks, precision_recall, predicted_set, rank_biased_overlap,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_THRESHOLD: i32 = 3;

#[derive(Parser)]
#[command(
    name = "wise",
    version,
    about = "Workload/machine fit scoring for cloud fleets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score fleet utilization and classify each machine
    Score(ScoreArgs),
    /// Compare scoring verdicts against benchmark-derived truth
    Validate(ValidateArgs),
    /// Generate a synthetic fleet with planted verdicts
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// Human-readable summary on stdout
    Table,
    /// The full JSON document on stdout
    Document,
}

#[derive(Args)]
struct ScoreArgs {
    /// Utilization series, CSV or JSON
    utilization: PathBuf,
    /// Scoring profile TOML; defaults to the built-in profile
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Index variant to gate on: s1, s2, s3, s4, or all
    #[arg(long, default_value = "s1")]
    variant: String,
    /// Directory for score_report.json, timeline.csv, manifest.json
    #[arg(long, default_value = "wise-out")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    /// Comma-separated overrides, e.g. tanh_overall=0.8,exp_overall=0.3
    #[arg(long)]
    threshold_overrides: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Utilization series, CSV or JSON
    utilization: PathBuf,
    /// Benchmark results CSV for the same machines
    benchmarks: PathBuf,
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Index variants to evaluate: s1, s2, s3, s4, or all
    #[arg(long, default_value = "all")]
    variant: String,
    /// Directory for validation_report.json and manifest.json
    #[arg(long, default_value = "wise-out")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    /// Rank-overlap persistence, strictly between 0 and 1
    #[arg(long, default_value_t = 0.9)]
    rbo_p: f64,
    #[arg(long)]
    threshold_overrides: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Fleet scenario TOML
    scenario: PathBuf,
    /// Directory for utilization.csv, benchmarks.csv, truth.txt, manifest.json
    #[arg(long, default_value = "wise-out")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
}

/// Failure carrying its process exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn data(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<crate::ingest::IngestError> for Failure {
    fn from(e: crate::ingest::IngestError) -> Self {
        Failure::data(e.to_string())
    }
}

impl From<crate::profile::ProfileError> for Failure {
    fn from(e: crate::profile::ProfileError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_configuration() {
            Failure::usage(e.to_string())
        } else {
            Failure::data(e.to_string())
        }
    }
}

impl From<crate::validation::ValidationError> for Failure {
    fn from(e: crate::validation::ValidationError) -> Self {
        Failure::data(e.to_string())
    }
}

impl From<SimulateError> for Failure {
    fn from(e: SimulateError) -> Self {
        match e {
            SimulateError::Io { .. } => Failure::data(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Entry point used by both the binary and in-process tests.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Score(args) => cmd_score(&args),
        Command::Validate(args) => cmd_validate(&args),
        Command::Simulate(args) => cmd_simulate(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn parse_variants(text: &str) -> Result<Vec<Variant>, Failure> {
    if text.eq_ignore_ascii_case("all") {
        return Ok(Variant::ALL.to_vec());
    }
    text.parse::<Variant>().map(|v| vec![v]).map_err(|_| {
        Failure::usage(format!(
            "unknown variant '{text}'; expected s1, s2, s3, s4, or all"
        ))
    })
}

fn apply_overrides(
    thresholds: &mut ClassificationThresholds,
    text: &str,
) -> Result<(), Failure> {
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part.split_once('=').ok_or_else(|| {
            Failure::usage(format!("threshold override '{part}' is not key=value"))
        })?;
        let value: f64 = value.trim().parse().map_err(|_| {
            Failure::usage(format!("threshold override '{part}' has a non-numeric value"))
        })?;
        let slot = match key.trim() {
            "tanh_overall" => &mut thresholds.tanh_overall,
            "tanh_resource" => &mut thresholds.tanh_resource,
            "exp_overall" => &mut thresholds.exp_overall,
            "exp_resource" => &mut thresholds.exp_resource,
            other => {
                return Err(Failure::usage(format!(
                    "unknown threshold '{other}'; expected tanh_overall, \
                     tanh_resource, exp_overall, or exp_resource"
                )))
            }
        };
        *slot = value;
    }
    thresholds
        .validate()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn load_profile_with_overrides(
    path: &Option<PathBuf>,
    overrides: &Option<String>,
) -> Result<ScoringProfile, Failure> {
    let mut profile = match path {
        Some(p) => ScoringProfile::load(p)?,
        None => ScoringProfile::builtin_default(),
    };
    if let Some(text) = overrides {
        apply_overrides(&mut profile.thresholds, text)?;
    }
    Ok(profile)
}

fn write_outputs(out_dir: &Path, files: &[(&str, &str)]) -> Result<(), Failure> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Failure::data(format!("cannot create '{}': {e}", out_dir.display())))?;
    for (name, content) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| Failure::data(format!("cannot write '{}': {e}", path.display())))?;
    }
    Ok(())
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn variant_names(variants: &[Variant]) -> Vec<String> {
    variants.iter().map(|v| v.to_string()).collect()
}

fn cmd_score(args: &ScoreArgs) -> Result<i32, Failure> {
    let variants = parse_variants(&args.variant)?;
    let profile = load_profile_with_overrides(&args.profile, &args.threshold_overrides)?;
    let series = load_series(&args.utilization)?;
    let machines = score_fleet(&profile, &series)?;

    let manifest = RunManifest {
        tool: "wise".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: "score".to_string(),
        profile_path: args.profile.as_deref().map(display),
        profile_name: Some(profile.name.clone()),
        inputs: vec![display(&args.utilization)],
        variants: variant_names(&variants),
        thresholds: Some(profile.thresholds.clone()),
        methods: Methods::scoring(),
        rbo_p: None,
        seed: None,
        rng_algorithm: None,
    };
    let document = score_document_json(&manifest, &machines);
    let timeline = timeline_csv(&machines);
    write_outputs(
        &args.out_dir,
        &[
            ("score_report.json", document.as_str()),
            ("timeline.csv", timeline.as_str()),
            ("manifest.json", manifest.to_json().as_str()),
        ],
    )?;
    match args.format {
        OutputFormat::Table => print!("{}", score_table(&machines, &variants)),
        OutputFormat::Document => print!("{document}"),
    }

    let any_failure = machines.iter().any(|m| {
        let verdicts = m.report.verdicts.as_ref().expect("fleet scoring classifies");
        variants.iter().any(|&v| !verdicts.variant_pass(v))
    });
    Ok(if any_failure { EXIT_THRESHOLD } else { EXIT_OK })
}

/// Machine ids and benchmark instance types must name the same set.
fn check_coverage(
    machines: &[ScoredMachine],
    benchmarks: &[crate::validation::BenchmarkRecord],
) -> Result<(), Failure> {
    let scored: std::collections::BTreeSet<&str> =
        machines.iter().map(|m| m.machine_id.as_str()).collect();
    let benched: std::collections::BTreeSet<&str> =
        benchmarks.iter().map(|b| b.instance_type.as_str()).collect();
    let unbenched: Vec<&str> = scored.difference(&benched).copied().collect();
    if !unbenched.is_empty() {
        return Err(Failure::data(format!(
            "no benchmark results for: {}",
            unbenched.join(", ")
        )));
    }
    let unscored: Vec<&str> = benched.difference(&scored).copied().collect();
    if !unscored.is_empty() {
        return Err(Failure::data(format!(
            "no utilization series for: {}",
            unscored.join(", ")
        )));
    }
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<i32, Failure> {
    let variants = parse_variants(&args.variant)?;
    if !(args.rbo_p.is_finite() && 0.0 < args.rbo_p && args.rbo_p < 1.0) {
        return Err(Failure::usage(format!(
            "--rbo-p must lie strictly between 0 and 1, got {}",
            args.rbo_p
        )));
    }
    let profile = load_profile_with_overrides(&args.profile, &args.threshold_overrides)?;
    let series = load_series(&args.utilization)?;
    let machines = score_fleet(&profile, &series)?;
    let benchmarks = load_benchmarks(&args.benchmarks)?;
    check_coverage(&machines, &benchmarks)?;

    let truth = ground_truth(&benchmarks)?;
    let with_costs: Vec<(&crate::scoring::MachineScoreReport, f64)> = machines
        .iter()
        .map(|m| {
            let cost = benchmarks
                .iter()
                .find(|b| b.instance_type == m.machine_id)
                .expect("coverage checked")
                .cost;
            (&m.report, cost)
        })
        .collect();

    let mut reports = Vec::with_capacity(variants.len());
    for &variant in &variants {
        let predicted = predicted_set(&with_costs, variant, &profile.thresholds);
        let pr = precision_recall(&truth, &predicted)?;
        let rank_overlap = rank_biased_overlap(&truth, &predicted, args.rbo_p)?;
        let threshold = if variant.lower_is_better() {
            profile.thresholds.tanh_overall
        } else {
            profile.thresholds.exp_overall
        };
        reports.push(ValidationReport {
            variant: variant.to_string(),
            threshold,
            truth: truth.clone(),
            predicted,
            precision: pr.precision,
            recall: pr.recall,
            rank_overlap,
        });
    }

    let manifest = RunManifest {
        tool: "wise".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: "validate".to_string(),
        profile_path: args.profile.as_deref().map(display),
        profile_name: Some(profile.name.clone()),
        inputs: vec![display(&args.utilization), display(&args.benchmarks)],
        variants: variant_names(&variants),
        thresholds: Some(profile.thresholds.clone()),
        methods: Methods::validation(),
        rbo_p: Some(args.rbo_p),
        seed: None,
        rng_algorithm: None,
    };
    let document = validation_document_json(&manifest, &reports);
    write_outputs(
        &args.out_dir,
        &[
            ("validation_report.json", document.as_str()),
            ("manifest.json", manifest.to_json().as_str()),
        ],
    )?;
    match args.format {
        OutputFormat::Table => print!("{}", validation_table(&reports)),
        OutputFormat::Document => print!("{document}"),
    }
    Ok(EXIT_OK)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32, Failure> {
    let scenario = FleetScenario::load(&args.scenario)?;
    let fleet = generate(&scenario)?;

    let manifest = RunManifest {
        tool: "wise".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: "simulate".to_string(),
        profile_path: None,
        profile_name: None,
        inputs: vec![display(&args.scenario)],
        variants: Vec::new(),
        thresholds: None,
        methods: Methods::scoring(),
        rbo_p: None,
        seed: Some(scenario.seed),
        rng_algorithm: Some(GENERATOR_ALGORITHM.to_string()),
    };
    write_outputs(
        &args.out_dir,
        &[
            ("utilization.csv", fleet.utilization_csv().as_str()),
            ("benchmarks.csv", fleet.benchmark_csv().as_str()),
            ("truth.txt", fleet.truth_text().as_str()),
            ("manifest.json", manifest.to_json().as_str()),
        ],
    )?;
    match args.format {
        OutputFormat::Table => {
            let samples: usize = fleet.series.iter().map(|s| s.samples.len()).sum();
            println!(
                "generated {} instances ({} series, {samples} samples) into {}",
                scenario.instances.len(),
                fleet.series.len(),
                args.out_dir.display()
            );
            println!("truth: {}", fleet.truth.join(", "));
        }
        OutputFormat::Document => {
            let doc = serde_json::json!({
                "manifest": manifest,
                "truth": fleet.truth,
                "series": fleet.series.len(),
                "benchmarks": fleet.benchmarks.len(),
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("summary serializes")
            );
        }
    }
    Ok(EXIT_OK)
}
