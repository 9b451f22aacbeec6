//! Workload/machine fitness scoring from resource utilization data.
//!
//! A machine is scored against a workload profile that states, per resource,
//! a target utilization, an expected range, and an optional hard limit.
//! Deviations are normalized to z-scores, squashed into bounded per-resource
//! scores, and combined into four fleet-comparable indices (`s1`..`s4`).
//! Limit violations add a penalty that drives the index to its worst value.
//!
//! The crate is organized so each stage is usable on its own:
//!
//! * [`scoring`]: z-scores, per-resource scores, penalties, the four indices,
//!   and threshold classification.
//! * [`profile`]: named scoring profiles with per-machine-type overrides.
//! * [`ingest`]: utilization series parsing (CSV/JSON) and aggregation
//!   (average, nearest-rank percentiles).
//! * [`validation`]: benchmark-based ground truth (IQR outlier filter plus a
//!   cost band), precision/recall, and rank-biased overlap.
//! * [`simulate`]: deterministic synthetic fleets with planted verdicts.
//! * [`pipeline`]: glue that scores a whole fleet from raw series.
//! * [`report`]: run manifests, score timelines, and report documents.
//!
//! Start with the `examples/` directory; each example exercises one of these
//! capabilities end to end. The `wise` binary wraps the same entry points as
//! `score`, `validate`, and `simulate` subcommands.

pub mod cli;
pub mod ingest;
pub mod pipeline;
pub mod profile;
pub mod report;
pub mod scoring;
pub mod simulate;
pub mod validation;

pub use ingest::{AggregationKind, AggregationRequest, UtilizationSeries};
pub use profile::ScoringProfile;
pub use scoring::{
    wise_scores, ClassificationThresholds, MachineScoreReport, ResourceReading, ResourceSpec,
    Variant,
};
pub use validation::{precision_recall, rank_biased_overlap, BenchmarkRecord};
