//! Score a single machine's aggregated utilization.
//!
//! Run with: cargo run --example score_machine

use wise::{wise_scores, ClassificationThresholds, ResourceReading, ResourceSpec};

fn main() {
    // Four target-bearing resources plus a penalty-only transfer cap.
    let specs = vec![
        ResourceSpec::target_bearing("cpu/avg", 40.0, 30.0),
        ResourceSpec::target_bearing("cpu/p95", 70.0, 20.0),
        ResourceSpec::target_bearing("ram/avg", 50.0, 20.0).with_limit(90.0),
        ResourceSpec::target_bearing("ram/p95", 70.0, 30.0),
        ResourceSpec::penalty_only("net/avg", 80.0),
    ];

    let fleet = [
        ("well-sized", vec![40.0, 70.0, 50.0, 70.0, 25.0]),
        ("oversized", vec![8.0, 22.0, 12.0, 18.0, 5.0]),
        ("undersized", vec![88.0, 96.0, 84.0, 93.0, 60.0]),
        ("cap-breaker", vec![40.0, 70.0, 50.0, 70.0, 85.0]),
    ];

    let thresholds = ClassificationThresholds::default();
    for (label, rates) in fleet {
        let readings: Vec<ResourceReading> = specs
            .iter()
            .zip(&rates)
            .map(|(spec, &rate)| ResourceReading::new(&spec.name, rate))
            .collect();
        let report = wise_scores(label, &readings, &specs)
            .expect("readings cover every spec")
            .classified(&thresholds);
        let verdicts = report.verdicts.as_ref().unwrap();
        println!(
            "{label:<11} s1={:.4} s2={:.4} s3={:.4} s4={:.4}  s1 {}",
            report.s1,
            report.s2,
            report.s3,
            report.s4,
            if verdicts.s1_pass { "pass" } else { "FAIL" }
        );
        for detail in &report.details {
            if detail.penalty > 0.0 {
                println!("  {} is over its limit (penalty {})", detail.name, detail.penalty);
            }
        }
    }
}
