//! Derive the cost-performance truth list from benchmark results.
//!
//! Run with: cargo run --example benchmark_truth

use wise::validation::{ground_truth, iqr_filter, parse_benchmarks_csv, OutlierMetric};

fn main() {
    // Six instances: four healthy, one with pathological latency, one that
    // takes eight times longer to finish the run.
    let csv = "\
instance_type,duration,latency,throughput,cost
m6i.large,301.2,118.4,8445.9,1.00
c6i.large,296.8,121.9,8203.4,1.30
r6i.large,305.5,119.1,8396.3,1.60
r6i.4xlarge,292.4,116.2,8605.9,6.40
t3.nano,298.1,2391.0,418.2,0.25
t3.small,2402.7,123.5,8097.2,0.45
";
    let records = parse_benchmarks_csv(csv).expect("benchmarks parse");

    let after_latency = iqr_filter(&records, OutlierMetric::Latency).unwrap();
    println!(
        "latency pass drops {:?}",
        records
            .iter()
            .filter(|r| !after_latency.contains(r))
            .map(|r| r.instance_type.as_str())
            .collect::<Vec<_>>()
    );

    let after_duration = iqr_filter(&after_latency, OutlierMetric::Duration).unwrap();
    println!(
        "duration pass drops {:?}",
        after_latency
            .iter()
            .filter(|r| !after_duration.contains(r))
            .map(|r| r.instance_type.as_str())
            .collect::<Vec<_>>()
    );

    // r6i.4xlarge performs fine but costs 6.4x the cheapest survivor, which
    // pushes it outside the 3x cost band.
    let truth = ground_truth(&records).unwrap();
    println!("truth, cheapest first: {truth:?}");
}
