//! From raw utilization samples to scoreable readings.
//!
//! Run with: cargo run --example aggregate_series

use wise::ingest::{aggregate, parse_series_csv};
use wise::AggregationRequest;

fn main() {
    // One machine, two metrics, five samples each. A quiet cpu with one
    // spike; ram flat at half.
    let csv = "\
machine_id,machine_type,metric,timestamp,rate
web-1,m6i.large,cpu,1700000000,21.0
web-1,m6i.large,cpu,1700000060,19.5
web-1,m6i.large,cpu,1700000120,20.5
web-1,m6i.large,cpu,1700000180,92.0
web-1,m6i.large,cpu,1700000240,20.0
web-1,m6i.large,ram,1700000000,50.0
web-1,m6i.large,ram,1700000060,51.0
web-1,m6i.large,ram,1700000120,49.0
web-1,m6i.large,ram,1700000180,50.5
web-1,m6i.large,ram,1700000240,49.5
";

    let series = parse_series_csv(csv).expect("series parses");
    println!("parsed {} series", series.len());

    for spec_name in ["cpu/avg", "cpu/p95", "ram/avg", "ram/p95"] {
        let request = AggregationRequest::from_spec_name(spec_name).unwrap();
        let matching = series
            .iter()
            .find(|s| s.metric == request.metric)
            .expect("metric present");
        let reading = aggregate(matching, &request).unwrap();
        println!("{:<8} -> {:.2}", reading.name, reading.rate);
    }

    // The p95 of five samples is the maximum: rank ceil(95*5/100) = 5.
    // One spike therefore dominates the percentile but barely moves the
    // average, which is exactly why both views feed the score.
}
