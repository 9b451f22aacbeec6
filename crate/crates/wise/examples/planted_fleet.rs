//! Full loop: synthesize a fleet, score it, and check the verdicts against
//! the benchmark-derived truth.
//!
//! Run with: cargo run --example planted_fleet

use wise::pipeline::score_fleet;
use wise::simulate::{generate, FleetScenario, InstancePlan, PlantedClass, WorkloadProfile};
use wise::validation::{ground_truth, predicted_set};
use wise::{precision_recall, rank_biased_overlap, ScoringProfile, Variant};

fn plan(instance_type: &str, cost: f64, class: PlantedClass) -> InstancePlan {
    InstancePlan {
        instance_type: instance_type.to_string(),
        cost,
        class,
    }
}

fn main() {
    let scenario = FleetScenario {
        seed: 2024,
        profile: WorkloadProfile::SteadyCpu,
        duration: 120,
        burst_duty: None,
        instances: vec![
            plan("m6i.large", 1.0, PlantedClass::Optimal),
            plan("c6i.large", 1.3, PlantedClass::Optimal),
            plan("r6i.large", 1.6, PlantedClass::Optimal),
            plan("r6i.4xlarge", 6.4, PlantedClass::Under),
            plan("t3.small", 0.45, PlantedClass::Over),
            plan("t3.nano", 0.25, PlantedClass::LimitBreaker),
        ],
    };

    // generate() refuses to emit a fleet whose scores or benchmarks would
    // contradict the planted classes, so everything below is guaranteed to
    // reconcile.
    let fleet = generate(&scenario).expect("scenario is consistent");
    println!(
        "generated {} series and {} benchmark rows",
        fleet.series.len(),
        fleet.benchmarks.len()
    );

    let profile = ScoringProfile::builtin_default();
    let machines = score_fleet(&profile, &fleet.series).expect("fleet scores");
    for machine in &machines {
        println!("  {:<12} s1={:.4}", machine.machine_id, machine.report.s1);
    }

    let truth = ground_truth(&fleet.benchmarks).unwrap();
    let with_costs: Vec<_> = machines
        .iter()
        .map(|m| {
            let cost = fleet
                .benchmarks
                .iter()
                .find(|b| b.instance_type == m.machine_id)
                .unwrap()
                .cost;
            (&m.report, cost)
        })
        .collect();
    let predicted = predicted_set(&with_costs, Variant::S1, &profile.thresholds);

    let pr = precision_recall(&truth, &predicted).unwrap();
    let overlap = rank_biased_overlap(&truth, &predicted, 0.9).unwrap();
    println!("truth:     {truth:?}");
    println!("predicted: {predicted:?}");
    println!(
        "precision {:?}, recall {:.2}, rank overlap {:.3}",
        pr.precision, pr.recall, overlap
    );
}
