//! Rank-biased overlap between recommendation lists.
//!
//! Run with: cargo run --example rank_overlap

use wise::rank_biased_overlap;

fn main() {
    let truth = vec!["m6i.large", "c6i.large", "r6i.large"];
    let candidates: [(&str, Vec<&str>); 4] = [
        ("identical", vec!["m6i.large", "c6i.large", "r6i.large"]),
        ("head swap", vec!["c6i.large", "m6i.large", "r6i.large"]),
        ("tail only", vec!["r6i.large"]),
        ("disjoint", vec!["t3.micro", "t3.nano"]),
    ];

    for (label, list) in &candidates {
        let score = rank_biased_overlap(&truth, list, 0.9).unwrap();
        println!("{label:<10} {score:.4}");
    }

    // Persistence p weights the head: small p cares almost only about the
    // first position, large p looks deep into both lists.
    println!();
    let head_swap = vec!["c6i.large", "m6i.large", "r6i.large"];
    for p in [0.1, 0.5, 0.9, 0.99] {
        let score = rank_biased_overlap(&truth, &head_swap, p).unwrap();
        println!("head swap at p={p:<4} {score:.4}");
    }
}
