//! Profiles carry fleet-wide resource specs plus per-machine-type overrides.
//!
//! Run with: cargo run --example resolve_overrides

use wise::ScoringProfile;

fn main() {
    let doc = r#"
        name = "memory-tuned"

        [[resource]]
        name = "cpu/avg"
        target = 40.0
        range = 30.0

        [[resource]]
        name = "ram/avg"
        target = 50.0
        range = 20.0
        resource_max = 90.0

        # Cache boxes run hot on ram by design: move the target, widen the
        # band, lift the cap. Everything not named here is inherited.
        [machine_overrides]
        "r6i.large" = [
            { name = "ram/avg", target = 75.0, range = 15.0, resource_max = 95.0 },
        ]
    "#;

    let profile = ScoringProfile::from_toml_str(doc).expect("profile is valid");
    for machine_type in ["m6i.large", "r6i.large"] {
        println!("{machine_type}:");
        for spec in profile.resolve(machine_type) {
            match (spec.target, spec.range) {
                (Some(t), Some(r)) => {
                    let cap = spec
                        .resource_max
                        .map(|m| format!(", cap {m}"))
                        .unwrap_or_default();
                    println!("  {:<8} target {t} +/- {r}{cap}", spec.name);
                }
                _ => println!("  {:<8} penalty-only", spec.name),
            }
        }
    }

    println!();
    let built_in = ScoringProfile::builtin_default();
    println!(
        "built-in profile '{}' defines {} resources",
        built_in.name,
        built_in.global_specs.len()
    );
}
