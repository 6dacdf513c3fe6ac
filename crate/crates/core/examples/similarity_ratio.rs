//! Similarity-guided exploration against plain decreasing epsilon-greedy.
//! Prints rho_s = E(plain) / E(similarity) at the horizon; above 1 favours
//! similarity.
//!
//! cargo run --release --example similarity_ratio [preset] [reps]

use std::sync::Arc;

use dresg::config::{parse_policy, ScenarioPreset};
use dresg::harness::{run_prepared, similarity_ratio, PreparedScenario};

fn main() {
    let mut args = std::env::args().skip(1);
    let preset = ScenarioPreset::find(&args.next().unwrap_or_else(|| "A".into())).expect("unknown preset");
    let reps: usize = args.next().map_or(200, |r| r.parse().unwrap());
    let prepared = PreparedScenario::new(Arc::new(preset.scenario())).unwrap();
    println!("{preset}, {reps} repetitions");

    let run = |policy: &str| {
        let mut exp = preset.config(&parse_policy(policy).unwrap()).experiment().unwrap();
        exp.repetitions = reps;
        run_prepared(&exp, &prepared).unwrap()
    };
    for eps in ["0.2", "0.5", "1"] {
        let plain = run(&format!("dec:{eps}"));
        for sim in ["sim-dec:{e}:0", "sim-dec:{e}:0.5", "sim-dec:{e}:1", "sim-dec:{e}:1@definition"] {
            let sim = sim.replace("{e}", eps);
            let rho = similarity_ratio(&plain, &run(&sim)).unwrap();
            println!("  dec:{eps:<4} vs {sim:<26} rho_s(I) = {:.4}", rho.last().unwrap());
        }
    }
}
