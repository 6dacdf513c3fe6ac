//! Constant and decreasing epsilon-greedy on one preset: historic
//! bottleneck at a few checkpoints and how fast the optimum is found.
//!
//! cargo run --release --example learn_egreedy [preset] [reps]

use std::sync::Arc;

use dresg::config::{parse_policy, ScenarioPreset};
use dresg::harness::{run_prepared, PreparedScenario};

fn main() {
    let mut args = std::env::args().skip(1);
    let preset = ScenarioPreset::find(&args.next().unwrap_or_else(|| "E".into())).expect("unknown preset");
    let reps: usize = args.next().map_or(1000, |r| r.parse().unwrap());
    let prepared = PreparedScenario::new(Arc::new(preset.scenario())).unwrap();
    println!(
        "{preset}: optimum {} with e_b {:.4e} J, {reps} repetitions\n",
        prepared.optimal_action, prepared.optimal_e_b
    );

    let checkpoints = [10, 50, 100, 250, preset.iterations];
    print!("{:<10}", "policy");
    for c in checkpoints {
        print!(" {:>11}", format!("E({c})"));
    }
    println!(" {:>8} {:>8}", "mean i*", "found");
    for name in ["cnt:1", "cnt:0.2", "dec:0.2", "dec:0.5", "dec:1"] {
        let mut exp = preset.config(&parse_policy(name).unwrap()).experiment().unwrap();
        exp.repetitions = reps;
        let log = run_prepared(&exp, &prepared).unwrap();
        print!("{name:<10}");
        for c in checkpoints {
            print!(" {:>11.4e}", log.historic_bottleneck(c));
        }
        let found = log.repetitions.iter().filter(|r| r.optimal_iteration.is_some()).count();
        let mean = log.mean_optimal_iteration().map_or("-".into(), |m| format!("{m:.1}"));
        println!(" {mean:>8} {:>7.1}%", 100.0 * found as f64 / reps as f64);
    }
}
