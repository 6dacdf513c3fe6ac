//! Loads a config document, runs it and writes the CSV outputs.
//!
//! cargo run --release --example config_run [config.toml] [out-dir]

use std::path::PathBuf;

use dresg::harness::run_experiment;
use dresg::load_config;
use dresg::output::write_run;

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/scenario_e.toml")
    });
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("dresg-run"));

    let cfg = load_config(&path).unwrap();
    let log = run_experiment(&cfg.experiment().unwrap()).unwrap();
    write_run(&out, &cfg, &log).unwrap();

    println!("{} -> {}", path.display(), out.display());
    println!(
        "policy {}, optimum {}, mean i* {:?}, E(I) = {:.4e} J",
        log.policy.label(),
        log.optimal_action,
        log.mean_optimal_iteration(),
        log.mean_historic.last().unwrap()
    );
}
