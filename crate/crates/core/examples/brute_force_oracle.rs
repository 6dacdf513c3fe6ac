//! Energy-optimal routing of every preset, found by exhaustive search.
//!
//! cargo run --release --example brute_force_oracle

use std::time::Instant;

use dresg::action::HopsCombination;
use dresg::config::ScenarioPreset;

fn main() {
    println!("{:<6} {:>8} {:<18} {:>12} {:>12} {:>9}", "preset", "stations", "optimal", "e_b (J)", "single hop", "time");
    for p in ScenarioPreset::all() {
        let s = p.scenario();
        let t = Instant::now();
        let (best, report) = s.brute_force_optimal().unwrap();
        let el = t.elapsed();
        let single = s.evaluate(&HopsCombination::single_hop(p.rings)).unwrap();
        println!(
            "{:<6} {:>8} {:<18} {:>12.4e} {:>12.4e} {:>9.2?}",
            p.name, s.network.node_count(), best.to_string(), report.e_b, single.e_b, el
        );
    }
}
