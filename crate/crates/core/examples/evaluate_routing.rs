//! Per-ring energy of single-hop, next-ring-hop and the optimal routing.
//!
//! cargo run --example evaluate_routing [preset]

use dresg::action::HopsCombination;
use dresg::config::ScenarioPreset;
use dresg::EnergyReport;

fn show(label: &str, r: &EnergyReport) {
    println!("{label} {}: bottleneck ring {}, e_b {:.4e} J", r.action, r.bottleneck_ring, r.e_b);
    println!("  ring hop  dist(m)  lvl  rate(bps) payloads packets   e_tx(J)    e_rx(J)");
    for ring in &r.rings {
        let l = &ring.load;
        println!(
            "  {:>4} {:>3} {:>8.1} {:>4} {:>10} {:>8} {:>7} {:>10.3e} {:>10.3e}",
            l.ring, l.hop, l.distance, l.tx_config.level, l.tx_config.rate_bps,
            l.payloads_out, l.packets_out, ring.e_tx, ring.e_rx
        );
    }
}

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "E".into());
    let preset = ScenarioPreset::find(&name).expect("unknown preset");
    let s = preset.scenario();
    println!("{preset}, {} stations\n", s.network.node_count());

    let rings = s.rings();
    show("single hop", &s.evaluate(&HopsCombination::single_hop(rings)).unwrap());
    show("next-ring hop", &s.evaluate(&HopsCombination::next_ring_hop(rings)).unwrap());
    let (_, best) = s.brute_force_optimal().unwrap();
    show("optimal", &best);
}
