//! Coverage range of the bundled transceiver and the cheapest
//! (power, rate) pair at a few distances.
//!
//! cargo run --example link_budget

use dresg::config::{default_link, default_profile};
use dresg::energy::PacketModel;
use dresg::link::{max_range, select_tx_config};

fn main() {
    let profile = default_profile();
    let link = default_link();
    let bits = PacketModel::default().packet_bits();
    let range = max_range(&profile, &link);
    println!("{}: coverage range {range:.1} m", profile.name);

    println!("{:>10} {:>6} {:>8} {:>10} {:>12}", "distance", "level", "dBm", "bps", "tx energy");
    for frac in [0.05, 0.1, 0.25, 0.5, 0.75, 1.0] {
        let d = frac * range;
        let c = select_tx_config(&profile, &link, d, bits).unwrap();
        println!(
            "{d:>10.1} {:>6} {:>8.1} {:>10} {:>12.4e}",
            c.level,
            c.power_dbm,
            c.rate_bps,
            c.tx_energy(bits, profile.supply_voltage)
        );
    }

    match select_tx_config(&profile, &link, 1.5 * range, bits) {
        Ok(_) => unreachable!(),
        Err(e) => println!("beyond range: {e}"),
    }
}
