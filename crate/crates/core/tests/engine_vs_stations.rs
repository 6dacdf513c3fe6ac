mod common;

use common::per_node::simulate;
use dresg::action::ActionSpace;
use dresg::config::{default_link, default_profile};
use dresg::energy::PacketModel;
use dresg::link::max_range;
use dresg::{NetworkStructure, Scenario, Spreading};

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn scenario(rings: usize, c: u64, b: u64, d: f64) -> Scenario {
    let net = NetworkStructure::build(rings, c, b, d, Spreading::Equidistant).unwrap();
    Scenario::new(net, default_profile(), default_link(), PacketModel::default()).unwrap()
}

#[test]
fn ring_engine_matches_station_simulation() {
    let profile = default_profile();
    let link = default_link();
    let packet = PacketModel::default();
    let d = max_range(&profile, &link);
    for rings in 1..=4 {
        let space = ActionSpace::enumerate(rings).unwrap();
        for c in 1..=3 {
            for b in 1..=2 {
                let s = scenario(rings, c, b, d);
                for a in space.actions() {
                    let hops: Vec<usize> = a.hops().collect();
                    let round = simulate(rings, c, b, d, &hops, &profile, &link, &packet).unwrap();
                    let rep = s.evaluate(a).unwrap();
                    for r in 1..=rings {
                        let e = rep.ring(r).e;
                        assert!(
                            rel(e, round.ring_max[r - 1]) <= 1e-9,
                            "R{rings} c{c} B{b} {a} ring {r}: {e} vs {}",
                            round.ring_max[r - 1]
                        );
                    }
                    assert!(rel(rep.e_b, round.e_b) <= 1e-9);
                    assert_eq!(rep.bottleneck_ring, round.bottleneck_ring, "{a}");
                }
            }
        }
    }
}

#[test]
fn stations_of_a_ring_carry_identical_load() {
    let profile = default_profile();
    let link = default_link();
    let packet = PacketModel::default();
    let d = max_range(&profile, &link);
    let round = simulate(4, 3, 2, d, &[1, 2, 1, 3], &profile, &link, &packet).unwrap();
    for ring in 1..=4 {
        let loads: Vec<u64> = round
            .stations
            .iter()
            .filter(|s| s.ring == ring)
            .map(|s| s.payloads_out)
            .collect();
        assert!(loads.windows(2).all(|w| w[0] == w[1]), "ring {ring}: {loads:?}");
    }
}

#[test]
fn brute_force_matches_station_simulation_minimum() {
    let profile = default_profile();
    let link = default_link();
    let packet = PacketModel::default();
    let d = max_range(&profile, &link);
    let s = scenario(3, 2, 1, d);
    let (best, report) = s.brute_force_optimal().unwrap();
    let space = ActionSpace::enumerate(3).unwrap();
    let mut min: Option<(f64, String)> = None;
    for a in space.actions() {
        let hops: Vec<usize> = a.hops().collect();
        let e = simulate(3, 2, 1, d, &hops, &profile, &link, &packet).unwrap().e_b;
        if min.as_ref().is_none_or(|(m, _)| e < *m) {
            min = Some((e, a.to_string()));
        }
    }
    let (e, name) = min.unwrap();
    assert!(rel(report.e_b, e) <= 1e-9);
    assert_eq!(best.to_string(), name);
}

#[test]
fn single_hop_rounds_have_no_listening() {
    let profile = default_profile();
    let link = default_link();
    let packet = PacketModel::default();
    let d = max_range(&profile, &link);
    let hops = [1, 2, 3, 4];
    let round = simulate(4, 3, 2, d, &hops, &profile, &link, &packet).unwrap();
    assert!(round.ring_max_rx.iter().all(|&e| e == 0.0));
}
