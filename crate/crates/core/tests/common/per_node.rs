//! Explicit station-by-station simulation of one routing round, written
//! without the ring-level shortcuts of the engine: every station exists,
//! parents are assigned round-robin and each station's payloads are
//! tracked on their own.

use dresg::link::{LinkBudgetModel, TransceiverProfile};
use dresg::energy::PacketModel;

#[derive(Debug, Clone, Copy)]
struct Radio {
    power_dbm: f64,
    tx_ma: f64,
    bps: f64,
}

pub struct Station {
    pub ring: usize,
    pub payloads_out: u64,
    pub packets_out: u64,
    pub e_tx: f64,
    pub e_rx: f64,
}

pub struct Round {
    pub stations: Vec<Station>,
    /// Worst station energy per ring, index `ring - 1`.
    pub ring_max: Vec<f64>,
    pub ring_max_rx: Vec<f64>,
    pub bottleneck_ring: usize,
    pub e_b: f64,
}

fn cheapest(profile: &TransceiverProfile, link: &LinkBudgetModel, d: f64, bits: f64) -> Option<Radio> {
    let pl = link.intercept_db + link.slope_db_per_decade * d.log10();
    let mut best: Option<(f64, Radio)> = None;
    for p in &profile.power_levels {
        for r in &profile.rate_levels {
            let rx = p.dbm + link.tx_gain_dbi + link.rx_gain_dbi - pl;
            if rx < r.sensitivity_dbm - 1e-9 {
                continue;
            }
            let cand = Radio { power_dbm: p.dbm, tx_ma: p.current_ma, bps: r.bps };
            let cost = bits / r.bps * p.current_ma;
            let take = match best {
                None => true,
                Some((c, b)) => {
                    cost < c
                        || (cost == c && r.bps > b.bps)
                        || (cost == c && r.bps == b.bps && p.dbm < b.power_dbm)
                }
            };
            if take {
                best = Some((cost, cand));
            }
        }
    }
    best.map(|(_, r)| r)
}

/// Simulates the round; `None` when some hop cannot close its link.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    rings: usize,
    c: u64,
    branches: u64,
    max_distance: f64,
    hops: &[usize],
    profile: &TransceiverProfile,
    link: &LinkBudgetModel,
    packet: &PacketModel,
) -> Option<Round> {
    let bits = f64::from(packet.packet_bytes) * 8.0;
    let per_packet = u64::from(packet.max_payloads_per_packet);
    let volts = profile.supply_voltage;

    // station ids grouped by ring; ring 0 holds the gateway only
    let mut by_ring: Vec<Vec<usize>> = vec![vec![usize::MAX]];
    let mut stations = Vec::new();
    let mut size = branches;
    for ring in 1..=rings {
        let ids = (0..size)
            .map(|_| {
                stations.push(Station { ring, payloads_out: 0, packets_out: 0, e_tx: 0.0, e_rx: 0.0 });
                stations.len() - 1
            })
            .collect();
        by_ring.push(ids);
        size *= c;
    }
    let dist = |r: usize| {
        if r == rings {
            max_distance
        } else {
            r as f64 * max_distance / rings as f64
        }
    };

    let mut inbox = vec![0u64; stations.len()];
    for ring in (1..=rings).rev() {
        let hop = hops[ring - 1];
        let dest = ring - hop;
        let d = dist(ring) - if dest == 0 { 0.0 } else { dist(dest) };
        let radio = cheapest(profile, link, d, bits)?;
        let airtime = bits / radio.bps;
        let parents = &by_ring[dest];
        for (k, &id) in by_ring[ring].iter().enumerate() {
            let payloads = 1 + inbox[id];
            let packets = payloads.div_ceil(per_packet);
            let s = &mut stations[id];
            s.payloads_out = payloads;
            s.packets_out = packets;
            s.e_tx = packets as f64 * airtime * radio.tx_ma * 1e-3 * volts;
            let parent = parents[k % parents.len()];
            if parent != usize::MAX {
                inbox[parent] += payloads;
                stations[parent].e_rx +=
                    packets as f64 * airtime * profile.rx_current_ma * 1e-3 * volts;
            }
        }
    }

    let mut ring_max = vec![0.0f64; rings];
    let mut ring_max_rx = vec![0.0f64; rings];
    for s in &stations {
        ring_max[s.ring - 1] = ring_max[s.ring - 1].max(s.e_tx + s.e_rx);
        ring_max_rx[s.ring - 1] = ring_max_rx[s.ring - 1].max(s.e_rx);
    }
    let mut bottleneck_ring = 1;
    for r in 2..=rings {
        if ring_max[r - 1] > ring_max[bottleneck_ring - 1] {
            bottleneck_ring = r;
        }
    }
    Some(Round {
        e_b: ring_max[bottleneck_ring - 1],
        stations,
        ring_max,
        ring_max_rx,
        bottleneck_ring,
    })
}
