//! Per-round energy of a routing action.
//!
//! Stations of a ring are symmetric: every node of ring `r` has the same
//! load, so the engine works ring by ring on the worst-loaded node instead
//! of instantiating all `N` stations. Each station originates one payload
//! per round and forwards everything it carries, re-packed into
//! `ceil(payloads / n_p_max)` fixed-size packets. Parents listen exactly
//! for their children's airtime (ideal TDMA).

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{ActionError, ActionSpace, HopsCombination};
use crate::link::{
    select_tx_config, LinkBudgetModel, LinkError, TransceiverProfile, TransmissionConfiguration,
};
use crate::topology::{NetworkStructure, TopologyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("action {action} is infeasible: ring {ring} cannot reach ring {destination}: {source}")]
    InfeasibleAction {
        action: HopsCombination,
        ring: usize,
        destination: usize,
        source: LinkError,
    },
    #[error("action has {got} rings but the network has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("bottleneck energy is zero; the network transmits nothing")]
    DegenerateNetwork,
    #[error("no feasible action exists for this scenario; check the profile and link model")]
    NoFeasibleAction,
    #[error("invalid packet model: {0}")]
    InvalidPacketModel(String),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Action(#[from] ActionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketModel {
    pub payload_bytes: u32,
    pub header_bytes: u32,
    pub packet_bytes: u32,
    pub max_payloads_per_packet: u32,
}

impl Default for PacketModel {
    fn default() -> Self {
        Self {
            payload_bytes: 15,
            header_bytes: 2,
            packet_bytes: 65,
            max_payloads_per_packet: 4,
        }
    }
}

impl PacketModel {
    pub fn validate(&self) -> Result<(), EnergyError> {
        let bad = |m: &str| Err(EnergyError::InvalidPacketModel(m.to_string()));
        if self.max_payloads_per_packet == 0 {
            return bad("max_payloads_per_packet must be at least 1");
        }
        if self.payload_bytes == 0 {
            return bad("payload_bytes must be positive");
        }
        let needed = self.max_payloads_per_packet as u64 * self.payload_bytes as u64
            + self.header_bytes as u64;
        if needed > self.packet_bytes as u64 {
            return bad("packet_bytes cannot hold max_payloads_per_packet payloads plus header");
        }
        Ok(())
    }

    pub fn packet_bits(&self) -> f64 {
        self.packet_bytes as f64 * 8.0
    }

    pub fn packets_for(&self, payloads: u64) -> u64 {
        payloads.div_ceil(self.max_payloads_per_packet as u64)
    }
}

/// Traffic of the worst-loaded station of one ring.
#[derive(Debug, Clone, PartialEq)]
pub struct RingLoad {
    pub ring: usize,
    pub hop: usize,
    pub distance: f64,
    pub payloads_out: u64,
    pub packets_out: u64,
    pub rx_payloads: u64,
    pub rx_packets: u64,
    /// Seconds spent listening to children.
    pub rx_time: f64,
    pub tx_config: TransmissionConfiguration,
}

/// What reaches the gateway in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct GatewayLoad {
    pub payloads: u64,
    pub packets: u64,
    pub rx_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingEnergy {
    pub load: RingLoad,
    pub e_tx: f64,
    pub e_rx: f64,
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub action: HopsCombination,
    pub rings: Vec<RingEnergy>,
    pub gateway: GatewayLoad,
    /// Listening energy of the gateway; reported, never a bottleneck.
    pub gateway_e_rx: f64,
    pub bottleneck_ring: usize,
    pub e_b: f64,
}

impl EnergyReport {
    pub fn ring(&self, ring: usize) -> &RingEnergy {
        &self.rings[ring - 1]
    }

    /// Energy of every station in the network for this round.
    pub fn network_energy(&self, net: &NetworkStructure) -> f64 {
        self.rings
            .iter()
            .map(|r| r.e * net.ring_size_or_gateway(r.load.ring) as f64)
            .sum()
    }
}

/// Reward of an action: the inverse bottleneck energy.
pub fn reward(report: &EnergyReport) -> Result<f64, EnergyError> {
    if report.e_b > 0.0 {
        Ok(1.0 / report.e_b)
    } else {
        Err(EnergyError::DegenerateNetwork)
    }
}

fn compute_loads(
    net: &NetworkStructure,
    action: &HopsCombination,
    packet: &PacketModel,
    mut config_for: impl FnMut(usize, usize) -> Result<TransmissionConfiguration, LinkError>,
) -> Result<(Vec<RingLoad>, GatewayLoad), EnergyError> {
    let rings = net.rings();
    if action.rings() != rings {
        return Err(EnergyError::Dimension {
            expected: rings,
            got: action.rings(),
        });
    }
    let bits = packet.packet_bits();

    // index 0 is the gateway
    let mut rx_payloads = vec![0u64; rings + 1];
    let mut rx_packets = vec![0u64; rings + 1];
    let mut rx_time = vec![0f64; rings + 1];
    let mut loads = Vec::with_capacity(rings);

    for ring in (1..=rings).rev() {
        let hop = action.hop(ring);
        let dest = ring - hop;
        let distance = net.link_distance(ring, hop)?;
        let tx_config =
            config_for(ring, hop).map_err(|source| EnergyError::InfeasibleAction {
                action: action.clone(),
                ring,
                destination: dest,
                source,
            })?;

        let payloads_out = 1 + rx_payloads[ring];
        let packets_out = packet.packets_for(payloads_out);

        // Balanced assignment; the worst parent takes the rounded-up share.
        let senders = net.ring_size_or_gateway(ring);
        let parents = net.ring_size_or_gateway(dest);
        let children = senders.div_ceil(parents);
        rx_payloads[dest] += children * payloads_out;
        rx_packets[dest] += children * packets_out;
        rx_time[dest] += (children * packets_out) as f64 * tx_config.airtime(bits);

        loads.push(RingLoad {
            ring,
            hop,
            distance,
            payloads_out,
            packets_out,
            rx_payloads: rx_payloads[ring],
            rx_packets: rx_packets[ring],
            rx_time: rx_time[ring],
            tx_config,
        });
    }
    loads.reverse();
    let gateway = GatewayLoad {
        payloads: rx_payloads[0],
        packets: rx_packets[0],
        rx_time: rx_time[0],
    };
    Ok((loads, gateway))
}

fn report_from_loads(
    action: &HopsCombination,
    loads: Vec<RingLoad>,
    gateway: GatewayLoad,
    profile: &TransceiverProfile,
    packet: &PacketModel,
) -> EnergyReport {
    let volts = profile.supply_voltage;
    let rx_watts = profile.rx_current_ma * 1e-3 * volts;
    let bits = packet.packet_bits();
    let rings: Vec<RingEnergy> = loads
        .into_iter()
        .map(|load| {
            let e_tx = load.packets_out as f64 * load.tx_config.tx_energy(bits, volts);
            let e_rx = load.rx_time * rx_watts;
            RingEnergy {
                e: e_tx + e_rx,
                e_tx,
                e_rx,
                load,
            }
        })
        .collect();

    let mut bottleneck_ring = 1;
    let mut e_b = f64::NEG_INFINITY;
    for r in &rings {
        if r.e > e_b {
            e_b = r.e;
            bottleneck_ring = r.load.ring;
        }
    }
    EnergyReport {
        action: action.clone(),
        gateway_e_rx: gateway.rx_time * rx_watts,
        gateway,
        rings,
        bottleneck_ring,
        e_b,
    }
}

/// Worst-node traffic of every ring, outermost rings first in the
/// recurrence but returned in ring order `1..=R`.
pub fn ring_loads(
    net: &NetworkStructure,
    action: &HopsCombination,
    profile: &TransceiverProfile,
    link: &LinkBudgetModel,
    packet: &PacketModel,
) -> Result<Vec<RingLoad>, EnergyError> {
    let bits = packet.packet_bits();
    compute_loads(net, action, packet, |ring, hop| {
        select_tx_config(profile, link, net.link_distance(ring, hop).unwrap(), bits)
    })
    .map(|(loads, _)| loads)
}

pub fn evaluate_action(
    net: &NetworkStructure,
    action: &HopsCombination,
    profile: &TransceiverProfile,
    link: &LinkBudgetModel,
    packet: &PacketModel,
) -> Result<EnergyReport, EnergyError> {
    let bits = packet.packet_bits();
    let (loads, gateway) = compute_loads(net, action, packet, |ring, hop| {
        select_tx_config(profile, link, net.link_distance(ring, hop).unwrap(), bits)
    })?;
    Ok(report_from_loads(action, loads, gateway, profile, packet))
}

/// Everything the energy engine needs, with the per-link transmission
/// configurations resolved once.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: NetworkStructure,
    pub profile: TransceiverProfile,
    pub link: LinkBudgetModel,
    pub packet: PacketModel,
    /// `links[ring - 1][hop - 1]`
    links: Vec<Vec<Result<TransmissionConfiguration, LinkError>>>,
}

impl Scenario {
    pub fn new(
        network: NetworkStructure,
        profile: TransceiverProfile,
        link: LinkBudgetModel,
        packet: PacketModel,
    ) -> Result<Self, EnergyError> {
        profile.validate()?;
        link.validate()?;
        packet.validate()?;
        let bits = packet.packet_bits();
        let links = (1..=network.rings())
            .map(|ring| {
                (1..=ring)
                    .map(|hop| {
                        let d = network.link_distance(ring, hop).expect("valid hop");
                        select_tx_config(&profile, &link, d, bits)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            network,
            profile,
            link,
            packet,
            links,
        })
    }

    pub fn rings(&self) -> usize {
        self.network.rings()
    }

    pub fn link_config(
        &self,
        ring: usize,
        hop: usize,
    ) -> Result<&TransmissionConfiguration, &LinkError> {
        self.links[ring - 1][hop - 1].as_ref()
    }

    pub fn evaluate(&self, action: &HopsCombination) -> Result<EnergyReport, EnergyError> {
        let (loads, gateway) = compute_loads(&self.network, action, &self.packet, |ring, hop| {
            self.links[ring - 1][hop - 1].clone()
        })?;
        Ok(report_from_loads(
            action,
            loads,
            gateway,
            &self.profile,
            &self.packet,
        ))
    }

    /// Exhaustive search over every action. Ties resolve to the
    /// lexicographically smallest action.
    pub fn brute_force_optimal(&self) -> Result<(HopsCombination, EnergyReport), EnergyError> {
        let space = ActionSpace::enumerate(self.rings())?;
        self.brute_force_in(&space)
    }

    pub fn brute_force_in(
        &self,
        space: &ActionSpace,
    ) -> Result<(HopsCombination, EnergyReport), EnergyError> {
        let best = space
            .actions()
            .par_iter()
            .enumerate()
            .filter_map(|(i, a)| self.evaluate(a).ok().map(|r| (i, r)))
            .reduce_with(|a, b| {
                if b.1.e_b < a.1.e_b || (b.1.e_b == a.1.e_b && b.0 < a.0) {
                    b
                } else {
                    a
                }
            });
        best.map(|(_, r)| (r.action.clone(), r))
            .ok_or(EnergyError::NoFeasibleAction)
    }
}

/// Free-function form of [`Scenario::brute_force_optimal`].
pub fn brute_force_optimal(
    net: &NetworkStructure,
    profile: &TransceiverProfile,
    link: &LinkBudgetModel,
    packet: &PacketModel,
) -> Result<(HopsCombination, EnergyReport), EnergyError> {
    Scenario::new(net.clone(), profile.clone(), *link, *packet)?.brute_force_optimal()
}

/// Lazily filled, thread-safe action -> report table. Entries never change
/// once computed.
pub struct EvaluationCache {
    scenario: Arc<Scenario>,
    space: Arc<ActionSpace>,
    slots: Vec<OnceLock<Result<Arc<EnergyReport>, EnergyError>>>,
}

impl EvaluationCache {
    pub fn new(scenario: Arc<Scenario>, space: Arc<ActionSpace>) -> Self {
        let slots = (0..space.len()).map(|_| OnceLock::new()).collect();
        Self {
            scenario,
            space,
            slots,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn get(&self, index: usize) -> Result<Arc<EnergyReport>, EnergyError> {
        self.slots[index]
            .get_or_init(|| self.scenario.evaluate(self.space.get(index)).map(Arc::new))
            .clone()
    }
}
