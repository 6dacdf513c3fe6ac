//! Ring/branch network structures.
//!
//! Stations sit on `R` concentric distance rings around the gateway. Each
//! station outside the last ring has `c` tree children in the next ring, and
//! the whole structure repeats over `B` identical branches. Ring 0 is the
//! gateway itself, at distance 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("invalid network parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("ring index {ring} out of range 1..={rings}")]
    RingOutOfRange { ring: usize, rings: usize },
    #[error("hop length {delta} invalid for ring {ring} (must be 1..={ring})")]
    InvalidHop { ring: usize, delta: usize },
    #[error("network with R={rings}, c={children_ratio}, B={branches} overflows the node counter")]
    Overflow {
        rings: usize,
        children_ratio: u64,
        branches: u64,
    },
}

/// How ring distances are laid out between the gateway and `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spreading {
    /// Same gap between any two consecutive rings.
    #[default]
    Equidistant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStructure {
    rings: usize,
    children_ratio: u64,
    branches: u64,
    max_distance: f64,
    spreading: Spreading,
    /// `ring_distances[r - 1]` is the distance of ring `r` to the gateway.
    ring_distances: Vec<f64>,
    /// `ring_sizes[r - 1]` is the node count of ring `r` over all branches.
    ring_sizes: Vec<u64>,
}

impl NetworkStructure {
    pub fn build(
        rings: usize,
        children_ratio: u64,
        branches: u64,
        max_distance: f64,
        spreading: Spreading,
    ) -> Result<Self, TopologyError> {
        if rings == 0 {
            return Err(invalid("rings", "must be at least 1"));
        }
        if children_ratio == 0 {
            return Err(invalid("children_ratio", "must be at least 1"));
        }
        if branches == 0 {
            return Err(invalid("branches", "must be at least 1"));
        }
        if !(max_distance.is_finite() && max_distance > 0.0) {
            return Err(invalid(
                "max_distance",
                &format!("must be a positive finite distance, got {max_distance}"),
            ));
        }

        let overflow = || TopologyError::Overflow {
            rings,
            children_ratio,
            branches,
        };
        let mut ring_sizes = Vec::with_capacity(rings);
        let mut per_branch: u64 = 1;
        let mut total: u64 = 0;
        for r in 0..rings {
            if r > 0 {
                per_branch = per_branch.checked_mul(children_ratio).ok_or_else(overflow)?;
            }
            let size = per_branch.checked_mul(branches).ok_or_else(overflow)?;
            total = total.checked_add(size).ok_or_else(overflow)?;
            ring_sizes.push(size);
        }

        let ring_distances = match spreading {
            Spreading::Equidistant => (1..=rings)
                .map(|r| {
                    if r == rings {
                        max_distance
                    } else {
                        r as f64 * max_distance / rings as f64
                    }
                })
                .collect(),
        };

        Ok(Self {
            rings,
            children_ratio,
            branches,
            max_distance,
            spreading,
            ring_distances,
            ring_sizes,
        })
    }

    pub fn rings(&self) -> usize {
        self.rings
    }

    pub fn children_ratio(&self) -> u64 {
        self.children_ratio
    }

    pub fn branches(&self) -> u64 {
        self.branches
    }

    pub fn max_distance(&self) -> f64 {
        self.max_distance
    }

    pub fn spreading(&self) -> Spreading {
        self.spreading
    }

    /// Total number of stations, `B * sum(c^(r-1))`.
    pub fn node_count(&self) -> u64 {
        self.ring_sizes.iter().sum()
    }

    /// Stations per branch, `sum(c^(r-1))`.
    pub fn branch_load(&self) -> u64 {
        self.node_count() / self.branches
    }

    pub fn nodes_in_ring(&self, ring: usize) -> Result<u64, TopologyError> {
        self.check_ring(ring)?;
        Ok(self.ring_sizes[ring - 1])
    }

    /// Node count of `ring`, with ring 0 being the single gateway.
    pub(crate) fn ring_size_or_gateway(&self, ring: usize) -> u64 {
        if ring == 0 {
            1
        } else {
            self.ring_sizes[ring - 1]
        }
    }

    /// Distance of `ring` to the gateway; ring 0 is the gateway.
    pub fn ring_distance(&self, ring: usize) -> Result<f64, TopologyError> {
        if ring == 0 {
            return Ok(0.0);
        }
        self.check_ring(ring)?;
        Ok(self.ring_distances[ring - 1])
    }

    pub fn ring_distances(&self) -> &[f64] {
        &self.ring_distances
    }

    /// Radial distance covered by a hop of `delta` rings starting at `ring`.
    pub fn link_distance(&self, ring: usize, delta: usize) -> Result<f64, TopologyError> {
        self.check_ring(ring)?;
        if delta == 0 || delta > ring {
            return Err(TopologyError::InvalidHop { ring, delta });
        }
        Ok(self.ring_distance(ring)? - self.ring_distance(ring - delta)?)
    }

    fn check_ring(&self, ring: usize) -> Result<(), TopologyError> {
        if ring == 0 || ring > self.rings {
            Err(TopologyError::RingOutOfRange {
                ring,
                rings: self.rings,
            })
        } else {
            Ok(())
        }
    }
}

fn invalid(field: &'static str, reason: &str) -> TopologyError {
    TopologyError::InvalidParameter {
        field,
        reason: reason.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn net(rings: usize, c: u64, b: u64, d: f64) -> NetworkStructure {
        NetworkStructure::build(rings, c, b, d, Spreading::Equidistant).unwrap()
    }

    #[test]
    fn node_counts_and_branch_loads() {
        let n = net(3, 2, 3, 900.0);
        assert_eq!(n.node_count(), 21);
        assert_eq!(n.branch_load(), 7);

        let n = net(2, 1, 4, 900.0);
        assert_eq!(n.node_count(), 8);
        assert_eq!(n.branch_load(), 2);

        let n = net(1, 5, 1, 900.0);
        assert_eq!(n.node_count(), 1);
        assert_eq!(n.branch_load(), 1);

        assert_eq!(net(4, 8, 1, 900.0).node_count(), 1 + 8 + 64 + 512);
    }

    #[test]
    fn ring_sizes() {
        let n = net(3, 2, 3, 900.0);
        assert_eq!(n.nodes_in_ring(3).unwrap(), 12);
        assert_eq!(n.nodes_in_ring(1).unwrap(), 3);
        assert_eq!(net(4, 8, 1, 1.0).nodes_in_ring(4).unwrap(), 512);
        assert!(matches!(
            n.nodes_in_ring(0),
            Err(TopologyError::RingOutOfRange { ring: 0, rings: 3 })
        ));
        assert!(n.nodes_in_ring(4).is_err());
    }

    #[test]
    fn link_distances() {
        let n = net(3, 2, 1, 900.0);
        assert_eq!(n.link_distance(3, 3).unwrap(), 900.0);
        assert_eq!(n.link_distance(2, 1).unwrap(), 300.0);
        assert_eq!(n.link_distance(1, 1).unwrap(), 300.0);
        assert!(matches!(
            n.link_distance(2, 3),
            Err(TopologyError::InvalidHop { ring: 2, delta: 3 })
        ));
        assert!(n.link_distance(2, 0).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        let err = |r, c, b, d| NetworkStructure::build(r, c, b, d, Spreading::Equidistant);
        for (res, field) in [
            (err(0, 1, 1, 1.0), "rings"),
            (err(1, 0, 1, 1.0), "children_ratio"),
            (err(1, 1, 0, 1.0), "branches"),
            (err(1, 1, 1, 0.0), "max_distance"),
            (err(1, 1, 1, f64::NAN), "max_distance"),
        ] {
            match res {
                Err(TopologyError::InvalidParameter { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected error on {field}, got {other:?}"),
            }
        }
        assert!(matches!(
            err(40, 1000, 1, 1.0),
            Err(TopologyError::Overflow { .. })
        ));
    }

    proptest! {
        #[test]
        fn structure_invariants(r in 1usize..8, c in 1u64..9, b in 1u64..5, d in 1.0f64..5000.0) {
            let n = net(r, c, b, d);
            let sum: u64 = (1..=r).map(|k| n.nodes_in_ring(k).unwrap()).sum();
            prop_assert_eq!(sum, n.node_count());
            prop_assert_eq!(n.node_count(), b * (0..r as u32).map(|k| c.pow(k)).sum::<u64>());
            prop_assert_eq!(*n.ring_distances().last().unwrap(), d);
            prop_assert!(n.ring_distances().windows(2).all(|w| w[0] < w[1]));
            for ring in 1..=r {
                prop_assert_eq!(n.link_distance(ring, ring).unwrap(), n.ring_distance(ring).unwrap());
                for delta in 1..=ring {
                    let expected = delta as f64 * d / r as f64;
                    let got = n.link_distance(ring, delta).unwrap();
                    prop_assert!((got - expected).abs() <= 1e-9 * d);
                }
            }
            prop_assert_eq!(n.clone(), net(r, c, b, d));
        }
    }
}
