//! Routing actions: per-ring hop lengths, the full action set and the
//! similarity between actions.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest ring count whose action set is enumerated (10! actions).
pub const MAX_ENUMERABLE_RINGS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error("ring count {0} outside the enumerable range 1..={MAX_ENUMERABLE_RINGS}")]
    Capacity(usize),
    #[error("hop length {delta} at ring {ring} must lie in 1..={ring}")]
    InvalidHop { ring: usize, delta: usize },
    #[error("action has {got} rings, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("malformed action `{0}`: expected a parenthesized list such as (1 1 3)")]
    Parse(String),
    #[error("every action has already been explored")]
    EmptyPool,
    #[error("best action {0} is not among the explored actions")]
    BestNotExplored(HopsCombination),
}

/// Hop length of every ring: ring `r` sends to ring `r - delta[r]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HopsCombination(Vec<u8>);

impl HopsCombination {
    pub fn new(hops: Vec<usize>) -> Result<Self, ActionError> {
        if hops.is_empty() || hops.len() > u8::MAX as usize {
            return Err(ActionError::Dimension {
                expected: hops.len().max(1),
                got: hops.len(),
            });
        }
        for (i, &delta) in hops.iter().enumerate() {
            let ring = i + 1;
            if delta == 0 || delta > ring {
                return Err(ActionError::InvalidHop { ring, delta });
            }
        }
        Ok(Self(hops.into_iter().map(|d| d as u8).collect()))
    }

    /// Every ring transmits straight to the gateway.
    pub fn single_hop(rings: usize) -> Self {
        Self((1..=rings).map(|r| r as u8).collect())
    }

    /// Every ring transmits to the adjacent inner ring.
    pub fn next_ring_hop(rings: usize) -> Self {
        Self(vec![1; rings])
    }

    pub fn rings(&self) -> usize {
        self.0.len()
    }

    /// Hop length of `ring` (1-indexed).
    pub fn hop(&self, ring: usize) -> usize {
        self.0[ring - 1] as usize
    }

    /// Ring that `ring` transmits to; 0 is the gateway.
    pub fn destination(&self, ring: usize) -> usize {
        ring - self.hop(ring)
    }

    pub fn hops(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&d| d as usize)
    }

    /// L1 distance between hop vectors.
    pub fn distance(&self, other: &Self) -> Result<usize, ActionError> {
        if self.rings() != other.rings() {
            return Err(ActionError::Dimension {
                expected: self.rings(),
                got: other.rings(),
            });
        }
        Ok(l1(&self.0, &other.0))
    }
}

fn l1(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y) as usize).sum()
}

impl fmt::Display for HopsCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for HopsCombination {
    type Err = ActionError;

    /// Accepts `(1 1 3)`, `(1, 1, 3)` or a bare `1 1 3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_err = || ActionError::Parse(s.to_string());
        let trimmed = s.trim();
        let inner = match (trimmed.strip_prefix('('), trimmed.strip_suffix(')')) {
            (Some(_), Some(_)) => &trimmed[1..trimmed.len() - 1],
            (None, None) => trimmed,
            _ => return Err(parse_err()),
        };
        let hops = inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| parse_err()))
            .collect::<Result<Vec<_>, _>>()?;
        if hops.is_empty() {
            return Err(parse_err());
        }
        Self::new(hops)
    }
}

/// Similarity `1 / L1(a, b)`; infinite for identical actions.
pub fn similarity(a: &HopsCombination, b: &HopsCombination) -> Result<f64, ActionError> {
    let d = a.distance(b)?;
    Ok(if d == 0 { f64::INFINITY } else { 1.0 / d as f64 })
}

/// All `R!` hop combinations of a ring count, in lexicographic order.
#[derive(Debug, Clone)]
pub struct ActionSpace {
    rings: usize,
    actions: Vec<HopsCombination>,
}

impl ActionSpace {
    pub fn enumerate(rings: usize) -> Result<Self, ActionError> {
        if rings == 0 || rings > MAX_ENUMERABLE_RINGS {
            return Err(ActionError::Capacity(rings));
        }
        let total: usize = (1..=rings).product();
        let mut actions = Vec::with_capacity(total);
        let mut current = vec![1u8; rings];
        loop {
            actions.push(HopsCombination(current.clone()));
            // odometer where position r counts 1..=r+1
            let mut pos = rings;
            loop {
                if pos == 0 {
                    debug_assert_eq!(actions.len(), total);
                    return Ok(Self { rings, actions });
                }
                pos -= 1;
                if (current[pos] as usize) < pos + 1 {
                    current[pos] += 1;
                    current[pos + 1..].fill(1);
                    break;
                }
            }
        }
    }

    pub fn rings(&self) -> usize {
        self.rings
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[HopsCombination] {
        &self.actions
    }

    pub fn get(&self, index: usize) -> &HopsCombination {
        &self.actions[index]
    }

    /// Position of `action` in the lexicographic order.
    pub fn index_of(&self, action: &HopsCombination) -> Result<usize, ActionError> {
        if action.rings() != self.rings {
            return Err(ActionError::Dimension {
                expected: self.rings,
                got: action.rings(),
            });
        }
        // mixed radix: digit r has radix r
        Ok(action
            .hops()
            .enumerate()
            .fold(0, |acc, (i, d)| acc * (i + 1) + (d - 1)))
    }

    /// Indices of the candidates closest (most similar) to `best`, in
    /// ascending index order. Empty only when `candidates` is empty.
    pub fn most_similar_among(
        &self,
        candidates: impl IntoIterator<Item = usize>,
        best: usize,
    ) -> Vec<usize> {
        let target = &self.actions[best].0;
        let mut min = usize::MAX;
        let mut ties = Vec::new();
        for idx in candidates {
            let d = l1(&self.actions[idx].0, target);
            if d < min {
                min = d;
                ties.clear();
            }
            if d == min {
                ties.push(idx);
            }
        }
        ties.sort_unstable();
        ties
    }

    /// Unexplored actions of maximal similarity to `best`.
    pub fn most_similar_unexplored(
        &self,
        explored: &HashSet<HopsCombination>,
        best: &HopsCombination,
    ) -> Result<Vec<HopsCombination>, ActionError> {
        let best_idx = self.index_of(best)?;
        if !explored.contains(best) {
            return Err(ActionError::BestNotExplored(best.clone()));
        }
        let pool = (0..self.len()).filter(|&i| !explored.contains(&self.actions[i]));
        let ties = self.most_similar_among(pool, best_idx);
        if ties.is_empty() {
            return Err(ActionError::EmptyPool);
        }
        Ok(ties.into_iter().map(|i| self.actions[i].clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn act(s: &str) -> HopsCombination {
        s.parse().unwrap()
    }

    #[test]
    fn action_counts() {
        assert_eq!(ActionSpace::enumerate(3).unwrap().len(), 6);
        assert_eq!(ActionSpace::enumerate(4).unwrap().len(), 24);
        assert_eq!(ActionSpace::enumerate(7).unwrap().len(), 5040);
        let one = ActionSpace::enumerate(1).unwrap();
        assert_eq!(one.actions(), &[act("(1)")]);
        assert_eq!(ActionSpace::enumerate(0).unwrap_err(), ActionError::Capacity(0));
        assert_eq!(ActionSpace::enumerate(11).unwrap_err(), ActionError::Capacity(11));
    }

    #[test]
    fn lexicographic_order_r3() {
        let space = ActionSpace::enumerate(3).unwrap();
        let names: Vec<String> = space.actions().iter().map(|a| a.to_string()).collect();
        assert_eq!(
            names,
            ["(1 1 1)", "(1 1 2)", "(1 1 3)", "(1 2 1)", "(1 2 2)", "(1 2 3)"]
        );
    }

    #[test]
    fn routing_models() {
        assert_eq!(HopsCombination::single_hop(2), act("(1, 2)"));
        assert_eq!(HopsCombination::next_ring_hop(2), act("(1, 1)"));
        assert_eq!(HopsCombination::single_hop(1), HopsCombination::next_ring_hop(1));
        assert_eq!(HopsCombination::single_hop(4), act("(1 2 3 4)"));
        assert_eq!(act("(1 2 1)").destination(3), 2);
        assert_eq!(act("(1 2 3)").destination(3), 0);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "()", "(1 2", "(1 x)", "(2)", "(1 3)", "(0 1)"] {
            assert!(bad.parse::<HopsCombination>().is_err(), "{bad}");
        }
        assert_eq!(act(" 1 2 ").to_string(), "(1 2)");
    }

    #[test]
    fn similarity_values() {
        assert_eq!(similarity(&act("(1 1 1)"), &act("(1 1 2)")).unwrap(), 1.0);
        assert_eq!(similarity(&act("(1 2 1)"), &act("(1 2 3)")).unwrap(), 0.5);
        assert_eq!(similarity(&act("(1 2 1)"), &act("(1 2 1)")).unwrap(), f64::INFINITY);
        assert!(matches!(
            similarity(&act("(1 1)"), &act("(1 1 1)")),
            Err(ActionError::Dimension { .. })
        ));
    }

    #[test]
    fn most_similar_picks() {
        let space = ActionSpace::enumerate(3).unwrap();
        let best = act("(1 1 1)");
        let explored: HashSet<_> = space
            .actions()
            .iter()
            .filter(|a| !["(1 1 2)", "(1 2 2)"].contains(&a.to_string().as_str()))
            .cloned()
            .collect();
        assert_eq!(
            space.most_similar_unexplored(&explored, &best).unwrap(),
            vec![act("(1 1 2)")]
        );

        let mut explored: HashSet<_> = space.actions().iter().cloned().collect();
        explored.remove(&act("(1 2 3)"));
        assert_eq!(
            space.most_similar_unexplored(&explored, &best).unwrap(),
            vec![act("(1 2 3)")]
        );

        explored.insert(act("(1 2 3)"));
        assert_eq!(
            space.most_similar_unexplored(&explored, &best),
            Err(ActionError::EmptyPool)
        );
    }

    #[test]
    fn ties_are_all_returned() {
        let space = ActionSpace::enumerate(3).unwrap();
        let best = act("(1 1 2)");
        let explored: HashSet<_> = [best.clone()].into_iter().collect();
        assert_eq!(
            space.most_similar_unexplored(&explored, &best).unwrap(),
            vec![act("(1 1 1)"), act("(1 1 3)"), act("(1 2 2)")]
        );
    }

    #[test]
    fn similarity_ties_need_even_distance_gap() {
        // L1 distances from any point to (1 1 3) and (1 2 1) differ in parity,
        // so those two can never tie as most-similar candidates.
        let space = ActionSpace::enumerate(3).unwrap();
        let (a, b) = (act("(1 1 3)"), act("(1 2 1)"));
        for best in space.actions() {
            assert_ne!(best.distance(&a).unwrap(), best.distance(&b).unwrap());
        }
    }

    #[test]
    fn best_must_be_explored() {
        let space = ActionSpace::enumerate(2).unwrap();
        let res = space.most_similar_unexplored(&HashSet::new(), &act("(1 1)"));
        assert!(matches!(res, Err(ActionError::BestNotExplored(_))));
    }

    #[test]
    fn matches_grid_filter() {
        for r in 1..=6usize {
            let space = ActionSpace::enumerate(r).unwrap();
            let mut grid = Vec::new();
            let total = r.pow(r as u32);
            for mut code in 0..total {
                let mut v = vec![0usize; r];
                for slot in v.iter_mut().rev() {
                    *slot = code % r + 1;
                    code /= r;
                }
                if let Ok(a) = HopsCombination::new(v) {
                    grid.push(a);
                }
            }
            grid.sort();
            assert_eq!(grid.as_slice(), space.actions());
            assert_eq!(space.len(), (1..=r).product::<usize>());
            for (i, a) in space.actions().iter().enumerate() {
                assert_eq!(space.index_of(a).unwrap(), i);
            }
        }
    }

    fn arb_pair() -> impl Strategy<Value = (HopsCombination, HopsCombination)> {
        (1usize..8).prop_flat_map(|r| {
            let one = (1..=r).map(|ring| 1..=ring).collect::<Vec<_>>();
            (one.clone(), one).prop_map(|(a, b)| {
                (
                    HopsCombination::new(a).unwrap(),
                    HopsCombination::new(b).unwrap(),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn similarity_is_symmetric_and_positive((a, b) in arb_pair()) {
            let s = similarity(&a, &b).unwrap();
            prop_assert_eq!(s, similarity(&b, &a).unwrap());
            prop_assert!(s > 0.0);
            prop_assert_eq!(s.is_infinite(), a == b);
        }

        #[test]
        fn display_parse_roundtrip((a, _b) in arb_pair()) {
            prop_assert_eq!(a.to_string().parse::<HopsCombination>().unwrap(), a);
        }
    }
}
