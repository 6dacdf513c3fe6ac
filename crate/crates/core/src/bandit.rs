//! Epsilon-greedy learners over a deterministic-reward action space.
//!
//! Rewards never change, so each action needs to be tried only once:
//! exploration always draws from the actions not tried yet, and the learner
//! remembers the reward of every tried action. The similarity-enhanced
//! variant adds a second coin inside exploring iterations that steers the
//! draw towards the untried actions closest to the best known one.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::action::ActionSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Constant,
    /// `eps_i = min(1, sqrt(eps_{i-1} / i))`
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub kind: ScheduleKind,
    pub initial: f64,
}

impl EpsilonSchedule {
    pub fn constant(initial: f64) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            initial,
        }
    }

    pub fn quadratic(initial: f64) -> Self {
        Self {
            kind: ScheduleKind::Quadratic,
            initial,
        }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.initial)
    }

    /// Value for iteration `i >= 2` given the previous one.
    pub fn next(&self, prev: f64, i: usize) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.initial,
            ScheduleKind::Quadratic => (prev / i as f64).sqrt().min(1.0),
        }
    }

    /// Value in effect at iteration `i` (1-based).
    pub fn value_at(&self, i: usize) -> f64 {
        (2..=i).fold(self.initial, |eps, k| self.next(eps, k))
    }
}

/// Which branch of the similarity coin triggers similarity-driven
/// exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SimilaritySemantics {
    /// Similarity with probability `1 - eps_s`; uniform with `eps_s`.
    /// A decreasing `eps_s` starting at 1 delays similarity.
    #[default]
    Results,
    /// Similarity with probability `eps_s`; uniform with `1 - eps_s`.
    Definition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Egreedy,
    EgreedySimilarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityConfig {
    pub schedule: EpsilonSchedule,
    pub semantics: SimilaritySemantics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyConfig {
    pub epsilon: EpsilonSchedule,
    /// `Some` for the two-layer similarity variant.
    pub similarity: Option<SimilarityConfig>,
}

impl PolicyConfig {
    pub fn egreedy(epsilon: EpsilonSchedule) -> Self {
        Self {
            epsilon,
            similarity: None,
        }
    }

    pub fn with_similarity(
        epsilon: EpsilonSchedule,
        similarity: EpsilonSchedule,
        semantics: SimilaritySemantics,
    ) -> Self {
        Self {
            epsilon,
            similarity: Some(SimilarityConfig {
                schedule: similarity,
                semantics,
            }),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        if self.similarity.is_some() {
            Algorithm::EgreedySimilarity
        } else {
            Algorithm::Egreedy
        }
    }

    /// Short label such as `dec:0.2` or `sim-dec:1:0.5`.
    pub fn label(&self) -> String {
        let kind = |s: &EpsilonSchedule| match s.kind {
            ScheduleKind::Constant => "cnt",
            ScheduleKind::Quadratic => "dec",
        };
        match &self.similarity {
            None => format!("{}:{}", kind(&self.epsilon), self.epsilon.initial),
            Some(sim) => {
                let mut s = if sim.schedule.kind == self.epsilon.kind {
                    format!(
                        "sim-{}:{}:{}",
                        kind(&self.epsilon),
                        self.epsilon.initial,
                        sim.schedule.initial
                    )
                } else {
                    format!(
                        "sim:{}:{}:{}:{}",
                        kind(&self.epsilon),
                        self.epsilon.initial,
                        kind(&sim.schedule),
                        sim.schedule.initial
                    )
                };
                if sim.semantics == SimilaritySemantics::Definition {
                    s.push_str("@definition");
                }
                s
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionKind {
    /// Draw from the untried actions, uniformly.
    Uniform,
    /// Draw among the untried actions most similar to the best one.
    Similar,
    /// Replay the best known action.
    Exploit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub action: usize,
    pub kind: SelectionKind,
}

impl Selection {
    pub fn explores(&self) -> bool {
        self.kind != SelectionKind::Exploit
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub iteration: usize,
    pub selection: Selection,
    pub reward: f64,
    /// False when the environment could not execute the action.
    pub feasible: bool,
    /// First time this action was played.
    pub newly_explored: bool,
}

const UNEXPLORED: usize = usize::MAX;

/// Learner state for one experiment repetition.
#[derive(Debug, Clone)]
pub struct BanditState {
    policy: PolicyConfig,
    iteration: usize,
    epsilon: f64,
    epsilon_s: f64,
    rewards: Vec<Option<f64>>,
    infeasible: Vec<bool>,
    /// Untried action indices; `pool_pos[a]` locates `a` in it.
    pool: Vec<usize>,
    pool_pos: Vec<usize>,
    best: Option<(usize, f64)>,
    history: Vec<usize>,
    rng: ChaCha8Rng,
}

impl BanditState {
    pub fn new(policy: PolicyConfig, space: &ActionSpace, seed: u64) -> Self {
        let n = space.len();
        Self {
            epsilon: policy.epsilon.initial,
            epsilon_s: policy.similarity.map_or(0.0, |s| s.schedule.initial),
            policy,
            iteration: 1,
            rewards: vec![None; n],
            infeasible: vec![false; n],
            pool: (0..n).collect(),
            pool_pos: (0..n).collect(),
            best: None,
            history: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn policy(&self) -> &PolicyConfig {
        &self.policy
    }

    /// Iteration the next call to [`step`](Self::step) plays.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn epsilon_s(&self) -> f64 {
        self.epsilon_s
    }

    pub fn best_action(&self) -> Option<usize> {
        self.best.map(|(a, _)| a)
    }

    pub fn best_reward(&self) -> Option<f64> {
        self.best.map(|(_, r)| r)
    }

    pub fn reward_of(&self, action: usize) -> Option<f64> {
        self.rewards[action]
    }

    pub fn is_explored(&self, action: usize) -> bool {
        self.rewards[action].is_some()
    }

    pub fn explored_count(&self) -> usize {
        self.rewards.len() - self.pool.len()
    }

    pub fn unexplored(&self) -> &[usize] {
        &self.pool
    }

    pub fn all_explored(&self) -> bool {
        self.pool.is_empty()
    }

    pub fn history(&self) -> &[usize] {
        &self.history
    }

    fn draw_uniform(&mut self) -> Selection {
        let action = self.pool[self.rng.gen_range(0..self.pool.len())];
        Selection {
            action,
            kind: SelectionKind::Uniform,
        }
    }

    fn exploration_due(&mut self) -> bool {
        if self.pool.is_empty() {
            return false;
        }
        if self.iteration == 1 || self.best.is_none() {
            return true;
        }
        self.rng.gen::<f64>() < self.epsilon
    }

    fn exploit(&self) -> Selection {
        let (action, _) = self.best.expect("exploit requires an explored feasible action");
        Selection {
            action,
            kind: SelectionKind::Exploit,
        }
    }

    /// Plain epsilon-greedy draw at the current epsilon.
    pub fn select_action(&mut self) -> Selection {
        if self.exploration_due() {
            self.draw_uniform()
        } else {
            self.exploit()
        }
    }

    /// Two-layer draw: exploring iterations flip a second coin at
    /// `epsilon_s` to decide between similarity and uniform exploration.
    pub fn select_action_similarity(
        &mut self,
        space: &ActionSpace,
        epsilon_s: f64,
        semantics: SimilaritySemantics,
    ) -> Selection {
        if !self.exploration_due() {
            return self.exploit();
        }
        let Some((best, _)) = self.best else {
            return self.draw_uniform();
        };
        let coin = self.rng.gen::<f64>();
        let similar = match semantics {
            SimilaritySemantics::Results => coin >= epsilon_s,
            SimilaritySemantics::Definition => coin < epsilon_s,
        };
        if !similar {
            return self.draw_uniform();
        }
        let ties = space.most_similar_among(self.pool.iter().copied(), best);
        let action = ties[self.rng.gen_range(0..ties.len())];
        Selection {
            action,
            kind: SelectionKind::Similar,
        }
    }

    /// Plays one iteration. `env` is consulted only the first time an
    /// action is played; later plays reuse the stored reward.
    pub fn step<E>(
        &mut self,
        space: &ActionSpace,
        mut env: impl FnMut(usize) -> Result<f64, E>,
    ) -> StepOutcome {
        if self.iteration >= 2 {
            self.epsilon = self.policy.epsilon.next(self.epsilon, self.iteration);
            if let Some(sim) = &self.policy.similarity {
                self.epsilon_s = sim.schedule.next(self.epsilon_s, self.iteration);
            }
        }
        let selection = match self.policy.similarity {
            None => self.select_action(),
            Some(sim) => self.select_action_similarity(space, self.epsilon_s, sim.semantics),
        };
        let action = selection.action;
        let newly_explored = !self.is_explored(action);
        let (reward, feasible) = match self.rewards[action] {
            Some(r) => (r, !self.infeasible[action]),
            None => {
                let (r, ok) = match env(action) {
                    Ok(r) => (r, true),
                    Err(_) => (0.0, false),
                };
                self.record(action, r, ok);
                (r, ok)
            }
        };
        self.history.push(action);
        let outcome = StepOutcome {
            iteration: self.iteration,
            selection,
            reward,
            feasible,
            newly_explored,
        };
        self.iteration += 1;
        outcome
    }

    fn record(&mut self, action: usize, reward: f64, feasible: bool) {
        self.rewards[action] = Some(reward);
        self.infeasible[action] = !feasible;
        let pos = self.pool_pos[action];
        let last = *self.pool.last().expect("action was unexplored");
        self.pool.swap_remove(pos);
        if last != action {
            self.pool_pos[last] = pos;
        }
        self.pool_pos[action] = UNEXPLORED;

        if feasible {
            let better = match self.best {
                None => true,
                Some((b, r)) => reward > r || (reward == r && action < b),
            };
            if better {
                self.best = Some((action, reward));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(r: usize) -> ActionSpace {
        ActionSpace::enumerate(r).unwrap()
    }

    /// Reward table where higher index is better.
    fn ramp(a: usize) -> Result<f64, ()> {
        Ok(1.0 + a as f64)
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn schedules() {
        let c = EpsilonSchedule::constant(0.5);
        assert_eq!(c.next(0.9, 7), 0.5);
        assert_eq!(c.value_at(100), 0.5);

        let q = EpsilonSchedule::quadratic(1.0);
        assert!((q.next(1.0, 2) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((q.next(1.0, 2) - 0.70711).abs() < 1e-5);
        assert_eq!(EpsilonSchedule::quadratic(0.0).value_at(50), 0.0);
        assert_eq!(q.value_at(1), 1.0);
    }

    #[test]
    fn quadratic_schedule_is_bounded_and_vanishes() {
        let q = EpsilonSchedule::quadratic(1.0);
        let mut eps = q.initial;
        for i in 2..=20_000 {
            eps = q.next(eps, i);
            assert!((0.0..=1.0).contains(&eps));
            if i > 10_000 {
                assert!(eps < 0.01);
            }
        }
    }

    #[test]
    fn full_exploration_without_replacement() {
        let sp = space(4);
        let mut st = BanditState::new(PolicyConfig::egreedy(EpsilonSchedule::constant(1.0)), &sp, 3);
        let mut seen = std::collections::HashSet::new();
        for i in 1..=sp.len() {
            let out = st.step(&sp, ramp);
            assert!(out.newly_explored && seen.insert(out.selection.action));
            assert_eq!(st.history().len(), i);
            assert_eq!(st.all_explored(), i == sp.len());
        }
        assert_eq!(st.best_action(), Some(sp.len() - 1));
        for _ in 0..10 {
            let out = st.step(&sp, ramp);
            assert_eq!(out.selection.kind, SelectionKind::Exploit);
            assert_eq!(out.selection.action, sp.len() - 1);
        }
    }

    #[test]
    fn zero_epsilon_is_greedy_after_first_pick() {
        let sp = space(4);
        let mut st = BanditState::new(PolicyConfig::egreedy(EpsilonSchedule::constant(0.0)), &sp, 9);
        let first = st.step(&sp, ramp).selection.action;
        for _ in 0..50 {
            assert_eq!(st.step(&sp, ramp).selection.action, first);
        }
        assert_eq!(st.explored_count(), 1);
    }

    #[test]
    fn env_is_called_once_per_action() {
        let sp = space(3);
        let mut st = BanditState::new(PolicyConfig::egreedy(EpsilonSchedule::constant(0.5)), &sp, 1);
        let mut calls = vec![0; sp.len()];
        for _ in 0..200 {
            st.step(&sp, |a| {
                calls[a] += 1;
                ramp(a)
            });
        }
        assert!(calls.iter().all(|&c| c == 1));
    }

    #[test]
    fn best_is_argmax_with_lexicographic_ties() {
        let sp = space(3);
        let rewards = [1.0, 3.0, 2.0, 3.0, 0.5, 3.0];
        let mut st = BanditState::new(PolicyConfig::egreedy(EpsilonSchedule::constant(1.0)), &sp, 5);
        let mut last_best = 0.0;
        for _ in 0..6 {
            st.step(&sp, |a| Ok::<_, ()>(rewards[a]));
            let explored_max = (0..6)
                .filter_map(|a| st.reward_of(a).map(|r| (a, r)))
                .fold(None::<(usize, f64)>, |acc, (a, r)| match acc {
                    Some((_, br)) if br >= r => acc,
                    _ => Some((a, r)),
                });
            assert_eq!(st.best_action(), explored_max.map(|x| x.0));
            assert!(st.best_reward().unwrap() >= last_best);
            last_best = st.best_reward().unwrap();
        }
        assert_eq!(st.best_action(), Some(1));
    }

    #[test]
    fn infeasible_actions_never_become_best() {
        let sp = space(3);
        let mut st = BanditState::new(PolicyConfig::egreedy(EpsilonSchedule::constant(1.0)), &sp, 2);
        let mut flagged = 0;
        for _ in 0..6 {
            let out = st.step(&sp, |a| if a == 5 { Err(()) } else { Ok(1.0) });
            if !out.feasible {
                flagged += 1;
                assert_eq!(out.reward, 0.0);
            }
        }
        assert_eq!(flagged, 1);
        assert_eq!(st.best_action(), Some(0));
    }

    #[test]
    fn deterministic_replay() {
        let sp = space(5);
        let policy = PolicyConfig::with_similarity(
            EpsilonSchedule::quadratic(1.0),
            EpsilonSchedule::quadratic(0.5),
            SimilaritySemantics::Results,
        );
        let run = |seed| {
            let mut st = BanditState::new(policy, &sp, seed);
            for _ in 0..300 {
                st.step(&sp, ramp);
            }
            st.history().to_vec()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }

    #[test]
    fn similarity_zero_always_explores_neighbours() {
        let sp = space(4);
        let policy = PolicyConfig::with_similarity(
            EpsilonSchedule::constant(1.0),
            EpsilonSchedule::constant(0.0),
            SimilaritySemantics::Results,
        );
        let mut st = BanditState::new(policy, &sp, 11);
        st.step(&sp, ramp);
        while !st.all_explored() {
            let best = st.best_action().unwrap();
            let pool = st.unexplored().to_vec();
            let ties = sp.most_similar_among(pool, best);
            let out = st.step(&sp, ramp);
            assert_eq!(out.selection.kind, SelectionKind::Similar);
            assert!(ties.contains(&out.selection.action));
        }
    }

    #[test]
    fn similarity_one_is_uniform() {
        let sp = space(4);
        let policy = PolicyConfig::with_similarity(
            EpsilonSchedule::constant(1.0),
            EpsilonSchedule::constant(1.0),
            SimilaritySemantics::Results,
        );
        let mut st = BanditState::new(policy, &sp, 11);
        for _ in 0..sp.len() {
            assert_eq!(st.step(&sp, ramp).selection.kind, SelectionKind::Uniform);
        }
        let policy = PolicyConfig::with_similarity(
            EpsilonSchedule::constant(1.0),
            EpsilonSchedule::constant(1.0),
            SimilaritySemantics::Definition,
        );
        let mut st = BanditState::new(policy, &sp, 11);
        st.step(&sp, ramp);
        for _ in 1..sp.len() {
            assert_eq!(st.step(&sp, ramp).selection.kind, SelectionKind::Similar);
        }
    }

    #[test]
    fn similarity_ties_are_drawn_evenly() {
        // best (1 1 2) leaves (1 1 1), (1 1 3) and (1 2 2) at distance 1
        let sp = space(3);
        let best = sp.index_of(&"(1 1 2)".parse().unwrap()).unwrap();
        let mut counts = [0usize; 6];
        let trials = 30_000;
        for seed in 0..trials {
            let policy = PolicyConfig::with_similarity(
                EpsilonSchedule::constant(1.0),
                EpsilonSchedule::constant(0.0),
                SimilaritySemantics::Results,
            );
            let mut st = BanditState::new(policy, &sp, seed);
            st.record(best, 1.0, true);
            st.iteration = 2;
            let sel = st.select_action_similarity(&sp, 0.0, SimilaritySemantics::Results);
            counts[sel.action] += 1;
        }
        for name in ["(1 1 1)", "(1 1 3)", "(1 2 2)"] {
            let i = sp.index_of(&name.parse().unwrap()).unwrap();
            let frac = counts[i] as f64 / trials as f64;
            assert!((frac - 1.0 / 3.0).abs() < 0.015, "{name}: {frac}");
        }
        assert_eq!(counts.iter().sum::<usize>(), trials as usize);
    }

    #[test]
    fn policy_labels() {
        assert_eq!(PolicyConfig::egreedy(EpsilonSchedule::constant(1.0)).label(), "cnt:1");
        assert_eq!(PolicyConfig::egreedy(EpsilonSchedule::quadratic(0.2)).label(), "dec:0.2");
        let p = PolicyConfig::with_similarity(
            EpsilonSchedule::quadratic(1.0),
            EpsilonSchedule::quadratic(0.5),
            SimilaritySemantics::Definition,
        );
        assert_eq!(p.label(), "sim-dec:1:0.5@definition");
        assert_eq!(p.algorithm(), Algorithm::EgreedySimilarity);
    }
}
