//! Seeded, repeated learning experiments and their metrics.
//!
//! Every round the whole network runs the chosen routing, so every ring is
//! charged its per-round energy. The historic bottleneck `E(i)` is the
//! largest per-ring cumulative energy after `i` rounds, taken per
//! repetition and then averaged over repetitions.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::action::{ActionError, ActionSpace, HopsCombination};
use crate::bandit::{BanditState, PolicyConfig};
use crate::energy::{reward, EnergyError, EvaluationCache, Scenario};

/// Repetitions simulated concurrently before being folded into the
/// aggregates (in repetition order).
const CHUNK: usize = 128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("logs are not comparable: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Action(#[from] ActionError),
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub scenario: Arc<Scenario>,
    pub policy: PolicyConfig,
    pub iterations: usize,
    pub repetitions: usize,
    pub seed_base: u64,
    /// Keep full per-repetition traces in the log.
    pub keep_traces: bool,
}

impl Experiment {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.iterations == 0 {
            return Err(HarnessError::Invalid("iterations must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(HarnessError::Invalid("repetitions must be at least 1".into()));
        }
        if !self.policy.epsilon.is_valid() {
            return Err(HarnessError::Invalid("epsilon_initial must lie in [0, 1]".into()));
        }
        if let Some(sim) = &self.policy.similarity {
            if !sim.schedule.is_valid() {
                return Err(HarnessError::Invalid(
                    "epsilon_s_initial must lie in [0, 1]".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn seed_for(&self, repetition: usize) -> u64 {
        self.seed_base.wrapping_add(repetition as u64)
    }
}

/// Brute-force optimum and the evaluation table shared by all repetitions.
pub struct PreparedScenario {
    pub cache: EvaluationCache,
    pub optimal_action: HopsCombination,
    pub optimal_e_b: f64,
}

impl PreparedScenario {
    pub fn new(scenario: Arc<Scenario>) -> Result<Self, HarnessError> {
        let space = Arc::new(ActionSpace::enumerate(scenario.rings())?);
        let (optimal_action, report) = scenario.brute_force_in(&space)?;
        Ok(Self {
            cache: EvaluationCache::new(scenario, space),
            optimal_action,
            optimal_e_b: report.e_b,
        })
    }

    pub fn space(&self) -> &ActionSpace {
        self.cache.space()
    }
}

/// Everything observed in one repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionLog {
    pub repetition: usize,
    pub seed: u64,
    /// Action index (into the lexicographic action space) per iteration.
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub e_b: Vec<f64>,
    /// Historic bottleneck `E(i)` per iteration.
    pub historic: Vec<f64>,
    /// `cumulative[ring - 1][i - 1]`, only when traces are kept.
    pub cumulative: Option<Vec<Vec<f64>>>,
    pub final_cumulative: Vec<f64>,
    pub best_action: Option<usize>,
    pub optimal_iteration: Option<usize>,
    pub all_explored_iteration: Option<usize>,
    pub infeasible_count: usize,
    /// Sum over iterations of the energy spent by all stations.
    pub network_energy: f64,
}

pub fn run_repetition(
    prepared: &PreparedScenario,
    policy: PolicyConfig,
    iterations: usize,
    repetition: usize,
    seed: u64,
    keep_matrix: bool,
) -> RepetitionLog {
    let space = prepared.space();
    let scenario = prepared.cache.scenario();
    let rings = scenario.rings();
    let mut state = BanditState::new(policy, space, seed);
    let mut log = RepetitionLog {
        repetition,
        seed,
        actions: Vec::with_capacity(iterations),
        rewards: Vec::with_capacity(iterations),
        e_b: Vec::with_capacity(iterations),
        historic: Vec::with_capacity(iterations),
        cumulative: keep_matrix.then(|| vec![Vec::with_capacity(iterations); rings]),
        final_cumulative: vec![0.0; rings],
        best_action: None,
        optimal_iteration: None,
        all_explored_iteration: None,
        infeasible_count: 0,
        network_energy: 0.0,
    };

    for _ in 0..iterations {
        let out = state.step(space, |a| {
            prepared.cache.get(a).and_then(|rep| reward(&rep))
        });
        let i = out.iteration;
        let action = out.selection.action;
        let mut e_b = 0.0;
        if let Ok(rep) = prepared.cache.get(action) {
            for (cum, ring) in log.final_cumulative.iter_mut().zip(&rep.rings) {
                *cum += ring.e;
            }
            e_b = rep.e_b;
            log.network_energy += rep.network_energy(&scenario.network);
            if log.optimal_iteration.is_none() && rep.e_b == prepared.optimal_e_b {
                log.optimal_iteration = Some(i);
            }
        }
        if !out.feasible && out.newly_explored {
            log.infeasible_count += 1;
        }
        if let Some(m) = log.cumulative.as_mut() {
            for (row, cum) in m.iter_mut().zip(&log.final_cumulative) {
                row.push(*cum);
            }
        }
        if log.all_explored_iteration.is_none() && state.all_explored() {
            log.all_explored_iteration = Some(i);
        }
        let historic = log
            .final_cumulative
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        log.actions.push(action);
        log.rewards.push(out.reward);
        log.e_b.push(e_b);
        log.historic.push(historic);
    }
    log.best_action = state.best_action();
    log
}

/// Per-repetition outcome kept for every repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionSummary {
    pub repetition: usize,
    pub seed: u64,
    pub best_action: Option<usize>,
    pub optimal_iteration: Option<usize>,
    pub all_explored_iteration: Option<usize>,
    pub infeasible_count: usize,
    pub final_historic: f64,
}

/// Scenario identity used to refuse comparing unrelated runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioKey {
    pub rings: usize,
    pub children_ratio: u64,
    pub branches: u64,
    pub max_distance: f64,
    pub profile: String,
    pub optimal_e_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentLog {
    pub key: ScenarioKey,
    pub policy: PolicyConfig,
    pub iterations: usize,
    pub seed_base: u64,
    pub action_count: usize,
    pub optimal_action: HopsCombination,
    pub optimal_e_b: f64,
    pub mean_e_b: Vec<f64>,
    pub mean_historic: Vec<f64>,
    pub std_historic: Vec<f64>,
    pub repetitions: Vec<RepetitionSummary>,
    pub traces: Option<Vec<RepetitionLog>>,
}

/// Step function `(value, fraction of repetitions <= value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub steps: Vec<(usize, f64)>,
    pub total: usize,
    /// Repetitions where the event never happened within the horizon.
    pub censored: usize,
}

impl EmpiricalCdf {
    pub fn from_observations(values: impl IntoIterator<Item = Option<usize>>) -> Self {
        let mut observed = Vec::new();
        let mut total = 0;
        for v in values {
            total += 1;
            if let Some(v) = v {
                observed.push(v);
            }
        }
        observed.sort_unstable();
        let mut steps: Vec<(usize, f64)> = Vec::new();
        for (k, &v) in observed.iter().enumerate() {
            let frac = (k + 1) as f64 / total as f64;
            match steps.last_mut() {
                Some(last) if last.0 == v => last.1 = frac,
                _ => steps.push((v, frac)),
            }
        }
        Self {
            censored: total - observed.len(),
            steps,
            total,
        }
    }

    /// Fraction of repetitions with value `<= x`.
    pub fn at(&self, x: usize) -> f64 {
        self.steps
            .iter()
            .take_while(|(v, _)| *v <= x)
            .last()
            .map_or(0.0, |s| s.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionStats {
    pub mean_historic: Vec<f64>,
    pub std_historic: Vec<f64>,
    pub optimal_iteration: EmpiricalCdf,
    pub all_explored_iteration: EmpiricalCdf,
}

impl ExperimentLog {
    /// Repetition-averaged historic bottleneck at iteration `i` (1-based).
    pub fn historic_bottleneck(&self, i: usize) -> f64 {
        self.mean_historic[i - 1]
    }

    pub fn mean_optimal_iteration(&self) -> Option<f64> {
        mean_of(self.repetitions.iter().map(|r| r.optimal_iteration))
    }

    pub fn mean_all_explored_iteration(&self) -> Option<f64> {
        mean_of(self.repetitions.iter().map(|r| r.all_explored_iteration))
    }

    pub fn infeasible_total(&self) -> usize {
        self.repetitions.iter().map(|r| r.infeasible_count).sum()
    }

    pub fn distribution_stats(&self) -> DistributionStats {
        DistributionStats {
            mean_historic: self.mean_historic.clone(),
            std_historic: self.std_historic.clone(),
            optimal_iteration: EmpiricalCdf::from_observations(
                self.repetitions.iter().map(|r| r.optimal_iteration),
            ),
            all_explored_iteration: EmpiricalCdf::from_observations(
                self.repetitions.iter().map(|r| r.all_explored_iteration),
            ),
        }
    }
}

fn mean_of(values: impl Iterator<Item = Option<usize>>) -> Option<f64> {
    let (sum, n) = values
        .flatten()
        .fold((0usize, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum as f64 / n as f64)
}

/// Per-iteration running mean and variance, folded in repetition order.
struct Accumulator {
    count: usize,
    sum_e_b: Vec<f64>,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Accumulator {
    fn new(iterations: usize) -> Self {
        Self {
            count: 0,
            sum_e_b: vec![0.0; iterations],
            mean: vec![0.0; iterations],
            m2: vec![0.0; iterations],
        }
    }

    fn push(&mut self, log: &RepetitionLog) {
        self.count += 1;
        let n = self.count as f64;
        for (s, e) in self.sum_e_b.iter_mut().zip(&log.e_b) {
            *s += e;
        }
        for ((mean, m2), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(&log.historic) {
            let delta = x - *mean;
            *mean += delta / n;
            *m2 += delta * (x - *mean);
        }
    }

    fn finish(self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.count as f64;
        let mean_e_b = self.sum_e_b.iter().map(|s| s / n).collect();
        let std = self
            .m2
            .iter()
            .map(|m2| {
                if self.count < 2 {
                    0.0
                } else {
                    (m2 / (n - 1.0)).max(0.0).sqrt()
                }
            })
            .collect();
        (mean_e_b, self.mean, std)
    }
}

pub fn run_experiment(exp: &Experiment) -> Result<ExperimentLog, HarnessError> {
    exp.validate()?;
    let prepared = PreparedScenario::new(exp.scenario.clone())?;
    run_prepared(exp, &prepared)
}

/// Runs `exp` against an already prepared scenario, so several policies can
/// share one oracle and evaluation table.
pub fn run_prepared(
    exp: &Experiment,
    prepared: &PreparedScenario,
) -> Result<ExperimentLog, HarnessError> {
    exp.validate()?;
    let mut acc = Accumulator::new(exp.iterations);
    let mut summaries = Vec::with_capacity(exp.repetitions);
    let mut traces = exp.keep_traces.then(Vec::new);

    let reps: Vec<usize> = (0..exp.repetitions).collect();
    for chunk in reps.chunks(CHUNK) {
        let logs: Vec<RepetitionLog> = chunk
            .par_iter()
            .map(|&rep| {
                run_repetition(
                    prepared,
                    exp.policy,
                    exp.iterations,
                    rep,
                    exp.seed_for(rep),
                    exp.keep_traces,
                )
            })
            .collect();
        for log in logs {
            acc.push(&log);
            summaries.push(RepetitionSummary {
                repetition: log.repetition,
                seed: log.seed,
                best_action: log.best_action,
                optimal_iteration: log.optimal_iteration,
                all_explored_iteration: log.all_explored_iteration,
                infeasible_count: log.infeasible_count,
                final_historic: *log.historic.last().expect("iterations >= 1"),
            });
            if let Some(t) = traces.as_mut() {
                t.push(log);
            }
        }
    }

    let (mean_e_b, mean_historic, std_historic) = acc.finish();
    let s = prepared.cache.scenario();
    Ok(ExperimentLog {
        key: ScenarioKey {
            rings: s.network.rings(),
            children_ratio: s.network.children_ratio(),
            branches: s.network.branches(),
            max_distance: s.network.max_distance(),
            profile: s.profile.name.clone(),
            optimal_e_b: prepared.optimal_e_b,
        },
        policy: exp.policy,
        iterations: exp.iterations,
        seed_base: exp.seed_base,
        action_count: prepared.space().len(),
        optimal_action: prepared.optimal_action.clone(),
        optimal_e_b: prepared.optimal_e_b,
        mean_e_b,
        mean_historic,
        std_historic,
        repetitions: summaries,
        traces,
    })
}

/// `rho_s(i) = E(i) / E_s(i)` for every iteration; above 1 means the
/// similarity run consumed less.
pub fn similarity_ratio(
    plain: &ExperimentLog,
    similar: &ExperimentLog,
) -> Result<Vec<f64>, HarnessError> {
    if plain.key != similar.key {
        return Err(HarnessError::Mismatch(format!(
            "scenarios differ: {:?} vs {:?}",
            plain.key, similar.key
        )));
    }
    if plain.iterations != similar.iterations {
        return Err(HarnessError::Mismatch(format!(
            "iteration counts differ: {} vs {}",
            plain.iterations, similar.iterations
        )));
    }
    Ok(plain
        .mean_historic
        .iter()
        .zip(&similar.mean_historic)
        .map(|(p, s)| p / s)
        .collect())
}
