//! Energy model of multi-hop uplink routing in ring-structured LPWANs and
//! online learners for the energy-optimal routing.
//!
//! Stations are laid out on concentric rings around a gateway
//! ([`topology`]). A routing action gives each ring a hop length
//! ([`action`]); the energy engine turns an action into per-ring transmit
//! and receive energy and a bottleneck ([`energy`]), choosing the cheapest
//! feasible power/rate pair for every link ([`link`]). The learners in
//! [`bandit`] search the action space with epsilon-greedy exploration,
//! optionally biased towards actions similar to the best one seen, and
//! [`harness`] runs seeded repetitions and reduces them to the usual
//! metrics. [`config`] and [`output`] handle documents on disk.
//!
//! ```
//! use dresg::config::ScenarioPreset;
//! use dresg::action::HopsCombination;
//!
//! let scenario = ScenarioPreset::find("E").unwrap().scenario();
//! let single = scenario.evaluate(&HopsCombination::single_hop(4)).unwrap();
//! let (best, report) = scenario.brute_force_optimal().unwrap();
//! assert!(report.e_b <= single.e_b);
//! println!("optimal routing {best}: bottleneck {:.3e} J", report.e_b);
//! ```

pub mod action;
pub mod bandit;
pub mod config;
pub mod energy;
pub mod harness;
pub mod link;
pub mod output;
pub mod topology;

pub use action::{similarity, ActionSpace, HopsCombination};
pub use bandit::{BanditState, EpsilonSchedule, PolicyConfig, SimilaritySemantics};
pub use config::{load_config, ExperimentConfig, ScenarioPreset};
pub use energy::{EnergyReport, PacketModel, Scenario};
pub use harness::{run_experiment, similarity_ratio, Experiment, ExperimentLog};
pub use link::{LinkBudgetModel, TransceiverProfile};
pub use topology::{NetworkStructure, Spreading};
