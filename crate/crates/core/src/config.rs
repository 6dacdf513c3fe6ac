//! Experiment configuration documents, scenario presets and policy
//! shorthands.
//!
//! A configuration is one TOML document with the sections `network`,
//! `radio`, `packet`, `policy` and `run`. Everything except the policy
//! algorithm and its initial epsilon has a default. The transceiver
//! profile is either inlined under `[radio.profile]` or referenced by path
//! (`radio.profile = "cc1200_868.toml"`), resolved relative to the config
//! file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bandit::{
    EpsilonSchedule, PolicyConfig, ScheduleKind, SimilarityConfig, SimilaritySemantics,
};
use crate::energy::{EnergyError, PacketModel, Scenario};
use crate::harness::Experiment;
use crate::link::{max_range, LinkBudgetModel, LinkError, TransceiverProfile};
use crate::topology::{NetworkStructure, Spreading, TopologyError};

/// Environment variable naming the directory searched for relative config
/// and profile paths that do not exist in the working directory.
pub const CONFIG_DIR_ENV: &str = "DRESG_CONFIG_DIR";

/// Bundled CC1200-class profile used when a config names none.
pub const DEFAULT_PROFILE_TOML: &str = include_str!("../data/cc1200_868.toml");

/// Log-distance coefficients of the outdoor pico/hot-zone path loss model
/// for sub-GHz deployments (intercept dB, slope dB/decade).
pub const DEFAULT_PATH_LOSS: (f64, f64) = (23.3, 37.6);
pub const DEFAULT_FREQUENCY_HZ: f64 = 868e6;
pub const DEFAULT_TX_GAIN_DBI: f64 = 0.0;
pub const DEFAULT_RX_GAIN_DBI: f64 = 3.0;
pub const DEFAULT_REPETITIONS: usize = 1000;
pub const DEFAULT_SEED_BASE: u64 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {what}: {message}")]
    Parse { what: String, message: String },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("malformed policy `{0}`: expected cnt:E, dec:E, sim-dec:E:ES, sim-cnt:E:ES or sim:K:E:K:ES with an optional @results/@definition suffix")]
    Policy(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSection {
    pub rings: usize,
    pub children_ratio: u64,
    pub branches: u64,
    /// Distance of the last ring; the coverage range when omitted.
    pub max_distance: f64,
    pub spreading: Spreading,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioSection {
    pub profile: TransceiverProfile,
    pub link: LinkBudgetModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySection {
    pub algorithm: crate::bandit::Algorithm,
    pub epsilon_initial: f64,
    pub epsilon_schedule: ScheduleKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_s_initial: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_s_schedule: Option<ScheduleKind>,
    pub similarity_semantics: SimilaritySemantics,
}

impl PolicySection {
    pub fn to_policy(&self) -> PolicyConfig {
        let epsilon = EpsilonSchedule {
            kind: self.epsilon_schedule,
            initial: self.epsilon_initial,
        };
        match self.algorithm {
            crate::bandit::Algorithm::Egreedy => PolicyConfig::egreedy(epsilon),
            crate::bandit::Algorithm::EgreedySimilarity => PolicyConfig {
                epsilon,
                similarity: Some(SimilarityConfig {
                    schedule: EpsilonSchedule {
                        kind: self.epsilon_s_schedule.unwrap_or(self.epsilon_schedule),
                        initial: self.epsilon_s_initial.unwrap_or(1.0),
                    },
                    semantics: self.similarity_semantics,
                }),
            },
        }
    }

    pub fn from_policy(policy: &PolicyConfig) -> Self {
        Self {
            algorithm: policy.algorithm(),
            epsilon_initial: policy.epsilon.initial,
            epsilon_schedule: policy.epsilon.kind,
            epsilon_s_initial: policy.similarity.map(|s| s.schedule.initial),
            epsilon_s_schedule: policy.similarity.map(|s| s.schedule.kind),
            similarity_semantics: policy
                .similarity
                .map(|s| s.semantics)
                .unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    pub iterations: usize,
    pub repetitions: usize,
    pub seed_base: u64,
}

/// Fully resolved configuration; serializing it yields a document that
/// loads back to the same value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub network: NetworkSection,
    pub radio: RadioSection,
    pub packet: PacketModel,
    pub policy: PolicySection,
    pub run: RunSection,
}

impl ExperimentConfig {
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let n = &self.network;
        let net = NetworkStructure::build(
            n.rings,
            n.children_ratio,
            n.branches,
            n.max_distance,
            n.spreading,
        )?;
        Ok(Scenario::new(
            net,
            self.radio.profile.clone(),
            self.radio.link,
            self.packet,
        )?)
    }

    pub fn experiment(&self) -> Result<Experiment, ConfigError> {
        Ok(Experiment {
            scenario: Arc::new(self.scenario()?),
            policy: self.policy.to_policy(),
            iterations: self.run.iterations,
            repetitions: self.run.repetitions,
            seed_base: self.run.seed_base,
            keep_traces: false,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

// ---- on-disk form, every key optional ----

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    network: Option<RawNetwork>,
    radio: Option<RawRadio>,
    packet: Option<RawPacket>,
    policy: Option<RawPolicy>,
    run: Option<RawRun>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    rings: Option<i64>,
    children_ratio: Option<i64>,
    branches: Option<i64>,
    max_distance: Option<f64>,
    spreading: Option<Spreading>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ProfileRef {
    Path(PathBuf),
    Inline(RawProfile),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    name: Option<String>,
    power_levels: Vec<crate::link::PowerLevel>,
    rate_levels: Vec<crate::link::RateLevel>,
    rx_current_ma: f64,
    supply_voltage: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRadio {
    profile: Option<ProfileRef>,
    link: Option<RawLink>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    intercept_db: Option<f64>,
    slope_db_per_decade: Option<f64>,
    frequency_hz: Option<f64>,
    tx_gain_dbi: Option<f64>,
    rx_gain_dbi: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPacket {
    payload_bytes: Option<u32>,
    header_bytes: Option<u32>,
    packet_bytes: Option<u32>,
    max_payloads_per_packet: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    algorithm: Option<crate::bandit::Algorithm>,
    epsilon_initial: Option<f64>,
    epsilon_schedule: Option<ScheduleKind>,
    epsilon_s_initial: Option<f64>,
    epsilon_s_schedule: Option<ScheduleKind>,
    similarity_semantics: Option<SimilaritySemantics>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    iterations: Option<i64>,
    repetitions: Option<i64>,
    seed_base: Option<u64>,
}

fn positive(field: &'static str, v: Option<i64>, default: Option<i64>) -> Result<u64, ConfigError> {
    match v.or(default) {
        None => Err(ConfigError::Missing(field)),
        Some(x) if x >= 1 => Ok(x as u64),
        Some(x) => Err(invalid(field, format!("must be at least 1, got {x}"))),
    }
}

fn probability(field: &'static str, v: f64) -> Result<f64, ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(invalid(field, format!("must lie in [0, 1], got {v}")))
    }
}

pub fn parse_profile(text: &str, origin: &str) -> Result<TransceiverProfile, ConfigError> {
    let raw: RawProfile = toml::from_str(text).map_err(|e| ConfigError::Parse {
        what: origin.to_string(),
        message: e.to_string(),
    })?;
    resolve_profile(raw, origin)
}

fn resolve_profile(raw: RawProfile, origin: &str) -> Result<TransceiverProfile, ConfigError> {
    let profile = TransceiverProfile {
        name: raw.name.unwrap_or_else(|| origin.to_string()),
        power_levels: raw.power_levels,
        rate_levels: raw.rate_levels,
        rx_current_ma: raw.rx_current_ma,
        supply_voltage: raw.supply_voltage.unwrap_or(3.0),
    };
    profile.validate()?;
    Ok(profile)
}

pub fn default_profile() -> TransceiverProfile {
    parse_profile(DEFAULT_PROFILE_TOML, "cc1200-868").expect("bundled profile is valid")
}

pub fn default_link() -> LinkBudgetModel {
    LinkBudgetModel {
        intercept_db: DEFAULT_PATH_LOSS.0,
        slope_db_per_decade: DEFAULT_PATH_LOSS.1,
        frequency_hz: DEFAULT_FREQUENCY_HZ,
        tx_gain_dbi: DEFAULT_TX_GAIN_DBI,
        rx_gain_dbi: DEFAULT_RX_GAIN_DBI,
    }
}

/// Iteration horizon used when a config or preset gives none: enough to
/// explore every action twice, and never below 500.
pub fn default_iterations(rings: usize) -> usize {
    let actions: usize = (1..=rings.min(10)).product();
    actions.saturating_mul(2).max(500)
}

/// Resolves `path` against the working directory, then [`CONFIG_DIR_ENV`].
pub fn locate(path: &Path) -> PathBuf {
    if path.is_absolute() || path.exists() {
        return path.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_path_buf()
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let path = locate(path);
    let text = read(&path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base, &path.display().to_string())
}

/// Parses a config document; `base_dir` anchors relative profile paths.
pub fn parse_config(
    text: &str,
    base_dir: &Path,
    origin: &str,
) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        what: origin.to_string(),
        message: e.to_string(),
    })?;
    resolve(raw, base_dir)
}

fn resolve(raw: RawConfig, base_dir: &Path) -> Result<ExperimentConfig, ConfigError> {
    let radio = raw.radio.unwrap_or_default();
    let profile = match radio.profile {
        None => default_profile(),
        Some(ProfileRef::Inline(p)) => resolve_profile(p, "inline profile")?,
        Some(ProfileRef::Path(p)) => {
            let p = if p.is_relative() && base_dir.join(&p).exists() {
                base_dir.join(p)
            } else {
                locate(&p)
            };
            parse_profile(&read(&p)?, &p.display().to_string())?
        }
    };
    let l = radio.link.unwrap_or_default();
    let link = LinkBudgetModel {
        intercept_db: l.intercept_db.unwrap_or(DEFAULT_PATH_LOSS.0),
        slope_db_per_decade: l.slope_db_per_decade.unwrap_or(DEFAULT_PATH_LOSS.1),
        frequency_hz: l.frequency_hz.unwrap_or(DEFAULT_FREQUENCY_HZ),
        tx_gain_dbi: l.tx_gain_dbi.unwrap_or(DEFAULT_TX_GAIN_DBI),
        rx_gain_dbi: l.rx_gain_dbi.unwrap_or(DEFAULT_RX_GAIN_DBI),
    };
    link.validate()?;

    let n = raw.network.unwrap_or_default();
    let rings = positive("network.rings", n.rings, None)? as usize;
    let max_distance = match n.max_distance {
        Some(d) if d.is_finite() && d > 0.0 => d,
        Some(d) => return Err(invalid("network.max_distance", format!("must be positive, got {d}"))),
        None => max_range(&profile, &link),
    };
    let network = NetworkSection {
        rings,
        children_ratio: positive("network.children_ratio", n.children_ratio, None)?,
        branches: positive("network.branches", n.branches, Some(1))?,
        max_distance,
        spreading: n.spreading.unwrap_or_default(),
    };

    let p = raw.packet.unwrap_or_default();
    let d = PacketModel::default();
    let packet = PacketModel {
        payload_bytes: p.payload_bytes.unwrap_or(d.payload_bytes),
        header_bytes: p.header_bytes.unwrap_or(d.header_bytes),
        packet_bytes: p.packet_bytes.unwrap_or(d.packet_bytes),
        max_payloads_per_packet: p.max_payloads_per_packet.unwrap_or(d.max_payloads_per_packet),
    };
    packet.validate()?;

    let pol = raw.policy.unwrap_or_default();
    let algorithm = pol.algorithm.ok_or(ConfigError::Missing("policy.algorithm"))?;
    let epsilon_initial = probability(
        "policy.epsilon_initial",
        pol.epsilon_initial
            .ok_or(ConfigError::Missing("policy.epsilon_initial"))?,
    )?;
    let epsilon_schedule = pol.epsilon_schedule.unwrap_or(ScheduleKind::Quadratic);
    let (epsilon_s_initial, epsilon_s_schedule) = match algorithm {
        crate::bandit::Algorithm::Egreedy => (None, None),
        crate::bandit::Algorithm::EgreedySimilarity => {
            let eps_s = pol
                .epsilon_s_initial
                .ok_or(ConfigError::Missing("policy.epsilon_s_initial"))?;
            (
                Some(probability("policy.epsilon_s_initial", eps_s)?),
                Some(pol.epsilon_s_schedule.unwrap_or(epsilon_schedule)),
            )
        }
    };
    let policy = PolicySection {
        algorithm,
        epsilon_initial,
        epsilon_schedule,
        epsilon_s_initial,
        epsilon_s_schedule,
        similarity_semantics: pol.similarity_semantics.unwrap_or_default(),
    };

    let r = raw.run.unwrap_or_default();
    let run = RunSection {
        iterations: positive(
            "run.iterations",
            r.iterations,
            Some(default_iterations(rings) as i64),
        )? as usize,
        repetitions: positive(
            "run.repetitions",
            r.repetitions,
            Some(DEFAULT_REPETITIONS as i64),
        )? as usize,
        seed_base: r.seed_base.unwrap_or(DEFAULT_SEED_BASE),
    };

    Ok(ExperimentConfig {
        network,
        radio: RadioSection { profile, link },
        packet,
        policy,
        run,
    })
}

/// Parses a policy shorthand:
///
/// * `cnt:E` / `dec:E` - plain epsilon-greedy, constant or quadratically
///   decreasing epsilon starting at `E`;
/// * `sim-cnt:E:ES` / `sim-dec:E:ES` - similarity variant, both epsilons on
///   the same schedule family;
/// * `sim:K:E:K:ES` - similarity variant with independent families;
///
/// optionally followed by `@results` (default) or `@definition`.
pub fn parse_policy(spec: &str) -> Result<PolicyConfig, ConfigError> {
    let err = || ConfigError::Policy(spec.to_string());
    let (body, semantics) = match spec.trim().split_once('@') {
        None => (spec.trim(), SimilaritySemantics::Results),
        Some((b, "results")) => (b, SimilaritySemantics::Results),
        Some((b, "definition")) => (b, SimilaritySemantics::Definition),
        Some(_) => return Err(err()),
    };
    let parts: Vec<&str> = body.split(':').collect();
    let kind = |s: &str| match s {
        "cnt" | "constant" => Ok(ScheduleKind::Constant),
        "dec" | "quadratic" => Ok(ScheduleKind::Quadratic),
        _ => Err(err()),
    };
    let eps = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|v| (0.0..=1.0).contains(v))
            .ok_or_else(err)
    };
    let sched = |k: &str, v: &str| -> Result<EpsilonSchedule, ConfigError> {
        Ok(EpsilonSchedule {
            kind: kind(k)?,
            initial: eps(v)?,
        })
    };
    let policy = match parts.as_slice() {
        [k @ ("cnt" | "dec"), e] => PolicyConfig::egreedy(sched(k, e)?),
        ["sim-cnt", e, es] => {
            PolicyConfig::with_similarity(sched("cnt", e)?, sched("cnt", es)?, semantics)
        }
        ["sim-dec", e, es] => {
            PolicyConfig::with_similarity(sched("dec", e)?, sched("dec", es)?, semantics)
        }
        ["sim", k, e, ks, es] => {
            PolicyConfig::with_similarity(sched(k, e)?, sched(ks, es)?, semantics)
        }
        _ => return Err(err()),
    };
    if policy.similarity.is_none() && body.len() != spec.trim().len() {
        // a semantics suffix on a plain policy is meaningless
        return Err(err());
    }
    Ok(policy)
}

/// Named network structure evaluated with the default radio and packet
/// parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPreset {
    pub name: String,
    pub rings: usize,
    pub children_ratio: u64,
    pub iterations: usize,
    pub notes: &'static str,
}

impl fmt::Display for ScenarioPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<6} R={} c={} I={}  {}",
            self.name, self.rings, self.children_ratio, self.iterations, self.notes
        )
    }
}

pub const PRESET_RINGS: [usize; 5] = [3, 4, 5, 6, 7];
pub const PRESET_CHILDREN: [u64; 4] = [1, 2, 3, 8];

const ALIASES: [(&str, usize, u64, &str); 3] = [
    ("A", 3, 2, "small network, 6 actions"),
    ("E", 4, 8, "24 actions, wide tree"),
    ("N", 7, 3, "5040 actions"),
];

impl ScenarioPreset {
    fn grid(rings: usize, c: u64) -> Self {
        Self {
            name: format!("R{rings}c{c}"),
            rings,
            children_ratio: c,
            iterations: default_iterations(rings),
            notes: if c == 1 { "line network" } else { "" },
        }
    }

    /// Every preset: the named scenarios followed by the `RXcY` grid.
    pub fn all() -> Vec<Self> {
        let mut v: Vec<Self> = ALIASES
            .iter()
            .map(|&(name, r, c, notes)| Self {
                name: name.to_string(),
                notes,
                ..Self::grid(r, c)
            })
            .collect();
        for r in PRESET_RINGS {
            for c in PRESET_CHILDREN {
                v.push(Self::grid(r, c));
            }
        }
        v
    }

    pub fn find(name: &str) -> Option<Self> {
        Self::all()
            .into_iter()
            .find(|p| p.name.eq_ignore_ascii_case(name))
    }

    /// Resolved configuration with the default radio, packet and run
    /// settings.
    pub fn config(&self, policy: &PolicyConfig) -> ExperimentConfig {
        let profile = default_profile();
        let link = default_link();
        ExperimentConfig {
            network: NetworkSection {
                rings: self.rings,
                children_ratio: self.children_ratio,
                branches: 1,
                max_distance: max_range(&profile, &link),
                spreading: Spreading::Equidistant,
            },
            radio: RadioSection { profile, link },
            packet: PacketModel::default(),
            policy: PolicySection::from_policy(policy),
            run: RunSection {
                iterations: self.iterations,
                repetitions: DEFAULT_REPETITIONS,
                seed_base: DEFAULT_SEED_BASE,
            },
        }
    }

    pub fn scenario(&self) -> Scenario {
        self.config(&PolicyConfig::egreedy(EpsilonSchedule::constant(1.0)))
            .scenario()
            .expect("presets are valid")
    }
}

/// A preset name, or a path to a config document.
pub fn resolve_scenario(
    name_or_path: &str,
    policy: Option<&PolicyConfig>,
) -> Result<ExperimentConfig, ConfigError> {
    if let Some(p) = ScenarioPreset::find(name_or_path) {
        let fallback = PolicyConfig::egreedy(EpsilonSchedule::constant(1.0));
        return Ok(p.config(policy.unwrap_or(&fallback)));
    }
    let path = locate(Path::new(name_or_path));
    if !path.is_file() {
        return Err(ConfigError::UnknownScenario(name_or_path.to_string()));
    }
    let mut cfg = load_config(&path)?;
    if let Some(p) = policy {
        cfg.policy = PolicySection::from_policy(p);
    }
    Ok(cfg)
}
