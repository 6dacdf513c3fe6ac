use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use dresg::action::{ActionSpace, HopsCombination};
use dresg::config::{parse_policy, resolve_scenario, ConfigError, ExperimentConfig, ScenarioPreset};
use dresg::energy::EnergyError;
use dresg::harness::{run_prepared, similarity_ratio, HarnessError, PreparedScenario};
use dresg::output;

#[derive(Parser)]
#[command(
    name = "dresg",
    version,
    about = "Energy of multi-hop uplink routings in ring LPWANs, and epsilon-greedy routing learners",
    after_help = "Scenarios are preset names (see `dresg presets`) or paths to TOML config files.\n\
                  Relative paths are also looked up in $DRESG_CONFIG_DIR.\n\
                  Exit codes: 0 success, 2 usage error, 3 infeasible configuration, 1 other failures."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count (and optionally list) the routing actions of an R-ring network.
    Enumerate {
        #[arg(long)]
        rings: usize,
        /// Print every action, one per line, in lexicographic order.
        #[arg(long)]
        list: bool,
    },
    /// Per-ring energy report (CSV) of one routing action.
    Evaluate {
        #[arg(long)]
        scenario: String,
        /// Hop lengths, e.g. "(1 1 3)".
        #[arg(long)]
        action: String,
    },
    /// Energy-optimal action found by exhaustive search.
    Oracle {
        #[arg(long)]
        scenario: String,
    },
    /// Run a learning experiment and write its CSV outputs.
    Learn {
        #[arg(long)]
        scenario: String,
        /// Policy shorthand (cnt:E, dec:E, sim-dec:E:ES, ...). Defaults to the
        /// config file's policy.
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        /// Overrides the config's seed base.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Similarity improvement ratio between two policies (A over B).
    Compare {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        policy_a: String,
        #[arg(long)]
        policy_b: String,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the ratio CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the bundled scenario presets.
    Presets,
}

enum Failure {
    Usage(String),
    Infeasible(String),
    Other(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Energy(
                EnergyError::NoFeasibleAction | EnergyError::InfeasibleAction { .. },
            ) => Failure::Infeasible(e.to_string()),
            ConfigError::Io { .. } => Failure::Other(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Energy(_) => Failure::Infeasible(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<EnergyError> for Failure {
    fn from(e: EnergyError) -> Self {
        Failure::Infeasible(e.to_string())
    }
}

impl From<output::OutputError> for Failure {
    fn from(e: output::OutputError) -> Self {
        Failure::Other(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Infeasible(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn with_overrides(
    mut cfg: ExperimentConfig,
    iterations: Option<usize>,
    reps: Option<usize>,
    seed: Option<u64>,
) -> Result<ExperimentConfig, Failure> {
    if let Some(i) = iterations {
        cfg.run.iterations = i;
    }
    if let Some(r) = reps {
        cfg.run.repetitions = r;
    }
    if let Some(s) = seed {
        cfg.run.seed_base = s;
    }
    if cfg.run.iterations == 0 || cfg.run.repetitions == 0 {
        return Err(Failure::Usage("iterations and reps must be at least 1".into()));
    }
    Ok(cfg)
}

fn policy_arg(p: &str) -> Result<dresg::PolicyConfig, Failure> {
    Ok(parse_policy(p)?)
}

fn run(cmd: Command) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cmd {
        Command::Enumerate { rings, list } => {
            let space = ActionSpace::enumerate(rings).map_err(|e| Failure::Usage(e.to_string()))?;
            writeln!(out, "{}", space.len())?;
            if list {
                for a in space.actions() {
                    writeln!(out, "{a}")?;
                }
            }
        }
        Command::Evaluate { scenario, action } => {
            let cfg = resolve_scenario(&scenario, None)?;
            let action: HopsCombination =
                action.parse().map_err(|e: dresg::action::ActionError| Failure::Usage(e.to_string()))?;
            if action.rings() != cfg.network.rings {
                return Err(Failure::Usage(format!(
                    "action {action} has {} rings, scenario has {}",
                    action.rings(),
                    cfg.network.rings
                )));
            }
            let report = cfg.scenario()?.evaluate(&action)?;
            output::write_report(&mut out, &report)?;
        }
        Command::Oracle { scenario } => {
            let cfg = resolve_scenario(&scenario, None)?;
            let (best, report) = cfg.scenario()?.brute_force_optimal()?;
            writeln!(out, "action,bottleneck_ring,e_b_j")?;
            writeln!(
                out,
                "{best},{},{}",
                report.bottleneck_ring,
                output::sci(report.e_b)
            )?;
        }
        Command::Learn {
            scenario,
            policy,
            iterations,
            reps,
            seed,
            out: dir,
        } => {
            let policy = policy.as_deref().map(policy_arg).transpose()?;
            if policy.is_none() && ScenarioPreset::find(&scenario).is_some() {
                return Err(Failure::Usage(
                    "--policy is required with a preset scenario".into(),
                ));
            }
            let cfg = with_overrides(
                resolve_scenario(&scenario, policy.as_ref())?,
                iterations,
                reps,
                seed,
            )?;
            let exp = cfg.experiment()?;
            let prepared = PreparedScenario::new(exp.scenario.clone())?;
            let log = run_prepared(&exp, &prepared)?;
            output::write_run(&dir, &cfg, &log)?;
            writeln!(
                out,
                "{}: {} reps x {} iterations, optimal {} (e_b {}), mean optimal iteration {}, final mean historic bottleneck {}",
                log.policy.label(),
                exp.repetitions,
                exp.iterations,
                log.optimal_action,
                output::sci(log.optimal_e_b),
                log.mean_optimal_iteration()
                    .map_or("never".to_string(), |m| format!("{m:.3}")),
                output::sci(*log.mean_historic.last().expect("iterations >= 1")),
            )?;
        }
        Command::Compare {
            scenario,
            policy_a,
            policy_b,
            iterations,
            reps,
            seed,
            out: file,
        } => {
            let a = policy_arg(&policy_a)?;
            let b = policy_arg(&policy_b)?;
            let cfg = with_overrides(resolve_scenario(&scenario, Some(&a))?, iterations, reps, seed)?;
            let exp_a = cfg.experiment()?;
            let mut exp_b = exp_a.clone();
            exp_b.policy = b;
            let prepared = PreparedScenario::new(Arc::clone(&exp_a.scenario))?;
            let log_a = run_prepared(&exp_a, &prepared)?;
            let log_b = run_prepared(&exp_b, &prepared)?;
            let rho = similarity_ratio(&log_a, &log_b)?;
            match file {
                Some(path) => {
                    let f = io::BufWriter::new(std::fs::File::create(path)?);
                    output::write_ratio(f, &log_a, &log_b, &rho)?;
                }
                None => output::write_ratio(&mut out, &log_a, &log_b, &rho)?,
            }
        }
        Command::Presets => {
            for p in ScenarioPreset::all() {
                writeln!(out, "{p}")?;
            }
        }
    }
    Ok(())
}
