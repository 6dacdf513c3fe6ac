//! CSV and manifest persistence.
//!
//! Column sets are fixed. Energies are written in scientific notation with
//! 13 significant digits; times likewise.
//!
//! | file | columns |
//! |------|---------|
//! | report | `action,ring,hop,destination,distance_m,power_level,p_tx_dbm,s_tx_bps,payloads_out,packets_out,rx_payloads,rx_packets,rx_time_s,e_tx_j,e_rx_j,e_j,bottleneck_ring,e_b_j` |
//! | `iterations.csv` | `iteration,mean_e_b_j,mean_historic_j,std_historic_j` |
//! | `optimal_iteration_cdf.csv`, `all_explored_cdf.csv` | `iteration,cumulative_fraction` (last row `censored,1` when some repetitions never reached the event) |
//! | `repetitions.csv` | `repetition,seed,best_action,optimal_iteration,all_explored_iteration,infeasible_actions,final_historic_j` |
//! | `ratio.csv` | `iteration,historic_a_j,historic_b_j,rho_s` |

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::energy::EnergyReport;
use crate::harness::{EmpiricalCdf, ExperimentLog};

pub const REPORT_COLUMNS: [&str; 18] = [
    "action",
    "ring",
    "hop",
    "destination",
    "distance_m",
    "power_level",
    "p_tx_dbm",
    "s_tx_bps",
    "payloads_out",
    "packets_out",
    "rx_payloads",
    "rx_packets",
    "rx_time_s",
    "e_tx_j",
    "e_rx_j",
    "e_j",
    "bottleneck_ring",
    "e_b_j",
];
pub const ITERATION_COLUMNS: [&str; 4] = [
    "iteration",
    "mean_e_b_j",
    "mean_historic_j",
    "std_historic_j",
];
pub const CDF_COLUMNS: [&str; 2] = ["iteration", "cumulative_fraction"];
pub const REPETITION_COLUMNS: [&str; 7] = [
    "repetition",
    "seed",
    "best_action",
    "optimal_iteration",
    "all_explored_iteration",
    "infeasible_actions",
    "final_historic_j",
];
pub const RATIO_COLUMNS: [&str; 4] = ["iteration", "historic_a_j", "historic_b_j", "rho_s"];

pub const CENSORED: &str = "censored";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected CSV header {found:?}, expected {expected:?}")]
    Header {
        found: Vec<String>,
        expected: Vec<String>,
    },
    #[error("bad value `{value}` in column `{column}`")]
    Value { column: &'static str, value: String },
}

pub fn sci(x: f64) -> String {
    format!("{x:.12e}")
}

fn opt(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>, OutputError> {
    let mut wtr = csv::WriterBuilder::new().from_writer(w);
    wtr.write_record(header)?;
    Ok(wtr)
}

fn reader<R: Read>(r: R, header: &[&str]) -> Result<csv::Reader<R>, OutputError> {
    let mut rdr = csv::Reader::from_reader(r);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(OutputError::Header {
            found,
            expected: header.iter().map(|s| s.to_string()).collect(),
        });
    }
    Ok(rdr)
}

pub fn write_report<W: Write>(w: W, report: &EnergyReport) -> Result<(), OutputError> {
    let mut wtr = writer(w, &REPORT_COLUMNS)?;
    let action = report.action.to_string();
    for r in &report.rings {
        let l = &r.load;
        wtr.write_record([
            action.clone(),
            l.ring.to_string(),
            l.hop.to_string(),
            (l.ring - l.hop).to_string(),
            sci(l.distance),
            l.tx_config.level.to_string(),
            l.tx_config.power_dbm.to_string(),
            l.tx_config.rate_bps.to_string(),
            l.payloads_out.to_string(),
            l.packets_out.to_string(),
            l.rx_payloads.to_string(),
            l.rx_packets.to_string(),
            sci(l.rx_time),
            sci(r.e_tx),
            sci(r.e_rx),
            sci(r.e),
            report.bottleneck_ring.to_string(),
            sci(report.e_b),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub action: String,
    pub ring: usize,
    pub hop: usize,
    pub destination: usize,
    pub distance_m: f64,
    pub power_level: u32,
    pub p_tx_dbm: f64,
    pub s_tx_bps: f64,
    pub payloads_out: u64,
    pub packets_out: u64,
    pub rx_payloads: u64,
    pub rx_packets: u64,
    pub rx_time_s: f64,
    pub e_tx_j: f64,
    pub e_rx_j: f64,
    pub e_j: f64,
    pub bottleneck_ring: usize,
    pub e_b_j: f64,
}

pub fn read_report<R: Read>(r: R) -> Result<Vec<ReportRow>, OutputError> {
    let mut rdr = reader(r, &REPORT_COLUMNS)?;
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_iterations<W: Write>(w: W, log: &ExperimentLog) -> Result<(), OutputError> {
    let mut wtr = writer(w, &ITERATION_COLUMNS)?;
    for i in 0..log.iterations {
        wtr.write_record([
            (i + 1).to_string(),
            sci(log.mean_e_b[i]),
            sci(log.mean_historic[i]),
            sci(log.std_historic[i]),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub iteration: usize,
    pub mean_e_b_j: f64,
    pub mean_historic_j: f64,
    pub std_historic_j: f64,
}

pub fn read_iterations<R: Read>(r: R) -> Result<Vec<IterationRow>, OutputError> {
    let mut rdr = reader(r, &ITERATION_COLUMNS)?;
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_cdf<W: Write>(w: W, cdf: &EmpiricalCdf) -> Result<(), OutputError> {
    let mut wtr = writer(w, &CDF_COLUMNS)?;
    for (v, f) in &cdf.steps {
        wtr.write_record([v.to_string(), sci(*f)])?;
    }
    if cdf.censored > 0 {
        wtr.write_record([CENSORED.to_string(), sci(1.0)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a CDF file back; `total` is the repetition count it was built from.
pub fn read_cdf<R: Read>(r: R, total: usize) -> Result<EmpiricalCdf, OutputError> {
    let mut rdr = reader(r, &CDF_COLUMNS)?;
    let mut steps = Vec::new();
    let mut censored = false;
    for rec in rdr.records() {
        let rec = rec?;
        let frac: f64 = rec[1].parse().map_err(|_| OutputError::Value {
            column: "cumulative_fraction",
            value: rec[1].to_string(),
        })?;
        if &rec[0] == CENSORED {
            censored = true;
            continue;
        }
        let v: usize = rec[0].parse().map_err(|_| OutputError::Value {
            column: "iteration",
            value: rec[0].to_string(),
        })?;
        steps.push((v, frac));
    }
    let observed = steps
        .last()
        .map_or(0, |s| (s.1 * total as f64).round() as usize);
    Ok(EmpiricalCdf {
        censored: if censored { total - observed } else { 0 },
        steps,
        total,
    })
}

pub fn write_repetitions<W: Write>(w: W, log: &ExperimentLog) -> Result<(), OutputError> {
    let mut wtr = writer(w, &REPETITION_COLUMNS)?;
    for r in &log.repetitions {
        wtr.write_record([
            r.repetition.to_string(),
            r.seed.to_string(),
            opt(r.best_action),
            opt(r.optimal_iteration),
            opt(r.all_explored_iteration),
            r.infeasible_count.to_string(),
            sci(r.final_historic),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRow {
    pub repetition: usize,
    pub seed: u64,
    pub best_action: Option<usize>,
    pub optimal_iteration: Option<usize>,
    pub all_explored_iteration: Option<usize>,
    pub infeasible_actions: usize,
    pub final_historic_j: f64,
}

pub fn read_repetitions<R: Read>(r: R) -> Result<Vec<RepetitionRow>, OutputError> {
    let mut rdr = reader(r, &REPETITION_COLUMNS)?;
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_ratio<W: Write>(
    w: W,
    a: &ExperimentLog,
    b: &ExperimentLog,
    rho: &[f64],
) -> Result<(), OutputError> {
    let mut wtr = writer(w, &RATIO_COLUMNS)?;
    for (i, r) in rho.iter().enumerate() {
        wtr.write_record([
            (i + 1).to_string(),
            sci(a.mean_historic[i]),
            sci(b.mean_historic[i]),
            sci(*r),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub iteration: usize,
    pub historic_a_j: f64,
    pub historic_b_j: f64,
    pub rho_s: f64,
}

pub fn read_ratio<R: Read>(r: R) -> Result<Vec<RatioRow>, OutputError> {
    let mut rdr = reader(r, &RATIO_COLUMNS)?;
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSummary {
    pub generator: String,
    pub policy: String,
    pub action_count: usize,
    pub optimal_action: String,
    pub optimal_e_b_j: f64,
    /// Repetition `k` ran with seed `seed_base + k`.
    pub seed_rule: String,
    pub mean_optimal_iteration: Option<f64>,
    pub mean_all_explored_iteration: Option<f64>,
    pub infeasible_actions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub summary: ManifestSummary,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig, log: &ExperimentLog) -> Self {
        Self {
            summary: ManifestSummary {
                generator: format!("dresg {}", env!("CARGO_PKG_VERSION")),
                policy: log.policy.label(),
                action_count: log.action_count,
                optimal_action: log.optimal_action.to_string(),
                optimal_e_b_j: log.optimal_e_b,
                seed_rule: "seed = seed_base + repetition".into(),
                mean_optimal_iteration: log.mean_optimal_iteration(),
                mean_all_explored_iteration: log.mean_all_explored_iteration(),
                infeasible_actions: log.infeasible_total(),
            },
            config: config.clone(),
        }
    }
}

/// Writes the standard set of learning outputs into `dir`.
pub fn write_run(
    dir: &Path,
    config: &ExperimentConfig,
    log: &ExperimentLog,
) -> Result<(), OutputError> {
    std::fs::create_dir_all(dir)?;
    let create = |name: &str| std::fs::File::create(dir.join(name)).map(std::io::BufWriter::new);
    write_iterations(create("iterations.csv")?, log)?;
    let stats = log.distribution_stats();
    write_cdf(create("optimal_iteration_cdf.csv")?, &stats.optimal_iteration)?;
    write_cdf(create("all_explored_cdf.csv")?, &stats.all_explored_iteration)?;
    write_repetitions(create("repetitions.csv")?, log)?;
    let manifest = toml::to_string(&Manifest::new(config, log)).expect("manifest serializes");
    std::fs::write(dir.join("manifest.toml"), manifest)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_formatting_keeps_precision() {
        for x in [1.0, 0.1, 1.0 / 3.0, 6.02214076e23, 1.5e-9] {
            let s = sci(x);
            let back: f64 = s.parse().unwrap();
            assert!((back - x).abs() <= 1e-12 * x.abs(), "{s}");
            let mantissa = s.split('e').next().unwrap().replace(['.', '-'], "");
            assert!(mantissa.len() >= 9);
        }
    }

    #[test]
    fn cdf_roundtrip_with_censoring() {
        let cdf = EmpiricalCdf::from_observations([Some(2), None, Some(5), Some(2)]);
        let mut buf = Vec::new();
        write_cdf(&mut buf, &cdf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.ends_with("censored,1.000000000000e0\n"));
        assert_eq!(read_cdf(buf.as_slice(), 4).unwrap(), cdf);
    }

    #[test]
    fn header_mismatch_is_reported() {
        let err = read_iterations("a,b\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, OutputError::Header { .. }));
    }
}
