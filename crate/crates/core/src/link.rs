//! Transceiver profiles, log-distance path loss and transmission
//! configuration selection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Received-power slack (dB) under which a link still counts as closed.
/// Absorbs rounding when a link sits exactly on the coverage boundary.
pub const LINK_BUDGET_TOLERANCE_DB: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkError {
    #[error("invalid transceiver profile: {0}")]
    InvalidProfile(String),
    #[error("invalid link model: {0}")]
    InvalidModel(String),
    #[error("path loss undefined for distance {0} m")]
    Domain(f64),
    #[error("no transmission configuration closes a {distance} m link (best shortfall {shortfall_db:.3} dB)")]
    Infeasible { distance: f64, shortfall_db: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLevel {
    /// Datasheet level index; 1 is the maximum transmission power.
    pub level: u32,
    pub dbm: f64,
    pub current_ma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateLevel {
    pub bps: f64,
    pub sensitivity_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransceiverProfile {
    pub name: String,
    pub power_levels: Vec<PowerLevel>,
    pub rate_levels: Vec<RateLevel>,
    pub rx_current_ma: f64,
    pub supply_voltage: f64,
}

impl TransceiverProfile {
    pub fn validate(&self) -> Result<(), LinkError> {
        let bad = |msg: String| Err(LinkError::InvalidProfile(msg));
        if self.power_levels.is_empty() {
            return bad("at least one power level is required".into());
        }
        if self.rate_levels.is_empty() {
            return bad("at least one rate level is required".into());
        }
        for (i, p) in self.power_levels.iter().enumerate() {
            if p.level as usize != i + 1 {
                return bad(format!(
                    "power levels must be numbered 1.. in order, found level {} at position {}",
                    p.level,
                    i + 1
                ));
            }
            if !p.dbm.is_finite() {
                return bad(format!("power level {} has non-finite output", p.level));
            }
            if !(p.current_ma.is_finite() && p.current_ma > 0.0) {
                return bad(format!("power level {} needs a positive current", p.level));
            }
        }
        if self.power_levels.windows(2).any(|w| w[1].dbm >= w[0].dbm) {
            return bad("output power must strictly decrease with the level index".into());
        }
        for r in &self.rate_levels {
            if !(r.bps.is_finite() && r.bps > 0.0) {
                return bad(format!("rate {} bps must be positive", r.bps));
            }
            if !r.sensitivity_dbm.is_finite() {
                return bad(format!("rate {} bps has non-finite sensitivity", r.bps));
            }
        }
        if !(self.rx_current_ma.is_finite() && self.rx_current_ma > 0.0) {
            return bad("rx_current_ma must be positive".into());
        }
        if !(self.supply_voltage.is_finite() && self.supply_voltage > 0.0) {
            return bad("supply_voltage must be positive".into());
        }
        Ok(())
    }

    pub fn max_power(&self) -> &PowerLevel {
        &self.power_levels[0]
    }

    /// Slowest rate, i.e. the most sensitive receiver setting.
    pub fn min_rate(&self) -> &RateLevel {
        self.rate_levels
            .iter()
            .min_by(|a, b| a.bps.total_cmp(&b.bps))
            .expect("validated profile has rate levels")
    }

    pub fn sensitivity(&self, bps: f64) -> Option<f64> {
        self.rate_levels
            .iter()
            .find(|r| r.bps == bps)
            .map(|r| r.sensitivity_dbm)
    }

    /// Every (power, rate) pair the transceiver can be programmed with.
    pub fn configurations(&self) -> impl Iterator<Item = TransmissionConfiguration> + '_ {
        self.power_levels.iter().flat_map(move |p| {
            self.rate_levels
                .iter()
                .map(move |r| TransmissionConfiguration::new(p, r))
        })
    }
}

/// Log-distance path loss `A + K log10(d)` plus antenna gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetModel {
    pub intercept_db: f64,
    pub slope_db_per_decade: f64,
    pub frequency_hz: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
}

impl LinkBudgetModel {
    pub fn validate(&self) -> Result<(), LinkError> {
        if !self.intercept_db.is_finite() {
            return Err(LinkError::InvalidModel("intercept must be finite".into()));
        }
        if !(self.slope_db_per_decade.is_finite() && self.slope_db_per_decade > 0.0) {
            return Err(LinkError::InvalidModel("slope must be positive".into()));
        }
        if !(self.tx_gain_dbi.is_finite() && self.rx_gain_dbi.is_finite()) {
            return Err(LinkError::InvalidModel("antenna gains must be finite".into()));
        }
        Ok(())
    }

    pub fn path_loss(&self, distance: f64) -> Result<f64, LinkError> {
        if !(distance > 0.0) {
            return Err(LinkError::Domain(distance));
        }
        Ok(self.intercept_db + self.slope_db_per_decade * distance.log10())
    }

    fn gains(&self) -> f64 {
        self.tx_gain_dbi + self.rx_gain_dbi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionConfiguration {
    pub level: u32,
    pub power_dbm: f64,
    pub rate_bps: f64,
    pub tx_current_ma: f64,
    pub sensitivity_dbm: f64,
}

impl TransmissionConfiguration {
    fn new(p: &PowerLevel, r: &RateLevel) -> Self {
        Self {
            level: p.level,
            power_dbm: p.dbm,
            rate_bps: r.bps,
            tx_current_ma: p.current_ma,
            sensitivity_dbm: r.sensitivity_dbm,
        }
    }

    /// Seconds on air for `bits`.
    pub fn airtime(&self, bits: f64) -> f64 {
        bits / self.rate_bps
    }

    /// Joules spent transmitting `bits` at this configuration.
    pub fn tx_energy(&self, bits: f64, supply_voltage: f64) -> f64 {
        self.airtime(bits) * self.tx_current_ma * 1e-3 * supply_voltage
    }

    fn margin_db(&self, model: &LinkBudgetModel, path_loss: f64) -> f64 {
        self.power_dbm + model.gains() - path_loss - self.sensitivity_dbm
    }
}

pub fn link_feasible(
    model: &LinkBudgetModel,
    cfg: &TransmissionConfiguration,
    distance: f64,
) -> Result<bool, LinkError> {
    let pl = model.path_loss(distance)?;
    Ok(cfg.margin_db(model, pl) >= -LINK_BUDGET_TOLERANCE_DB)
}

/// Cheapest feasible configuration for one packet of `packet_bits` over
/// `distance`. Ties go to the faster rate, then the lower output power.
pub fn select_tx_config(
    profile: &TransceiverProfile,
    model: &LinkBudgetModel,
    distance: f64,
    packet_bits: f64,
) -> Result<TransmissionConfiguration, LinkError> {
    let pl = model.path_loss(distance)?;
    let mut best: Option<(f64, TransmissionConfiguration)> = None;
    let mut best_margin = f64::NEG_INFINITY;
    for cfg in profile.configurations() {
        let margin = cfg.margin_db(model, pl);
        best_margin = best_margin.max(margin);
        if margin < -LINK_BUDGET_TOLERANCE_DB {
            continue;
        }
        let energy = cfg.tx_energy(packet_bits, profile.supply_voltage);
        let better = match &best {
            None => true,
            Some((e, b)) => {
                energy < *e
                    || (energy == *e
                        && (cfg.rate_bps > b.rate_bps
                            || (cfg.rate_bps == b.rate_bps && cfg.power_dbm < b.power_dbm)))
            }
        };
        if better {
            best = Some((energy, cfg));
        }
    }
    best.map(|(_, cfg)| cfg).ok_or(LinkError::Infeasible {
        distance,
        shortfall_db: -best_margin,
    })
}

/// Coverage range at maximum power and minimum rate.
pub fn max_range(profile: &TransceiverProfile, model: &LinkBudgetModel) -> f64 {
    let budget = profile.max_power().dbm + model.gains() - profile.min_rate().sensitivity_dbm;
    10f64.powf((budget - model.intercept_db) / model.slope_db_per_decade)
}
