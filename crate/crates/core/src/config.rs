//! Shared domain types: protocol selection, network parameters, validation.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Channel access mechanism after a failed reservation, plus the
/// direct-transmission baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    /// All-active nodes competition: every energy-sufficient node may
    /// transmit with probability eta after a reservation failure.
    Auc,
    /// Reserved nodes competition: only nodes that probed may transmit.
    Ruc,
    /// Strict avoid free competition: silence after a reservation failure.
    Safc,
    /// Slotted-ALOHA baseline: no probing; active nodes transmit directly.
    SaBaseline,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [
        Mechanism::Auc,
        Mechanism::Ruc,
        Mechanism::Safc,
        Mechanism::SaBaseline,
    ];

    /// The three probing mechanisms covered by the unified analysis.
    pub const PROBING: [Mechanism; 3] = [Mechanism::Auc, Mechanism::Ruc, Mechanism::Safc];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mechanism::Auc => "auc",
            Mechanism::Ruc => "ruc",
            Mechanism::Safc => "safc",
            Mechanism::SaBaseline => "sa",
        }
    }

    pub fn is_probing(&self) -> bool {
        !matches!(self, Mechanism::SaBaseline)
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auc" => Ok(Mechanism::Auc),
            "ruc" => Ok(Mechanism::Ruc),
            "safc" => Ok(Mechanism::Safc),
            "sa" | "sa_baseline" | "sa-baseline" => Ok(Mechanism::SaBaseline),
            other => Err(Error::InvalidConfig {
                field: "mechanism",
                reason: format!("unknown mechanism {other:?}; expected auc|ruc|safc|sa"),
            }),
        }
    }
}

/// Network and protocol parameters.
///
/// Data-slot duration is normalized to 1, so `delta` is both the
/// probing-to-data slot ratio and the probing mini-slot duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Number of source nodes.
    pub n: u32,
    /// Energy arrival probability per round.
    pub xi: f64,
    /// Energy units consumed by one data transmission.
    pub m: u32,
    /// Probing-to-data slot ratio.
    pub delta: f64,
    pub mechanism: Mechanism,
    /// Probing probability of an active node.
    pub q: f64,
    /// Fallback access probability after a failed reservation
    /// (transmission probability per round for the SA baseline).
    pub eta: f64,
}

impl ProtocolConfig {
    pub fn validate(self) -> Result<ValidatedConfig> {
        validate_config(self)
    }
}

/// Physical duration of one communication round relative to the data slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundDuration {
    multiplier: f64,
}

impl RoundDuration {
    pub fn from_delta(delta: f64) -> Self {
        RoundDuration {
            multiplier: 1.0 + delta,
        }
    }

    /// Multiplier converting a duration in rounds to physical time units.
    pub fn rounds_to_physical(&self) -> f64 {
        self.multiplier
    }
}

/// A [`ProtocolConfig`] that passed all range checks. Under SAFC, `eta` has
/// been normalized to 0 so downstream formulas never branch on mechanism
/// beyond the access probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidatedConfig(ProtocolConfig);

impl ValidatedConfig {
    pub fn n(&self) -> u32 {
        self.0.n
    }
    pub fn xi(&self) -> f64 {
        self.0.xi
    }
    pub fn m(&self) -> u32 {
        self.0.m
    }
    pub fn delta(&self) -> f64 {
        self.0.delta
    }
    pub fn mechanism(&self) -> Mechanism {
        self.0.mechanism
    }
    pub fn q(&self) -> f64 {
        self.0.q
    }
    pub fn eta(&self) -> f64 {
        self.0.eta
    }

    pub fn as_config(&self) -> &ProtocolConfig {
        &self.0
    }

    pub fn into_inner(self) -> ProtocolConfig {
        self.0
    }

    pub fn round_duration(&self) -> RoundDuration {
        RoundDuration::from_delta(self.0.delta)
    }

    /// Same config with a different energy arrival probability
    /// (used by the physical-time mapping).
    pub fn with_xi(&self, xi: f64) -> Result<ValidatedConfig> {
        ProtocolConfig { xi, ..self.0 }.validate()
    }

    /// Same config with new access parameters (used by grid search).
    pub fn with_access(&self, q: f64, eta: f64) -> Result<ValidatedConfig> {
        ProtocolConfig { q, eta, ..self.0 }.validate()
    }

    pub fn with_mechanism(&self, mechanism: Mechanism) -> Result<ValidatedConfig> {
        ProtocolConfig { mechanism, ..self.0 }.validate()
    }
}

fn check_probability(field: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(Error::InvalidConfig {
            field,
            reason: format!("must be a probability in [0,1], got {value}"),
        });
    }
    Ok(())
}

/// Range-check a configuration. `eta` is forced to 0 under SAFC since that
/// mechanism never accesses the channel after a reservation failure.
pub fn validate_config(config: ProtocolConfig) -> Result<ValidatedConfig> {
    if config.n == 0 {
        return Err(Error::InvalidConfig {
            field: "n",
            reason: "n must be >= 1".into(),
        });
    }
    if config.m == 0 {
        return Err(Error::InvalidConfig {
            field: "m",
            reason: "M must be >= 1".into(),
        });
    }
    check_probability("xi", config.xi)?;
    if config.xi == 0.0 {
        // all interval moments divide by xi
        return Err(Error::InvalidConfig {
            field: "xi",
            reason: "xi must be > 0; with no energy arrivals every AoI diverges".into(),
        });
    }
    if !config.delta.is_finite() || config.delta < 0.0 {
        return Err(Error::InvalidConfig {
            field: "delta",
            reason: format!("must be >= 0, got {}", config.delta),
        });
    }
    check_probability("q", config.q)?;
    check_probability("eta", config.eta)?;

    let mut cfg = config;
    if cfg.mechanism == Mechanism::Safc {
        cfg.eta = 0.0;
    }
    Ok(ValidatedConfig(cfg))
}

/// Mini-slot access probability after a reservation failure, per mechanism.
pub fn access_probability(mechanism: Mechanism, q: f64, eta: f64) -> Result<f64> {
    match mechanism {
        Mechanism::Auc => Ok(eta),
        Mechanism::Ruc => Ok(q * eta),
        Mechanism::Safc => Ok(0.0),
        Mechanism::SaBaseline => Err(Error::BaselineMechanism),
    }
}
