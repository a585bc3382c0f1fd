//! Configuration resolution: built-in defaults, then a flat key=value file,
//! then explicit command-line flags.

use std::path::Path;

use aoi_probe::{Mechanism, ProtocolConfig, ValidatedConfig};

use crate::CliError;

/// Optional per-field overrides collected from the command line.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigArgs {
    /// Flat key=value config file (keys: n, xi, m, delta, mechanism, q, eta)
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,

    /// Number of source nodes
    #[arg(long, global = true)]
    pub n: Option<u32>,

    /// Energy arrival probability per round
    #[arg(long, global = true)]
    pub xi: Option<f64>,

    /// Energy units per data transmission
    #[arg(long, global = true)]
    pub m: Option<u32>,

    /// Probing-to-data slot ratio
    #[arg(long, global = true)]
    pub delta: Option<f64>,

    /// Access mechanism: auc | ruc | safc | sa
    #[arg(long, global = true)]
    pub mechanism: Option<String>,

    /// Probing probability
    #[arg(long, global = true)]
    pub q: Option<f64>,

    /// Fallback access probability
    #[arg(long, global = true)]
    pub eta: Option<f64>,
}

fn baseline_defaults() -> ProtocolConfig {
    ProtocolConfig {
        n: 50,
        xi: 0.1,
        m: 7,
        delta: 1.0 / 20.0,
        mechanism: Mechanism::Auc,
        q: 0.2,
        eta: 0.1,
    }
}

pub fn resolve(args: &ConfigArgs) -> Result<ValidatedConfig, CliError> {
    let mut cfg = baseline_defaults();
    if let Some(path) = &args.config {
        apply_file(&mut cfg, path)?;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(xi) = args.xi {
        cfg.xi = xi;
    }
    if let Some(m) = args.m {
        cfg.m = m;
    }
    if let Some(delta) = args.delta {
        cfg.delta = delta;
    }
    if let Some(mech) = &args.mechanism {
        cfg.mechanism = mech
            .parse()
            .map_err(|e: aoi_probe::Error| CliError::Invalid(e.to_string()))?;
    }
    if let Some(q) = args.q {
        cfg.q = q;
    }
    if let Some(eta) = args.eta {
        cfg.eta = eta;
    }
    cfg.validate().map_err(|e| CliError::Invalid(e.to_string()))
}

fn apply_file(cfg: &mut ProtocolConfig, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("config file {}: {e}", path.display())))?;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Invalid(format!(
                "config file line {}: expected key=value, got {raw:?}",
                lineno + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |field: &str, what: &str| {
            CliError::Invalid(format!("config file field {field}: {what}: {value:?}"))
        };
        match key {
            "n" => cfg.n = value.parse().map_err(|_| bad("n", "not an integer"))?,
            "xi" => cfg.xi = value.parse().map_err(|_| bad("xi", "not a number"))?,
            "m" => cfg.m = value.parse().map_err(|_| bad("m", "not an integer"))?,
            "delta" => cfg.delta = value.parse().map_err(|_| bad("delta", "not a number"))?,
            "mechanism" => {
                cfg.mechanism = value
                    .parse()
                    .map_err(|e: aoi_probe::Error| CliError::Invalid(e.to_string()))?
            }
            "q" => cfg.q = value.parse().map_err(|_| bad("q", "not a number"))?,
            "eta" => cfg.eta = value.parse().map_err(|_| bad("eta", "not a number"))?,
            other => {
                return Err(CliError::Invalid(format!(
                    "config file line {}: unknown key {other:?}",
                    lineno + 1
                )))
            }
        }
    }
    Ok(())
}
