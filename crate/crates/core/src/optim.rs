//! Grid search over access parameters and one-dimensional parameter sweeps.

use rayon::prelude::*;
use serde::Serialize;

use crate::aoi::{analytic_aoi, approx_aoi, physical_aoi};
use crate::chain::Regime;
use crate::config::{Mechanism, ProtocolConfig, ValidatedConfig};
use crate::error::{Error, Result};
use crate::sim::run_replications;

/// What the grid minimizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Objective {
    /// Exact closed-form network-average AoI.
    AnalyticExact,
    /// Exponential-form closed-form approximation.
    AnalyticApprox,
    /// Empirical AoI from seeded replications (expensive; opt-in).
    Simulated(SimControls),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimControls {
    pub horizon: u64,
    pub replications: u32,
    pub base_seed: u64,
}

impl SimControls {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replications as u64)
            .map(|i| self.base_seed + i)
            .collect()
    }
}

/// Candidate access parameters and the objective to evaluate on them.
#[derive(Debug, Clone, Serialize)]
pub struct GridSpec {
    pub q_values: Vec<f64>,
    pub eta_values: Vec<f64>,
    pub objective: Objective,
}

impl GridSpec {
    /// Uniform grid over q, eta in {step, 2 step, ..., 1}.
    pub fn uniform(step: f64, objective: Objective) -> Self {
        let count = (1.0 / step + 1e-9).floor() as usize;
        let values: Vec<f64> = (1..=count)
            .map(|i| {
                // round away multiplication noise so grid coordinates print
                // cleanly and never drift past 1
                let v = (i as f64 * step * 1e9).round() / 1e9;
                if (v - 1.0).abs() < 1e-9 {
                    1.0
                } else {
                    v
                }
            })
            .collect();
        GridSpec {
            q_values: values.clone(),
            eta_values: values,
            objective,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_values.is_empty() || self.eta_values.is_empty() {
            return Err(Error::InvalidGrid("empty value list"));
        }
        if self.q_values.iter().any(|&q| !(q > 0.0 && q <= 1.0)) {
            return Err(Error::InvalidGrid("q values must lie in (0, 1]"));
        }
        if self.eta_values.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
            return Err(Error::InvalidGrid("eta values must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// One evaluated grid point; `aoi` is None when the evaluation failed
/// (degenerate chain, saturated formulas, non-finite objective).
#[derive(Debug, Clone, Serialize)]
pub struct GridPoint {
    pub q: f64,
    pub eta: f64,
    pub aoi: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub q_star: f64,
    pub eta_star: f64,
    pub aoi_star: f64,
    pub regime_star: Regime,
    pub table: Vec<GridPoint>,
}

#[derive(Debug, Clone, Copy)]
enum Metric {
    Rounds,
    Physical,
}

fn evaluate(
    config: &ValidatedConfig,
    objective: &Objective,
    metric: Metric,
) -> Result<f64> {
    let value = match objective {
        Objective::AnalyticExact => match metric {
            Metric::Rounds => match config.mechanism() {
                Mechanism::SaBaseline => analytic_aoi(config)?.aoi_rounds,
                _ => crate::aoi::network_aoi_rounds(config)?.aoi_rounds,
            },
            Metric::Physical => match config.mechanism() {
                Mechanism::SaBaseline => analytic_aoi(config)?.aoi_rounds,
                _ => physical_aoi(config)?,
            },
        },
        Objective::AnalyticApprox => {
            let v = match config.mechanism() {
                Mechanism::SaBaseline => analytic_aoi(config)?.aoi_rounds,
                _ => approx_aoi(config)?,
            };
            match metric {
                Metric::Rounds => v,
                // the approximation is defined in the round domain; scale
                // it like the exact path
                Metric::Physical => v * config.round_duration().rounds_to_physical(),
            }
        }
        Objective::Simulated(controls) => {
            let stats = run_replications(config, &controls.seeds(), controls.horizon)?;
            match metric {
                Metric::Rounds => stats.mean_aoi_rounds,
                Metric::Physical => stats.mean_aoi_physical,
            }
        }
    };
    if !value.is_finite() {
        return Err(Error::NoAttempts);
    }
    Ok(value)
}

/// Exhaustive evaluation of the grid, returning the minimizer and the full
/// table. SAFC collapses to a one-dimensional search over q; the SA baseline
/// to a search over eta. Failed points are recorded and skipped; ties break
/// toward the smallest q, then the smallest eta.
pub fn grid_search(config: &ValidatedConfig, grid: &GridSpec) -> Result<OptimizationResult> {
    grid.validate()?;
    let points: Vec<(f64, f64)> = match config.mechanism() {
        Mechanism::Safc => grid.q_values.iter().map(|&q| (q, 0.0)).collect(),
        Mechanism::SaBaseline => grid.eta_values.iter().map(|&e| (0.0, e)).collect(),
        _ => grid
            .q_values
            .iter()
            .flat_map(|&q| grid.eta_values.iter().map(move |&e| (q, e)))
            .collect(),
    };

    let table: Vec<GridPoint> = points
        .par_iter()
        .map(|&(q, eta)| match config.with_access(q, eta) {
            Ok(cfg) => match evaluate(&cfg, &grid.objective, Metric::Rounds) {
                Ok(aoi) => GridPoint {
                    q,
                    eta,
                    aoi: Some(aoi),
                    note: None,
                },
                Err(e) => GridPoint {
                    q,
                    eta,
                    aoi: None,
                    note: Some(e.to_string()),
                },
            },
            Err(e) => GridPoint {
                q,
                eta,
                aoi: None,
                note: Some(e.to_string()),
            },
        })
        .collect();

    // sequential scan in grid order keeps the tie-breaking deterministic
    let mut best: Option<&GridPoint> = None;
    for point in &table {
        if let Some(aoi) = point.aoi {
            if best.is_none_or(|b| aoi < b.aoi.unwrap()) {
                best = Some(point);
            }
        }
    }
    let best = best.ok_or(Error::AllGridPointsFailed)?;

    let regime_star = analytic_aoi(&config.with_access(best.q, best.eta)?)?.regime;
    Ok(OptimizationResult {
        q_star: best.q,
        eta_star: best.eta,
        aoi_star: best.aoi.unwrap(),
        regime_star,
        table,
    })
}

/// Swept parameter of [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    N,
    Xi,
    Delta,
}

impl SweepParameter {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParameter::N => "n",
            SweepParameter::Xi => "xi",
            SweepParameter::Delta => "delta",
        }
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n" => Ok(SweepParameter::N),
            "xi" => Ok(SweepParameter::Xi),
            "delta" => Ok(SweepParameter::Delta),
            _ => Err(Error::InvalidConfig {
                field: "parameter",
                reason: format!("unknown sweep parameter {s:?}; expected n|xi|delta"),
            }),
        }
    }
}

/// One row of a sweep table: the swept value, the re-optimized access
/// parameters, and analytic/simulated AoI at the optimum.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub parameter: SweepParameter,
    pub value: f64,
    pub q_star: f64,
    pub eta_star: f64,
    pub regime: Regime,
    pub aoi_exact: f64,
    pub aoi_approx: Option<f64>,
    pub aoi_physical: f64,
    pub aoi_simulated: Option<f64>,
    pub aoi_simulated_physical: Option<f64>,
    pub sim_ci95: Option<f64>,
}

/// Re-optimize (q, eta) at every swept value and record plot-ready rows.
/// Delta sweeps optimize the physical-time objective, since the round-domain
/// AoI does not see the probing overhead. When `sim` is given, each optimum
/// is also simulated (round domain, config as-is).
pub fn sweep(
    base: &ValidatedConfig,
    parameter: SweepParameter,
    values: &[f64],
    grid: &GridSpec,
    sim: Option<&SimControls>,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidGrid("sweep needs at least one value"));
    }
    grid.validate()?;
    let metric = match parameter {
        SweepParameter::Delta => Metric::Physical,
        _ => Metric::Rounds,
    };

    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let config = apply_parameter(base, parameter, value)?;
        let best = grid_search_with_metric(&config, grid, metric)?;
        let at_best = config.with_access(best.0, best.1)?;
        let analytic = analytic_aoi(&at_best)?;
        let approx = match at_best.mechanism() {
            Mechanism::SaBaseline => None,
            _ => Some(approx_aoi(&at_best)?),
        };
        let (aoi_simulated, aoi_simulated_physical, sim_ci95) = match sim {
            Some(controls) => {
                let stats = run_replications(&at_best, &controls.seeds(), controls.horizon)?;
                (
                    Some(stats.mean_aoi_rounds),
                    Some(stats.mean_aoi_physical),
                    Some(stats.ci95),
                )
            }
            None => (None, None, None),
        };
        rows.push(SweepRow {
            parameter,
            value,
            q_star: best.0,
            eta_star: best.1,
            regime: analytic.regime,
            aoi_exact: analytic.aoi_rounds,
            aoi_approx: approx,
            aoi_physical: analytic.aoi_physical,
            aoi_simulated,
            aoi_simulated_physical,
            sim_ci95,
        });
    }
    Ok(rows)
}

fn apply_parameter(
    base: &ValidatedConfig,
    parameter: SweepParameter,
    value: f64,
) -> Result<ValidatedConfig> {
    let mut raw: ProtocolConfig = *base.as_config();
    match parameter {
        SweepParameter::N => {
            if value < 1.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
                return Err(Error::InvalidConfig {
                    field: "n",
                    reason: format!("swept n must be a positive integer, got {value}"),
                });
            }
            raw.n = value as u32;
        }
        SweepParameter::Xi => raw.xi = value,
        SweepParameter::Delta => raw.delta = value,
    }
    raw.validate()
}

fn grid_search_with_metric(
    config: &ValidatedConfig,
    grid: &GridSpec,
    metric: Metric,
) -> Result<(f64, f64)> {
    let points: Vec<(f64, f64)> = match config.mechanism() {
        Mechanism::Safc => grid.q_values.iter().map(|&q| (q, 0.0)).collect(),
        Mechanism::SaBaseline => grid.eta_values.iter().map(|&e| (0.0, e)).collect(),
        _ => grid
            .q_values
            .iter()
            .flat_map(|&q| grid.eta_values.iter().map(move |&e| (q, e)))
            .collect(),
    };
    let evaluated: Vec<Option<f64>> = points
        .par_iter()
        .map(|&(q, eta)| {
            config
                .with_access(q, eta)
                .ok()
                .and_then(|cfg| evaluate(&cfg, &grid.objective, metric).ok())
        })
        .collect();
    let mut best: Option<(f64, (f64, f64))> = None;
    for (i, value) in evaluated.iter().enumerate() {
        if let Some(v) = value {
            if best.is_none_or(|(bv, _)| *v < bv) {
                best = Some((*v, points[i]));
            }
        }
    }
    best.map(|(_, p)| p).ok_or(Error::AllGridPointsFailed)
}
