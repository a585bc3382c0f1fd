//! Network-average AoI: attempt/success probabilities, deficit distribution,
//! interval moments, the exact closed form with its exponential-form
//! approximation, and the physical-time mapping.

use serde::Serialize;

use crate::chain::{solve_self_consistent, ChainSolution, Regime, StationaryDistribution};
use crate::config::{access_probability, Mechanism, ValidatedConfig};
use crate::error::{Error, Result};
use crate::sa;

/// Per-round access and success probabilities of a typical node.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AccessProbabilities {
    /// Mini-slot access probability after a reservation failure.
    pub p_ac: f64,
    /// Contention success probability in the fallback slot.
    pub p_cs: f64,
    /// Total transmission attempt probability per active round.
    pub p_t: f64,
    /// Success probability of a transmission attempt.
    pub p_s: f64,
}

/// Total transmission attempt probability of an active node:
/// p_T = q (1 - p_a q)^{n-1} + p_ac (1 - n q p_a (1 - p_a q)^{n-1}).
pub fn attempt_probability(p_a: f64, q: f64, n: u32, p_ac: f64) -> f64 {
    let p0 = if n == 1 {
        1.0
    } else {
        (1.0 - p_a * q).powi(n as i32 - 1)
    };
    q * p0 + p_ac * (1.0 - n as f64 * q * p_a * p0)
}

/// Success probability of a transmission attempt, conditioned on attempting:
/// the reservation route succeeds outright, the fallback route wins the
/// contention slot with probability p_cs = p_ac (1 - p_a p_ac)^{n-1}.
pub fn success_probability(p_a: f64, q: f64, n: u32, p_ac: f64) -> Result<f64> {
    let p_t = attempt_probability(p_a, q, n, p_ac);
    if p_t <= 0.0 {
        return Err(Error::NoAttempts);
    }
    let p0 = if n == 1 {
        1.0
    } else {
        (1.0 - p_a * q).powi(n as i32 - 1)
    };
    let p_cs = p_ac * (1.0 - p_a * p_ac).powi(n as i32 - 1);
    Ok((q * p0 + p_cs * (1.0 - n as f64 * q * p_a * p0)) / p_t)
}

fn access_probabilities(config: &ValidatedConfig, p_a: f64) -> Result<AccessProbabilities> {
    let p_ac = access_probability(config.mechanism(), config.q(), config.eta())?;
    let p_t = attempt_probability(p_a, config.q(), config.n(), p_ac);
    let p_s = success_probability(p_a, config.q(), config.n(), p_ac)?;
    let p_cs = p_ac * (1.0 - p_a * p_ac).powi(config.n() as i32 - 1);
    Ok(AccessProbabilities { p_ac, p_cs, p_t, p_s })
}

/// Conditional probabilities that a transmission round consumed M+1, M or
/// M-1 energy units.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OmegaWeights {
    pub deep: f64,
    pub std: f64,
    pub eco: f64,
}

/// Consumption-outcome weights per mechanism. Under RUC and SAFC every
/// transmission pays for a probe, so only the harvest coin matters.
pub fn omega_weights(mechanism: Mechanism, xi: f64, q: f64) -> Result<OmegaWeights> {
    match mechanism {
        Mechanism::Auc => Ok(OmegaWeights {
            deep: (1.0 - xi) * q,
            std: xi * q + (1.0 - xi) * (1.0 - q),
            eco: xi * (1.0 - q),
        }),
        Mechanism::Ruc | Mechanism::Safc => Ok(OmegaWeights {
            deep: 1.0 - xi,
            std: xi,
            eco: 0.0,
        }),
        Mechanism::SaBaseline => Err(Error::BaselineMechanism),
    }
}

/// Distribution of the energy deficit Q after a transmission round,
/// supported on 1..=M+1 with a residual for nodes that stay active.
#[derive(Debug, Clone, Serialize)]
pub struct DeficitDistribution {
    /// probs[l - 1] = P(Q = l) for l in 1..=M+1.
    probs: Vec<f64>,
    /// P(node still active after the transmission round), Q <= 0.
    pub residual: f64,
    pub omega: OmegaWeights,
    m: u32,
}

impl DeficitDistribution {
    /// P(Q = l); zero outside 1..=M+1.
    pub fn prob(&self, l: u32) -> f64 {
        if l >= 1 && l <= self.m + 1 {
            self.probs[(l - 1) as usize]
        } else {
            0.0
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn support_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// (l, P(Q = l)) pairs over the support.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (i as u32 + 1, p))
    }
}

/// Deficit distribution assembled from the stationary pre-transmission level
/// (conditioned active) and the consumption outcome weights. Three bands:
/// all outcomes for l <= M-1, deep/standard at l = M, deep only at l = M+1.
pub fn deficit_distribution(
    solution: &StationaryDistribution,
    mechanism: Mechanism,
    q: f64,
    xi: f64,
    m: u32,
) -> Result<DeficitDistribution> {
    let omega = omega_weights(mechanism, xi, q)?;
    let p_a = solution.active_tail_mass().min(1.0);
    let mut probs = vec![0.0f64; (m + 1) as usize];
    for l in 1..m {
        probs[(l - 1) as usize] = (omega.deep * solution.prob(2 * m + 2 - l)
            + omega.std * solution.prob(2 * m + 1 - l)
            + omega.eco * solution.prob(2 * m - l))
            / p_a;
    }
    probs[(m - 1) as usize] =
        (omega.deep * solution.prob(m + 2) + omega.std * solution.prob(m + 1)) / p_a;
    probs[m as usize] = omega.deep * solution.prob(m + 1) / p_a;

    let support: f64 = probs.iter().sum();
    Ok(DeficitDistribution {
        probs,
        residual: (1.0 - support).max(0.0),
        omega,
        m,
    })
}

/// First and second moments of the access waiting time, the energy
/// accumulation time, and their independent sum.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntervalMoments {
    pub e_ta: f64,
    pub e_ta2: f64,
    pub e_te: f64,
    pub e_te2: f64,
    pub e_t: f64,
    pub e_t2: f64,
}

fn compose_moments(p_t: f64, e_te: f64, e_te2: f64) -> IntervalMoments {
    let e_ta = 1.0 / p_t;
    let e_ta2 = (2.0 - p_t) / (p_t * p_t);
    IntervalMoments {
        e_ta,
        e_ta2,
        e_te,
        e_te2,
        e_t: e_ta + e_te,
        e_t2: e_ta2 + 2.0 * e_ta * e_te + e_te2,
    }
}

/// Interval moments with the accumulation time summed over the full deficit
/// support l = 1..=M+1. The residual event (node still active) contributes
/// zero accumulation time.
pub fn interval_moments(p_t: f64, deficit: &DeficitDistribution, xi: f64) -> IntervalMoments {
    te_moments_over(p_t, deficit, xi, deficit.m() + 1)
}

/// Variant summing only l = 1..=M, the literal range printed alongside the
/// moment formulas; kept for comparison with the full-support default.
pub fn interval_moments_truncated(
    p_t: f64,
    deficit: &DeficitDistribution,
    xi: f64,
) -> IntervalMoments {
    te_moments_over(p_t, deficit, xi, deficit.m())
}

fn te_moments_over(p_t: f64, deficit: &DeficitDistribution, xi: f64, last: u32) -> IntervalMoments {
    let mut e_te = 0.0;
    let mut e_te2 = 0.0;
    for (l, p) in deficit.iter() {
        if l > last {
            break;
        }
        let lf = l as f64;
        e_te += p * lf / xi;
        e_te2 += p * lf * (lf - xi + 1.0) / (xi * xi);
    }
    compose_moments(p_t, e_te, e_te2)
}

/// Accumulation-time moments in closed form over the unbounded geometric
/// tail: the deficit is treated as mean consumption minus the geometric
/// overshoot of the pre-transmission level. This is the algebra behind the
/// per-mechanism closed-form moment expressions.
pub fn geometric_tail_te_moments(omega: &OmegaWeights, z: f64, m: u32, xi: f64) -> (f64, f64) {
    let mf = m as f64;
    let mean_consumption =
        (mf + 1.0) * omega.deep + mf * omega.std + (mf - 1.0) * omega.eco;
    let mu = z / (1.0 - z);
    let var_overshoot = z / ((1.0 - z) * (1.0 - z));
    let d = mean_consumption - mu;
    let e_te = d / xi;
    let e_te2 = (d * (d + 1.0 - xi) + var_overshoot) / (xi * xi);
    (e_te, e_te2)
}

/// Network-average AoI and its ingredients.
#[derive(Debug, Clone, Serialize)]
pub struct AoiResult {
    pub mechanism: Mechanism,
    pub regime: Regime,
    pub p_a: f64,
    /// Characteristic root; `None` in ESR.
    pub z: Option<f64>,
    pub probabilities: AccessProbabilities,
    /// Interval moments; `None` in ESR where the update interval is plain
    /// geometric.
    pub moments: Option<IntervalMoments>,
    /// Network-average AoI in rounds.
    pub aoi_rounds: f64,
    /// Exponential-form approximation in rounds (ECR only).
    pub approx_aoi_rounds: Option<f64>,
    /// Network-average AoI in physical time units (round duration applied at
    /// the rescaled energy arrival probability).
    pub aoi_physical: f64,
}

/// AoI in the energy-constrained regime:
/// 1/(p_T p_s) + (1/p_s - 1) E[T_E] + (E[T_E^2] + E[T_E]) / (2 (1/p_T + E[T_E])).
fn ecr_aoi_value(p_t: f64, p_s: f64, e_te: f64, e_te2: f64) -> f64 {
    1.0 / (p_t * p_s) + (1.0 / p_s - 1.0) * e_te + (e_te2 + e_te) / (2.0 * (1.0 / p_t + e_te))
}

/// AoI in the energy-sufficient regime: every round is an i.i.d. trial, so
/// the AoI is the reciprocal of the per-round update success probability.
fn esr_aoi_value(n: u32, q: f64, p_ac: f64) -> f64 {
    let nf = n as f64;
    let q_solo = if n == 1 { q } else { q * (1.0 - q).powi(n as i32 - 1) };
    let contention =
        p_ac * (1.0 - p_ac).powi(n as i32 - 1) * (1.0 - nf * q_solo);
    1.0 / (q_solo + contention)
}

/// Exact network-average AoI for the probing mechanisms. ECR assembles the
/// closed form from the self-consistent chain; ESR substitutes p_a = 1.
pub fn network_aoi(config: &ValidatedConfig) -> Result<AoiResult> {
    if config.mechanism() == Mechanism::SaBaseline {
        return Err(Error::BaselineMechanism);
    }
    let result = network_aoi_rounds(config)?;
    let physical = rescaled_physical_aoi(config)?;
    Ok(AoiResult {
        aoi_physical: physical,
        ..result
    })
}

/// Rounds-domain result without the physical mapping (aoi_physical is filled
/// with the rounds value; callers rescale). The grid search uses this
/// directly to avoid re-solving the chain at the rescaled arrival rate on
/// every point.
pub(crate) fn network_aoi_rounds(config: &ValidatedConfig) -> Result<AoiResult> {
    let p_ac = access_probability(config.mechanism(), config.q(), config.eta())?;
    if config.q() == 0.0 && p_ac == 0.0 {
        return Err(Error::NoAttempts);
    }
    let solution = solve_self_consistent(config)?;
    match solution.regime {
        Regime::Esr => {
            let probabilities = access_probabilities(config, 1.0)?;
            let aoi = esr_aoi_value(config.n(), config.q(), p_ac);
            Ok(AoiResult {
                mechanism: config.mechanism(),
                regime: Regime::Esr,
                p_a: 1.0,
                z: None,
                probabilities,
                moments: None,
                aoi_rounds: aoi,
                approx_aoi_rounds: None,
                aoi_physical: aoi,
            })
        }
        Regime::Ecr => {
            let stationary = solution.stationary.as_ref().expect("ECR carries a distribution");
            let probabilities = access_probabilities(config, solution.p_a)?;
            let deficit = deficit_distribution(
                stationary,
                config.mechanism(),
                config.q(),
                config.xi(),
                config.m(),
            )?;
            let moments = interval_moments(probabilities.p_t, &deficit, config.xi());
            let aoi = ecr_aoi_value(
                probabilities.p_t,
                probabilities.p_s,
                moments.e_te,
                moments.e_te2,
            );
            let approx = approx_aoi_from(config, &solution)?;
            Ok(AoiResult {
                mechanism: config.mechanism(),
                regime: Regime::Ecr,
                p_a: solution.p_a,
                z: solution.z(),
                probabilities,
                moments: Some(moments),
                aoi_rounds: aoi,
                approx_aoi_rounds: Some(approx),
                aoi_physical: aoi,
            })
        }
    }
}

/// Mechanism-specific form of the stability inequality, evaluated at the
/// given p_a. Equivalent to the generic kernel condition.
pub fn mechanism_stability_inequality(config: &ValidatedConfig, p_a: f64) -> bool {
    let (n, xi, q, eta) = (config.n(), config.xi(), config.q(), config.eta());
    let mf = config.m() as f64;
    let p0 = if n == 1 { 1.0 } else { (1.0 - p_a * q).powi(n as i32 - 1) };
    match config.mechanism() {
        Mechanism::Auc => {
            let p1 = if n == 1 {
                0.0
            } else if n == 2 {
                p_a * q
            } else {
                (n as f64 - 1.0) * p_a * q * (1.0 - p_a * q).powi(n as i32 - 2)
            };
            let tx = q * (p0 + (1.0 - p0) * eta) + (1.0 - q) * (1.0 - p1) * eta;
            xi < q + mf * tx
        }
        Mechanism::Ruc => q * (1.0 + mf * (eta + (1.0 - eta) * p0)) > xi,
        Mechanism::Safc => q + mf * q * p0 > xi,
        Mechanism::SaBaseline => sa::sa_stability(config),
    }
}

/// Approximate network-average AoI: exponential-form collision terms
/// around the exact chain quantities. The saturated-regime branch is the
/// exact closed form, not an approximation.
pub fn approx_aoi(config: &ValidatedConfig) -> Result<f64> {
    if config.mechanism() == Mechanism::SaBaseline {
        return Err(Error::BaselineMechanism);
    }
    let solution = solve_self_consistent(config)?;
    match solution.regime {
        Regime::Esr => Ok(esr_approx_value(config)),
        Regime::Ecr => approx_aoi_from(config, &solution),
    }
}

fn esr_approx_value(config: &ValidatedConfig) -> f64 {
    let (n, q, eta) = (config.n(), config.q(), config.eta());
    let nf = n as f64;
    let pow = |x: f64, k: i32| x.powi(k);
    match config.mechanism() {
        Mechanism::Auc => {
            1.0 / (q * pow(1.0 - q, n as i32 - 1)
                + eta * pow(1.0 - eta, n as i32 - 1)
                    * (1.0 - nf * q * pow(1.0 - q, n as i32 - 1)))
        }
        Mechanism::Ruc => {
            let inner = pow(1.0 - q, n as i32 - 1)
                * (1.0 - nf * eta * q * pow(1.0 - q * eta, n as i32 - 1))
                + eta * pow(1.0 - q * eta, n as i32 - 1) * (1.0 - pow(1.0 - q, n as i32));
            1.0 / (q * inner)
        }
        Mechanism::Safc => 1.0 / (q * pow(1.0 - q, n as i32 - 1)),
        Mechanism::SaBaseline => unreachable!("filtered above"),
    }
}

fn approx_aoi_from(config: &ValidatedConfig, solution: &ChainSolution) -> Result<f64> {
    let z = solution.z().ok_or(Error::EnergySufficientRegime)?;
    let p_a = solution.p_a;
    let (n, xi, q, eta) = (
        config.n() as f64,
        config.xi(),
        config.q(),
        config.eta(),
    );
    let mf = config.m() as f64;
    let c = mf + q - xi - z / (1.0 - z);
    let one_mz = 1.0 - z;

    // All three mechanisms share the second-order pattern
    // pT~ * bracket / (2 xi (xi + pT~ C)) with their own exponential-form pT~.
    let bracket = c * (c + 1.0 / one_mz) + z / (one_mz * one_mz);
    let value = match config.mechanism() {
        Mechanism::Auc => {
            let eq = (-n * p_a * q).exp();
            let ee = (-n * p_a * eta).exp();
            let first = (1.0 + (eta / xi) * (1.0 - ee) * (1.0 - n * p_a * q * eq) * c)
                / (q * eq + eta * ee * (1.0 - n * p_a * q * eq));
            let p_t_approx = eta + q * eq;
            first + p_t_approx * bracket / (2.0 * xi * (xi + p_t_approx * c))
        }
        Mechanism::Ruc => {
            let eq = (-n * p_a * q).exp();
            let ee = (-n * q * p_a * eta).exp();
            let first = (xi + q * c * eta * (1.0 - eq) * (1.0 - ee))
                / (xi * q * (eq + eta * ee * (1.0 - eq)));
            let p_t_approx = q * (eta * (1.0 - eq) + eq);
            first + p_t_approx * bracket / (2.0 * xi * (xi + p_t_approx * c))
        }
        Mechanism::Safc => {
            let eq = (-n * p_a * q).exp();
            let k = (((mf + 1.0) * (mf + 2.0 - 3.0 * xi) - z * (2.0 * mf + 2.0 - 3.0 * xi)
                + xi * xi)
                / one_mz
                + 2.0 * z * z / (one_mz * one_mz)
                + xi * c)
                / (xi * xi);
            1.0 / (q * eq) + xi * q * eq * k / (2.0 * (xi + q * eq * c))
        }
        Mechanism::SaBaseline => return Err(Error::BaselineMechanism),
    };
    Ok(value)
}

/// Network-average AoI in physical time: rounds last (1 + delta) data-slot
/// units, and the per-round energy arrival probability rescales to
/// (1 + delta) xi (clamped to 1 with a warning for large products).
pub fn physical_aoi(config: &ValidatedConfig) -> Result<f64> {
    rescaled_physical_aoi(config)
}

fn rescaled_physical_aoi(config: &ValidatedConfig) -> Result<f64> {
    let factor = config.round_duration().rounds_to_physical();
    let mut xi_eff = factor * config.xi();
    if xi_eff > 1.0 {
        // The rescaling rule is a small-xi, small-delta statement.
        eprintln!(
            "warning: effective energy arrival probability {xi_eff:.4} clamped to 1 \
             (xi = {}, delta = {})",
            config.xi(),
            config.delta()
        );
        xi_eff = 1.0;
    }
    let scaled = config.with_xi(xi_eff)?;
    let at_scaled = network_aoi_rounds(&scaled)?;
    Ok(factor * at_scaled.aoi_rounds)
}

/// Exact analytic AoI for any mechanism, dispatching the SA baseline to its
/// own specialization.
pub fn analytic_aoi(config: &ValidatedConfig) -> Result<AoiResult> {
    match config.mechanism() {
        Mechanism::SaBaseline => sa::sa_baseline_aoi(config),
        _ => network_aoi(config),
    }
}
