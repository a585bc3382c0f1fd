//! Self-consistency between the active probability and the transition kernel.
//!
//! The kernel depends on p_a through the other nodes' reservation behavior,
//! and p_a is the active-tail mass of the stationary distribution of that
//! kernel. The solver runs a damped fixed-point iteration and falls back to
//! bisection on p - phi(p) when the iteration stalls.

use crate::config::ValidatedConfig;
use crate::error::{Error, Result};

use super::{
    active_probability, build_transition_kernel, characteristic_root, stability_condition,
    stationary_distribution, Regime, StationaryDistribution, TransitionKernel,
};

const TOLERANCE: f64 = 1e-10;
const DAMPING: f64 = 0.5;
const MAX_DAMPED_ITERS: usize = 10_000;
const STALL_WINDOW: usize = 500;

/// Kernel and stationary solution at the self-consistent active probability.
#[derive(Debug, Clone)]
pub struct ChainSolution {
    pub kernel: TransitionKernel,
    pub regime: Regime,
    pub p_a: f64,
    /// Closed-form distribution; `None` in ESR.
    pub stationary: Option<StationaryDistribution>,
}

impl ChainSolution {
    pub fn z(&self) -> Option<f64> {
        self.stationary.as_ref().map(|s| s.z())
    }
}

/// phi(p): active probability of the typical node when all others operate at
/// activity level p. Returns 1 when the kernel at p is unstable (ESR-like).
fn phi(config: &ValidatedConfig, p: f64) -> Result<f64> {
    let kernel = build_transition_kernel(config, p)?;
    if !stability_condition(&kernel, config.m()) {
        return Ok(1.0);
    }
    let z = match characteristic_root(&kernel, config.m()) {
        Ok(z) => z,
        Err(Error::EnergySufficientRegime) => return Ok(1.0),
        Err(e) => return Err(e),
    };
    if z == 0.0 {
        // p_ah = 0 boundary (q = 1 or xi = 1): the chain is degenerate and
        // the closed form does not apply.
        return Err(Error::DegenerateChain(
            "harvest probability in the active regime is zero (q = 1 or xi = 1)",
        ));
    }
    let st = stationary_distribution(&kernel, z, config.m())?;
    Ok(active_probability(&st))
}

/// Solve the self-consistency from the default initial guess 0.5.
pub fn solve_self_consistent(config: &ValidatedConfig) -> Result<ChainSolution> {
    solve_self_consistent_from(config, 0.5)
}

/// Solve the self-consistency from a caller-chosen initial guess in the
/// unit interval.
pub fn solve_self_consistent_from(config: &ValidatedConfig, initial: f64) -> Result<ChainSolution> {
    let mut p = initial.clamp(0.0, 1.0);
    let mut residual = f64::INFINITY;
    let mut stall_reference = f64::INFINITY;
    let mut converged = false;

    for iter in 0..MAX_DAMPED_ITERS {
        let next = phi(config, p)?;
        residual = (next - p).abs();
        if residual < TOLERANCE {
            p = next;
            converged = true;
            break;
        }
        if iter % STALL_WINDOW == STALL_WINDOW - 1 {
            if residual > 0.5 * stall_reference {
                // oscillating or creeping; bisection is guaranteed to work
                p = bisect_fixed_point(config)?;
                converged = true;
                break;
            }
            stall_reference = residual;
        }
        p = (1.0 - DAMPING) * p + DAMPING * next;
    }
    if !converged {
        // one last check before reporting failure
        if residual >= TOLERANCE {
            p = bisect_fixed_point(config)?;
        }
    }

    finish(config, p)
}

/// Bisection on g(p) = p - phi(p); g(0) <= 0 <= g(1) since phi maps into [0,1].
fn bisect_fixed_point(config: &ValidatedConfig) -> Result<f64> {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let g_hi = hi - phi(config, hi)?;
    if g_hi <= 0.0 {
        return Ok(1.0); // phi(1) = 1: saturated
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let g = mid - phi(config, mid)?;
        if g <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let p = 0.5 * (lo + hi);
    let residual = (p - phi(config, p)?).abs();
    if residual > 1e-6 {
        return Err(Error::FixedPointDiverged { residual });
    }
    Ok(p)
}

fn finish(config: &ValidatedConfig, p: f64) -> Result<ChainSolution> {
    let kernel = build_transition_kernel(config, p)?;
    if !stability_condition(&kernel, config.m()) {
        let kernel = build_transition_kernel(config, 1.0)?;
        return Ok(ChainSolution {
            kernel,
            regime: Regime::Esr,
            p_a: 1.0,
            stationary: None,
        });
    }
    let z = match characteristic_root(&kernel, config.m()) {
        Ok(z) => z,
        Err(Error::EnergySufficientRegime) => {
            let kernel = build_transition_kernel(config, 1.0)?;
            return Ok(ChainSolution {
                kernel,
                regime: Regime::Esr,
                p_a: 1.0,
                stationary: None,
            });
        }
        Err(e) => return Err(e),
    };
    if z == 0.0 {
        return Err(Error::DegenerateChain(
            "harvest probability in the active regime is zero (q = 1 or xi = 1)",
        ));
    }
    let stationary = stationary_distribution(&kernel, z, config.m())?;
    let p_a = active_probability(&stationary);
    if p_a >= 1.0 {
        let kernel = build_transition_kernel(config, 1.0)?;
        return Ok(ChainSolution {
            kernel,
            regime: Regime::Esr,
            p_a: 1.0,
            stationary: None,
        });
    }
    Ok(ChainSolution {
        kernel,
        regime: Regime::Ecr,
        p_a,
        stationary: Some(stationary),
    })
}
