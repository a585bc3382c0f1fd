//! Energy-buffer Markov chain: transition kernel, characteristic root,
//! closed-form stationary distribution, and the self-consistent active
//! probability.
//!
//! The chain lives on buffer levels {0, 1, 2, ...}. Levels 0..=M are silent
//! (harvest/idle only); levels >= M+1 are active with six possible jumps:
//! harvest (+1), idle (0), reservation-only (-1), economical update (-(M-1)),
//! standard update (-M) and deep update (-(M+1)).

mod fixed_point;
mod kernel;
mod oracle;

pub use fixed_point::{solve_self_consistent, solve_self_consistent_from, ChainSolution};
pub use kernel::{build_transition_kernel, reservation_outcomes};
pub use oracle::{default_truncation, oracle_stationary};

use serde::Serialize;

use crate::error::{Error, Result};

/// Operating regime of the buffer chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Regime {
    /// Energy-constrained: a proper stationary distribution exists, p_a < 1.
    Ecr,
    /// Energy-sufficient: buffers drift to infinity, p_a = 1.
    Esr,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Ecr => "ECR",
            Regime::Esr => "ESR",
        })
    }
}

/// One-step transition probabilities of the energy buffer chain.
///
/// Silent rows are (p_sh, p_si); active rows are the six jump probabilities.
/// Both rows sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionKernel {
    /// Silent harvest, always equals xi.
    pub p_sh: f64,
    /// Silent idle, always 1 - xi.
    pub p_si: f64,
    /// Active harvest (+1).
    pub p_ah: f64,
    /// Active idle (0).
    pub p_ai: f64,
    /// Reservation-only (-1): probed, lost the reservation, stayed silent.
    pub p_ar: f64,
    /// Economical update (-(M-1)): transmission offset by a harvest.
    pub p_ae: f64,
    /// Standard update (-M).
    pub p_au: f64,
    /// Deep update (-(M+1)): probe + transmission, no harvest.
    pub p_ad: f64,
}

impl TransitionKernel {
    pub fn active_row_sum(&self) -> f64 {
        self.p_ah + self.p_ai + self.p_ar + self.p_ae + self.p_au + self.p_ad
    }

    /// Dense coefficients of the characteristic polynomial
    /// f(z) = p_ad z^{M+2} + p_au z^{M+1} + p_ae z^M + p_ar z^2 + (p_ai - 1) z + p_ah,
    /// indexed by degree. Added rather than assigned so the degenerate jump
    /// overlaps at M = 1 and M = 2 merge correctly.
    pub fn characteristic_coefficients(&self, m: u32) -> Vec<f64> {
        let m = m as usize;
        let mut c = vec![0.0; m + 3];
        c[m + 2] += self.p_ad;
        c[m + 1] += self.p_au;
        c[m] += self.p_ae;
        c[2] += self.p_ar;
        c[1] += self.p_ai - 1.0;
        c[0] += self.p_ah;
        c
    }
}

/// Horner evaluation of a dense polynomial given by ascending coefficients.
pub(crate) fn poly_eval(coeffs: &[f64], z: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

pub(crate) fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

/// Stability check: the chain has a stationary distribution iff the expected
/// active-state consumption strictly exceeds the harvest rate,
/// (M+1) p_ad + M p_au + (M-1) p_ae + p_ar > p_ah.
/// This margin equals f'(1) of the characteristic polynomial; the boundary
/// case is assigned to ESR.
pub fn stability_condition(kernel: &TransitionKernel, m: u32) -> bool {
    stability_margin(kernel, m) > 0.0
}

pub(crate) fn stability_margin(kernel: &TransitionKernel, m: u32) -> f64 {
    let m = m as f64;
    (m + 1.0) * kernel.p_ad + m * kernel.p_au + (m - 1.0) * kernel.p_ae + kernel.p_ar - kernel.p_ah
}

/// Unique root of the characteristic polynomial in [0, 1).
///
/// f(0) = p_ah >= 0, f(1) = 0 and f is strictly convex on z > 0, so when the
/// stability condition holds (f'(1) > 0) there is exactly one root in (0,1).
/// Found by bisection on a sign bracket, then polished with Newton steps.
pub fn characteristic_root(kernel: &TransitionKernel, m: u32) -> Result<f64> {
    if !stability_condition(kernel, m) {
        return Err(Error::EnergySufficientRegime);
    }
    if kernel.p_ah == 0.0 {
        // f(0) = 0 exactly; the active tail above M+1 carries no mass.
        return Ok(0.0);
    }
    let coeffs = kernel.characteristic_coefficients(m);
    let deriv = poly_derivative(&coeffs);

    // Walk the right bracket end toward 1 until f < 0. Near the stability
    // boundary the root itself approaches 1, so the walk may need to get
    // very close before the sign flips.
    let mut lo = 0.0f64;
    let mut gap = 1e-3f64;
    let mut hi = 1.0 - gap;
    while poly_eval(&coeffs, hi) >= 0.0 {
        lo = lo.max(hi);
        gap /= 10.0;
        if gap < 1e-15 {
            // The root is numerically indistinguishable from 1: the margin
            // f'(1) is below the noise floor, so treat as the boundary.
            return Err(Error::EnergySufficientRegime);
        }
        hi = 1.0 - gap;
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if poly_eval(&coeffs, mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let mut z = 0.5 * (lo + hi);
    // Newton polish; the bisection estimate is already within ~1e-15 of the
    // root so a couple of steps reach the noise floor of f.
    for _ in 0..4 {
        let f = poly_eval(&coeffs, z);
        let d = poly_eval(&deriv, z);
        if d == 0.0 {
            break;
        }
        let step = f / d;
        let next = z - step;
        if next > lo - 1e-12 && next < hi + 1e-12 {
            z = next;
        } else {
            break;
        }
        if step.abs() < 1e-16 {
            break;
        }
    }
    Ok(z.clamp(0.0, 1.0))
}

/// Closed-form stationary distribution of the buffer chain in ECR.
///
/// The four branches: S_0; a telescoped recursion on 1..=M-1; S_M; and a
/// geometric tail with ratio z from M+1 up. For M = 1 the middle branch is
/// vacuous and the remaining branches cover everything.
#[derive(Debug, Clone, Serialize)]
pub struct StationaryDistribution {
    z: f64,
    s0: f64,
    m: u32,
    /// S_1 / S_0.
    s1_rel: f64,
    /// Increment coefficient (p_ae + z p_au + z^2 p_ad) / p_ad.
    incr_rel: f64,
    /// S_M / S_0 = p_ah / (z p_ad).
    sm_rel: f64,
    /// S_{M+1} / S_0 = p_sh / p_ad.
    tail_rel: f64,
}

impl StationaryDistribution {
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Stationary probability of buffer level `state`.
    pub fn prob(&self, state: u32) -> f64 {
        let m = self.m;
        if state == 0 {
            self.s0
        } else if state < m {
            let geom = (1.0 - self.z.powi(state as i32 - 1)) / (1.0 - self.z);
            self.s0 * (self.s1_rel + self.incr_rel * geom)
        } else if state == m {
            self.s0 * self.sm_rel
        } else {
            self.s0 * self.tail_rel * self.z.powi((state - m - 1) as i32)
        }
    }

    /// Total mass on active states, Σ_{m >= M+1} S_m, in closed form.
    pub fn active_tail_mass(&self) -> f64 {
        self.s0 * self.tail_rel / (1.0 - self.z)
    }

    /// Total mass including the geometric tail; 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        let mut sum = self.prob(0) + self.prob(self.m);
        for state in 1..self.m {
            sum += self.prob(state);
        }
        sum + self.active_tail_mass()
    }
}

/// Evaluate the closed-form stationary distribution for a kernel whose
/// characteristic root is `z`.
pub fn stationary_distribution(
    kernel: &TransitionKernel,
    z: f64,
    m: u32,
) -> Result<StationaryDistribution> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::RootOutOfRange { z });
    }
    if kernel.p_ad <= 0.0 {
        return Err(Error::DegenerateChain(
            "deep-update probability is zero; S_{M+1} is undefined",
        ));
    }
    let ad = kernel.p_ad;
    let s1_rel = 1.0 + z + kernel.p_au / ad;
    let incr_rel = (kernel.p_ae + z * kernel.p_au + z * z * ad) / ad;
    let sm_rel = kernel.p_ah / (z * ad);
    let tail_rel = kernel.p_sh / ad;

    let mf = m as f64;
    let one_mz = 1.0 - z;
    // Normalizer: the closed form for S_0.
    let inv_s0 = 1.0
        + sm_rel
        + ((mf - 1.0) * (kernel.p_ae + kernel.p_au + ad) + kernel.p_sh) / (ad * one_mz)
        - (kernel.p_ae + z * kernel.p_au + z * z * ad) / (ad * one_mz * one_mz)
        - (z * z * kernel.p_ar + z * (kernel.p_ai - 1.0) + kernel.p_ah)
            / (z * ad * one_mz * one_mz);
    if !(inv_s0.is_finite() && inv_s0 > 0.0) {
        return Err(Error::DegenerateChain("normalizer is not positive"));
    }

    Ok(StationaryDistribution {
        z,
        s0: 1.0 / inv_s0,
        m,
        s1_rel,
        incr_rel,
        sm_rel,
        tail_rel,
    })
}

/// Active probability p_a = min{ S_0 xi / (p_ad (1 - z)), 1 }, the geometric
/// tail mass above level M.
pub fn active_probability(solution: &StationaryDistribution) -> f64 {
    solution.active_tail_mass().min(1.0)
}
