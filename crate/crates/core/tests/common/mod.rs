//! Helpers shared by the integration suites: random kernel generation and a
//! global-balance checker built straight from the jump taxonomy (independent
//! of the closed-form branch layout, and valid for the degenerate jump
//! overlaps at M = 1 and M = 2).
#![allow(dead_code)] // each test binary uses a different subset

use rand::Rng;

use aoi_probe::{Mechanism, ProtocolConfig, TransitionKernel, ValidatedConfig};

pub fn config(
    mechanism: Mechanism,
    n: u32,
    xi: f64,
    m: u32,
    q: f64,
    eta: f64,
) -> ValidatedConfig {
    ProtocolConfig {
        n,
        xi,
        m,
        delta: 1.0 / 20.0,
        mechanism,
        q,
        eta,
    }
    .validate()
    .unwrap()
}

pub fn defaults(mechanism: Mechanism, q: f64, eta: f64) -> ValidatedConfig {
    config(mechanism, 50, 0.1, 7, q, eta)
}

/// Random active-row kernel with all six jump probabilities bounded away
/// from zero, paired with a harvest probability in a well-conditioned range.
pub fn random_kernel<R: Rng>(rng: &mut R) -> TransitionKernel {
    let mut w = [0.0f64; 6];
    for x in w.iter_mut() {
        *x = rng.gen_range(0.02..1.0);
    }
    let total: f64 = w.iter().sum();
    let xi = rng.gen_range(0.05..0.9);
    TransitionKernel {
        p_sh: xi,
        p_si: 1.0 - xi,
        p_ah: w[0] / total,
        p_ai: w[1] / total,
        p_ar: w[2] / total,
        p_ae: w[3] / total,
        p_au: w[4] / total,
        p_ad: w[5] / total,
    }
}

/// Probability of the one-step transition `from -> to` under the kernel,
/// accumulated over every jump type that maps between the two states.
pub fn transition_probability(kernel: &TransitionKernel, m: u32, from: u32, to: u32) -> f64 {
    let mut p = 0.0;
    if from <= m {
        if to == from + 1 {
            p += kernel.p_sh;
        }
        if to == from {
            p += kernel.p_si;
        }
    } else {
        if to == from + 1 {
            p += kernel.p_ah;
        }
        if to == from {
            p += kernel.p_ai;
        }
        if from >= 1 && to == from - 1 {
            p += kernel.p_ar;
        }
        if from >= m - 1 && to == from - (m - 1) {
            p += kernel.p_ae;
        }
        if from >= m && to == from - m {
            p += kernel.p_au;
        }
        if from > m && to == from - m - 1 {
            p += kernel.p_ad;
        }
    }
    p
}

/// Largest violation of the global balance equations S_j = Σ_i S_i P(i -> j)
/// over states 0..=upto, with S given by `dist`.
pub fn max_balance_residual(
    kernel: &TransitionKernel,
    m: u32,
    dist: impl Fn(u32) -> f64,
    upto: u32,
) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..=upto {
        let mut inflow = 0.0;
        // silent sources
        for from in j.saturating_sub(1)..=m.min(j + 1) {
            inflow += dist(from) * transition_probability(kernel, m, from, j);
        }
        // active sources land at j from at most j-1 ..= j+M+1
        let lo = (m + 1).max(j.saturating_sub(1));
        for from in lo..=j + m + 1 {
            inflow += dist(from) * transition_probability(kernel, m, from, j);
        }
        worst = worst.max((inflow - dist(j)).abs());
    }
    worst
}
