//! Slotted-ALOHA baseline: no probing phase, activation threshold M, every
//! active node transmits with probability eta. Obtained by specializing the
//! buffer-chain machinery to the four-jump kernel {harvest, idle, update of
//! size M-1, update of size M}.

use serde::Serialize;

use crate::aoi::{AccessProbabilities, AoiResult, IntervalMoments};
use crate::chain::Regime;
use crate::config::{Mechanism, ValidatedConfig};
use crate::error::{Error, Result};

/// Active-regime jump probabilities of the baseline chain.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SaKernel {
    /// +1: no transmission, harvest.
    pub p_h: f64,
    /// 0: no transmission, no harvest.
    pub p_i: f64,
    /// -(M-1): transmission offset by a harvest.
    pub p_e: f64,
    /// -M: transmission without harvest.
    pub p_u: f64,
}

pub fn sa_kernel(xi: f64, eta: f64) -> SaKernel {
    SaKernel {
        p_h: xi * (1.0 - eta),
        p_i: (1.0 - xi) * (1.0 - eta),
        p_e: xi * eta,
        p_u: (1.0 - xi) * eta,
    }
}

/// Stability of the baseline chain: mean consumption M eta must exceed xi.
pub fn sa_stability(config: &ValidatedConfig) -> bool {
    config.m() as f64 * config.eta() > config.xi()
}

/// Stationary distribution of the baseline chain (ECR only). Silent band is
/// 0..=M-1; the active band M.. decays geometrically with the root of
/// p_u z^{M+1} + p_e z^M + (p_i - 1) z + p_h = 0.
#[derive(Debug, Clone, Serialize)]
pub struct SaStationary {
    pub z: f64,
    pub s0: f64,
    m: u32,
    /// (p_e + z p_u) / p_u
    incr_rel: f64,
    /// S_M / S_0 = xi / p_u
    active_rel: f64,
}

impl SaStationary {
    pub fn prob(&self, state: u32) -> f64 {
        if state < self.m {
            let geom = (1.0 - self.z.powi(state as i32)) / (1.0 - self.z);
            self.s0 * (1.0 + self.incr_rel * geom)
        } else {
            self.s0 * self.active_rel * self.z.powi((state - self.m) as i32)
        }
    }

    pub fn active_mass(&self) -> f64 {
        self.s0 * self.active_rel / (1.0 - self.z)
    }
}

pub fn sa_stationary(config: &ValidatedConfig) -> Result<SaStationary> {
    let (xi, eta, m) = (config.xi(), config.eta(), config.m());
    if !sa_stability(config) {
        return Err(Error::EnergySufficientRegime);
    }
    let k = sa_kernel(xi, eta);
    if k.p_u == 0.0 {
        return Err(Error::DegenerateChain(
            "baseline down-jump probability is zero (xi = 1)",
        ));
    }
    let z = sa_root(&k, m)?;
    let incr_rel = (k.p_e + z * k.p_u) / k.p_u;
    let active_rel = xi / k.p_u;
    let mut inv_s0 = active_rel / (1.0 - z);
    for state in 0..m {
        inv_s0 += 1.0 + incr_rel * (1.0 - z.powi(state as i32)) / (1.0 - z);
    }
    Ok(SaStationary {
        z,
        s0: 1.0 / inv_s0,
        m,
        incr_rel,
        active_rel,
    })
}

fn sa_root(k: &SaKernel, m: u32) -> Result<f64> {
    if k.p_h == 0.0 {
        // eta = 1: all active mass sits at level M exactly
        return Ok(0.0);
    }
    let m = m as usize;
    let mut coeffs = vec![0.0f64; m + 2];
    coeffs[m + 1] += k.p_u;
    coeffs[m] += k.p_e;
    coeffs[1] += k.p_i - 1.0;
    coeffs[0] += k.p_h;
    let eval = |z: f64| {
        let mut acc = 0.0;
        for &c in coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let mut lo = 0.0f64;
    let mut gap = 1e-3f64;
    let mut hi = 1.0 - gap;
    while eval(hi) >= 0.0 {
        lo = lo.max(hi);
        gap /= 10.0;
        if gap < 1e-15 {
            return Err(Error::EnergySufficientRegime);
        }
        hi = 1.0 - gap;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Exact network-average AoI of the EH slotted-ALOHA baseline.
///
/// p_T = eta (every active round is an i.i.d. attempt) and an attempt
/// succeeds when no other active node transmits. The deficit after a
/// transmission is M - (level - consumption) with consumption M (no harvest)
/// or M - 1 (harvest), so the accumulation-time machinery carries over with
/// threshold M.
pub fn sa_baseline_aoi(config: &ValidatedConfig) -> Result<AoiResult> {
    if config.mechanism() != Mechanism::SaBaseline {
        return Err(Error::NotBaseline(config.mechanism().as_str()));
    }
    let (n, xi, eta, m) = (config.n(), config.xi(), config.eta(), config.m());
    if eta == 0.0 {
        return Err(Error::NoAttempts);
    }

    if !sa_stability(config) {
        // ESR: per-round update success probability eta (1 - eta)^{n-1}
        let p_s = (1.0 - eta).powi(n as i32 - 1);
        let aoi = 1.0 / (eta * p_s);
        return Ok(AoiResult {
            mechanism: Mechanism::SaBaseline,
            regime: Regime::Esr,
            p_a: 1.0,
            z: None,
            probabilities: AccessProbabilities {
                p_ac: 0.0,
                p_cs: 0.0,
                p_t: eta,
                p_s,
            },
            moments: None,
            aoi_rounds: aoi,
            approx_aoi_rounds: None,
            aoi_physical: aoi, // no probing overhead
        });
    }

    let st = sa_stationary(config)?;
    let p_a = st.active_mass().min(1.0);
    let p_t = eta;
    let p_s = (1.0 - p_a * eta).powi(n as i32 - 1);

    // deficit over 1..=M: deep band (consumed M) from level 2M - l,
    // standard band (consumed M-1) from level 2M - 1 - l
    let (omega_deep, omega_std) = (1.0 - xi, xi);
    let mut e_te = 0.0;
    let mut e_te2 = 0.0;
    for l in 1..=m {
        let mut p = omega_deep * st.prob(2 * m - l) / p_a;
        if l < m {
            p += omega_std * st.prob(2 * m - 1 - l) / p_a;
        }
        let lf = l as f64;
        e_te += p * lf / xi;
        e_te2 += p * lf * (lf - xi + 1.0) / (xi * xi);
    }
    let e_ta = 1.0 / p_t;
    let e_ta2 = (2.0 - p_t) / (p_t * p_t);
    let moments = IntervalMoments {
        e_ta,
        e_ta2,
        e_te,
        e_te2,
        e_t: e_ta + e_te,
        e_t2: e_ta2 + 2.0 * e_ta * e_te + e_te2,
    };
    let aoi = 1.0 / (p_t * p_s)
        + (1.0 / p_s - 1.0) * e_te
        + (e_te2 + e_te) / (2.0 * (1.0 / p_t + e_te));

    Ok(AoiResult {
        mechanism: Mechanism::SaBaseline,
        regime: Regime::Ecr,
        p_a,
        z: Some(st.z),
        probabilities: AccessProbabilities {
            p_ac: 0.0,
            p_cs: 0.0,
            p_t,
            p_s,
        },
        moments: Some(moments),
        aoi_rounds: aoi,
        approx_aoi_rounds: None,
        aoi_physical: aoi,
    })
}
