//! Independent verification oracle: the stationary vector of an explicitly
//! truncated chain, computed by power iteration straight from the jump
//! taxonomy. Shares no code with the closed-form path.

use crate::error::{Error, Result};

use super::TransitionKernel;

const POWER_TOLERANCE: f64 = 1e-13;
const MAX_SWEEPS: usize = 400_000;
const BOUNDARY_MASS_LIMIT: f64 = 1e-10;

/// Default truncation level, 200 * (M + 1).
pub fn default_truncation(m: u32) -> u32 {
    200 * (m + 1)
}

/// Stationary vector of the chain truncated at `truncation` (jumps above the
/// boundary are absorbed into the boundary state). Enlarges the truncation
/// when the boundary holds visible mass, and errors if power iteration does
/// not converge.
pub fn oracle_stationary(
    kernel: &TransitionKernel,
    m: u32,
    truncation: u32,
) -> Result<Vec<f64>> {
    let mut trunc = truncation.max(2 * (m + 2));
    for _ in 0..4 {
        let v = power_iterate(kernel, m, trunc as usize)?;
        if v[v.len() - 1] < BOUNDARY_MASS_LIMIT {
            return Ok(v);
        }
        trunc *= 4;
    }
    Err(Error::PowerIterationDiverged { delta: f64::NAN })
}

fn power_iterate(kernel: &TransitionKernel, m: u32, trunc: usize) -> Result<Vec<f64>> {
    let size = trunc + 1;
    let m = m as usize;
    let cap = |j: usize| j.min(trunc);
    let mut v = vec![1.0 / size as f64; size];
    let mut w = vec![0.0f64; size];

    let mut delta = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        w.iter_mut().for_each(|x| *x = 0.0);
        for (state, &mass) in v.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            if state <= m {
                w[cap(state + 1)] += mass * kernel.p_sh;
                w[state] += mass * kernel.p_si;
            } else {
                w[cap(state + 1)] += mass * kernel.p_ah;
                w[state] += mass * kernel.p_ai;
                w[state - 1] += mass * kernel.p_ar;
                w[state - (m - 1)] += mass * kernel.p_ae;
                w[state - m] += mass * kernel.p_au;
                w[state - m - 1] += mass * kernel.p_ad;
            }
        }
        let total: f64 = w.iter().sum();
        delta = 0.0;
        for i in 0..size {
            w[i] /= total;
            delta += (w[i] - v[i]).abs();
        }
        std::mem::swap(&mut v, &mut w);
        if delta < POWER_TOLERANCE {
            return Ok(v);
        }
    }
    Err(Error::PowerIterationDiverged { delta })
}
