//! Mechanism-specific transition kernels of the energy buffer chain.

use crate::config::{Mechanism, ValidatedConfig};
use crate::error::{Error, Result};

use super::TransitionKernel;

/// Probabilities that zero (`P0`) and exactly one (`P1`) of the other n-1
/// nodes send a probing signal, each probing independently with p_a * q.
pub fn reservation_outcomes(p_a: f64, q: f64, n: u32) -> (f64, f64) {
    if n == 1 {
        return (1.0, 0.0);
    }
    let x = p_a * q;
    let p0 = (1.0 - x).powi(n as i32 - 1);
    let p1 = if n == 2 {
        x
    } else {
        (n as f64 - 1.0) * x * (1.0 - x).powi(n as i32 - 2)
    };
    (p0, p1)
}

/// Build the active-regime kernel for the given mechanism, taking the other
/// nodes' behavior as fixed through `p_a`.
///
/// AUC carries the full seven-branch structure. RUC restricts fallback access
/// to probing nodes, which removes the economical update (any transmission
/// pays for a probe). SAFC removes fallback access entirely, so the kernel
/// does not depend on eta.
pub fn build_transition_kernel(config: &ValidatedConfig, p_a: f64) -> Result<TransitionKernel> {
    let (xi, q, eta) = (config.xi(), config.q(), config.eta());
    let (p0, p1) = reservation_outcomes(p_a, q, config.n());
    // Transmission probability of a probing node: its reservation succeeded,
    // or it fell back (where allowed).
    match config.mechanism() {
        Mechanism::Auc => {
            let b = p0 + (1.0 - p0) * eta;
            let fallback = (1.0 - p1) * eta; // non-probing active node
            Ok(TransitionKernel {
                p_sh: xi,
                p_si: 1.0 - xi,
                p_ad: (1.0 - xi) * q * b,
                p_au: xi * q * b + (1.0 - xi) * (1.0 - q) * fallback,
                p_ae: xi * (1.0 - q) * fallback,
                p_ar: (1.0 - xi) * q * (1.0 - p0) * (1.0 - eta),
                p_ai: xi * q * (1.0 - p0) * (1.0 - eta)
                    + (1.0 - xi) * (1.0 - q) * (1.0 - fallback),
                p_ah: xi * (1.0 - q) * (1.0 - fallback),
            })
        }
        Mechanism::Ruc => {
            let b = p0 + (1.0 - p0) * eta;
            Ok(TransitionKernel {
                p_sh: xi,
                p_si: 1.0 - xi,
                p_ad: (1.0 - xi) * q * b,
                p_au: xi * q * b,
                p_ae: 0.0,
                p_ar: (1.0 - xi) * q * (1.0 - b),
                p_ai: xi * q * (1.0 - b) + (1.0 - xi) * (1.0 - q),
                p_ah: xi * (1.0 - q),
            })
        }
        Mechanism::Safc => Ok(TransitionKernel {
            p_sh: xi,
            p_si: 1.0 - xi,
            p_ad: (1.0 - xi) * q * p0,
            p_au: xi * q * p0,
            p_ae: 0.0,
            p_ar: (1.0 - xi) * q * (1.0 - p0),
            p_ai: xi * q * (1.0 - p0) + (1.0 - xi) * (1.0 - q),
            p_ah: xi * (1.0 - q),
        }),
        Mechanism::SaBaseline => Err(Error::BaselineMechanism),
    }
}
