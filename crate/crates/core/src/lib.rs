//! Network-average Age of Information for energy-harvesting random access
//! with channel probing and reservation.
//!
//! The crate has three layers:
//!
//! - an analytic core: the energy-buffer Markov chain of a typical node, its
//!   closed-form stationary distribution, and the network-average AoI of the
//!   AUC / RUC / SAFC access mechanisms plus an EH slotted-ALOHA baseline;
//! - a slot-level Monte-Carlo simulator whose embedded energy process is
//!   exactly the analytic chain, used as ground truth for every formula;
//! - a grid-search optimizer and sweep harness producing plot-ready tables.
//!
//! ```
//! use aoi_probe::{Mechanism, ProtocolConfig};
//!
//! let config = ProtocolConfig {
//!     n: 50,
//!     xi: 0.1,
//!     m: 7,
//!     delta: 1.0 / 20.0,
//!     mechanism: Mechanism::Auc,
//!     q: 0.2,
//!     eta: 0.1,
//! }
//! .validate()
//! .unwrap();
//! let result = aoi_probe::network_aoi(&config).unwrap();
//! assert!(result.aoi_rounds >= 1.0);
//! ```

pub mod aoi;
pub mod chain;
pub mod config;
pub mod error;
pub mod optim;
pub mod sa;
pub mod sim;

pub use aoi::{
    analytic_aoi, approx_aoi, attempt_probability, deficit_distribution,
    geometric_tail_te_moments, interval_moments, interval_moments_truncated,
    mechanism_stability_inequality, network_aoi, omega_weights, physical_aoi,
    success_probability, AccessProbabilities, AoiResult, DeficitDistribution, IntervalMoments,
    OmegaWeights,
};
pub use chain::{
    active_probability, build_transition_kernel, characteristic_root, default_truncation,
    oracle_stationary, reservation_outcomes, solve_self_consistent, solve_self_consistent_from,
    stability_condition, stationary_distribution, ChainSolution, Regime, StationaryDistribution,
    TransitionKernel,
};
pub use config::{
    access_probability, validate_config, Mechanism, ProtocolConfig, RoundDuration, ValidatedConfig,
};
pub use error::{Error, Result};
pub use optim::{
    grid_search, sweep, GridPoint, GridSpec, Objective, OptimizationResult, SimControls,
    SweepParameter, SweepRow,
};
pub use sa::{sa_baseline_aoi, sa_stability, sa_stationary};
pub use sim::{
    attempt_gap_moments, energy_consumption_rate, run_episode, run_replications, NodeState,
    SimStats, BURN_IN_FRACTION,
};
