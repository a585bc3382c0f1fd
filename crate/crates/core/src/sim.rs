//! Slot-level Monte-Carlo simulation of the n-node network. The embedded
//! energy process is deliberately identical to the analytic chain: decisions
//! use round-start energy, spending happens during the round, and harvest is
//! credited at round end so the net jumps reproduce the transition taxonomy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Mechanism, ValidatedConfig};
use crate::error::{Error, Result};

/// Per-node state carried across rounds.
#[derive(Debug, Clone, Copy)]
pub struct NodeState {
    /// Buffered energy units; never negative by construction.
    pub energy: u64,
    /// Instantaneous AoI at the current round boundary.
    pub aoi: u64,
    /// Generation round of the freshest delivered update.
    pub last_generation: u64,
}

/// Empirical statistics of one episode or an aggregate of replications.
#[derive(Debug, Clone, Serialize)]
pub struct SimStats {
    pub mean_aoi_rounds: f64,
    /// Round average scaled by the round duration (1 for the SA baseline,
    /// which needs no probing mini-slot).
    pub mean_aoi_physical: f64,
    /// Data transmissions, including collided ones.
    pub attempts: u64,
    pub successes: u64,
    /// Rounds in which two or more nodes transmitted data.
    pub collisions: u64,
    pub probes: u64,
    pub empirical_p_s: f64,
    pub empirical_p_t: f64,
    pub empirical_p_a: f64,
    /// Energy units spent per node per measured round.
    pub energy_consumption_rate: f64,
    /// Counts of post-transmission deficits; index l-1 holds deficit l for
    /// l in 1..=M+1.
    pub deficit_histogram: Vec<u64>,
    /// Half-width of the 95% confidence interval across replications
    /// (0 for a single episode).
    pub ci95: f64,
    pub replications: u32,
    pub horizon: u64,
    pub burn_in_rounds: u64,
    /// Post-burn-in rounds summed over replications.
    pub measured_rounds: u64,
    /// Whole-episode conservation counters (not burn-in filtered).
    pub harvested_total: u64,
    pub spent_total: u64,
    pub final_buffer_total: u64,
    pub final_aoi_min: u64,
    pub final_aoi_max: u64,
}

/// Fraction of the horizon discarded before measuring; all nodes start with
/// empty buffers and zero AoI.
pub const BURN_IN_FRACTION: f64 = 0.1;

fn burn_in(horizon: u64) -> u64 {
    ((horizon as f64) * BURN_IN_FRACTION).floor() as u64
}

/// Scratch buffers and per-node RNG streams for one episode.
struct Network {
    mech: Mechanism,
    xi: f64,
    q: f64,
    eta: f64,
    m: u64,
    threshold: u64,
    nodes: Vec<NodeState>,
    active: Vec<bool>,
    probed: Vec<bool>,
    txed: Vec<bool>,
    rngs: Vec<ChaCha8Rng>,
}

struct RoundOutcome {
    probes: u64,
    transmitters: u64,
    harvested: u64,
}

impl Network {
    /// Each node draws from its own ChaCha8 stream: the generator is seeded
    /// with the episode seed and the node index is the stream number, so
    /// results do not depend on iteration order.
    fn new(config: &ValidatedConfig, seed: u64) -> Self {
        let n = config.n() as usize;
        let m = config.m() as u64;
        let mech = config.mechanism();
        Network {
            mech,
            xi: config.xi(),
            q: config.q(),
            eta: config.eta(),
            m,
            threshold: if mech == Mechanism::SaBaseline { m } else { m + 1 },
            nodes: vec![
                NodeState {
                    energy: 0,
                    aoi: 0,
                    last_generation: 0,
                };
                n
            ],
            active: vec![false; n],
            probed: vec![false; n],
            txed: vec![false; n],
            rngs: (0..n)
                .map(|j| {
                    let mut r = ChaCha8Rng::seed_from_u64(seed);
                    r.set_stream(j as u64);
                    r
                })
                .collect(),
        }
    }

    /// Resolve one round: activity check, probing phase, data phase, harvest.
    /// AoI bookkeeping is left to the caller.
    fn step(&mut self, now: u64) -> RoundOutcome {
        let n = self.nodes.len();
        for j in 0..n {
            self.nodes[j].aoi = now - self.nodes[j].last_generation;
            self.active[j] = self.nodes[j].energy >= self.threshold;
        }

        // probing phase
        let mut n_probes = 0u64;
        let mut reserver = usize::MAX;
        if self.mech.is_probing() {
            for j in 0..n {
                self.probed[j] = false;
                if self.active[j] && self.q > 0.0 && self.rngs[j].gen_bool(self.q) {
                    self.probed[j] = true;
                    self.nodes[j].energy -= 1;
                    n_probes += 1;
                    reserver = j;
                }
            }
        }

        // data phase
        let mut n_tx = 0u64;
        if self.mech.is_probing() && n_probes == 1 {
            self.txed.iter_mut().for_each(|t| *t = false);
            self.txed[reserver] = true;
            n_tx = 1;
        } else {
            for j in 0..n {
                let eligible = match self.mech {
                    // fallback is open to every node that was active at the
                    // round start; the energy check only guards the balance
                    // (a probing node has >= M left, a non-probing one > M)
                    Mechanism::Auc => self.active[j] && self.nodes[j].energy >= self.m,
                    Mechanism::Ruc => self.probed[j] && self.nodes[j].energy >= self.m,
                    Mechanism::Safc => false,
                    Mechanism::SaBaseline => self.active[j],
                };
                self.txed[j] = eligible && self.eta > 0.0 && self.rngs[j].gen_bool(self.eta);
                if self.txed[j] {
                    n_tx += 1;
                }
            }
        }
        for j in 0..n {
            if self.txed[j] {
                self.nodes[j].energy -= self.m;
            }
        }
        if n_tx == 1 {
            let winner = (0..n).find(|&j| self.txed[j]).expect("one transmitter");
            self.nodes[winner].last_generation = now;
        }

        // harvest at round end
        let mut harvested = 0u64;
        for j in 0..n {
            if self.rngs[j].gen_bool(self.xi) {
                self.nodes[j].energy += 1;
                harvested += 1;
            }
        }

        RoundOutcome {
            probes: n_probes,
            transmitters: n_tx,
            harvested,
        }
    }
}

/// One seeded episode over `horizon` rounds, deterministic given the seed.
pub fn run_episode(config: &ValidatedConfig, seed: u64, horizon: u64) -> SimStats {
    let n = config.n() as usize;
    let m = config.m() as u64;
    let burn = burn_in(horizon);
    let mut net = Network::new(config, seed);

    let mut aoi_sum: u64 = 0;
    let mut attempts = 0u64;
    let mut successes = 0u64;
    let mut collisions = 0u64;
    let mut probes = 0u64;
    let mut active_node_rounds = 0u64;
    let mut spent_measured = 0u64;
    let mut harvested_total = 0u64;
    let mut spent_total = 0u64;
    let mut deficit_histogram = vec![0u64; (m + 1) as usize];

    for t in 0..horizon {
        let outcome = net.step(t);
        let measuring = t >= burn;

        harvested_total += outcome.harvested;
        spent_total += outcome.probes + m * outcome.transmitters;
        if measuring {
            for j in 0..n {
                aoi_sum += net.nodes[j].aoi;
                if net.active[j] {
                    active_node_rounds += 1;
                }
            }
            probes += outcome.probes;
            attempts += outcome.transmitters;
            spent_measured += outcome.probes + m * outcome.transmitters;
            if outcome.transmitters == 1 {
                successes += 1;
            } else if outcome.transmitters > 1 {
                collisions += 1;
            }
            for j in 0..n {
                if net.txed[j] {
                    let deficit = net.threshold as i64 - net.nodes[j].energy as i64;
                    if deficit >= 1 {
                        deficit_histogram[(deficit - 1) as usize] += 1;
                    }
                }
            }
        }
    }

    let measured_rounds = horizon - burn;
    let node_rounds = (measured_rounds as f64) * (n as f64);
    let mean_aoi_rounds = aoi_sum as f64 / node_rounds;
    let final_aoi = |j: usize| horizon - net.nodes[j].last_generation;

    SimStats {
        mean_aoi_rounds,
        mean_aoi_physical: physical_factor(config) * mean_aoi_rounds,
        attempts,
        successes,
        collisions,
        probes,
        empirical_p_s: ratio(successes, attempts),
        empirical_p_t: ratio(attempts, active_node_rounds),
        empirical_p_a: active_node_rounds as f64 / node_rounds,
        energy_consumption_rate: spent_measured as f64 / node_rounds,
        deficit_histogram,
        ci95: 0.0,
        replications: 1,
        horizon,
        burn_in_rounds: burn,
        measured_rounds,
        harvested_total,
        spent_total,
        final_buffer_total: net.nodes.iter().map(|s| s.energy).sum(),
        final_aoi_min: (0..n).map(final_aoi).min().unwrap_or(0),
        final_aoi_max: (0..n).map(final_aoi).max().unwrap_or(0),
    }
}

/// Mean and variance of the number of active rounds between consecutive
/// transmission attempts of the same node (pooled over nodes, burn-in
/// excluded). The analysis models these gaps as geometric in the attempt
/// probability.
pub fn attempt_gap_moments(config: &ValidatedConfig, seed: u64, horizon: u64) -> (f64, f64) {
    let n = config.n() as usize;
    let burn = burn_in(horizon);
    let mut net = Network::new(config, seed);
    let mut active_counts = vec![0u64; n];
    let mut gaps: Vec<f64> = Vec::new();

    for t in 0..horizon {
        net.step(t);
        for (j, count) in active_counts.iter_mut().enumerate() {
            if net.active[j] {
                *count += 1;
            }
            if net.txed[j] {
                if t >= burn {
                    gaps.push(*count as f64);
                }
                *count = 0;
            }
        }
    }
    let count = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / count;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (count - 1.0);
    (mean, var)
}

fn physical_factor(config: &ValidatedConfig) -> f64 {
    match config.mechanism() {
        Mechanism::SaBaseline => 1.0,
        _ => config.round_duration().rounds_to_physical(),
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Run independent seeded episodes (in parallel) and aggregate. Counters are
/// pooled; the AoI mean is the across-replication average with a 95%
/// normal-approximation confidence half-width.
pub fn run_replications(
    config: &ValidatedConfig,
    seeds: &[u64],
    horizon: u64,
) -> Result<SimStats> {
    if seeds.len() < 2 {
        return Err(Error::InsufficientReplications {
            needed: 2,
            got: seeds.len(),
        });
    }
    let episodes: Vec<SimStats> = seeds
        .par_iter()
        .map(|&s| run_episode(config, s, horizon))
        .collect();
    Ok(aggregate(config, &episodes))
}

fn aggregate(config: &ValidatedConfig, episodes: &[SimStats]) -> SimStats {
    let r = episodes.len() as f64;
    let mean: f64 = episodes.iter().map(|e| e.mean_aoi_rounds).sum::<f64>() / r;
    let var: f64 = episodes
        .iter()
        .map(|e| (e.mean_aoi_rounds - mean).powi(2))
        .sum::<f64>()
        / (r - 1.0);
    let ci95 = 1.96 * (var / r).sqrt();

    let sum = |f: fn(&SimStats) -> u64| episodes.iter().map(f).sum::<u64>();
    let attempts = sum(|e| e.attempts);
    let successes = sum(|e| e.successes);
    let probes = sum(|e| e.probes);
    let measured_rounds = sum(|e| e.measured_rounds);
    let node_rounds = measured_rounds as f64 * config.n() as f64;
    let active_node_rounds: f64 = episodes
        .iter()
        .map(|e| e.empirical_p_a * e.measured_rounds as f64 * config.n() as f64)
        .sum();

    let mut deficit_histogram = vec![0u64; episodes[0].deficit_histogram.len()];
    for e in episodes {
        for (acc, &x) in deficit_histogram.iter_mut().zip(&e.deficit_histogram) {
            *acc += x;
        }
    }

    SimStats {
        mean_aoi_rounds: mean,
        mean_aoi_physical: physical_factor(config) * mean,
        attempts,
        successes,
        collisions: sum(|e| e.collisions),
        probes,
        empirical_p_s: ratio(successes, attempts),
        empirical_p_t: if active_node_rounds > 0.0 {
            attempts as f64 / active_node_rounds
        } else {
            0.0
        },
        empirical_p_a: active_node_rounds / node_rounds,
        energy_consumption_rate: (probes + config.m() as u64 * attempts) as f64 / node_rounds,
        deficit_histogram,
        ci95,
        replications: episodes.len() as u32,
        horizon: episodes[0].horizon,
        burn_in_rounds: episodes[0].burn_in_rounds,
        measured_rounds,
        harvested_total: sum(|e| e.harvested_total),
        spent_total: sum(|e| e.spent_total),
        final_buffer_total: sum(|e| e.final_buffer_total),
        final_aoi_min: episodes.iter().map(|e| e.final_aoi_min).min().unwrap(),
        final_aoi_max: episodes.iter().map(|e| e.final_aoi_max).max().unwrap(),
    }
}

/// Mean energy units spent per node per measured round: probes cost one
/// unit, each data transmission costs M.
pub fn energy_consumption_rate(stats: &SimStats, config: &ValidatedConfig) -> f64 {
    let node_rounds = stats.measured_rounds as f64 * config.n() as f64;
    (stats.probes + config.m() as u64 * stats.attempts) as f64 / node_rounds
}
