//! Seeded Monte Carlo trajectories.
//!
//! Trial `i` draws all of its randomness from its own ChaCha8 stream
//! `(seed, stream = i)`, so a trial's outcome does not depend on which batch
//! or thread runs it. Trials are grouped in batches of `batch_size`; batch
//! statistics are merged by a pairwise tree in batch-index order. The result
//! is therefore a pure function of `(seed, n_trials, batch_size)`, whether
//! batches are evaluated sequentially here or in parallel by a caller using
//! [`gaussian_batch`] / [`coin_batch`] and [`reduce_batches`].

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bayes::{bayes_update, post_select_prob, UpdateMode};
use crate::coin::{coin_outcome_prob, CoinTossConfig, PostSelectionRule};
use crate::error::{Result, WvError};
use crate::meter::{CoarseOutcome, MeterConfig};
use crate::qubit::{PureQubitState, QubitDensityMatrix, Spin};

/// Sampling parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    seed: u64,
    n_trials: u64,
    batch_size: u64,
    mode: UpdateMode,
}

impl McConfig {
    /// `n_trials ≥ 1`, `batch_size ≥ 1`. The update mode only matters for
    /// Gaussian-pointer runs.
    pub fn new(seed: u64, n_trials: u64, batch_size: u64, mode: UpdateMode) -> Result<Self> {
        if n_trials == 0 {
            return Err(WvError::Domain {
                what: "n_trials",
                value: 0.0,
            });
        }
        if batch_size == 0 {
            return Err(WvError::Domain {
                what: "batch_size",
                value: 0.0,
            });
        }
        Ok(McConfig {
            seed,
            n_trials,
            batch_size,
            mode,
        })
    }

    /// Seed.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Total trials.
    pub fn n_trials(&self) -> u64 {
        self.n_trials
    }

    /// Trials per batch.
    pub fn batch_size(&self) -> u64 {
        self.batch_size
    }

    /// Update rule for Gaussian runs.
    pub fn mode(&self) -> UpdateMode {
        self.mode
    }

    /// Same sampling parameters with a different update rule.
    pub fn with_mode(&self, mode: UpdateMode) -> McConfig {
        McConfig { mode, ..*self }
    }

    /// Number of batches, the last one possibly short.
    pub fn n_batches(&self) -> u64 {
        self.n_trials.div_ceil(self.batch_size)
    }

    fn trial_range(&self, batch: u64) -> core::ops::Range<u64> {
        let start = batch.saturating_mul(self.batch_size).min(self.n_trials);
        let end = start.saturating_add(self.batch_size).min(self.n_trials);
        start..end
    }
}

/// Running statistics of accepted values for a batch of trials.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BatchStats {
    /// Trials attempted.
    pub n_total: u64,
    /// Trials that passed post-selection.
    pub n_accepted: u64,
    /// Mean of accepted values.
    pub mean: f64,
    /// Sum of squared deviations from the mean.
    pub sum_sq_dev: f64,
}

impl BatchStats {
    fn record_trial(&mut self, accepted: Option<f64>) {
        self.n_total += 1;
        if let Some(value) = accepted {
            self.n_accepted += 1;
            let delta = value - self.mean;
            self.mean += delta / self.n_accepted as f64;
            self.sum_sq_dev += delta * (value - self.mean);
        }
    }

    /// Combines two disjoint sets of trials.
    pub fn merge(&self, other: &BatchStats) -> BatchStats {
        let n_accepted = self.n_accepted + other.n_accepted;
        let n_total = self.n_total + other.n_total;
        if self.n_accepted == 0 {
            return BatchStats { n_total, ..*other };
        }
        if other.n_accepted == 0 {
            return BatchStats { n_total, ..*self };
        }
        let (na, nb) = (self.n_accepted as f64, other.n_accepted as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        BatchStats {
            n_total,
            n_accepted,
            mean: self.mean + delta * nb / n,
            sum_sq_dev: self.sum_sq_dev + other.sum_sq_dev + delta * delta * na * nb / n,
        }
    }
}

/// Pairwise tree reduction in index order.
pub fn reduce_batches(mut batches: Vec<BatchStats>) -> BatchStats {
    if batches.is_empty() {
        return BatchStats::default();
    }
    while batches.len() > 1 {
        batches = batches
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => a.merge(b),
                [a] => *a,
                _ => unreachable!(),
            })
            .collect();
    }
    batches[0]
}

/// Summary of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    /// Mean of accepted values.
    pub mean: f64,
    /// Standard error of `mean` (0 with a single accepted trial).
    pub std_err: f64,
    /// Trials that passed post-selection.
    pub n_accepted: u64,
    /// Trials attempted.
    pub n_total: u64,
    /// `n_accepted / n_total`.
    pub accept_rate: f64,
}

impl McEstimate {
    /// Converts merged statistics, failing with [`WvError::NoAcceptedSamples`]
    /// when nothing was accepted.
    pub fn from_stats(stats: &BatchStats) -> Result<McEstimate> {
        if stats.n_accepted == 0 {
            return Err(WvError::NoAcceptedSamples {
                n_total: stats.n_total,
            });
        }
        let n = stats.n_accepted as f64;
        let std_err = if stats.n_accepted > 1 {
            libm::sqrt(stats.sum_sq_dev / (n - 1.0) / n)
        } else {
            0.0
        };
        Ok(McEstimate {
            mean: stats.mean,
            std_err,
            n_accepted: stats.n_accepted,
            n_total: stats.n_total,
            accept_rate: n / stats.n_total as f64,
        })
    }

    /// One binomial standard deviation of the acceptance rate around `p`.
    pub fn accept_rate_sigma(&self, p: f64) -> f64 {
        libm::sqrt(p * (1.0 - p) / self.n_total as f64)
    }
}

fn base_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn trial_rng(base: &ChaCha8Rng, trial: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(trial);
    rng.set_word_pos(0);
    rng
}

/// Runs one batch of Gaussian-pointer trials: sample `x` from
/// `N(x) = ρ↑↑P↑(x) + ρ↓↓P↓(x)`, update the state, accept with probability
/// `⟨φ|ρ̃(x)|φ⟩`, and record accepted `x`.
pub fn gaussian_batch(
    rho: &QubitDensityMatrix,
    post: &PureQubitState,
    meter: &MeterConfig,
    mc: &McConfig,
    batch: u64,
) -> BatchStats {
    let base = base_rng(mc.seed);
    let sd = libm::sqrt(meter.d());
    let mut stats = BatchStats::default();
    for trial in mc.trial_range(batch) {
        let mut rng = trial_rng(&base, trial);
        // The mixture density depends only on populations.
        let spin = if rng.random::<f64>() < rho.p_up() {
            Spin::Up
        } else {
            Spin::Down
        };
        let z: f64 = rng.sample(StandardNormal);
        let x = meter.center(spin) + sd * z;
        let keep = match bayes_update(rho, meter, x, mc.mode) {
            Ok(updated) => rng.random::<f64>() < post_select_prob(&updated, post),
            Err(_) => false,
        };
        stats.record_trial(keep.then_some(x));
    }
    stats
}

/// Runs one batch of coin-toss trials, recording accepted `s = ±1`.
pub fn coin_batch(
    cfg: &CoinTossConfig,
    rule: &PostSelectionRule,
    mc: &McConfig,
    batch: u64,
) -> BatchStats {
    let base = base_rng(mc.seed);
    let mut stats = BatchStats::default();
    for trial in mc.trial_range(batch) {
        let mut rng = trial_rng(&base, trial);
        let spin = if rng.random::<f64>() < cfg.p_up() {
            Spin::Up
        } else {
            Spin::Down
        };
        let s = if rng.random::<f64>() < coin_outcome_prob(cfg, spin, CoarseOutcome::Plus) {
            CoarseOutcome::Plus
        } else {
            CoarseOutcome::Minus
        };
        let keep = rng.random::<f64>() < rule.keep_prob(cfg, spin, s);
        stats.record_trial(keep.then_some(s.sign()));
    }
    stats
}

/// Sequential Gaussian-pointer PPS run.
pub fn run_gaussian_pps(
    rho: &QubitDensityMatrix,
    post: &PureQubitState,
    meter: &MeterConfig,
    mc: &McConfig,
) -> Result<McEstimate> {
    let batches = (0..mc.n_batches())
        .map(|b| gaussian_batch(rho, post, meter, mc, b))
        .collect();
    McEstimate::from_stats(&reduce_batches(batches))
}

/// Sequential coin-toss PPS run; `mean` estimates `M₁/M₂` (not divided by λ).
pub fn run_coin_toss(
    cfg: &CoinTossConfig,
    rule: &PostSelectionRule,
    mc: &McConfig,
) -> Result<McEstimate> {
    let batches = (0..mc.n_batches())
        .map(|b| coin_batch(cfg, rule, mc, b))
        .collect();
    McEstimate::from_stats(&reduce_batches(batches))
}
