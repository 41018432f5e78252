//! Rayon-parallel drivers over the core batch kernels.
//!
//! Batches are computed in parallel and collected in index order before the
//! fixed pairwise reduction, so results are bit-identical to the sequential
//! `wv_core::run_*` functions for any thread count.

use rayon::prelude::*;
use wv_core::mc::{coin_batch, gaussian_batch, reduce_batches};
use wv_core::{
    CoinTossConfig, McConfig, McEstimate, MeterConfig, PostSelectionRule, PureQubitState,
    QubitDensityMatrix, Result,
};

/// Parallel [`wv_core::run_gaussian_pps`].
pub fn run_gaussian_pps(
    rho: &QubitDensityMatrix,
    post: &PureQubitState,
    meter: &MeterConfig,
    mc: &McConfig,
) -> Result<McEstimate> {
    let batches = (0..mc.n_batches())
        .into_par_iter()
        .map(|b| gaussian_batch(rho, post, meter, mc, b))
        .collect();
    McEstimate::from_stats(&reduce_batches(batches))
}

/// Parallel [`wv_core::run_coin_toss`].
pub fn run_coin_toss(
    cfg: &CoinTossConfig,
    rule: &PostSelectionRule,
    mc: &McConfig,
) -> Result<McEstimate> {
    let batches = (0..mc.n_batches())
        .into_par_iter()
        .map(|b| coin_batch(cfg, rule, mc, b))
        .collect();
    McEstimate::from_stats(&reduce_batches(batches))
}
