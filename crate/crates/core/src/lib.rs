//! Exact finite-strength treatment of weak values for a qubit coupled to a
//! Gaussian pointer.
//!
//! The crate covers the whole chain from states to statistics:
//!
//! - [`qubit`]: pure states, density matrices and the weak value `⟨φ|Â|ψ⟩/⟨φ|ψ⟩`.
//! - [`meter`]: Gaussian outcome densities, the exact and weak-coupling
//!   pointer amplitudes, and coarse-grained (sign of `x`) outcomes.
//! - [`bayes`]: the outcome-conditioned state update.
//! - [`pps`]: closed-form pre/post-selected averages and their quadrature oracle.
//! - [`coin`]: the classical coin-toss model with s-dependent and
//!   s-independent post-selection.
//! - [`mc`]: seeded, counter-based Monte Carlo trajectories.
//!
//! The crate is `no_std` and only needs `alloc` for the quadrature interval
//! list and Monte Carlo batch reduction.

#![no_std]
#![deny(missing_docs, rustdoc::broken_intra_doc_links)]

extern crate alloc;

pub mod bayes;
pub mod coin;
mod error;
pub mod mc;
pub mod meter;
pub mod pps;
pub mod quadrature;
pub mod qubit;

pub use self::{
    bayes::{bayes_update, post_select_prob, UpdateMode},
    coin::{
        coin_outcome_prob, coin_pps_average, s_dependent_ps_prob, CoinPps, CoinTossConfig,
        PostSelectionRule,
    },
    error::{Result, WvError},
    mc::{run_coin_toss, run_gaussian_pps, BatchStats, McConfig, McEstimate},
    meter::{
        aav_approx_amplitude, big_g_of, coarse_grain, exact_meter_amplitude, p_sigma,
        CoarseOutcome, MeterConfig, OutcomeDistribution, Strength,
    },
    pps::{
        delta_m2, dual_leading_order, finite_strength_ratio, pps_average_classical,
        pps_average_closed, pps_average_compact, pps_average_dual, quadrature_pps_oracle,
        PpsResult,
    },
    qubit::{
        aav_weak_value, density_of, make_state, Amplitude, PureQubitState, QubitDensityMatrix,
        Spin, WeakValue,
    },
};
