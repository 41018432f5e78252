//! Classical coin-toss model.
//!
//! A coin with intrinsic state `σ ∈ {↑, ↓}` (weights `p_up`, `1 − p_up`)
//! produces a coarse-grained outcome `s = ±1` with `P_σ(s) = (1 ± sλ)/2`. A
//! post-selection rule then keeps or discards the trial. The s-dependent rule
//! `P_σs(φ) = 1 − δ/(1 ± sλ)` inflates the scaled average to `Ā_ψ/(1 − δ)`;
//! any s-independent rule keeps it inside `[−1, 1]`.
//!
//! Only the populations of the pre-state enter; coherences are ignored.

use crate::error::{check_finite, Result, WvError};
use crate::meter::{coarse_grain, CoarseOutcome, Strength};
use crate::pps::M2_FLOOR;
use crate::qubit::Spin;

/// Coin parameters: strength λ, disturbance δ, and the weight of heads.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinTossConfig {
    lambda: f64,
    delta: f64,
    p_up: f64,
}

impl CoinTossConfig {
    /// Requires `0 < λ < 1`, `0 ≤ δ ≤ 1 − λ` and `0 ≤ p_up ≤ 1`.
    pub fn new(lambda: f64, delta: f64, p_up: f64) -> Result<Self> {
        check_finite("lambda", lambda)?;
        check_finite("delta", delta)?;
        check_finite("p_up", p_up)?;
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(WvError::Domain {
                what: "lambda",
                value: lambda,
            });
        }
        if !(0.0..=1.0 - lambda).contains(&delta) {
            return Err(WvError::InvalidDisturbance { delta, lambda });
        }
        if !(0.0..=1.0).contains(&p_up) {
            return Err(WvError::Domain {
                what: "p_up",
                value: p_up,
            });
        }
        Ok(CoinTossConfig {
            lambda,
            delta,
            p_up,
        })
    }

    /// λ.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// δ.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `|c↑|²`.
    pub fn p_up(&self) -> f64 {
        self.p_up
    }

    /// Weight of `spin` in the pre-state.
    pub fn weight(&self, spin: Spin) -> f64 {
        match spin {
            Spin::Up => self.p_up,
            Spin::Down => 1.0 - self.p_up,
        }
    }

    /// `Ā_ψ = 2·p_up − 1`.
    pub fn a_bar(&self) -> f64 {
        2.0 * self.p_up - 1.0
    }

    /// Closed form of the s-dependent average, `λĀ_ψ/(1 − δ)`.
    pub fn s_dependent_closed(&self) -> f64 {
        self.lambda * self.a_bar() / (1.0 - self.delta)
    }
}

/// How trials are kept after the coarse-grained outcome is recorded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PostSelectionRule {
    /// `P_σs(φ) = 1 − δ/(1 ± sλ)`: depends on the outcome `s`.
    SDependent,
    /// Keep probability depends only on the intrinsic state.
    SIndependent {
        /// Keep probability for `↑`.
        q_up: f64,
        /// Keep probability for `↓`.
        q_down: f64,
    },
}

impl PostSelectionRule {
    /// Validated s-independent rule.
    pub fn s_independent(q_up: f64, q_down: f64) -> Result<Self> {
        for (what, q) in [("q_up", q_up), ("q_down", q_down)] {
            if !(0.0..=1.0).contains(&q) {
                return Err(WvError::Domain { what, value: q });
            }
        }
        Ok(PostSelectionRule::SIndependent { q_up, q_down })
    }

    /// Keep probability for a trial with state `spin` and outcome `s`.
    pub fn keep_prob(&self, cfg: &CoinTossConfig, spin: Spin, s: CoarseOutcome) -> f64 {
        match *self {
            PostSelectionRule::SDependent => s_dependent_ps_prob(cfg, spin, s),
            PostSelectionRule::SIndependent { q_up, q_down } => match spin {
                Spin::Up => q_up,
                Spin::Down => q_down,
            },
        }
    }
}

/// `P↑(s) = (1 + sλ)/2`, `P↓(s) = (1 − sλ)/2`.
pub fn coin_outcome_prob(cfg: &CoinTossConfig, spin: Spin, s: CoarseOutcome) -> f64 {
    coarse_grain(Strength::Lambda(cfg.lambda), spin, s)
}

/// `1 − δ/(1 + sλ)` for `↑`, `1 − δ/(1 − sλ)` for `↓`.
pub fn s_dependent_ps_prob(cfg: &CoinTossConfig, spin: Spin, s: CoarseOutcome) -> f64 {
    1.0 - cfg.delta / (1.0 + s.sign() * spin.eigenvalue() * cfg.lambda)
}

/// Coin-toss PPS moments and average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinPps {
    /// `Σ s·P_ψσ(s)·P_σs(φ)`.
    pub m1: f64,
    /// `Σ P_ψσ(s)·P_σs(φ)`.
    pub m2: f64,
    /// `M₁/M₂`.
    pub avg: f64,
    /// λ of the configuration.
    pub lambda: f64,
}

impl CoinPps {
    /// `(M₁/M₂)/λ`, the quantity compared against the eigenvalue range.
    pub fn scaled(&self) -> f64 {
        self.avg / self.lambda
    }
}

/// Evaluates the four-term sums over `σ` and `s` for the given rule.
pub fn coin_pps_average(cfg: &CoinTossConfig, rule: &PostSelectionRule) -> Result<CoinPps> {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for s in CoarseOutcome::ALL {
        for spin in Spin::ALL {
            let joint =
                cfg.weight(spin) * coin_outcome_prob(cfg, spin, s) * rule.keep_prob(cfg, spin, s);
            m1 += s.sign() * joint;
            m2 += joint;
        }
    }
    if m2 <= M2_FLOOR {
        return Err(WvError::ZeroPpsProbability { m2 });
    }
    Ok(CoinPps {
        m1,
        m2,
        avg: m1 / m2,
        lambda: cfg.lambda,
    })
}
