//! Outcome-conditioned state update.
//!
//! Diagonals follow Bayes' formula with the Gaussian likelihoods `P_σ(x)`;
//! the coherence is rescaled by `√(P↑P↓)/N(x)`, which keeps pure states pure.
//! Likelihood ratios are evaluated in log space so far-tail outcomes do not
//! underflow to `0/0`.

use num_complex::Complex64;

use crate::error::{Result, WvError};
use crate::meter::MeterConfig;
use crate::qubit::{PureQubitState, QubitDensityMatrix, Spin};

/// Which update rule to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum UpdateMode {
    /// Bayes on the diagonals, purity-preserving coherence.
    #[default]
    Quantum,
    /// As [`UpdateMode::Quantum`], with the coherence additionally rotated by
    /// the position-type coupling: `ρ̃↓↑ ← ρ̃↓↑·e^{iε₂x}` (so `ρ̃↑↓` picks up
    /// `e^{−iε₂x}`). This orientation makes the averaged pointer shift
    /// `+ε₂·Im(A_w)`.
    QuantumDualCoupling,
    /// Bayes on the diagonals, coherence discarded.
    ClassicalDiagonal,
}

/// `N(x) = ρ↑↑P↑(x) + ρ↓↓P↓(x)`, the outcome density before post-selection.
pub fn outcome_density(rho: &QubitDensityMatrix, cfg: &MeterConfig, x: f64) -> f64 {
    Spin::ALL
        .iter()
        .map(|&s| rho.population(s) * cfg.outcome(s).density(x))
        .sum()
}

/// Updates `rho` after observing pointer outcome `x`. Returns a new matrix.
pub fn bayes_update(
    rho: &QubitDensityMatrix,
    cfg: &MeterConfig,
    x: f64,
    mode: UpdateMode,
) -> Result<QubitDensityMatrix> {
    if !x.is_finite() {
        return Err(WvError::Domain {
            what: "x",
            value: x,
        });
    }
    let (p_up, p_down) = (rho.p_up(), rho.p_down());
    let l_up = cfg.outcome(Spin::Up).log_density(x);
    let l_down = cfg.outcome(Spin::Down).log_density(x);
    let shift = match (p_up > 0.0, p_down > 0.0) {
        (true, true) => l_up.max(l_down),
        (true, false) => l_up,
        _ => l_down,
    };
    let w_up = p_up * libm::exp(l_up - shift);
    let w_down = p_down * libm::exp(l_down - shift);
    let norm = w_up + w_down;

    let coh = match mode {
        UpdateMode::ClassicalDiagonal => Complex64::new(0.0, 0.0),
        UpdateMode::Quantum | UpdateMode::QuantumDualCoupling => {
            let scale = libm::exp(0.5 * (l_up + l_down) - shift) / norm;
            let mut c = rho.coherence() * scale;
            if mode == UpdateMode::QuantumDualCoupling {
                c *= Complex64::from_polar(1.0, -cfg.eps2() * x);
            }
            c
        }
    };
    Ok(QubitDensityMatrix::from_parts_unchecked(
        w_up / norm,
        w_down / norm,
        coh,
    ))
}

/// `P_x(φ) = ⟨φ|ρ̃|φ⟩`, clamped to `[0, 1]` against round-off.
pub fn post_select_prob(rho_updated: &QubitDensityMatrix, post: &PureQubitState) -> f64 {
    let (a, b) = (post.up(), post.down());
    let p = a.norm_sqr() * rho_updated.p_up()
        + b.norm_sqr() * rho_updated.p_down()
        + 2.0 * (a.conj() * b * rho_updated.coherence()).re;
    p.clamp(0.0, 1.0)
}
