//! Qubit states and the weak value of `σ_z`.
//!
//! The observable is fixed to `Â = σ_z` with `|↑⟩ ↦ +1` and `|↓⟩ ↦ −1`.
//! Global phases are never canonicalized; every derived quantity is
//! phase-invariant.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_finite, Result, WvError};

/// Complex amplitude type used for state coefficients and weak values.
pub type Amplitude = Complex64;

/// Normalization tolerance for [`PureQubitState::new`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Default floor on `|⟨φ|ψ⟩|²` below which the weak value is treated as divergent.
pub const DEFAULT_OVERLAP_FLOOR: f64 = 1e-14;

/// Tolerance used to classify a density matrix as pure.
pub const PURITY_TOLERANCE: f64 = 1e-10;

/// Slack allowed on the positivity bound `|ρ↑↓|² ≤ ρ↑↑ρ↓↓`.
pub const POSITIVITY_SLACK: f64 = 1e-12;

/// Eigenbasis label of `σ_z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    /// `|↑⟩`, eigenvalue +1.
    Up,
    /// `|↓⟩`, eigenvalue −1.
    Down,
}

impl Spin {
    /// Both labels, up first.
    pub const ALL: [Spin; 2] = [Spin::Up, Spin::Down];

    /// Eigenvalue of `σ_z` on this basis state.
    pub fn eigenvalue(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }
}

/// Normalized pure state `up·|↑⟩ + down·|↓⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureQubitState {
    up: Amplitude,
    down: Amplitude,
}

impl PureQubitState {
    /// `|↑⟩`.
    pub const UP: PureQubitState = PureQubitState {
        up: Complex64::new(1.0, 0.0),
        down: Complex64::new(0.0, 0.0),
    };

    /// `|↓⟩`.
    pub const DOWN: PureQubitState = PureQubitState {
        up: Complex64::new(0.0, 0.0),
        down: Complex64::new(1.0, 0.0),
    };

    /// Builds a state from amplitudes that must already be normalized to
    /// within [`NORM_TOLERANCE`].
    pub fn new(up: Amplitude, down: Amplitude) -> Result<Self> {
        let norm = finite_norm_sqr(up, down)?;
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(WvError::Domain {
                what: "state norm",
                value: norm,
            });
        }
        Ok(PureQubitState { up, down })
    }

    /// Builds a state by rescaling arbitrary non-zero amplitudes.
    pub fn normalized(up: Amplitude, down: Amplitude) -> Result<Self> {
        let norm = finite_norm_sqr(up, down)?;
        if norm <= 0.0 {
            return Err(WvError::Domain {
                what: "state norm",
                value: norm,
            });
        }
        let scale = 1.0 / libm::sqrt(norm);
        Ok(PureQubitState {
            up: up * scale,
            down: down * scale,
        })
    }

    /// Real-coefficient state `α|↑⟩ + β|↓⟩`, rescaled to unit norm.
    pub fn real(alpha: f64, beta: f64) -> Result<Self> {
        Self::normalized(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    /// Coefficient on `|↑⟩`.
    pub fn up(&self) -> Amplitude {
        self.up
    }

    /// Coefficient on `|↓⟩`.
    pub fn down(&self) -> Amplitude {
        self.down
    }

    /// Coefficient on the given basis state.
    pub fn amplitude(&self, spin: Spin) -> Amplitude {
        match spin {
            Spin::Up => self.up,
            Spin::Down => self.down,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureQubitState) -> Amplitude {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    /// `⟨self|σ_z|other⟩`.
    pub fn inner_sigma_z(&self, other: &PureQubitState) -> Amplitude {
        self.up.conj() * other.up - self.down.conj() * other.down
    }

    /// `⟨ψ|σ_z|ψ⟩ = |up|² − |down|²`.
    pub fn expectation_z(&self) -> f64 {
        self.up.norm_sqr() - self.down.norm_sqr()
    }

    /// Multiplies both amplitudes by `e^{iθ}`.
    pub fn with_global_phase(&self, theta: f64) -> PureQubitState {
        let phase = Complex64::from_polar(1.0, theta);
        PureQubitState {
            up: self.up * phase,
            down: self.down * phase,
        }
    }
}

fn finite_norm_sqr(up: Amplitude, down: Amplitude) -> Result<f64> {
    for v in [up.re, up.im, down.re, down.im] {
        check_finite("amplitude", v)?;
    }
    Ok(up.norm_sqr() + down.norm_sqr())
}

/// Bloch-angle constructor: `(cos(θ/2), e^{iφ} sin(θ/2))`.
///
/// `theta` must lie in `[0, π]` and `phi` in `[−π, π]`.
pub fn make_state(theta: f64, phi: f64) -> Result<PureQubitState> {
    if !(0.0..=PI).contains(&theta) {
        return Err(WvError::Domain {
            what: "theta",
            value: theta,
        });
    }
    if !(-PI..=PI).contains(&phi) {
        return Err(WvError::Domain {
            what: "phi",
            value: phi,
        });
    }
    let half = 0.5 * theta;
    Ok(PureQubitState {
        up: Complex64::new(libm::cos(half), 0.0),
        down: Complex64::from_polar(libm::sin(half), phi),
    })
}

/// 2×2 density matrix `(ρ↑↑, ρ↑↓)` with `ρ↓↑ = conj(ρ↑↓)`.
///
/// `ρ↓↓ = 1 − ρ↑↑` up to rounding; it is stored separately so that a
/// population near zero keeps full relative precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitDensityMatrix {
    p_up: f64,
    p_down: f64,
    coh: Amplitude,
}

impl QubitDensityMatrix {
    /// `I/2`.
    pub const MAXIMALLY_MIXED: QubitDensityMatrix = QubitDensityMatrix {
        p_up: 0.5,
        p_down: 0.5,
        coh: Complex64::new(0.0, 0.0),
    };

    /// Validates `0 ≤ p_up ≤ 1` and positivity `|coh|² ≤ p_up(1 − p_up)`.
    pub fn new(p_up: f64, coh: Amplitude) -> Result<Self> {
        check_finite("p_up", p_up)?;
        check_finite("coherence", coh.re)?;
        check_finite("coherence", coh.im)?;
        if !(0.0..=1.0).contains(&p_up) {
            return Err(WvError::Domain {
                what: "p_up",
                value: p_up,
            });
        }
        if coh.norm_sqr() > p_up * (1.0 - p_up) + POSITIVITY_SLACK {
            return Err(WvError::Domain {
                what: "coherence (positivity)",
                value: coh.norm(),
            });
        }
        Ok(QubitDensityMatrix {
            p_up,
            p_down: 1.0 - p_up,
            coh,
        })
    }

    /// Diagonal (classical) state `diag(p_up, 1 − p_up)`.
    pub fn diagonal(p_up: f64) -> Result<Self> {
        Self::new(p_up, Complex64::new(0.0, 0.0))
    }

    // Callers guarantee the invariants (trace-1 updates of valid matrices).
    pub(crate) fn from_parts_unchecked(p_up: f64, p_down: f64, coh: Amplitude) -> Self {
        QubitDensityMatrix { p_up, p_down, coh }
    }

    /// `ρ↑↑`.
    pub fn p_up(&self) -> f64 {
        self.p_up
    }

    /// `ρ↓↓`.
    pub fn p_down(&self) -> f64 {
        self.p_down
    }

    /// Diagonal element for `spin`.
    pub fn population(&self, spin: Spin) -> f64 {
        match spin {
            Spin::Up => self.p_up,
            Spin::Down => self.p_down,
        }
    }

    /// `ρ↑↓`.
    pub fn coherence(&self) -> Amplitude {
        self.coh
    }

    /// True when `|ρ↑↓|² = ρ↑↑ρ↓↓` within [`PURITY_TOLERANCE`].
    pub fn is_pure(&self) -> bool {
        (self.coh.norm_sqr() - self.p_up * self.p_down).abs() <= PURITY_TOLERANCE
    }

    /// True when the off-diagonal element is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        self.coh.re == 0.0 && self.coh.im == 0.0
    }

    /// Copy with the coherence dropped.
    pub fn dephased(&self) -> QubitDensityMatrix {
        QubitDensityMatrix {
            coh: Complex64::new(0.0, 0.0),
            ..*self
        }
    }

    /// `Tr[ρ σ_z]`.
    pub fn expectation_z(&self) -> f64 {
        self.p_up - self.p_down
    }

    /// `Tr[self · other]`.
    pub fn overlap(&self, other: &QubitDensityMatrix) -> f64 {
        self.p_up * other.p_up
            + self.p_down() * other.p_down()
            + 2.0 * (self.coh.conj() * other.coh).re
    }
}

/// `ρ = |ψ⟩⟨ψ|`: `ρ↑↑ = |up|²`, `ρ↓↓ = |down|²`, `ρ↑↓ = up·conj(down)`,
/// rescaled by the (within 1e-12 of unit) norm so the trace is 1.
pub fn density_of(state: &PureQubitState) -> QubitDensityMatrix {
    let (up, down) = (state.up.norm_sqr(), state.down.norm_sqr());
    let norm = up + down;
    QubitDensityMatrix {
        p_up: up / norm,
        p_down: down / norm,
        coh: state.up * state.down.conj() / norm,
    }
}

/// Weak value `⟨φ|σ_z|ψ⟩/⟨φ|ψ⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakValue(Amplitude);

impl WeakValue {
    /// The complex value.
    pub fn value(&self) -> Amplitude {
        self.0
    }

    /// `Re(A_w)`.
    pub fn re(&self) -> f64 {
        self.0.re
    }

    /// `Im(A_w)`.
    pub fn im(&self) -> f64 {
        self.0.im
    }

    /// `|A_w|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }

    /// True when `Re(A_w)` lies outside the eigenvalue range `[−1, 1]`.
    pub fn is_anomalous(&self) -> bool {
        self.0.re.abs() > 1.0
    }
}

/// Weak value with the default overlap floor of `1e-14`.
pub fn aav_weak_value(pre: &PureQubitState, post: &PureQubitState) -> Result<WeakValue> {
    aav_weak_value_with_floor(pre, post, DEFAULT_OVERLAP_FLOOR)
}

/// Weak value, failing with [`WvError::OverlapTooSmall`] when
/// `|⟨post|pre⟩|² ≤ floor`.
pub fn aav_weak_value_with_floor(
    pre: &PureQubitState,
    post: &PureQubitState,
    floor: f64,
) -> Result<WeakValue> {
    let overlap = post.inner(pre);
    let prob = overlap.norm_sqr();
    if prob <= floor {
        return Err(WvError::OverlapTooSmall {
            overlap: prob,
            floor,
        });
    }
    Ok(WeakValue(post.inner_sigma_z(pre) / overlap))
}
