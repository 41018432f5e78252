use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T, E = WvError> = core::result::Result<T, E>;

/// Everything that can go wrong while building configurations or evaluating
/// weak-value quantities.
#[derive(Clone, Debug, PartialEq)]
pub enum WvError {
    /// A numeric argument is outside its allowed domain (or not finite).
    Domain {
        /// Parameter name.
        what: &'static str,
        /// Offending value.
        value: f64,
    },
    /// `|⟨φ|ψ⟩|²` fell below the overlap floor; the weak value diverges.
    OverlapTooSmall {
        /// Measured `|⟨φ|ψ⟩|²`.
        overlap: f64,
        /// Floor that was applied.
        floor: f64,
    },
    /// The joint post-selection probability `M₂` vanished.
    ZeroPpsProbability {
        /// Measured `M₂`.
        m2: f64,
    },
    /// A classical (diagonal-only) routine received a coherent density matrix.
    NonDiagonalInput {
        /// Magnitude of the offending coherence.
        coherence: f64,
    },
    /// Coin-toss disturbance outside `[0, 1 − λ]`.
    InvalidDisturbance {
        /// Disturbance δ.
        delta: f64,
        /// Strength λ.
        lambda: f64,
    },
    /// Adaptive quadrature hit its subdivision limit before meeting tolerance.
    QuadratureNotConverged {
        /// Best estimate at the time of giving up.
        estimate: f64,
        /// Accumulated error estimate.
        error: f64,
    },
    /// A Monte Carlo run accepted no trials at all.
    NoAcceptedSamples {
        /// Trials attempted.
        n_total: u64,
    },
}

impl fmt::Display for WvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            WvError::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            WvError::OverlapTooSmall { overlap, floor } => {
                write!(
                    f,
                    "post-selection overlap {overlap:e} below floor {floor:e}"
                )
            }
            WvError::ZeroPpsProbability { m2 } => {
                write!(f, "joint post-selection probability vanished (M2 = {m2:e})")
            }
            WvError::NonDiagonalInput { coherence } => {
                write!(
                    f,
                    "classical average needs diagonal input, |coherence| = {coherence:e}"
                )
            }
            WvError::InvalidDisturbance { delta, lambda } => {
                write!(
                    f,
                    "disturbance {delta} must lie in [0, 1 - lambda] with lambda = {lambda}"
                )
            }
            WvError::QuadratureNotConverged { estimate, error } => {
                write!(f, "quadrature did not converge: {estimate:e} +/- {error:e}")
            }
            WvError::NoAcceptedSamples { n_total } => {
                write!(f, "no trial out of {n_total} passed post-selection")
            }
        }
    }
}

impl core::error::Error for WvError {}

impl WvError {
    /// Variant name, stable across releases; used as a machine-readable status.
    pub fn kind(&self) -> &'static str {
        match self {
            WvError::Domain { .. } => "Domain",
            WvError::OverlapTooSmall { .. } => "OverlapTooSmall",
            WvError::ZeroPpsProbability { .. } => "ZeroPpsProbability",
            WvError::NonDiagonalInput { .. } => "NonDiagonalInput",
            WvError::InvalidDisturbance { .. } => "InvalidDisturbance",
            WvError::QuadratureNotConverged { .. } => "QuadratureNotConverged",
            WvError::NoAcceptedSamples { .. } => "NoAcceptedSamples",
        }
    }
}

pub(crate) fn check_finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(WvError::Domain { what, value })
    }
}
