//! Gaussian pointer model.
//!
//! Spin `σ` shifts the pointer centre to `x̄_σ = ±x0`. The pointer wavepacket
//! is `Φ(x) = (2πD)^{-1/4} exp(−x²/4D)`, so each outcome density is a normal
//! distribution with variance `D`.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_finite, Result, WvError};
use crate::qubit::{aav_weak_value, Amplitude, PureQubitState, Spin};

/// Pointer parameters. `eps2` is the position-type (phase) coupling of the
/// dual-coupling setup; it is zero for the plain `p̂Â` coupling, whose
/// strength `ε₁` is `x0` itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeterConfig {
    x0: f64,
    d: f64,
    eps2: f64,
}

impl MeterConfig {
    /// Plain coupling with shift `x0 ≥ 0` and variance `d > 0`.
    pub fn new(x0: f64, d: f64) -> Result<Self> {
        Self::dual(x0, d, 0.0)
    }

    /// Dual coupling: momentum-type shift `x0 = ε₁` plus phase coupling `eps2`.
    pub fn dual(x0: f64, d: f64, eps2: f64) -> Result<Self> {
        check_finite("x0", x0)?;
        check_finite("D", d)?;
        check_finite("eps2", eps2)?;
        if x0 < 0.0 {
            return Err(WvError::Domain {
                what: "x0",
                value: x0,
            });
        }
        if d <= 0.0 {
            return Err(WvError::Domain {
                what: "D",
                value: d,
            });
        }
        Ok(MeterConfig { x0, d, eps2 })
    }

    /// Config with measurement strength `g = x0²/(4D)` at the given variance.
    pub fn from_strength(g: f64, d: f64) -> Result<Self> {
        check_finite("g", g)?;
        if g < 0.0 {
            return Err(WvError::Domain {
                what: "g",
                value: g,
            });
        }
        Self::new(libm::sqrt(4.0 * d * g), d)
    }

    /// Same config with a different phase coupling.
    pub fn with_eps2(&self, eps2: f64) -> Result<Self> {
        Self::dual(self.x0, self.d, eps2)
    }

    /// Shift magnitude `x0` (also `ε₁`).
    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Variance parameter `D`.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Phase coupling `ε₂`.
    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    /// Outcome centre `x̄_σ`.
    pub fn center(&self, spin: Spin) -> f64 {
        spin.eigenvalue() * self.x0
    }

    /// `g = (x̄↑ − x̄↓)²/(16D)`.
    pub fn strength(&self) -> f64 {
        self.x0 * self.x0 / (4.0 * self.d)
    }

    /// `G = (1 − e^{−2g})/2`.
    pub fn big_g(&self) -> f64 {
        big_g_of(self.strength())
    }

    /// Overlap factor `e^{−(x̄↑−x̄↓)²/8D} = e^{−2g}` multiplying coherences.
    pub fn coherence_factor(&self) -> f64 {
        libm::exp(-2.0 * self.strength())
    }

    /// Coarse-grained strength `λ_eff = P(x > 0 | ↑) − P(x < 0 | ↑) = erf(x0/√(2D))`.
    pub fn lambda_eff(&self) -> f64 {
        libm::erf(self.x0 / libm::sqrt(2.0 * self.d))
    }

    /// Outcome distribution for `spin`.
    pub fn outcome(&self, spin: Spin) -> OutcomeDistribution {
        OutcomeDistribution {
            center: self.center(spin),
            variance: self.d,
        }
    }
}

/// `G(g) = (1 − e^{−2g})/2`, computed without cancellation at small `g`.
pub fn big_g_of(g: f64) -> f64 {
    -0.5 * libm::expm1(-2.0 * g)
}

/// Normal outcome density for one spin branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomeDistribution {
    /// Centre `x̄_σ`.
    pub center: f64,
    /// Variance (`D`).
    pub variance: f64,
}

impl OutcomeDistribution {
    /// Density at `x`.
    pub fn density(&self, x: f64) -> f64 {
        libm::exp(self.log_density(x))
    }

    /// Natural log of the density at `x`.
    pub fn log_density(&self, x: f64) -> f64 {
        let u = x - self.center;
        -u * u / (2.0 * self.variance) - 0.5 * libm::log(2.0 * PI * self.variance)
    }

    /// Probability mass on `x ≥ 0`.
    pub fn prob_nonnegative(&self) -> f64 {
        0.5 * libm::erfc(-self.center / libm::sqrt(2.0 * self.variance))
    }
}

/// `P_σ(x) = (2πD)^{-1/2} exp[−(x − x̄_σ)²/(2D)]`.
pub fn p_sigma(cfg: &MeterConfig, spin: Spin, x: f64) -> f64 {
    cfg.outcome(spin).density(x)
}

/// Real pointer wavefunction `Φ(x) = (2πD)^{-1/4} exp(−x²/4D)`.
pub fn pointer_wavefunction(d: f64, x: f64) -> f64 {
    libm::pow(2.0 * PI * d, -0.25) * libm::exp(-x * x / (4.0 * d))
}

/// Exact post-selected pointer amplitude
/// `⟨φ|⟨x|e^{−i x0 p̂ Â}|ψ⟩|Φ⟩ = conj(a)·α·Φ(x − x0) + conj(b)·β·Φ(x + x0)`.
pub fn exact_meter_amplitude(
    cfg: &MeterConfig,
    pre: &PureQubitState,
    post: &PureQubitState,
    x: f64,
) -> Amplitude {
    Spin::ALL
        .iter()
        .map(|&s| {
            post.amplitude(s).conj()
                * pre.amplitude(s)
                * pointer_wavefunction(cfg.d, x - cfg.center(s))
        })
        .sum()
}

/// Weak-coupling pointer amplitude `⟨φ|ψ⟩·Φ(x − x0·A_w)` with the square in
/// the Gaussian taken in complex arithmetic.
pub fn aav_approx_amplitude(
    cfg: &MeterConfig,
    pre: &PureQubitState,
    post: &PureQubitState,
    x: f64,
) -> Result<Amplitude> {
    let aw = aav_weak_value(pre, post)?;
    let shifted = Complex64::new(x, 0.0) - aw.value() * cfg.x0;
    let gauss = (-(shifted * shifted) / (4.0 * cfg.d)).exp();
    Ok(post.inner(pre) * gauss * libm::pow(2.0 * PI * cfg.d, -0.25))
}

/// Coarse-grained outcome `s = sign(x)`; `x = 0` maps to [`CoarseOutcome::Plus`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoarseOutcome {
    /// `s = +1`, outcomes `x ≥ 0`.
    Plus,
    /// `s = −1`, outcomes `x < 0`.
    Minus,
}

impl CoarseOutcome {
    /// Both outcomes, `+1` first.
    pub const ALL: [CoarseOutcome; 2] = [CoarseOutcome::Plus, CoarseOutcome::Minus];

    /// `s` as ±1.
    pub fn sign(self) -> f64 {
        match self {
            CoarseOutcome::Plus => 1.0,
            CoarseOutcome::Minus => -1.0,
        }
    }

    /// Coarse-grains a continuous outcome.
    pub fn of(x: f64) -> CoarseOutcome {
        if x >= 0.0 {
            CoarseOutcome::Plus
        } else {
            CoarseOutcome::Minus
        }
    }
}

/// Source of the coarse-grained strength λ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strength {
    /// Derived from a Gaussian pointer via [`MeterConfig::lambda_eff`].
    Meter(MeterConfig),
    /// Direct override, as in the abstract coin-toss model.
    Lambda(f64),
}

impl Strength {
    /// λ in `[0, 1]`.
    pub fn lambda(&self) -> f64 {
        match self {
            Strength::Meter(cfg) => cfg.lambda_eff(),
            Strength::Lambda(l) => *l,
        }
    }
}

impl From<MeterConfig> for Strength {
    fn from(cfg: MeterConfig) -> Self {
        Strength::Meter(cfg)
    }
}

/// `P_σ(s) = (1 + s·σ·λ)/2`.
pub fn coarse_grain(strength: Strength, spin: Spin, s: CoarseOutcome) -> f64 {
    0.5 * (1.0 + s.sign() * spin.eigenvalue() * strength.lambda())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::density_of;

    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

    fn unit() -> MeterConfig {
        MeterConfig::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn outcome_density_examples() {
        let cfg = unit();
        assert!((p_sigma(&cfg, Spin::Up, 1.0) - INV_SQRT_2PI).abs() < 1e-15);
        assert!((p_sigma(&cfg, Spin::Down, -1.0) - INV_SQRT_2PI).abs() < 1e-15);
        let tail = p_sigma(&cfg, Spin::Up, -1.0);
        assert!((tail - INV_SQRT_2PI * libm::exp(-2.0)).abs() < 1e-15);
        assert!((tail - 0.053991).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        assert!(MeterConfig::new(-1.0, 1.0).is_err());
        assert!(MeterConfig::new(1.0, 0.0).is_err());
        assert!(MeterConfig::new(f64::NAN, 1.0).is_err());
        assert!(MeterConfig::dual(1.0, 1.0, f64::INFINITY).is_err());
        let cfg = MeterConfig::from_strength(0.25, 2.0).unwrap();
        assert!((cfg.strength() - 0.25).abs() < 1e-15);
        assert!((cfg.x0() - libm::sqrt(2.0)).abs() < 1e-15);
    }

    #[test]
    fn big_g_limits() {
        assert_eq!(big_g_of(0.0), 0.0);
        assert!((big_g_of(0.01) - 0.5 * (1.0 - libm::exp(-0.02))).abs() < 1e-13 * big_g_of(0.01));
        assert!((big_g_of(0.01) - 0.00990066).abs() < 1e-8);
        assert!((big_g_of(50.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exact_amplitude_single_branch() {
        let cfg = MeterConfig::new(0.7, 1.3).unwrap();
        for x in [-2.0, 0.0, 0.4, 3.0] {
            let a = exact_meter_amplitude(&cfg, &PureQubitState::UP, &PureQubitState::UP, x);
            assert!((a - pointer_wavefunction(1.3, x - 0.7)).norm() < 1e-16);
        }
    }

    #[test]
    fn exact_amplitude_odd_cancellation() {
        let cfg = MeterConfig::new(0.7, 1.3).unwrap();
        let pre = PureQubitState::real(1.0, 1.0).unwrap();
        let post = PureQubitState::real(1.0, -1.0).unwrap();
        assert!(exact_meter_amplitude(&cfg, &pre, &post, 0.0).norm() < 1e-16);
    }

    #[test]
    fn approx_amplitude_real_weak_value_is_shifted_gaussian() {
        let cfg = MeterConfig::new(0.3, 1.0).unwrap();
        let pre = PureQubitState::real(1.0, 1.0).unwrap();
        let post = PureQubitState::UP;
        for x in [-1.0, 0.0, 0.3, 2.0] {
            let approx = aav_approx_amplitude(&cfg, &pre, &post, x).unwrap();
            let expect = post.inner(&pre) * pointer_wavefunction(1.0, x - 0.3);
            assert!((approx - expect).norm() < 1e-15);
        }
        let orth = PureQubitState::real(1.0, -1.0).unwrap();
        assert!(aav_approx_amplitude(&cfg, &pre, &orth, 0.0).is_err());
    }

    #[test]
    fn coarse_grain_examples() {
        let flat = MeterConfig::new(0.0, 1.0).unwrap();
        for spin in Spin::ALL {
            for s in CoarseOutcome::ALL {
                assert_eq!(coarse_grain(flat.into(), spin, s), 0.5);
            }
        }
        let p = coarse_grain(Strength::Lambda(0.3), Spin::Up, CoarseOutcome::Plus);
        assert!((p - 0.65).abs() < 1e-15);
        let cfg = MeterConfig::new(0.8, 0.6).unwrap();
        for spin in Spin::ALL {
            let total: f64 = CoarseOutcome::ALL
                .iter()
                .map(|&s| coarse_grain(cfg.into(), spin, s))
                .sum();
            assert!((total - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn lambda_eff_matches_region_masses() {
        let cfg = MeterConfig::new(0.8, 0.6).unwrap();
        let up = cfg.outcome(Spin::Up);
        let direct = up.prob_nonnegative() - (1.0 - up.prob_nonnegative());
        assert!((direct - cfg.lambda_eff()).abs() < 1e-15);
        let p_plus = coarse_grain(cfg.into(), Spin::Up, CoarseOutcome::Plus);
        assert!((p_plus - up.prob_nonnegative()).abs() < 1e-15);
    }

    #[test]
    fn lambda_eff_is_monotone_and_bounded() {
        let mut last = -1.0;
        for k in 0..200 {
            let cfg = MeterConfig::new(0.05 * k as f64, 1.0).unwrap();
            let l = cfg.lambda_eff();
            assert!((0.0..=1.0).contains(&l));
            assert!(l >= last);
            last = l;
        }
        assert_eq!(MeterConfig::new(0.0, 1.0).unwrap().lambda_eff(), 0.0);
    }

    #[test]
    fn mean_coarse_outcome_is_lambda_times_expectation() {
        let psi = crate::qubit::make_state(1.2, 0.5).unwrap();
        let rho = density_of(&psi);
        let strength = Strength::Lambda(0.37);
        let mean: f64 = CoarseOutcome::ALL
            .iter()
            .map(|&s| {
                let p: f64 = Spin::ALL
                    .iter()
                    .map(|&spin| rho.population(spin) * coarse_grain(strength, spin, s))
                    .sum();
                s.sign() * p
            })
            .sum();
        assert!((mean - 0.37 * psi.expectation_z()).abs() < 1e-14);
    }
}
