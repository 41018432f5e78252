//! Pre/post-selected (PPS) conditional averages of the pointer outcome.
//!
//! With joint density `N(x)·Tr[ρ_φ ρ̃(x)]`, the moments
//! `M₁ = ∫x·N·Tr[ρ_φρ̃]` and `M₂ = ∫N·Tr[ρ_φρ̃]` reduce to Gaussian integrals.
//! For pure states and centres `±x0` the average collapses to
//! `x0·Re(A_w)/(1 + G(|A_w|² − 1))`.
//!
//! Every closed form here has an independent check in
//! [`quadrature_pps_oracle`], which integrates the Bayesian update directly.

use num_complex::Complex64;

use crate::bayes::{bayes_update, outcome_density, UpdateMode};
use crate::error::{Result, WvError};
use crate::meter::{big_g_of, MeterConfig};
use crate::quadrature::{integrate, Tolerance};
use crate::qubit::{aav_weak_value, density_of, PureQubitState, QubitDensityMatrix, WeakValue};

/// Underflow guard on `M₂`.
pub const M2_FLOOR: f64 = 1e-300;

/// Half-width of the quadrature window in units of `√D`, beyond `x0`.
pub const QUADRATURE_WINDOW_SIGMAS: f64 = 12.0;

/// Relative tolerance requested from the quadrature oracle.
pub const QUADRATURE_REL_TOL: f64 = 1e-10;

const QUADRATURE_MAX_PANELS: usize = 4000;

/// One PPS configuration evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PpsResult {
    /// `M₁` (length units).
    pub m1: f64,
    /// `M₂`, the joint post-selection probability.
    pub m2: f64,
    /// Conditional average `⟨x⟩` (length units).
    pub avg: f64,
    /// Weak value, when the route that produced `avg` used one.
    pub aav: Option<WeakValue>,
    /// Measurement strength `g`.
    pub g: f64,
    /// `G`; for the dual coupling this is the effective value built from the
    /// full coherence factor.
    pub big_g: f64,
    /// Shift `x0` used for the dimensionless average.
    pub x0: f64,
}

impl PpsResult {
    /// `avg/x0`, or `None` when `x0 = 0`.
    pub fn avg_over_x0(&self) -> Option<f64> {
        (self.x0 > 0.0).then(|| self.avg / self.x0)
    }
}

/// `(M₁, M₂)` for arbitrary centres `(x̄↑, x̄↓)`, variance `d` and phase
/// coupling `eps2`.
///
/// `√(P↑P↓)` is a Gaussian of variance `D` centred at `m = (x̄↑ + x̄↓)/2`,
/// scaled by `e^{−(x̄↑−x̄↓)²/8D}`. The phase `e^{ikx}` (`k = −ε₂`) carried by
/// `ρ̃↑↓` contributes the characteristic function `e^{ikm − k²D/2}` and, for
/// the first moment, the extra factor `m + ikD`.
pub fn pps_moments(
    rho: &QubitDensityMatrix,
    rho_post: &QubitDensityMatrix,
    centers: (f64, f64),
    d: f64,
    eps2: f64,
) -> (f64, f64) {
    let (x_up, x_down) = centers;
    let up = rho_post.p_up() * rho.p_up();
    let down = rho_post.p_down() * rho.p_down();
    let mid = 0.5 * (x_up + x_down);
    let sep = x_up - x_down;
    let k = -eps2;
    let damping = libm::exp(-sep * sep / (8.0 * d) - 0.5 * k * k * d);
    let z = rho_post.coherence().conj() * rho.coherence() * Complex64::from_polar(damping, k * mid);
    let m1 = up * x_up + down * x_down + 2.0 * mid * z.re - 2.0 * k * d * z.im;
    let m2 = up + down + 2.0 * z.re;
    (m1, m2)
}

fn checked_m2(m2: f64) -> Result<f64> {
    if m2 <= M2_FLOOR {
        Err(WvError::ZeroPpsProbability { m2 })
    } else {
        Ok(m2)
    }
}

/// Closed-form `M₁`, `M₂` and `M₁/M₂` for the plain `p̂Â` coupling with
/// centres `±x0` (the phase coupling `eps2` is ignored here).
pub fn pps_average_closed(
    rho: &QubitDensityMatrix,
    rho_post: &QubitDensityMatrix,
    cfg: &MeterConfig,
) -> Result<PpsResult> {
    let (m1, m2) = pps_moments(rho, rho_post, (cfg.x0(), -cfg.x0()), cfg.d(), 0.0);
    let m2 = checked_m2(m2)?;
    Ok(PpsResult {
        m1,
        m2,
        avg: m1 / m2,
        aav: None,
        g: cfg.strength(),
        big_g: cfg.big_g(),
        x0: cfg.x0(),
    })
}

/// `Re(A_w)/(1 + G(|A_w|² − 1))`, the average in units of `x0`.
pub fn finite_strength_ratio(aw: &WeakValue, big_g: f64) -> f64 {
    aw.re() / (1.0 + big_g * (aw.norm_sqr() - 1.0))
}

/// Average expressed through the weak value.
///
/// At orthogonal pre/post-selection the weak-value form is an indeterminate
/// ratio; for `g > 0` the closed moments are used instead and give the
/// vanishing average. Only `g = 0` with an orthogonal pair fails.
pub fn pps_average_compact(
    pre: &PureQubitState,
    post: &PureQubitState,
    cfg: &MeterConfig,
) -> Result<PpsResult> {
    let rho = density_of(pre);
    let rho_post = density_of(post);
    let (m1, m2) = pps_moments(&rho, &rho_post, (cfg.x0(), -cfg.x0()), cfg.d(), 0.0);
    let g = cfg.strength();
    let big_g = cfg.big_g();
    match aav_weak_value(pre, post) {
        Ok(aw) => Ok(PpsResult {
            m1,
            m2,
            avg: cfg.x0() * finite_strength_ratio(&aw, big_g),
            aav: Some(aw),
            g,
            big_g,
            x0: cfg.x0(),
        }),
        Err(err @ WvError::OverlapTooSmall { .. }) if g == 0.0 => Err(err),
        Err(WvError::OverlapTooSmall { .. }) => {
            let m2 = checked_m2(m2)?;
            Ok(PpsResult {
                m1,
                m2,
                avg: m1 / m2,
                aav: None,
                g,
                big_g,
                x0: cfg.x0(),
            })
        }
        Err(err) => Err(err),
    }
}

/// Average under the dual coupling `λ₁p̂Â + λ₂x̂Â`, exact in `g` and `ε₂`:
///
/// `⟨x⟩ = [ε₁Re(A_w) + ε₂·D·c·Im(A_w)] / [1 + G_c(|A_w|² − 1)]`
///
/// with `c = e^{−2g − ε₂²D/2}` and `G_c = (1 − c)/2`. To leading order in
/// `ε₂²D` (and with `D = 1`) this is [`dual_leading_order`].
pub fn pps_average_dual(
    pre: &PureQubitState,
    post: &PureQubitState,
    cfg: &MeterConfig,
) -> Result<PpsResult> {
    let rho = density_of(pre);
    let rho_post = density_of(post);
    let (eps1, eps2, d) = (cfg.x0(), cfg.eps2(), cfg.d());
    let (m1, m2) = pps_moments(&rho, &rho_post, (eps1, -eps1), d, eps2);
    let g = cfg.strength();
    let exponent = 2.0 * g + 0.5 * eps2 * eps2 * d;
    let damping = libm::exp(-exponent);
    let big_g = -0.5 * libm::expm1(-exponent);
    match aav_weak_value(pre, post) {
        Ok(aw) => {
            let numer = eps1 * aw.re() + eps2 * d * damping * aw.im();
            Ok(PpsResult {
                m1,
                m2,
                avg: numer / (1.0 + big_g * (aw.norm_sqr() - 1.0)),
                aav: Some(aw),
                g,
                big_g,
                x0: eps1,
            })
        }
        Err(err @ WvError::OverlapTooSmall { .. }) if exponent == 0.0 => Err(err),
        Err(WvError::OverlapTooSmall { .. }) => {
            let m2 = checked_m2(m2)?;
            Ok(PpsResult {
                m1,
                m2,
                avg: m1 / m2,
                aav: None,
                g,
                big_g,
                x0: eps1,
            })
        }
        Err(err) => Err(err),
    }
}

/// Leading-order dual-coupling average
/// `[ε₁Re(A_w) + ε₂Im(A_w)]/[1 + G(|A_w|² − 1)]`, in units where `D = 1`.
pub fn dual_leading_order(aw: &WeakValue, eps1: f64, eps2: f64, big_g: f64) -> f64 {
    (eps1 * aw.re() + eps2 * aw.im()) / (1.0 + big_g * (aw.norm_sqr() - 1.0))
}

/// Change of the post-selection probability caused by the measurement,
/// `δM₂ = 2Re(ρ_φ↑↓*ρ↑↓)(e^{−2g} − 1)`, so that `M₂ = |⟨φ|ψ⟩|² + δM₂`.
pub fn delta_m2(rho: &QubitDensityMatrix, rho_post: &QubitDensityMatrix, cfg: &MeterConfig) -> f64 {
    let w = rho_post.coherence().conj() * rho.coherence();
    2.0 * w.re * libm::expm1(-2.0 * cfg.strength())
}

/// Classical (diagonal) average. Both inputs must have zero coherence; the
/// result is a weighted mean of `±x0` and so never exceeds `x0` in magnitude.
pub fn pps_average_classical(
    rho_diag: &QubitDensityMatrix,
    rho_post_diag: &QubitDensityMatrix,
    cfg: &MeterConfig,
) -> Result<PpsResult> {
    for m in [rho_diag, rho_post_diag] {
        if !m.is_diagonal() {
            return Err(WvError::NonDiagonalInput {
                coherence: m.coherence().norm(),
            });
        }
    }
    let up = rho_post_diag.p_up() * rho_diag.p_up();
    let down = rho_post_diag.p_down() * rho_diag.p_down();
    let m2 = checked_m2(up + down)?;
    let m1 = (up - down) * cfg.x0();
    Ok(PpsResult {
        m1,
        m2,
        avg: m1 / m2,
        aav: None,
        g: cfg.strength(),
        big_g: big_g_of(cfg.strength()),
        x0: cfg.x0(),
    })
}

/// `(M₁, M₂)` by adaptive quadrature of `x^k·N(x)·Tr[ρ_φ ρ̃(x)]` over
/// `|x| ≤ x0 + 12√D`, with `ρ̃(x)` from [`bayes_update`] in the given mode.
pub fn quadrature_moments(
    rho: &QubitDensityMatrix,
    rho_post: &QubitDensityMatrix,
    cfg: &MeterConfig,
    mode: UpdateMode,
) -> Result<(f64, f64)> {
    let half_width = cfg.x0() + QUADRATURE_WINDOW_SIGMAS * libm::sqrt(cfg.d());
    let joint = |x: f64| -> f64 {
        let n = outcome_density(rho, cfg, x);
        if n == 0.0 {
            return 0.0;
        }
        // Finite x never fails.
        match bayes_update(rho, cfg, x, mode) {
            Ok(updated) => n * rho_post.overlap(&updated),
            Err(_) => f64::NAN,
        }
    };
    let tol = Tolerance::relative(QUADRATURE_REL_TOL);
    let m2 = integrate(joint, -half_width, half_width, tol, QUADRATURE_MAX_PANELS)?;
    let m1 = integrate(
        |x| x * joint(x),
        -half_width,
        half_width,
        tol,
        QUADRATURE_MAX_PANELS,
    )?;
    Ok((m1.value, m2.value))
}

/// PPS average `M₁/M₂` evaluated by quadrature; the independent oracle for
/// the closed forms in this module.
pub fn quadrature_pps_oracle(
    rho: &QubitDensityMatrix,
    rho_post: &QubitDensityMatrix,
    cfg: &MeterConfig,
    mode: UpdateMode,
) -> Result<f64> {
    let (m1, m2) = quadrature_moments(rho, rho_post, cfg, mode)?;
    Ok(m1 / checked_m2(m2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::make_state;
    use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn anomalous_pair() -> (PureQubitState, PureQubitState) {
        let chi = FRAC_PI_4 - 0.05;
        (
            PureQubitState::real(1.0, 1.0).unwrap(),
            PureQubitState::real(libm::cos(chi), -libm::sin(chi)).unwrap(),
        )
    }

    #[test]
    fn both_selections_pin_spin_up() {
        let cfg = MeterConfig::new(1.0, 1.0).unwrap();
        let up = density_of(&PureQubitState::UP);
        let r = pps_average_closed(&up, &up, &cfg).unwrap();
        assert!((r.avg - 1.0).abs() < 1e-15);
        assert!((r.avg * r.m2 - r.m1).abs() < 1e-15);
    }

    #[test]
    fn unit_weak_value_gives_x0_at_any_strength() {
        let pre = PureQubitState::real(1.0, 1.0).unwrap();
        for g in [0.0, 1e-3, 0.5, 4.0] {
            let cfg = MeterConfig::from_strength(g, 1.0).unwrap();
            if g > 0.0 {
                let closed =
                    pps_average_closed(&density_of(&pre), &density_of(&PureQubitState::UP), &cfg)
                        .unwrap();
                assert!((closed.avg_over_x0().unwrap() - 1.0).abs() < 1e-14);
                let compact = pps_average_compact(&pre, &PureQubitState::UP, &cfg).unwrap();
                assert!((compact.avg_over_x0().unwrap() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn anomalous_fixture_at_g_0_01() {
        // χ-construction scaled so that A_w = 20 exactly: (α, β) = (1, 1)/√2,
        // post ∝ (21, −19) gives (21 + 19)/(21 − 19) = 20.
        let pre = PureQubitState::real(1.0, 1.0).unwrap();
        let post = PureQubitState::real(21.0, -19.0).unwrap();
        let cfg = MeterConfig::from_strength(0.01, 1.0).unwrap();
        let compact = pps_average_compact(&pre, &post, &cfg).unwrap();
        assert!((compact.aav.unwrap().re() - 20.0).abs() < 1e-12);
        let g_big = 0.5 * (1.0 - libm::exp(-0.02));
        let expect = 20.0 / (1.0 + g_big * 399.0);
        assert!((compact.avg_over_x0().unwrap() - expect).abs() < 1e-12);
        assert!((expect - 4.040106).abs() < 1e-6);
        let closed = pps_average_closed(&density_of(&pre), &density_of(&post), &cfg).unwrap();
        assert!((closed.avg - compact.avg).abs() < 1e-12);
    }

    #[test]
    fn cot_fixture_at_g_0_05() {
        let (pre, post) = anomalous_pair();
        let cfg = MeterConfig::from_strength(0.05, 1.0).unwrap();
        let r = pps_average_compact(&pre, &post, &cfg).unwrap();
        let aw = 1.0 / libm::tan(0.05);
        let g_big = 0.5 * (1.0 - libm::exp(-0.1));
        assert!((r.big_g - g_big).abs() < 1e-16);
        assert!((g_big - 0.0475813).abs() < 1e-7);
        let expect = aw / (1.0 + g_big * (aw * aw - 1.0));
        assert!((r.avg_over_x0().unwrap() - expect).abs() < 1e-12);
        assert!((expect - 1.001509).abs() < 1e-6);
    }

    #[test]
    fn weak_limit_returns_real_part() {
        let pre = make_state(1.0, 0.4).unwrap();
        let post = make_state(2.0, -0.9).unwrap();
        let aw = aav_weak_value(&pre, &post).unwrap();
        let cfg = MeterConfig::from_strength(1e-12, 1.0).unwrap();
        let r = pps_average_compact(&pre, &post, &cfg).unwrap();
        assert!((r.avg_over_x0().unwrap() - aw.re()).abs() < 1e-9);
    }

    #[test]
    fn orthogonal_pair_vanishes_for_finite_strength() {
        let pre = PureQubitState::real(1.0, 1.0).unwrap();
        let post = PureQubitState::real(1.0, -1.0).unwrap();
        let cfg = MeterConfig::from_strength(0.1, 1.0).unwrap();
        let r = pps_average_compact(&pre, &post, &cfg).unwrap();
        assert!(r.avg.abs() < 1e-12, "{}", r.avg);
        assert!(r.m2 > 0.0);
        let dm2 = delta_m2(&density_of(&pre), &density_of(&post), &cfg);
        assert!((r.m2 - dm2).abs() < 1e-15);

        let zero = MeterConfig::new(0.0, 1.0).unwrap();
        assert!(matches!(
            pps_average_compact(&pre, &post, &zero),
            Err(WvError::OverlapTooSmall { .. })
        ));
        let (up, down) = (
            density_of(&PureQubitState::UP),
            density_of(&PureQubitState::DOWN),
        );
        assert!(matches!(
            pps_average_closed(&up, &down, &zero),
            Err(WvError::ZeroPpsProbability { .. })
        ));
    }

    #[test]
    fn delta_m2_vanishes_without_coherence_or_strength() {
        let pre = make_state(1.0, 0.4).unwrap();
        let post = make_state(2.0, -0.9).unwrap();
        let zero = MeterConfig::new(0.0, 1.0).unwrap();
        assert_eq!(delta_m2(&density_of(&pre), &density_of(&post), &zero), 0.0);
        let cfg = MeterConfig::new(1.0, 1.0).unwrap();
        assert_eq!(
            delta_m2(&density_of(&PureQubitState::UP), &density_of(&post), &cfg),
            0.0
        );
        assert_eq!(
            delta_m2(
                &density_of(&pre),
                &QubitDensityMatrix::MAXIMALLY_MIXED,
                &cfg
            ),
            0.0
        );
    }

    #[test]
    fn dual_reduces_to_plain_without_phase_coupling() {
        let pre = make_state(1.0, 0.4).unwrap();
        let post = make_state(2.0, -0.9).unwrap();
        let cfg = MeterConfig::from_strength(0.3, 1.0).unwrap();
        let plain = pps_average_compact(&pre, &post, &cfg).unwrap();
        let dual = pps_average_dual(&pre, &post, &cfg).unwrap();
        assert!((plain.avg - dual.avg).abs() < 1e-15 * plain.avg.abs());
        assert!((plain.big_g - dual.big_g).abs() < 1e-16);
    }

    #[test]
    fn dual_with_real_weak_value_ignores_phase_coupling() {
        let pre = PureQubitState::new(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, FRAC_1_SQRT_2),
        )
        .unwrap();
        let eps1 = 0.2;
        let cfg = MeterConfig::dual(eps1, 1.0, 0.7).unwrap();
        let r = pps_average_dual(&pre, &PureQubitState::UP, &cfg).unwrap();
        assert!((r.aav.unwrap().value() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((r.avg - eps1).abs() < 1e-15);
    }

    #[test]
    fn dual_picks_up_imaginary_part() {
        // Post (cos χ, −i sin χ) at χ = π/4 gives A_w = −i.
        let pre = PureQubitState::real(1.0, 1.0).unwrap();
        let post = PureQubitState::new(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, -FRAC_1_SQRT_2),
        )
        .unwrap();
        let (eps1, eps2, d) = (0.1, 0.05, 1.0);
        let cfg = MeterConfig::dual(eps1, d, eps2).unwrap();
        let r = pps_average_dual(&pre, &post, &cfg).unwrap();
        let aw = r.aav.unwrap();
        assert!((aw.value() - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let damping = libm::exp(-2.0 * cfg.strength() - 0.5 * eps2 * eps2 * d);
        assert!((r.avg + eps2 * d * damping).abs() < 1e-15);
        // Leading order: −ε₂, off by O(g + ε₂²D).
        assert!((r.avg + eps2).abs() < eps2 * (2.0 * cfg.strength() + eps2 * eps2));
        let lead = dual_leading_order(&aw, eps1, eps2, cfg.big_g());
        assert!((lead + eps2).abs() < 1e-15);
    }

    #[test]
    fn classical_examples() {
        let cfg = MeterConfig::new(0.8, 1.0).unwrap();
        let half = QubitDensityMatrix::MAXIMALLY_MIXED;
        let up = QubitDensityMatrix::diagonal(1.0).unwrap();
        assert!((pps_average_classical(&half, &up, &cfg).unwrap().avg - 0.8).abs() < 1e-15);
        assert_eq!(pps_average_classical(&half, &half, &cfg).unwrap().avg, 0.0);
        let down = QubitDensityMatrix::diagonal(0.0).unwrap();
        assert!(matches!(
            pps_average_classical(&up, &down, &cfg),
            Err(WvError::ZeroPpsProbability { .. })
        ));
        let coherent = density_of(&PureQubitState::real(1.0, 1.0).unwrap());
        assert!(matches!(
            pps_average_classical(&coherent, &up, &cfg),
            Err(WvError::NonDiagonalInput { .. })
        ));
    }

    #[test]
    fn oracle_matches_closed_on_a_fixture() {
        let pre = make_state(1.3, 0.7).unwrap();
        let post = make_state(2.2, -2.0).unwrap();
        let cfg = MeterConfig::new(0.9, 1.4).unwrap();
        let (rho, rho_post) = (density_of(&pre), density_of(&post));
        let closed = pps_average_closed(&rho, &rho_post, &cfg).unwrap();
        let oracle = quadrature_pps_oracle(&rho, &rho_post, &cfg, UpdateMode::Quantum).unwrap();
        assert!((oracle - closed.avg).abs() < 1e-9 * closed.avg.abs().max(cfg.x0()));
    }
}
