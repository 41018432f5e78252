//! Closed forms checked against quadrature of the underlying definitions.

mod common;

use common::{random_state, rel_close, simpson};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wv_core::bayes::outcome_density;
use wv_core::pps::{pps_moments, quadrature_moments};
use wv_core::quadrature::{integrate, Tolerance};
use wv_core::*;

fn window(cfg: &MeterConfig) -> f64 {
    cfg.x0() + 12.0 * cfg.d().sqrt()
}

#[test]
fn outcome_densities_integrate_to_one() {
    for (x0, d) in [(0.0, 1.0), (1.0, 1.0), (2.5, 0.3), (0.1, 7.0)] {
        let cfg = MeterConfig::new(x0, d).unwrap();
        for spin in Spin::ALL {
            let w = window(&cfg);
            let q = integrate(
                |x| p_sigma(&cfg, spin, x),
                -w,
                w,
                Tolerance::relative(1e-13),
                500,
            )
            .unwrap();
            assert!(
                (q.value - 1.0).abs() < 1e-10,
                "{x0} {d} {spin:?}: {}",
                q.value
            );
            let s = simpson(|x| p_sigma(&cfg, spin, x), -w, w, 4000);
            assert!((s - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn exact_amplitude_norm_is_post_selection_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let pre = random_state(&mut rng);
        let post = random_state(&mut rng);
        let cfg = MeterConfig::new(rng.random_range(0.0..2.0), rng.random_range(0.3..3.0)).unwrap();
        let w = window(&cfg);
        let q = integrate(
            |x| exact_meter_amplitude(&cfg, &pre, &post, x).norm_sqr(),
            -w,
            w,
            Tolerance::relative(1e-12),
            2000,
        )
        .unwrap();
        let closed = pps_average_closed(&density_of(&pre), &density_of(&post), &cfg);
        let m2 = closed.map(|r| r.m2).unwrap_or(0.0);
        assert!(rel_close(q.value, m2, 1e-9, 1e-12), "{} vs {m2}", q.value);
    }
}

#[test]
fn amplitudes_marginalized_over_post_basis_give_outcome_density() {
    let pre = make_state(1.1, 0.6).unwrap();
    let phi = make_state(0.7, -2.0).unwrap();
    // Orthogonal complement of φ.
    let phi_perp = PureQubitState::new(-phi.down().conj(), phi.up().conj()).unwrap();
    assert!(phi.inner(&phi_perp).norm() < 1e-15);
    let cfg = MeterConfig::new(0.8, 1.5).unwrap();
    let rho = density_of(&pre);
    for x in [-4.0, -1.0, 0.0, 0.3, 2.2, 5.0] {
        let total = exact_meter_amplitude(&cfg, &pre, &phi, x).norm_sqr()
            + exact_meter_amplitude(&cfg, &pre, &phi_perp, x).norm_sqr();
        let n = outcome_density(&rho, &cfg, x);
        assert!((total - n).abs() < 1e-15 * n.max(1e-300) + 1e-300, "{x}");
    }
}

fn l2_error(pre: &PureQubitState, post: &PureQubitState, ratio: f64) -> (f64, f64) {
    let d: f64 = 1.0;
    let cfg = MeterConfig::new(ratio * d.sqrt(), d).unwrap();
    let w = window(&cfg);
    let diff = integrate(
        |x| {
            (exact_meter_amplitude(&cfg, pre, post, x)
                - aav_approx_amplitude(&cfg, pre, post, x).unwrap())
            .norm_sqr()
        },
        -w,
        w,
        Tolerance::relative(1e-12),
        2000,
    )
    .unwrap();
    let norm = integrate(
        |x| exact_meter_amplitude(&cfg, pre, post, x).norm_sqr(),
        -w,
        w,
        Tolerance::relative(1e-12),
        2000,
    )
    .unwrap();
    (diff.value.sqrt(), norm.value.sqrt())
}

#[test]
fn weak_coupling_amplitude_error_scaling() {
    // A_w = 3 + i·(something) for a complex pair.
    let pre = make_state(1.2, 0.5).unwrap();
    let post = make_state(2.2, -2.4).unwrap();
    let aw = aav_weak_value(&pre, &post).unwrap();
    assert!(aw.norm_sqr() > 1.0 && aw.im().abs() > 0.1);

    let (err_small, norm_small) = l2_error(&pre, &post, 0.01);
    let (err_large, _) = l2_error(&pre, &post, 0.1);
    // Frozen from an oracle run: err/norm ≈ 2.6e-4 at x0/√D = 0.01.
    assert!(err_small < 1e-3 * norm_small, "{err_small} vs {norm_small}");
    assert!(
        err_large / err_small >= 5.0,
        "ratio {}",
        err_large / err_small
    );
}

#[test]
fn approximate_statistics_follow_real_part_of_weak_value() {
    // |Φ(x − x0A_w)|² ∝ exp[−(x − x0·Re A_w)²/(2D)]: the x-dependence only.
    let pre = make_state(1.2, 0.5).unwrap();
    let post = make_state(2.2, -2.4).unwrap();
    let aw = aav_weak_value(&pre, &post).unwrap();
    let cfg = MeterConfig::new(0.05, 1.3).unwrap();
    let shape = |x: f64| {
        let u = x - cfg.x0() * aw.re();
        (-u * u / (2.0 * cfg.d())).exp()
    };
    let reference = aav_approx_amplitude(&cfg, &pre, &post, 0.0)
        .unwrap()
        .norm_sqr()
        / shape(0.0);
    for x in [-3.0, -0.5, 0.7, 2.9] {
        let ratio = aav_approx_amplitude(&cfg, &pre, &post, x)
            .unwrap()
            .norm_sqr()
            / shape(x);
        assert!((ratio / reference - 1.0).abs() < 1e-12);
    }
}

#[test]
fn bayes_update_marginalizes_to_prior() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let rho = density_of(&random_state(&mut rng));
        let cfg = MeterConfig::new(rng.random_range(0.0..2.0), rng.random_range(0.3..3.0)).unwrap();
        let w = window(&cfg);
        let marginal = |pick: fn(&QubitDensityMatrix) -> f64| {
            integrate(
                |x| {
                    let upd = bayes_update(&rho, &cfg, x, UpdateMode::Quantum).unwrap();
                    pick(&upd) * outcome_density(&rho, &cfg, x)
                },
                -w,
                w,
                Tolerance::relative(1e-12),
                2000,
            )
            .unwrap()
            .value
        };
        let up = marginal(|m| m.p_up());
        let down = marginal(|m| m.p_down());
        assert!((up + down - 1.0).abs() < 1e-9);
        assert!((up - rho.p_up()).abs() < 1e-9);
        assert!((down - rho.p_down()).abs() < 1e-9);
    }
}

#[test]
fn closed_moments_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..25 {
        let (rho, rho_post) = (
            density_of(&random_state(&mut rng)),
            density_of(&random_state(&mut rng)),
        );
        let cfg =
            MeterConfig::new(rng.random_range(0.05..2.0), rng.random_range(0.3..3.0)).unwrap();
        let closed = pps_average_closed(&rho, &rho_post, &cfg).unwrap();
        let (m1, m2) = quadrature_moments(&rho, &rho_post, &cfg, UpdateMode::Quantum).unwrap();
        assert!(rel_close(m2, closed.m2, 1e-9, 1e-12));
        assert!(rel_close(m1, closed.m1, 1e-9, cfg.x0() * 1e-3));
        let oracle = quadrature_pps_oracle(&rho, &rho_post, &cfg, UpdateMode::Quantum).unwrap();
        assert!(rel_close(oracle, closed.avg, 1e-9, cfg.x0()));
    }
}

#[test]
fn asymmetric_centres_keep_the_coherence_term() {
    // Shifting both centres by c shifts the average by c; the (x̄↑ + x̄↓)
    // coherence term in M₁ is what makes that work.
    let rho = density_of(&make_state(1.0, 0.3).unwrap());
    let rho_post = density_of(&make_state(2.0, 2.5).unwrap());
    let (x0, d, c) = (0.7, 1.2, 0.9);
    let (m1, m2) = pps_moments(&rho, &rho_post, (x0 + c, -x0 + c), d, 0.0);
    let (s1, s2) = pps_moments(&rho, &rho_post, (x0, -x0), d, 0.0);
    assert!((m2 - s2).abs() < 1e-15);
    assert!((m1 / m2 - (s1 / s2 + c)).abs() < 1e-12);

    // Direct quadrature of the shifted joint density.
    let joint = |x: f64, k: i32| {
        let p_up = (-(x - x0 - c).powi(2) / (2.0 * d)).exp();
        let p_down = (-(x + x0 - c).powi(2) / (2.0 * d)).exp();
        let w = rho_post.coherence().conj() * rho.coherence();
        let val = rho_post.p_up() * rho.p_up() * p_up
            + rho_post.p_down() * rho.p_down() * p_down
            + 2.0 * w.re * (p_up * p_down).sqrt();
        x.powi(k) * val / (2.0 * std::f64::consts::PI * d).sqrt()
    };
    let q1 = simpson(|x| joint(x, 1), -20.0, 20.0, 20_000);
    let q2 = simpson(|x| joint(x, 0), -20.0, 20.0, 20_000);
    assert!((q1 - m1).abs() < 1e-10 && (q2 - m2).abs() < 1e-10);
}

#[test]
fn dual_closed_form_matches_quadrature_and_fixes_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..25 {
        let pre = random_state(&mut rng);
        let post = random_state(&mut rng);
        let cfg = MeterConfig::dual(
            rng.random_range(0.05..1.5),
            rng.random_range(0.3..3.0),
            rng.random_range(-2.0..2.0),
        )
        .unwrap();
        let dual = pps_average_dual(&pre, &post, &cfg).unwrap();
        let oracle = quadrature_pps_oracle(
            &density_of(&pre),
            &density_of(&post),
            &cfg,
            UpdateMode::QuantumDualCoupling,
        )
        .unwrap();
        let scale = cfg.x0().max(cfg.eps2().abs() * cfg.d());
        assert!(
            rel_close(oracle, dual.avg, 1e-9, scale),
            "{oracle} vs {}",
            dual.avg
        );
    }

    // Sign: with A_w = −i the average is −ε₂·D·c, negative for ε₂ > 0.
    let pre = PureQubitState::real(1.0, 1.0).unwrap();
    let post =
        PureQubitState::normalized(Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)).unwrap();
    let cfg = MeterConfig::dual(0.1, 1.0, 0.3).unwrap();
    let oracle = quadrature_pps_oracle(
        &density_of(&pre),
        &density_of(&post),
        &cfg,
        UpdateMode::QuantumDualCoupling,
    )
    .unwrap();
    assert!(oracle < 0.0);
    assert!(rel_close(
        oracle,
        pps_average_dual(&pre, &post, &cfg).unwrap().avg,
        1e-9,
        0.1
    ));
}

#[test]
fn dual_approaches_leading_order_form() {
    let pre = make_state(1.2, 0.5).unwrap();
    let post = make_state(2.2, -2.4).unwrap();
    let aw = aav_weak_value(&pre, &post).unwrap();
    let mut last = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3] {
        let cfg = MeterConfig::dual(eps, 1.0, eps).unwrap();
        let exact = pps_average_dual(&pre, &post, &cfg).unwrap().avg;
        let lead = pps::dual_leading_order(&aw, eps, eps, cfg.big_g());
        let rel = ((exact - lead) / lead).abs();
        assert!(rel < last);
        last = rel;
    }
    assert!(last < 1e-5);
}

#[test]
fn classical_mode_matches_classical_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..25 {
        let rho = QubitDensityMatrix::diagonal(rng.random()).unwrap();
        let rho_post = QubitDensityMatrix::diagonal(rng.random()).unwrap();
        let cfg =
            MeterConfig::new(rng.random_range(0.05..2.0), rng.random_range(0.3..3.0)).unwrap();
        let closed = pps_average_classical(&rho, &rho_post, &cfg).unwrap();
        let oracle =
            quadrature_pps_oracle(&rho, &rho_post, &cfg, UpdateMode::ClassicalDiagonal).unwrap();
        assert!(rel_close(oracle, closed.avg, 1e-9, cfg.x0()));
    }
    // Classical mode on coherent inputs equals the dephased closed form.
    let rho = density_of(&make_state(1.0, 0.2).unwrap());
    let rho_post = density_of(&make_state(2.5, 1.0).unwrap());
    let cfg = MeterConfig::new(0.6, 1.0).unwrap();
    let oracle =
        quadrature_pps_oracle(&rho, &rho_post, &cfg, UpdateMode::ClassicalDiagonal).unwrap();
    let closed = pps_average_classical(&rho.dephased(), &rho_post.dephased(), &cfg).unwrap();
    assert!(rel_close(oracle, closed.avg, 1e-9, cfg.x0()));
}

#[test]
fn vanishing_weak_value_by_quadrature() {
    let pre = PureQubitState::real(0.6, 0.8).unwrap();
    let post = PureQubitState::real(0.8, -0.6).unwrap();
    for g in [0.01, 0.1, 1.0] {
        let cfg = MeterConfig::from_strength(g, 1.0).unwrap();
        let oracle = quadrature_pps_oracle(
            &density_of(&pre),
            &density_of(&post),
            &cfg,
            UpdateMode::Quantum,
        )
        .unwrap();
        let compact = pps_average_compact(&pre, &post, &cfg).unwrap();
        assert!(oracle.abs() < 1e-9 * cfg.x0().max(1.0), "{g}: {oracle}");
        assert!(compact.avg.abs() < 1e-12);
    }
}
