//! Self-check suite behind `wv verify`.
//!
//! Each check either compares two independent routes to the same quantity
//! or asserts a bound. It records the worst deviation it saw next to the
//! tolerance it was held to.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wv_core::bayes::outcome_density;
use wv_core::quadrature::{integrate, Tolerance};
use wv_core::{
    aav_approx_amplitude, aav_weak_value, bayes_update, coarse_grain, coin_pps_average, delta_m2,
    density_of, exact_meter_amplitude, finite_strength_ratio, make_state, post_select_prob,
    pps_average_classical, pps_average_closed, pps_average_dual, quadrature_pps_oracle,
    CoarseOutcome, CoinTossConfig, McConfig, MeterConfig, PostSelectionRule, PureQubitState,
    QubitDensityMatrix, Spin, Strength, UpdateMode,
};

use crate::parallel;
use crate::table::{Cell, Table};

/// Knobs for [`run`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Skip the Monte Carlo checks.
    pub fast: bool,
    /// Added to `G` in the weak-value route. Non-zero only to confirm that
    /// the suite notices a wrong formula.
    pub perturb_g: f64,
    /// Seed for random configurations and Monte Carlo streams.
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            fast: false,
            perturb_g: 0.0,
            seed: 2024,
        }
    }
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    /// Stable identifier.
    pub name: &'static str,
    /// `None` when skipped.
    pub passed: Option<bool>,
    /// Worst observed deviation (or the tested quantity for bound checks).
    pub measured: f64,
    /// Threshold the measurement was compared against.
    pub bound: f64,
    /// Human-readable context.
    pub detail: String,
}

impl Check {
    fn at_most(name: &'static str, measured: f64, bound: f64, detail: impl Into<String>) -> Check {
        Check {
            name,
            // NaN must fail, hence the explicit comparison.
            passed: Some(measured <= bound),
            measured,
            bound,
            detail: detail.into(),
        }
    }

    fn at_least(name: &'static str, measured: f64, bound: f64, detail: impl Into<String>) -> Check {
        Check {
            name,
            passed: Some(measured >= bound),
            measured,
            bound,
            detail: detail.into(),
        }
    }

    fn skipped(name: &'static str) -> Check {
        Check {
            name,
            passed: None,
            measured: f64::NAN,
            bound: f64::NAN,
            detail: "skipped (--fast)".into(),
        }
    }
}

/// All checks in execution order.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    /// Individual results.
    pub checks: Vec<Check>,
}

impl Report {
    /// True when no executed check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }

    /// Names of failing checks.
    pub fn failures(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| c.passed == Some(false))
            .map(|c| c.name)
            .collect()
    }

    /// Report as an output table.
    pub fn table(&self) -> Table {
        let mut t = Table::new(
            "verify",
            &["check", "status", "measured", "bound", "detail"],
        );
        for c in &self.checks {
            let status = match c.passed {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "skip",
            };
            let num = |v: f64| {
                if v.is_nan() {
                    Cell::Empty
                } else {
                    Cell::Float(v)
                }
            };
            t.push(vec![
                c.name.into(),
                status.into(),
                num(c.measured),
                num(c.bound),
                c.detail.as_str().into(),
            ]);
        }
        t
    }
}

/// Runs the suite.
pub fn run(opts: &VerifyOptions) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = vec![
        closed_vs_weak_value_form(&mut rng, opts.perturb_g),
        closed_vs_quadrature(&mut rng),
        dual_vs_quadrature(&mut rng),
        classical_vs_quadrature(&mut rng),
        weak_limit(),
        weak_limit_rate(),
        anomaly_window(),
        orthogonal_vanishing(),
        coin_closed_form(),
        coin_flagship(),
        classical_gaussian_bound(&mut rng),
        classical_coin_bound(&mut rng),
        bayes_trace_and_purity(&mut rng),
        bayes_total_probability(&mut rng),
        coarse_grained_mean(&mut rng),
        amplitude_approximation_scaling(),
    ];
    let mc_names = [
        "mc_ordinary",
        "mc_anomalous",
        "mc_orthogonal",
        "mc_coin_anomalous",
    ];
    if opts.fast {
        checks.extend(mc_names.iter().map(|n| Check::skipped(n)));
    } else {
        checks.extend(monte_carlo(opts.seed));
    }
    Report { checks }
}

fn random_state<R: Rng>(rng: &mut R) -> PureQubitState {
    let theta = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
    let phi = PI * (2.0 * rng.random::<f64>() - 1.0);
    make_state(theta, phi).expect("angles in range")
}

/// `(cos χ, −sin χ)` against `|+⟩` gives `A_w = cot(π/4 − χ)`.
fn cot_fixture(angle: f64) -> (PureQubitState, PureQubitState) {
    let chi = FRAC_PI_4 - angle;
    (
        PureQubitState::real(1.0, 1.0).unwrap(),
        PureQubitState::real(chi.cos(), -chi.sin()).unwrap(),
    )
}

fn rel_dev(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / b.abs().max(scale)
}

fn closed_vs_weak_value_form<R: Rng>(rng: &mut R, perturb_g: f64) -> Check {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for _ in 0..2000 {
        let pre = random_state(rng);
        let post = random_state(rng);
        let Ok(aw) = aav_weak_value(&pre, &post) else {
            continue;
        };
        let g = 10f64.powf(rng.random_range(-6.0..1.0));
        let cfg = MeterConfig::from_strength(g, rng.random_range(0.2..5.0)).unwrap();
        let Ok(closed) = pps_average_closed(&density_of(&pre), &density_of(&post), &cfg) else {
            continue;
        };
        let compact = cfg.x0() * finite_strength_ratio(&aw, cfg.big_g() + perturb_g);
        worst = worst.max(
            (closed.avg / cfg.x0() - compact / cfg.x0()).abs()
                / (closed.avg / cfg.x0()).abs().max(1.0),
        );
        n += 1;
    }
    Check::at_most(
        "closed_vs_weak_value_form",
        worst,
        1e-12,
        format!("{n} random pairs, g in [1e-6, 10]"),
    )
}

fn quadrature_sweep<R: Rng>(
    rng: &mut R,
    name: &'static str,
    n: usize,
    mut eval: impl FnMut(&mut R) -> (f64, f64, f64),
) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (closed, oracle, scale) = eval(rng);
        worst = worst.max(rel_dev(closed, oracle, scale));
    }
    Check::at_most(
        name,
        worst,
        1e-9,
        format!("{n} random configs vs adaptive quadrature"),
    )
}

fn random_meter<R: Rng>(rng: &mut R) -> MeterConfig {
    MeterConfig::new(rng.random_range(0.05..2.0), rng.random_range(0.3..3.0)).unwrap()
}

fn closed_vs_quadrature<R: Rng>(rng: &mut R) -> Check {
    quadrature_sweep(rng, "closed_vs_quadrature", 12, |rng| {
        let (rho, post) = (
            density_of(&random_state(rng)),
            density_of(&random_state(rng)),
        );
        let cfg = random_meter(rng);
        let closed = pps_average_closed(&rho, &post, &cfg).map_or(f64::NAN, |r| r.avg);
        let oracle =
            quadrature_pps_oracle(&rho, &post, &cfg, UpdateMode::Quantum).unwrap_or(f64::NAN);
        (closed, oracle, cfg.x0())
    })
}

fn dual_vs_quadrature<R: Rng>(rng: &mut R) -> Check {
    quadrature_sweep(rng, "dual_vs_quadrature", 12, |rng| {
        let (pre, post) = (random_state(rng), random_state(rng));
        let cfg = random_meter(rng)
            .with_eps2(rng.random_range(-2.0..2.0))
            .unwrap();
        let closed = pps_average_dual(&pre, &post, &cfg).map_or(f64::NAN, |r| r.avg);
        let oracle = quadrature_pps_oracle(
            &density_of(&pre),
            &density_of(&post),
            &cfg,
            UpdateMode::QuantumDualCoupling,
        )
        .unwrap_or(f64::NAN);
        (closed, oracle, cfg.x0().max(cfg.eps2().abs() * cfg.d()))
    })
}

fn classical_vs_quadrature<R: Rng>(rng: &mut R) -> Check {
    quadrature_sweep(rng, "classical_vs_quadrature", 12, |rng| {
        let rho = QubitDensityMatrix::diagonal(rng.random()).unwrap();
        let post = QubitDensityMatrix::diagonal(rng.random()).unwrap();
        let cfg = random_meter(rng);
        let closed = pps_average_classical(&rho, &post, &cfg).map_or(f64::NAN, |r| r.avg);
        let oracle = quadrature_pps_oracle(&rho, &post, &cfg, UpdateMode::ClassicalDiagonal)
            .unwrap_or(f64::NAN);
        (closed, oracle, cfg.x0())
    })
}

fn avg_over_x0(pre: &PureQubitState, post: &PureQubitState, g: f64) -> f64 {
    let cfg = MeterConfig::from_strength(g, 1.0).unwrap();
    let r = pps_average_closed(&density_of(pre), &density_of(post), &cfg).unwrap();
    r.avg / cfg.x0()
}

fn weak_limit() -> Check {
    let pre = PureQubitState::real(1.0, 1.0).unwrap();
    let post = PureQubitState::UP;
    let err = (avg_over_x0(&pre, &post, 1e-6) - 1.0).abs();
    Check::at_most("weak_limit_ordinary", err, 1e-3, "A_w = 1, g = 1e-6")
}

fn weak_limit_rate() -> Check {
    let (pre, post) = cot_fixture(0.05);
    let aw = aav_weak_value(&pre, &post).unwrap().re();
    let e6 = (avg_over_x0(&pre, &post, 1e-6) - aw).abs();
    let e5 = (avg_over_x0(&pre, &post, 1e-5) - aw).abs();
    Check::at_least(
        "weak_limit_rate",
        e5 / e6,
        8.0,
        format!("A_w = {aw:.6}, error {e6:.3e} at g = 1e-6"),
    )
}

fn anomaly_window() -> Check {
    let (pre, post) = cot_fixture(0.05);
    Check::at_least(
        "anomaly_window",
        avg_over_x0(&pre, &post, 1e-4),
        1.0 + f64::EPSILON,
        "avg/x0 at A_w = cot(0.05), g = 1e-4 must exceed 1",
    )
}

fn orthogonal_vanishing() -> Check {
    let pre = make_state(1.1, 0.0).unwrap();
    let post = PureQubitState::real(-pre.down().re, pre.up().re).unwrap();
    let (rho, rho_post) = (density_of(&pre), density_of(&post));
    let mut worst: f64 = 0.0;
    let mut positive = true;
    for g in [0.01, 0.1, 1.0] {
        let cfg = MeterConfig::from_strength(g, 1.0).unwrap();
        match pps_average_closed(&rho, &rho_post, &cfg) {
            Ok(r) => {
                let dm2 = delta_m2(&rho, &rho_post, &cfg);
                positive &= r.m2 > 0.0 && dm2 > 0.0;
                worst = worst.max(r.avg.abs()).max((r.m2 - dm2).abs());
            }
            Err(_) => positive = false,
        }
    }
    let mut c = Check::at_most(
        "orthogonal_vanishing",
        worst,
        1e-12,
        "|avg| and |M2 - dM2| at g in {0.01, 0.1, 1}",
    );
    if !positive {
        c.passed = Some(false);
        c.detail.push_str("; M2 not positive");
    }
    c
}

fn coin_closed_form() -> Check {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for i in 0..20 {
        let lambda = 0.01 + 0.97 * i as f64 / 19.0;
        for j in 0..20 {
            let delta = (1.0 - lambda) * j as f64 / 19.0;
            for k in 0..5 {
                let p_up = k as f64 / 4.0;
                let cfg = CoinTossConfig::new(lambda, delta, p_up).unwrap();
                let Ok(r) = coin_pps_average(&cfg, &PostSelectionRule::SDependent) else {
                    continue;
                };
                let closed = cfg.s_dependent_closed();
                worst = worst.max((r.avg - closed).abs() / closed.abs().max(1.0));
                n += 1;
            }
        }
    }
    Check::at_most(
        "coin_closed_form",
        worst,
        1e-14,
        format!("{n} grid points (lambda, delta, p_up)"),
    )
}

fn coin_flagship() -> Check {
    let cfg = CoinTossConfig::new(0.005, 0.99, 1.0).unwrap();
    let scaled =
        coin_pps_average(&cfg, &PostSelectionRule::SDependent).map_or(f64::NAN, |r| r.scaled());
    Check::at_most(
        "coin_flagship",
        (scaled - 100.0).abs() / 100.0,
        1e-12,
        format!("scaled value {scaled} at lambda = 0.005, delta = 0.99"),
    )
}

fn classical_gaussian_bound<R: Rng>(rng: &mut R) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let rho = QubitDensityMatrix::diagonal(rng.random()).unwrap();
        let post = QubitDensityMatrix::diagonal(rng.random()).unwrap();
        let cfg = MeterConfig::from_strength(10f64.powf(rng.random_range(-6.0..1.0)), 1.0).unwrap();
        if let Ok(r) = pps_average_classical(&rho, &post, &cfg) {
            worst = worst.max(r.avg.abs() / cfg.x0());
        }
    }
    Check::at_most(
        "classical_gaussian_bound",
        worst,
        1.0,
        "max |avg|/x0, 2000 diagonal configs",
    )
}

fn classical_coin_bound<R: Rng>(rng: &mut R) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let lambda = rng.random_range(1e-3..0.999);
        let cfg = CoinTossConfig::new(lambda, 0.0, rng.random()).unwrap();
        let rule = PostSelectionRule::s_independent(rng.random(), rng.random()).unwrap();
        if let Ok(r) = coin_pps_average(&cfg, &rule) {
            worst = worst.max(r.scaled().abs());
        }
    }
    Check::at_most(
        "classical_coin_bound",
        worst,
        1.0,
        "max |scaled|, 2000 s-independent configs",
    )
}

fn bayes_trace_and_purity<R: Rng>(rng: &mut R) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let rho = density_of(&random_state(rng));
        let cfg = random_meter(rng);
        let x = rng.random_range(-8.0..8.0);
        let upd = bayes_update(&rho, &cfg, x, UpdateMode::Quantum).unwrap();
        let trace = (upd.p_up() + upd.p_down() - 1.0).abs();
        let purity = (upd.coherence().norm_sqr() - upd.p_up() * upd.p_down()).abs();
        worst = worst.max(trace).max(purity);
    }
    Check::at_most(
        "bayes_trace_purity",
        worst,
        1e-12,
        "2000 random (pure state, x)",
    )
}

fn bayes_total_probability<R: Rng>(rng: &mut R) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let pre = random_state(rng);
        let rho = density_of(&pre);
        let post = random_state(rng);
        // Orthogonal complement of the post-selected state.
        let perp = PureQubitState::new(-post.down().conj(), post.up().conj()).unwrap();
        let cfg = random_meter(rng);
        let w = cfg.x0() + 12.0 * cfg.d().sqrt();
        let total = integrate(
            |x| {
                let upd = bayes_update(&rho, &cfg, x, UpdateMode::Quantum).unwrap();
                outcome_density(&rho, &cfg, x)
                    * (post_select_prob(&upd, &post) + post_select_prob(&upd, &perp))
            },
            -w,
            w,
            Tolerance::relative(1e-12),
            2000,
        )
        .map_or(f64::NAN, |i| i.value);
        worst = worst.max((total - 1.0).abs());
    }
    Check::at_most(
        "bayes_total_probability",
        worst,
        1e-9,
        "integral of N(x) over both post outcomes",
    )
}

fn coarse_grained_mean<R: Rng>(rng: &mut R) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let lambda: f64 = rng.random();
        let p_up: f64 = rng.random();
        let weight = |s: Spin| if s == Spin::Up { p_up } else { 1.0 - p_up };
        let mean: f64 = CoarseOutcome::ALL
            .iter()
            .flat_map(|&s| Spin::ALL.map(move |sp| (s, sp)))
            .map(|(s, sp)| s.sign() * weight(sp) * coarse_grain(Strength::Lambda(lambda), sp, s))
            .sum();
        worst = worst.max((mean - lambda * (2.0 * p_up - 1.0)).abs());
    }
    Check::at_most(
        "coarse_grained_mean",
        worst,
        1e-14,
        "sum_s s P(s) = lambda * A_bar",
    )
}

fn l2_error(pre: &PureQubitState, post: &PureQubitState, ratio: f64) -> f64 {
    let cfg = MeterConfig::new(ratio, 1.0).unwrap();
    let w = cfg.x0() + 12.0;
    integrate(
        |x| {
            aav_approx_amplitude(&cfg, pre, post, x).map_or(f64::NAN, |a| {
                (exact_meter_amplitude(&cfg, pre, post, x) - a).norm_sqr()
            })
        },
        -w,
        w,
        Tolerance::relative(1e-12),
        2000,
    )
    .map_or(f64::NAN, |i| i.value.sqrt())
}

fn amplitude_approximation_scaling() -> Check {
    let pre = make_state(1.2, 0.5).unwrap();
    let post = make_state(2.2, -2.4).unwrap();
    let ratio = l2_error(&pre, &post, 0.1) / l2_error(&pre, &post, 0.01);
    Check::at_least(
        "amplitude_approximation_scaling",
        ratio,
        5.0,
        "L2 error ratio between x0/sqrt(D) = 0.1 and 0.01",
    )
}

fn mc_check(
    name: &'static str,
    estimate: wv_core::Result<wv_core::McEstimate>,
    mean: f64,
    accept: f64,
) -> Check {
    match estimate {
        Ok(e) => {
            let z_mean = (e.mean - mean).abs() / e.std_err;
            let z_rate = (e.accept_rate - accept).abs() / e.accept_rate_sigma(accept);
            Check::at_most(
                name,
                z_mean.max(z_rate),
                4.0,
                format!(
                    "mean {:.6e} vs {mean:.6e}, accept {:.6} vs {accept:.6}, n = {}",
                    e.mean, e.accept_rate, e.n_total
                ),
            )
        }
        Err(e) => Check {
            name,
            passed: Some(false),
            measured: f64::NAN,
            bound: 4.0,
            detail: e.to_string(),
        },
    }
}

fn gaussian_mc(
    name: &'static str,
    pre: &PureQubitState,
    post: &PureQubitState,
    g: f64,
    seed: u64,
) -> Check {
    let cfg = MeterConfig::from_strength(g, 1.0).unwrap();
    let (rho, rho_post) = (density_of(pre), density_of(post));
    let reference = pps_average_closed(&rho, &rho_post, &cfg).unwrap();
    let mc = McConfig::new(seed, 1_000_000, 8192, UpdateMode::Quantum).unwrap();
    mc_check(
        name,
        parallel::run_gaussian_pps(&rho, post, &cfg, &mc),
        reference.avg,
        reference.m2,
    )
}

fn monte_carlo(seed: u64) -> Vec<Check> {
    let plus = PureQubitState::real(1.0, 1.0).unwrap();
    let (pre, post) = cot_fixture(0.05);
    let orth_pre = make_state(FRAC_PI_2, 0.0).unwrap();
    let orth_post =
        PureQubitState::normalized(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)).unwrap();
    let coin = CoinTossConfig::new(0.2, 0.5, 1.0).unwrap();
    let coin_mc = McConfig::new(seed, 1_000_000, 8192, UpdateMode::Quantum).unwrap();
    vec![
        gaussian_mc("mc_ordinary", &plus, &PureQubitState::UP, 0.01, seed),
        gaussian_mc("mc_anomalous", &pre, &post, 1e-2, seed + 1),
        gaussian_mc("mc_orthogonal", &orth_pre, &orth_post, 0.05, seed + 2),
        mc_check(
            "mc_coin_anomalous",
            parallel::run_coin_toss(&coin, &PostSelectionRule::SDependent, &coin_mc),
            coin.s_dependent_closed(),
            1.0 - coin.delta(),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suite_passes_and_perturbation_is_caught() {
        let opts = VerifyOptions {
            fast: true,
            ..VerifyOptions::default()
        };
        let report = run(&opts);
        assert!(report.passed(), "{:?}", report.failures());
        assert!(report.checks.iter().filter(|c| c.passed.is_some()).count() >= 12);

        let broken = run(&VerifyOptions {
            perturb_g: 1e-6,
            ..opts
        });
        assert_eq!(broken.failures(), vec!["closed_vs_weak_value_form"]);
    }
}
