//! One handler per subcommand. Each returns a [`Table`]; writing it out is
//! the caller's job.

use wv_core::{
    aav_weak_value, coin_pps_average, delta_m2, density_of, dual_leading_order,
    pps_average_classical, pps_average_closed, pps_average_compact, pps_average_dual, McEstimate,
    PostSelectionRule, Result as CoreResult,
};

use crate::parallel;
use crate::spec::{Command, McTarget, RunSpec, UpdateSpec};
use crate::table::{Cell, Table};
use crate::{sweep, verify, CliError};

/// Runs `spec.command`. `verify` is handled separately since it also decides
/// the exit status; here it just returns its report table.
pub fn run(spec: &RunSpec) -> Result<Table, CliError> {
    spec.validate()?;
    match spec.command {
        Command::Aav => aav(spec),
        Command::Pps => pps(spec),
        Command::Dual => dual(spec),
        Command::Classical => classical(spec),
        Command::Cointoss => cointoss(spec),
        Command::Mc => mc(spec),
        Command::Sweep => sweep::run(spec),
        Command::Verify => Ok(verify::run(&verify::VerifyOptions::default()).table()),
    }
}

fn aav(spec: &RunSpec) -> Result<Table, CliError> {
    let pre = spec.pre_state.state()?;
    let post = spec.post_state.state()?;
    let overlap = post.inner(&pre).norm_sqr();
    let mut t = Table::new(
        "aav",
        &["re_aw", "im_aw", "abs_aw", "overlap", "anomalous", "status"],
    );
    match aav_weak_value(&pre, &post) {
        Ok(aw) => t.push(vec![
            aw.re().into(),
            aw.im().into(),
            aw.value().norm().into(),
            overlap.into(),
            if aw.is_anomalous() { "true" } else { "false" }.into(),
            "ok".into(),
        ]),
        Err(e) => t.push(vec![
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            overlap.into(),
            Cell::Empty,
            e.kind().into(),
        ]),
    }
    Ok(t)
}

fn pps(spec: &RunSpec) -> Result<Table, CliError> {
    let pre = spec.pre_state.state()?;
    let post = spec.post_state.state()?;
    let cfg = spec.meter.config()?;
    let (rho, rho_post) = (density_of(&pre), density_of(&post));
    let mut t = Table::new(
        "pps",
        &[
            "x0",
            "D",
            "g",
            "G",
            "re_aw",
            "im_aw",
            "m1",
            "m2",
            "delta_m2",
            "pps_avg",
            "pps_over_x0",
            "compact_over_x0",
            "status",
        ],
    );
    let aw = aav_weak_value(&pre, &post).ok();
    let compact = pps_average_compact(&pre, &post, &cfg).ok();
    let mut row: Vec<Cell> = vec![
        cfg.x0().into(),
        cfg.d().into(),
        cfg.strength().into(),
        cfg.big_g().into(),
        aw.map(|w| w.re()).into(),
        aw.map(|w| w.im()).into(),
    ];
    match pps_average_closed(&rho, &rho_post, &cfg) {
        Ok(r) => row.extend([
            r.m1.into(),
            r.m2.into(),
            delta_m2(&rho, &rho_post, &cfg).into(),
            r.avg.into(),
            r.avg_over_x0().into(),
            compact.and_then(|c| c.avg_over_x0()).into(),
            "ok".into(),
        ]),
        Err(e) => row.extend([
            Cell::Empty,
            Cell::Empty,
            delta_m2(&rho, &rho_post, &cfg).into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            e.kind().into(),
        ]),
    }
    t.push(row);
    Ok(t)
}

fn dual(spec: &RunSpec) -> Result<Table, CliError> {
    let pre = spec.pre_state.state()?;
    let post = spec.post_state.state()?;
    let cfg = spec.meter.config()?;
    let mut t = Table::new(
        "dual",
        &[
            "x0",
            "D",
            "eps2",
            "g",
            "G_eff",
            "re_aw",
            "im_aw",
            "m1",
            "m2",
            "pps_avg",
            "pps_over_x0",
            "leading_order_over_x0",
            "status",
        ],
    );
    let mut row: Vec<Cell> = vec![
        cfg.x0().into(),
        cfg.d().into(),
        cfg.eps2().into(),
        cfg.strength().into(),
    ];
    match pps_average_dual(&pre, &post, &cfg) {
        Ok(r) => {
            let leading = r
                .aav
                .filter(|_| r.x0 > 0.0)
                .map(|w| dual_leading_order(&w, cfg.x0(), cfg.eps2(), cfg.big_g()) / r.x0);
            row.extend([
                r.big_g.into(),
                r.aav.map(|w| w.re()).into(),
                r.aav.map(|w| w.im()).into(),
                r.m1.into(),
                r.m2.into(),
                r.avg.into(),
                r.avg_over_x0().into(),
                leading.into(),
                "ok".into(),
            ]);
        }
        Err(e) => {
            row.extend(std::iter::repeat_n(Cell::Empty, 8));
            row.push(e.kind().into());
        }
    }
    t.push(row);
    Ok(t)
}

fn classical(spec: &RunSpec) -> Result<Table, CliError> {
    let pre = spec.pre_state.state()?;
    let post = spec.post_state.state()?;
    let cfg = spec.meter.config()?;
    let rho = density_of(&pre).dephased();
    let rho_post = density_of(&post).dephased();
    let mut t = Table::new(
        "classical",
        &[
            "x0",
            "D",
            "g",
            "m1",
            "m2",
            "pps_avg",
            "pps_over_x0",
            "status",
        ],
    );
    let mut row: Vec<Cell> = vec![cfg.x0().into(), cfg.d().into(), cfg.strength().into()];
    match pps_average_classical(&rho, &rho_post, &cfg) {
        Ok(r) => row.extend([
            r.m1.into(),
            r.m2.into(),
            r.avg.into(),
            r.avg_over_x0().into(),
            "ok".into(),
        ]),
        Err(e) => {
            row.extend(std::iter::repeat_n(Cell::Empty, 4));
            row.push(e.kind().into());
        }
    }
    t.push(row);
    Ok(t)
}

fn cointoss(spec: &RunSpec) -> Result<Table, CliError> {
    let cfg = spec.coin.config()?;
    let rule = spec.coin.post_rule()?;
    let mut t = Table::new(
        "cointoss",
        &[
            "lambda",
            "delta",
            "p_up",
            "a_bar",
            "m1",
            "m2",
            "avg",
            "scaled",
            "closed_scaled",
            "status",
        ],
    );
    let closed = matches!(rule, PostSelectionRule::SDependent)
        .then(|| cfg.s_dependent_closed() / cfg.lambda());
    let mut row: Vec<Cell> = vec![
        cfg.lambda().into(),
        cfg.delta().into(),
        cfg.p_up().into(),
        cfg.a_bar().into(),
    ];
    match coin_pps_average(&cfg, &rule) {
        Ok(r) => row.extend([
            r.m1.into(),
            r.m2.into(),
            r.avg.into(),
            r.scaled().into(),
            closed.into(),
            "ok".into(),
        ]),
        Err(e) => {
            row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
            row.push(closed.into());
            row.push(e.kind().into());
        }
    }
    t.push(row);
    Ok(t)
}

/// Analytic `(average, M₂)` that a Gaussian Monte Carlo run should reproduce.
pub fn gaussian_reference(spec: &RunSpec) -> Result<CoreResult<(f64, f64)>, CliError> {
    let pre = spec.pre_state.state()?;
    let post = spec.post_state.state()?;
    let cfg = spec.meter.config()?;
    let (rho, rho_post) = (density_of(&pre), density_of(&post));
    Ok(match spec.mc.update {
        UpdateSpec::Quantum => pps_average_closed(&rho, &rho_post, &cfg).map(|r| (r.avg, r.m2)),
        UpdateSpec::Dual => pps_average_dual(&pre, &post, &cfg).map(|r| (r.avg, r.m2)),
        // With coherences dropped after the update only the diagonals of the
        // post-selected projector matter.
        UpdateSpec::Classical => pps_average_classical(&rho.dephased(), &rho_post.dephased(), &cfg)
            .map(|r| (r.avg, r.m2)),
    })
}

const MC_COLUMNS: [&str; 13] = [
    "target",
    "scale",
    "analytic_avg",
    "analytic_scaled",
    "analytic_accept",
    "mc_mean",
    "mc_scaled",
    "mc_stderr",
    "z_score",
    "n_accepted",
    "n_total",
    "accept_rate",
    "status",
];

fn mc(spec: &RunSpec) -> Result<Table, CliError> {
    let mc = spec.mc.config()?;
    let (target, scale, reference, estimate) = match spec.mc.target {
        McTarget::Gaussian => {
            let pre = spec.pre_state.state()?;
            let post = spec.post_state.state()?;
            let cfg = spec.meter.config()?;
            let reference = gaussian_reference(spec)?;
            let est = parallel::run_gaussian_pps(&density_of(&pre), &post, &cfg, &mc);
            ("gaussian", cfg.x0(), reference, est)
        }
        McTarget::Coin => {
            let cfg = spec.coin.config()?;
            let rule = spec.coin.post_rule()?;
            let reference = coin_pps_average(&cfg, &rule).map(|r| (r.avg, r.m2));
            let est = parallel::run_coin_toss(&cfg, &rule, &mc);
            ("coin", cfg.lambda(), reference, est)
        }
    };
    let mut t = Table::new("mc", &MC_COLUMNS);
    t.push(mc_row(target, scale, reference, estimate, mc.n_trials()));
    Ok(t)
}

fn scaled(v: f64, scale: f64) -> Option<f64> {
    (scale > 0.0).then(|| v / scale)
}

fn mc_row(
    target: &str,
    scale: f64,
    reference: CoreResult<(f64, f64)>,
    estimate: CoreResult<McEstimate>,
    n_trials: u64,
) -> Vec<Cell> {
    let (avg, m2) = match reference {
        Ok((a, m)) => (Some(a), Some(m)),
        Err(_) => (None, None),
    };
    let mut row: Vec<Cell> = vec![
        target.into(),
        scale.into(),
        avg.into(),
        avg.and_then(|a| scaled(a, scale)).into(),
        m2.into(),
    ];
    let status = match (&reference, &estimate) {
        (Err(e), _) | (_, Err(e)) => e.kind(),
        _ => "ok",
    };
    match estimate {
        Ok(e) => {
            let z = avg
                .filter(|_| e.std_err > 0.0)
                .map(|a| (e.mean - a) / e.std_err);
            row.extend([
                e.mean.into(),
                scaled(e.mean, scale).into(),
                e.std_err.into(),
                z.into(),
                e.n_accepted.into(),
                e.n_total.into(),
                e.accept_rate.into(),
            ]);
        }
        Err(_) => row.extend([
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            0u64.into(),
            n_trials.into(),
            0.0.into(),
        ]),
    }
    row.push(status.into());
    row
}
