//! Parameter sweeps.
//!
//! Every axis shares one column layout. For the coin-toss axis (`delta`) the
//! value columns hold the average scaled by λ instead of by `x0`, and the
//! weak-value and strength columns are empty. `mc_stderr` is expressed in the
//! same units as `pps_mc_over_x0`. A parameter pushed out of range by the
//! axis yields a row whose `status` names the error; the sweep continues.

use rayon::prelude::*;
use wv_core::{
    big_g_of, coin_pps_average, density_of, finite_strength_ratio, make_state, pps_average_compact,
    pps_average_dual, CoinTossConfig, McEstimate, MeterConfig, PpsResult, Result as CoreResult,
    WvError,
};

use crate::parallel;
use crate::spec::{RunSpec, SweepAxis};
use crate::table::{Cell, Table};
use crate::CliError;

/// Sweep header, in output order.
pub const COLUMNS: [&str; 11] = [
    "axis_value",
    "g",
    "G",
    "re_aw",
    "im_aw",
    "pps_analytic_over_x0",
    "pps_mc_over_x0",
    "mc_stderr",
    "accept_rate",
    "m2",
    "status",
];

/// Builds the sweep table. Rows are computed in parallel and emitted in grid
/// order.
pub fn run(spec: &RunSpec) -> Result<Table, CliError> {
    let values = spec.sweep.values()?;
    let mc = if spec.sweep.mc {
        Some(spec.mc.config()?)
    } else {
        None
    };
    let rows: Vec<Vec<Cell>> = values
        .par_iter()
        .map(|&v| match spec.sweep.axis {
            SweepAxis::Delta => coin_row(spec, v, mc.as_ref()),
            _ => gaussian_row(spec, v, mc.as_ref()),
        })
        .collect();
    let mut t = Table::new("sweep", &COLUMNS);
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

struct Point {
    g: Option<f64>,
    big_g: Option<f64>,
    re_aw: Option<f64>,
    im_aw: Option<f64>,
    analytic: Option<f64>,
    m2: Option<f64>,
    mc: Option<CoreResult<McEstimate>>,
    scale: f64,
    error: Option<WvError>,
}

impl Point {
    fn failed(e: WvError) -> Point {
        Point {
            g: None,
            big_g: None,
            re_aw: None,
            im_aw: None,
            analytic: None,
            m2: None,
            mc: None,
            scale: 0.0,
            error: Some(e),
        }
    }

    fn into_row(self, axis_value: f64) -> Vec<Cell> {
        let mut status = self.error.as_ref().map(WvError::kind);
        let (mc_mean, mc_err, rate) = match &self.mc {
            Some(Ok(e)) if self.scale > 0.0 => (
                Some(e.mean / self.scale),
                Some(e.std_err / self.scale),
                Some(e.accept_rate),
            ),
            Some(Ok(e)) => (None, None, Some(e.accept_rate)),
            Some(Err(e)) => {
                status = status.or(Some(e.kind()));
                (None, None, Some(0.0))
            }
            None => (None, None, None),
        };
        vec![
            axis_value.into(),
            self.g.into(),
            self.big_g.into(),
            self.re_aw.into(),
            self.im_aw.into(),
            self.analytic.into(),
            mc_mean.into(),
            mc_err.into(),
            rate.into(),
            self.m2.into(),
            status.unwrap_or("ok").into(),
        ]
    }
}

fn gaussian_row(spec: &RunSpec, v: f64, mc: Option<&wv_core::McConfig>) -> Vec<Cell> {
    gaussian_point(spec, v, mc)
        .unwrap_or_else(Point::failed)
        .into_row(v)
}

fn gaussian_point(spec: &RunSpec, v: f64, mc: Option<&wv_core::McConfig>) -> CoreResult<Point> {
    let m = &spec.meter;
    let (pre_angles, mut post_angles) = (spec.pre_state, spec.post_state);
    let (cfg, dual) = match spec.sweep.axis {
        SweepAxis::G => (MeterConfig::from_strength(v, m.d)?, false),
        SweepAxis::Eps2 => (MeterConfig::dual(m.x0, m.d, v)?, true),
        SweepAxis::OverlapAngle => {
            post_angles.theta = v;
            (MeterConfig::new(m.x0, m.d)?, false)
        }
        SweepAxis::Delta => unreachable!("coin axis handled by coin_row"),
    };
    let pre = make_state(pre_angles.theta, pre_angles.phi)?;
    let post = make_state(post_angles.theta, post_angles.phi)?;
    let result: CoreResult<PpsResult> = if dual {
        pps_average_dual(&pre, &post, &cfg)
    } else {
        pps_average_compact(&pre, &post, &cfg)
    };
    let mut point = Point {
        g: Some(cfg.strength()),
        big_g: Some(big_g_of(cfg.strength())),
        re_aw: None,
        im_aw: None,
        analytic: None,
        m2: None,
        mc: None,
        scale: cfg.x0(),
        error: None,
    };
    match result {
        Ok(r) => {
            point.re_aw = r.aav.map(|w| w.re());
            point.im_aw = r.aav.map(|w| w.im());
            point.m2 = Some(r.m2);
            // Without a shift the ratio is the weak-measurement limit.
            point.analytic = r
                .avg_over_x0()
                .or_else(|| r.aav.map(|w| finite_strength_ratio(&w, r.big_g)));
        }
        Err(e) => point.error = Some(e),
    }
    if let Some(mc) = mc {
        let run = mc.with_mode(if dual {
            wv_core::UpdateMode::QuantumDualCoupling
        } else {
            wv_core::UpdateMode::Quantum
        });
        point.mc = Some(parallel::run_gaussian_pps(
            &density_of(&pre),
            &post,
            &cfg,
            &run,
        ));
    }
    Ok(point)
}

fn coin_row(spec: &RunSpec, delta: f64, mc: Option<&wv_core::McConfig>) -> Vec<Cell> {
    coin_point(spec, delta, mc)
        .unwrap_or_else(Point::failed)
        .into_row(delta)
}

fn coin_point(spec: &RunSpec, delta: f64, mc: Option<&wv_core::McConfig>) -> CoreResult<Point> {
    let cfg = CoinTossConfig::new(spec.coin.lambda, delta, spec.coin.p_up)?;
    let rule = spec.coin.post_rule().map_err(|_| WvError::Domain {
        what: "q_up/q_down",
        value: f64::NAN,
    })?;
    let r = coin_pps_average(&cfg, &rule)?;
    Ok(Point {
        g: None,
        big_g: None,
        re_aw: None,
        im_aw: None,
        analytic: Some(r.scaled()),
        m2: Some(r.m2),
        mc: mc.map(|mc| parallel::run_coin_toss(&cfg, &rule, mc)),
        scale: cfg.lambda(),
        error: None,
    })
}
