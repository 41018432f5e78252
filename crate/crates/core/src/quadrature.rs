//! Globally adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets the requested tolerance. The error estimate of a panel is
//! the raw `|K15 − G7|` difference, which bounds the G7 error and therefore
//! overstates the error of the returned K15 value.

// The node and weight tables keep the published QUADPACK digits.
#![allow(clippy::excessive_precision)]

use alloc::vec::Vec;

use crate::error::{Result, WvError};

// Kronrod abscissae on [0, 1]; odd indices are the Gauss-7 nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Stopping rule: stop once `error ≤ max(abs, rel·|value|)`.
///
/// The round-off floor `50·ε·∫|f|` is always added, so integrals that cancel
/// to zero still terminate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    /// Absolute tolerance.
    pub abs: f64,
    /// Relative tolerance.
    pub rel: f64,
}

impl Tolerance {
    /// Purely relative tolerance.
    pub const fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel }
    }
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    /// K15 estimate of the integral.
    pub value: f64,
    /// Summed `|K15 − G7|` over the final panels.
    pub error: f64,
    /// Integrand evaluations spent.
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for (j, (&node, &wk)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * node;
        let (f1, f2) = (f(center - dx), f(center + dx));
        kronrod += wk * (f1 + f2);
        abs_sum += wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        abs_value: abs_sum * half.abs(),
    }
}

/// Integrates `f` over `[a, b]`, bisecting at most `max_panels − 1` times.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
    max_panels: usize,
) -> Result<Integral> {
    let mut panels: Vec<Panel> = Vec::with_capacity(max_panels.min(1024));
    panels.push(gauss_kronrod(&mut f, a, b));
    let mut evaluations = 15;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let abs_value: f64 = panels.iter().map(|p| p.abs_value).sum();
        let target = tol
            .abs
            .max(tol.rel * value.abs())
            .max(50.0 * f64::EPSILON * abs_value);
        if !value.is_finite() || !error.is_finite() {
            return Err(WvError::QuadratureNotConverged {
                estimate: value,
                error,
            });
        }
        if error <= target {
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }
        if panels.len() >= max_panels {
            return Err(WvError::QuadratureNotConverged {
                estimate: value,
                error,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let Panel { a, b, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (a + b);
        panels.push(gauss_kronrod(&mut f, a, mid));
        panels.push(gauss_kronrod(&mut f, mid, b));
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(
            |x| x * x * x - 2.0 * x + 1.0,
            -1.0,
            2.0,
            Tolerance::relative(1e-14),
            10,
        )
        .unwrap();
        assert!((r.value - 3.75).abs() < 1e-14);
    }

    #[test]
    fn gaussian_normalizes() {
        let r = integrate(
            |x| libm::exp(-0.5 * x * x) / libm::sqrt(2.0 * PI),
            -14.0,
            14.0,
            Tolerance::relative(1e-12),
            200,
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn cancelling_integrand_terminates() {
        let r = integrate(libm::sin, -3.0, 3.0, Tolerance::relative(1e-12), 200).unwrap();
        assert!(r.value.abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(
            |x| libm::cos(20.0 * x),
            0.0,
            PI,
            Tolerance::relative(1e-12),
            500,
        );
        let r = r.unwrap();
        assert!((r.value - libm::sin(20.0 * PI) / 20.0).abs() < 1e-12);
    }

    #[test]
    fn panel_limit_reports_non_convergence() {
        let r = integrate(
            |x| 1.0 / libm::sqrt(x.abs()),
            -1.0,
            1.0,
            Tolerance::relative(1e-14),
            8,
        );
        assert!(matches!(r, Err(WvError::QuadratureNotConverged { .. })));
    }
}
