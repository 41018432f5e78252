#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use wv_core::{make_state, PureQubitState};

/// Haar-random pure state via uniform Bloch angles (cos θ uniform).
pub fn random_state<R: Rng>(rng: &mut R) -> PureQubitState {
    let theta = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
    let phi = PI * (2.0 * rng.random::<f64>() - 1.0);
    make_state(theta, phi).unwrap()
}

/// Simpson's rule on a uniform grid; a second, non-adaptive quadrature used
/// to check the library's adaptive integrator where both apply.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64);
    }
    sum * h / 3.0
}

/// `|a − b| ≤ tol · max(|b|, scale)`.
pub fn rel_close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(scale)
}
