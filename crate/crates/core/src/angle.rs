//! Helpers for lifted angles.
//!
//! Angles live on the real line; they are reduced modulo 2π only where a
//! periodic function is evaluated.

use std::f64::consts::{PI, TAU};

/// Reduce a lifted angle to `[0, 2π)`.
#[inline]
pub fn reduce(psi: f64) -> f64 {
    let r = psi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduce a lifted angle to `[0, π)`.
#[inline]
pub fn reduce_half(psi: f64) -> f64 {
    let r = psi.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Uniform grid `j * period / n`, `j = 0..n`.
pub fn grid(n: usize, period: f64) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |j| j as f64 * period / n as f64)
}
