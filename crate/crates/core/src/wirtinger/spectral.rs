//! Uniform periodic grids: FFT differentiation, rectangle-rule quadrature and
//! real Fourier coefficients.

use std::f64::consts::{PI, TAU};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{BilliardError, Result};

pub const MIN_SAMPLES: usize = 64;
/// Energy fraction in the top eighth of the spectrum above which a warning is logged.
pub const ALIASING_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Period {
    Pi,
    TwoPi,
}

impl Period {
    pub fn length(self) -> f64 {
        match self {
            Period::Pi => PI,
            Period::TwoPi => TAU,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSamples {
    values: Vec<f64>,
    period: Period,
}

impl PeriodicSamples {
    pub fn new(values: Vec<f64>, period: Period) -> Result<Self> {
        check_grid(values.len())?;
        Ok(Self { values, period })
    }

    /// Sample `f` at `ψⱼ = j·L/n`.
    pub fn sample(n: usize, period: Period, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_grid(n)?;
        let step = period.length() / n as f64;
        Ok(Self {
            values: (0..n).map(|j| f(j as f64 * step)).collect(),
            period,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period(&self) -> Period {
        self.period
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.period.length() / self.len() as f64
    }
}

pub(crate) fn check_grid(n: usize) -> Result<()> {
    if n >= MIN_SAMPLES && n.is_power_of_two() {
        Ok(())
    } else {
        Err(BilliardError::InvalidGrid(n))
    }
}

fn spectrum(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

/// Signed integer frequency of FFT bin `k`.
fn wavenumber(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Fraction of spectral energy in bins with `|k| > 3n/8`.
pub fn aliasing_fraction(samples: &PeriodicSamples) -> f64 {
    let n = samples.len();
    let spec = spectrum(samples.values());
    let total: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let top: f64 = spec
        .iter()
        .enumerate()
        .filter(|(k, _)| wavenumber(*k, n).abs() > 3.0 * n as f64 / 8.0)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    top / total
}

/// First or second derivative of a periodic grid function.
///
/// The Nyquist bin is dropped for the first derivative (its derivative is not real).
pub fn spectral_derivative(samples: &PeriodicSamples, order: u32) -> Result<PeriodicSamples> {
    if !(order == 1 || order == 2) {
        return Err(BilliardError::InvalidParameter(format!(
            "derivative order {order}"
        )));
    }
    let n = samples.len();
    let mut spec = spectrum(samples.values());
    let top: f64 = spec
        .iter()
        .enumerate()
        .filter(|(k, _)| wavenumber(*k, n).abs() > 3.0 * n as f64 / 8.0)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    let total: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
    if total > 0.0 && top / total > ALIASING_THRESHOLD {
        log::warn!(
            "spectral derivative on {n} points: top-band energy fraction {:.3e}",
            top / total
        );
    }
    let base = TAU / samples.period.length();
    for (k, c) in spec.iter_mut().enumerate() {
        let w = base * wavenumber(k, n);
        *c = match order {
            1 if k == n / 2 => Complex64::new(0.0, 0.0),
            1 => *c * Complex64::new(0.0, w),
            _ => *c * (-w * w),
        };
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    let scale = 1.0 / n as f64;
    Ok(PeriodicSamples {
        values: spec.iter().map(|c| c.re * scale).collect(),
        period: samples.period,
    })
}

/// Compensated (Neumaier) sum.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// `(L/n)·Σ values`, spectrally accurate for smooth periodic integrands.
pub fn periodic_quadrature(samples: &PeriodicSamples) -> f64 {
    samples.period.length() / samples.len() as f64 * neumaier_sum(samples.values.iter().copied())
}

/// `f ≈ a₀ + Σₖ aₖ cos(kωψ) + bₖ sin(kωψ)`, `ω = 2π/L`, for `k = 1..n/2−1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierCoefficients {
    pub a0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

pub fn fourier_coefficients(samples: &PeriodicSamples) -> FourierCoefficients {
    let n = samples.len();
    let spec = spectrum(samples.values());
    let scale = 2.0 / n as f64;
    FourierCoefficients {
        a0: spec[0].re / n as f64,
        cos: (1..n / 2).map(|k| spec[k].re * scale).collect(),
        sin: (1..n / 2).map(|k| -spec[k].im * scale).collect(),
    }
}
