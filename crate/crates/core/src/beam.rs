//! Slopes of line bundles under the differential of the map.
//!
//! With `u = ∂/∂φ + ω ∂/∂p` spanning a line of an invariant monotone bundle,
//! `DT(u) = ν₁ u(T M)` and
//!
//! ```text
//! ν₁      = (−S₁₁ − ω) / S₁₂
//! ω(T M)  = S₂₂ + S₁₂ / ν₁
//! ```
//!
//! Pushing a vertical vector forward and watching for its `dφ` component to
//! change sign detects conjugate points.

use std::f64::consts::{FRAC_PI_4, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::billmap::{chart_to_line, forward_step, BoundaryCoord, LineCoord, SDerivatives};
use crate::error::{BilliardError, Result};
use crate::fourperiodic::{curve_profile, AngleFunction};
use crate::rng::UniformStream;
use crate::supportfn::{SupportSpec, TableJson};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamState {
    pub line: LineCoord,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub at: LineCoord,
    pub dp: f64,
    pub dphi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiStep {
    pub omega_next: f64,
    pub nu1: f64,
}

/// Propagate the slope `ω` through one reflection with derivatives `sd` at `(φ, φ₁)`.
pub fn riccati_step(sd: &SDerivatives, omega: f64) -> Result<RiccatiStep> {
    if !(sd.s12 > 0.0) {
        return Err(BilliardError::InvalidParameter(format!(
            "twist violated: S12 = {}",
            sd.s12
        )));
    }
    let nu1 = (-sd.s11 - omega) / sd.s12;
    if !(nu1 > 0.0) {
        return Err(BilliardError::MonotonicityBreak { nu1 });
    }
    Ok(RiccatiStep {
        omega_next: sd.s22 + sd.s12 / nu1,
        nu1,
    })
}

/// Backward slope step: `sd` are the derivatives at `(φ₋₁, φ)`. Returns
/// `ω(T⁻¹M)` and `ν₋₁(M) = (ω − S₂₂)/S₁₂`.
pub fn riccati_step_back(sd: &SDerivatives, omega: f64) -> Result<RiccatiStep> {
    if !(sd.s12 > 0.0) {
        return Err(BilliardError::InvalidParameter(format!(
            "twist violated: S12 = {}",
            sd.s12
        )));
    }
    let nu_back = (omega - sd.s22) / sd.s12;
    if !(nu_back > 0.0) {
        return Err(BilliardError::MonotonicityBreak { nu1: nu_back });
    }
    Ok(RiccatiStep {
        omega_next: -sd.s11 - sd.s12 / nu_back,
        nu1: nu_back,
    })
}

/// Image of a tangent vector under `DT`:
/// `dφ₁ = (−dp − S₁₁ dφ)/S₁₂`, `dp₁ = S₁₂ dφ + S₂₂ dφ₁`.
pub fn push_tangent(spec: &SupportSpec, tv: TangentVector) -> Result<TangentVector> {
    let step = forward_step(spec, tv.at)?;
    let (dp, dphi) = apply_differential(&step.derivatives, tv.dp, tv.dphi);
    Ok(TangentVector {
        at: step.image,
        dp,
        dphi,
    })
}

#[inline]
fn apply_differential(sd: &SDerivatives, dp: f64, dphi: f64) -> (f64, f64) {
    let dphi1 = (-dp - sd.s11 * dphi) / sd.s12;
    (sd.s12 * dphi + sd.s22 * dphi1, dphi1)
}

/// Push the vertical vector `(dp, dφ) = (1, 0)` forward and report the first
/// step `n ≥ 2` at which `dφ` changes sign, if any within `max_steps`.
///
/// After the first reflection `dφ₁ = −1/S₁₂ < 0`; returning to `dφ ≥ 0` means
/// the pushed vector crossed the vertical again.
pub fn detect_conjugate(
    spec: &SupportSpec,
    start: LineCoord,
    max_steps: usize,
) -> Result<Option<usize>> {
    let mut line = start;
    let (mut dp, mut dphi) = (1.0f64, 0.0f64);
    let mut previous_sign = 0.0f64;
    for n in 1..=max_steps {
        let step = forward_step(spec, line)?;
        (dp, dphi) = apply_differential(&step.derivatives, dp, dphi);
        let scale = dp.abs().max(dphi.abs());
        dp /= scale;
        dphi /= scale;
        line = step.image;
        let sign = if dphi > 0.0 {
            1.0
        } else if dphi < 0.0 {
            -1.0
        } else {
            0.0
        };
        if n > 1 && sign != previous_sign {
            return Ok(Some(n));
        }
        previous_sign = sign;
    }
    Ok(None)
}

/// Bounds `S₂₂(φ₋₁, φ) < ω < −S₁₁(φ, φ₁)` at each interior line of an orbit segment.
pub fn monotone_bounds(spec: &SupportSpec, segment: &[LineCoord]) -> Result<Vec<(f64, f64)>> {
    segment
        .windows(3)
        .map(|w| {
            let before = crate::billmap::s_derivatives(spec, w[0].phi, w[1].phi)?;
            let after = crate::billmap::s_derivatives(spec, w[1].phi, w[2].phi)?;
            Ok((before.s22, -after.s11))
        })
        .collect()
}

/// Slope `dp/dφ` of the confocal invariant graph `p² = (a²−λ)cos²φ + (b²−λ)sin²φ`
/// through `line`, for the axis-aligned ellipse with semi-axes `a`, `b`.
pub fn caustic_slope(a: f64, b: f64, line: LineCoord) -> f64 {
    (b * b - a * a) * (2.0 * line.phi).sin() / (2.0 * line.p)
}

/// Result of scanning many starts for conjugate points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateScanReport {
    pub table: Option<TableJson>,
    pub starts: usize,
    pub max_steps: usize,
    pub seed: u64,
    pub detections: Vec<Detection>,
    /// Starts whose orbit hit a solver error; reported, never silently dropped.
    pub failures: Vec<ScanFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub start_index: usize,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanFailure {
    pub start_index: usize,
    pub error: String,
}

/// Lower bound on the fraction of `d(ψ)` used when drawing start angles.
pub const MIN_START_FRACTION: f64 = 1e-3;

/// Seeded starts inside `{0 < δ < d(ψ)}`: `ψ = 2π·u₁`,
/// `δ = d(ψ)·(f + (1 − f)·u₂)` with `f =` [`MIN_START_FRACTION`]. Without a
/// profile the ceiling is `π/4`.
pub fn scan_starts(
    profile: Option<&AngleFunction>,
    starts: usize,
    seed: u64,
) -> Vec<BoundaryCoord> {
    let mut stream = UniformStream::new(seed);
    (0..starts)
        .map(|_| {
            let psi = TAU * stream.next_f64();
            let ceiling = profile.map_or(FRAC_PI_4, |p| p.d(psi));
            let fraction = MIN_START_FRACTION + (1.0 - MIN_START_FRACTION) * stream.next_f64();
            BoundaryCoord {
                psi,
                delta: ceiling * fraction,
            }
        })
        .collect()
}

/// Run [`detect_conjugate`] from every start; results are ordered by start index.
pub fn conjugate_scan(
    spec: &SupportSpec,
    profile: Option<&AngleFunction>,
    starts: usize,
    max_steps: usize,
    seed: u64,
) -> ConjugateScanReport {
    let outcomes: Vec<Result<Option<usize>>> = scan_starts(profile, starts, seed)
        .into_par_iter()
        .map(|bc| detect_conjugate(spec, chart_to_line(spec, bc), max_steps))
        .collect();
    let mut detections = Vec::new();
    let mut failures = Vec::new();
    for (start_index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(Some(step)) => detections.push(Detection { start_index, step }),
            Ok(None) => {}
            Err(e) => failures.push(ScanFailure {
                start_index,
                error: e.to_string(),
            }),
        }
    }
    ConjugateScanReport {
        table: None,
        starts,
        max_steps,
        seed,
        detections,
        failures,
    }
}

/// Invariant-curve angle function to use for a table, when one is known.
pub fn default_profile(spec: &SupportSpec) -> Option<AngleFunction> {
    curve_profile(spec).map(|(profile, _)| profile)
}
