//! The invariant curve of 4-periodic orbits and the checks around it.
//!
//! A table carrying such a curve `δ = d(ψ)` has 4-periodic orbits forming
//! parallelograms, tangent lines at consecutive vertices are perpendicular, and
//! `h²(ψ) + h²(ψ + π/2)` is a constant `R²`.

mod profile;

pub use profile::*;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;

use crate::billmap::{
    boundary_point, chart_to_line, geometric_reflect, BoundaryCoord, LineCoord, Point2,
};
use crate::error::Result;
use crate::supportfn::SupportSpec;

/// One 4-periodic orbit: the launch point and the three following vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PonceletQuad {
    pub points: [Point2; 4],
    /// Normal angles at the vertices, lifted so they increase.
    pub psi: [f64; 4],
    /// Momenta `p` of the four outgoing chord lines.
    pub momenta: [f64; 4],
    /// Fifth vertex, which should coincide with the first.
    pub closing_point: Point2,
    pub closing_psi: f64,
    /// Angles at which the chords leave each vertex.
    pub delta: [f64; 4],
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QuadResiduals {
    /// `|P₄ − P₀|`.
    pub closure: f64,
    /// `max(|P₂ + P₀|, |P₃ + P₁|)`.
    pub central_symmetry: f64,
    /// `max |ψᵢ₊₂ − ψᵢ − π|`.
    pub half_turn: f64,
    /// `max |δᵢ − d(ψᵢ)|`: the orbit stays on the curve.
    pub invariance: f64,
}

impl QuadResiduals {
    pub fn max(&self) -> f64 {
        self.closure
            .max(self.central_symmetry)
            .max(self.half_turn)
            .max(self.invariance)
    }

    fn merge(self, o: Self) -> Self {
        Self {
            closure: self.closure.max(o.closure),
            central_symmetry: self.central_symmetry.max(o.central_symmetry),
            half_turn: self.half_turn.max(o.half_turn),
            invariance: self.invariance.max(o.invariance),
        }
    }
}

/// Launch from `(ψ, d(ψ))` and reflect four times with the geometric oracle.
pub fn poncelet_quad(
    spec: &SupportSpec,
    d: &(dyn Fn(f64) -> f64 + Sync),
    psi: f64,
) -> Result<PonceletQuad> {
    let mut psis = [0.0; 5];
    let mut deltas = [0.0; 5];
    let mut current = BoundaryCoord { psi, delta: d(psi) };
    for i in 0..5 {
        psis[i] = current.psi;
        deltas[i] = current.delta;
        if i < 4 {
            current = geometric_reflect(spec, current.psi, current.delta)?;
        }
    }
    let points = [0, 1, 2, 3].map(|i| boundary_point(spec, psis[i]));
    let momenta = [0, 1, 2, 3].map(|i| {
        chart_to_line(
            spec,
            BoundaryCoord {
                psi: psis[i],
                delta: deltas[i],
            },
        )
        .p
    });
    Ok(PonceletQuad {
        points,
        psi: [psis[0], psis[1], psis[2], psis[3]],
        momenta,
        closing_point: boundary_point(spec, psis[4]),
        closing_psi: psis[4],
        delta: [deltas[0], deltas[1], deltas[2], deltas[3]],
    })
}

/// Parallelogram residuals of the orbit launched at `psi`.
pub fn verify_parallelogram(
    spec: &SupportSpec,
    d: &(dyn Fn(f64) -> f64 + Sync),
    psi: f64,
) -> Result<(PonceletQuad, QuadResiduals)> {
    let quad = poncelet_quad(spec, d, psi)?;
    let p = &quad.points;
    let lifted = [
        quad.psi[0],
        quad.psi[1],
        quad.psi[2],
        quad.psi[3],
        quad.closing_psi,
    ];
    let half_turn = (0..3)
        .map(|i| (lifted[i + 2] - lifted[i] - PI).abs())
        .fold(0.0, f64::max);
    let invariance = (0..4)
        .map(|i| (quad.delta[i] - d(quad.psi[i])).abs())
        .fold(0.0, f64::max);
    let residuals = QuadResiduals {
        closure: (quad.closing_point - p[0]).norm(),
        central_symmetry: (p[2] + p[0]).norm().max((p[3] + p[1]).norm()),
        half_turn,
        invariance,
    };
    Ok((quad, residuals))
}

/// `max |ψᵢ₊₁ − ψᵢ − π/2|` around the orbit launched at `psi`: consecutive
/// tangent lines are perpendicular.
pub fn verify_rectangle(
    spec: &SupportSpec,
    d: &(dyn Fn(f64) -> f64 + Sync),
    psi: f64,
) -> Result<f64> {
    let quad = poncelet_quad(spec, d, psi)?;
    let lifted = [
        quad.psi[0],
        quad.psi[1],
        quad.psi[2],
        quad.psi[3],
        quad.closing_psi,
    ];
    Ok((0..4)
        .map(|i| (lifted[i + 1] - lifted[i] - FRAC_PI_2).abs())
        .fold(0.0, f64::max))
}

/// Worst parallelogram and rectangle residuals over `n` equally spaced launch angles.
pub fn scan_quads(
    spec: &SupportSpec,
    d: &(dyn Fn(f64) -> f64 + Sync),
    n: usize,
) -> Result<(QuadResiduals, f64)> {
    let per_start: Vec<Result<(QuadResiduals, f64)>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let psi = TAU * j as f64 / n as f64;
            let (_, res) = verify_parallelogram(spec, d, psi)?;
            Ok((res, verify_rectangle(spec, d, psi)?))
        })
        .collect();
    let mut worst = (QuadResiduals::default(), 0.0f64);
    for r in per_start {
        let (res, rect) = r?;
        worst = (worst.0.merge(res), worst.1.max(rect));
    }
    Ok(worst)
}

/// Mean of `h²(ψ) + h²(ψ + π/2)` over the grid, and its largest deviation from the mean.
pub fn verify_orthoptic(spec: &SupportSpec, grid: usize) -> (f64, f64) {
    let sums: Vec<f64> = (0..grid)
        .into_par_iter()
        .map(|j| {
            let psi = TAU * j as f64 / grid as f64;
            spec.h(psi).powi(2) + spec.h(psi + FRAC_PI_2).powi(2)
        })
        .collect();
    let mean = sums.iter().sum::<f64>() / grid as f64;
    let deviation = sums.iter().map(|s| (s - mean).abs()).fold(0.0, f64::max);
    (mean, deviation)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationResiduals {
    /// `max |tan d(ψ) − h(ψ)/h(ψ + π/2)|`.
    pub support_ratio: f64,
    /// `max |tan d(ψ) + h′(ψ + π/2)/h′(ψ)|` over points with `|h′(ψ)| ≥ 1e−8`.
    pub derivative_ratio: f64,
    /// Grid points skipped by the second identity.
    pub skipped: usize,
}

pub const DERIVATIVE_SKIP: f64 = 1e-8;

pub fn verify_d_h_relations(
    spec: &SupportSpec,
    d: &(dyn Fn(f64) -> f64 + Sync),
    grid: usize,
) -> RelationResiduals {
    let per_point: Vec<(f64, Option<f64>)> = (0..grid)
        .into_par_iter()
        .map(|j| {
            let psi = TAU * j as f64 / grid as f64;
            let (here, quarter) = (spec.jet(psi), spec.jet(psi + FRAC_PI_2));
            let t = d(psi).tan();
            let first = (t - here.h / quarter.h).abs();
            let second =
                (here.dh.abs() >= DERIVATIVE_SKIP).then(|| (t + quarter.dh / here.dh).abs());
            (first, second)
        })
        .collect();
    let mut out = RelationResiduals {
        support_ratio: 0.0,
        derivative_ratio: 0.0,
        skipped: 0,
    };
    for (first, second) in per_point {
        out.support_ratio = out.support_ratio.max(first);
        match second {
            Some(r) => out.derivative_ratio = out.derivative_ratio.max(r),
            None => out.skipped += 1,
        }
    }
    out
}

/// The candidate curve angle implied by the first relation,
/// `d(ψ) = atan2(h(ψ), h(ψ + π/2))`; usable for any table.
pub fn derived_angle(spec: &SupportSpec, psi: f64) -> f64 {
    spec.h(psi).atan2(spec.h(psi + FRAC_PI_2))
}

/// Angle function and orthoptic radius of the invariant curve, for tables where it
/// is known in closed form: ellipses (`R² = a² + b²`) and profile tables.
pub fn curve_profile(spec: &SupportSpec) -> Option<(AngleFunction, f64)> {
    match spec {
        SupportSpec::Ellipse { a, b } => {
            let amplitude = (b * b - a * a) / (a * a + b * b);
            let profile = EllipseProfile::from_amplitude(amplitude).ok()?;
            Some((profile.into(), a.hypot(*b)))
        }
        SupportSpec::Profile { profile, radius } => Some((profile.clone(), *radius)),
        SupportSpec::Fourier(_) => None,
    }
}

/// Line of the invariant curve through the vertex with normal `psi`.
pub fn invariant_curve_line(spec: &SupportSpec, profile: &AngleFunction, psi: f64) -> LineCoord {
    chart_to_line(
        spec,
        BoundaryCoord {
            psi,
            delta: profile.d(psi),
        },
    )
}

/// Slope `dp/dφ` of the invariant curve at the line leaving `psi`.
pub fn invariant_curve_slope(spec: &SupportSpec, profile: &AngleFunction, psi: f64) -> f64 {
    let j = spec.jet(psi);
    let a = profile.eval(psi);
    let (s, c) = a.d.sin_cos();
    let dp = j.dh * c + j.ddh * s + a.dd * (j.dh * c - j.h * s);
    dp / (1.0 + a.dd)
}
