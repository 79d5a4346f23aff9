//! The billiard ball map in the line chart `(p, φ)` and the boundary chart `(ψ, δ)`.
//!
//! An oriented line is `(p, φ)`: `φ` is the angle of its right unit normal and
//! `p` the signed distance from the origin (positive when the origin lies to
//! the left). The map is generated by `S(φ, φ₁) = 2h(ψ) sin δ` with
//! `ψ = (φ + φ₁)/2`, `δ = (φ₁ − φ)/2`:
//!
//! ```text
//! p  = −S₁ = h(ψ) cos δ − h′(ψ) sin δ
//! p₁ =  S₂ = h(ψ) cos δ + h′(ψ) sin δ
//! ```
//!
//! A boundary coordinate `(ψ, δ)` is the line leaving the boundary point with
//! outer normal angle `ψ` at angle `δ` from the positively oriented tangent.
//! All angles are lifted; `h` reduces them when it is evaluated.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{BilliardError, Result};
use crate::roots::solve_monotone;
use crate::supportfn::{Jet2, SupportSpec};

/// Incidence angles closer than this to `0` or `π` are treated as grazing.
pub const GRAZING_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCoord {
    pub p: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCoord {
    pub psi: f64,
    pub delta: f64,
}

/// Second partial derivatives of the generating function `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SDerivatives {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

impl SDerivatives {
    pub fn at(jet: &Jet2, delta: f64) -> Self {
        let (s, c) = delta.sin_cos();
        let half = 0.5 * (jet.ddh - jet.h) * s;
        SDerivatives {
            s11: half - jet.dh * c,
            s12: 0.5 * jet.rho() * s,
            s22: half + jet.dh * c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

fn half_separation(phi: f64, phi1: f64) -> Result<(f64, f64)> {
    let delta = 0.5 * (phi1 - phi);
    if !(delta > 0.0 && delta < PI) {
        return Err(BilliardError::SeparationOutOfRange { delta });
    }
    Ok((0.5 * (phi + phi1), delta))
}

/// `S(φ, φ₁) = 2h(ψ) sin δ`.
pub fn generating_s(spec: &SupportSpec, phi: f64, phi1: f64) -> Result<f64> {
    let (psi, delta) = half_separation(phi, phi1)?;
    Ok(2.0 * spec.h(psi) * delta.sin())
}

pub fn s_derivatives(spec: &SupportSpec, phi: f64, phi1: f64) -> Result<SDerivatives> {
    let (psi, delta) = half_separation(phi, phi1)?;
    Ok(SDerivatives::at(&spec.jet(psi), delta))
}

/// Momenta `(p, p₁)` of the incoming and outgoing lines of the chord `(φ, φ₁)`.
pub fn p_of(spec: &SupportSpec, phi: f64, phi1: f64) -> Result<(f64, f64)> {
    let (psi, delta) = half_separation(phi, phi1)?;
    let j = spec.jet(psi);
    let (s, c) = delta.sin_cos();
    Ok((j.h * c - j.dh * s, j.h * c + j.dh * s))
}

fn check_in_cylinder(spec: &SupportSpec, line: LineCoord) -> Result<()> {
    let top = spec.h(line.phi);
    let bottom = -spec.h(line.phi + PI);
    if !(line.p < top && line.p > bottom) {
        return Err(BilliardError::LineOutsideCylinder {
            p: line.p,
            phi: line.phi,
        });
    }
    Ok(())
}

fn check_grazing(delta: f64) -> Result<()> {
    if !(GRAZING_LIMIT..=PI - GRAZING_LIMIT).contains(&delta) {
        return Err(BilliardError::GrazingRay { delta });
    }
    Ok(())
}

/// One application of the map together with the data at the reflection point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MapStep {
    pub image: LineCoord,
    pub delta: f64,
    pub derivatives: SDerivatives,
}

/// Solve `p = h(φ+δ) cos δ − h′(φ+δ) sin δ` for `δ ∈ (0, π)`. The right side
/// has derivative `−ρ sin δ < 0`, so the root is unique.
pub(crate) fn forward_step(spec: &SupportSpec, line: LineCoord) -> Result<MapStep> {
    check_in_cylinder(spec, line)?;
    let LineCoord { p, phi } = line;
    let delta = solve_monotone(
        |d| {
            let j = spec.jet(phi + d);
            let (s, c) = d.sin_cos();
            (j.h * c - j.dh * s - p, -j.rho() * s)
        },
        0.0,
        PI,
    )?;
    check_grazing(delta)?;
    let j = spec.jet(phi + delta);
    let (s, c) = delta.sin_cos();
    Ok(MapStep {
        image: LineCoord {
            p: j.h * c + j.dh * s,
            phi: phi + 2.0 * delta,
        },
        delta,
        derivatives: SDerivatives::at(&j, delta),
    })
}

/// Solve `p₁ = h(φ₁−δ) cos δ + h′(φ₁−δ) sin δ` for `δ ∈ (0, π)`.
fn backward_delta(spec: &SupportSpec, line: LineCoord) -> Result<f64> {
    check_in_cylinder(spec, line)?;
    let LineCoord { p, phi } = line;
    let delta = solve_monotone(
        |d| {
            let j = spec.jet(phi - d);
            let (s, c) = d.sin_cos();
            (j.h * c + j.dh * s - p, -j.rho() * s)
        },
        0.0,
        PI,
    )?;
    check_grazing(delta)?;
    Ok(delta)
}

/// The billiard map `T(p, φ) = (p₁, φ₁)` with `φ₁ ∈ (φ, φ + 2π)`.
pub fn forward_map(spec: &SupportSpec, line: LineCoord) -> Result<LineCoord> {
    forward_step(spec, line).map(|s| s.image)
}

/// `T⁻¹(p₁, φ₁) = (p, φ)` with `φ ∈ (φ₁ − 2π, φ₁)`.
pub fn inverse_map(spec: &SupportSpec, line: LineCoord) -> Result<LineCoord> {
    let delta = backward_delta(spec, line)?;
    let j = spec.jet(line.phi - delta);
    let (s, c) = delta.sin_cos();
    Ok(LineCoord {
        p: j.h * c - j.dh * s,
        phi: line.phi - 2.0 * delta,
    })
}

/// Point-reflection of lines through the origin: `(p, φ) ↦ (p, φ + π)`.
pub fn symmetry_map(line: LineCoord) -> LineCoord {
    LineCoord {
        p: line.p,
        phi: line.phi + PI,
    }
}

/// `γ(ψ) = h·n + h′·t` with `n = (cos ψ, sin ψ)`, `t = (−sin ψ, cos ψ)`.
pub fn boundary_point(spec: &SupportSpec, psi: f64) -> Point2 {
    let j = spec.jet(psi);
    let (s, c) = psi.sin_cos();
    Point2::new(j.h * c - j.dh * s, j.h * s + j.dh * c)
}

/// `(ψ, δ) ↦ (p, φ) = (h cos δ + h′ sin δ, ψ + δ)`.
pub fn chart_to_line(spec: &SupportSpec, bc: BoundaryCoord) -> LineCoord {
    let j = spec.jet(bc.psi);
    let (s, c) = bc.delta.sin_cos();
    LineCoord {
        p: j.h * c + j.dh * s,
        phi: bc.psi + bc.delta,
    }
}

/// Inverse of [`chart_to_line`]: the point the line leaves from and its angle.
pub fn line_to_chart(spec: &SupportSpec, line: LineCoord) -> Result<BoundaryCoord> {
    let delta = backward_delta(spec, line)?;
    Ok(BoundaryCoord {
        psi: line.phi - delta,
        delta,
    })
}

/// Independent reflection oracle working with points and vectors only.
///
/// Shoots the chord from `γ(ψ)` at angle `δ` to the tangent, intersects it with
/// the curve by bisection and applies the mirror law `u′ = u − 2(u·n)n`.
pub fn geometric_reflect(spec: &SupportSpec, psi: f64, delta: f64) -> Result<BoundaryCoord> {
    check_grazing(delta)?;
    let start = boundary_point(spec, psi);
    let out_angle = psi + FRAC_PI_2 + delta;
    let u = Point2::new(out_angle.cos(), out_angle.sin());
    // right normal of the chord and its angle
    let normal = Point2::new(u.y, -u.x);
    let phi = normal.y.atan2(normal.x);
    let phi = phi + ((psi + delta - phi) / (2.0 * PI)).round() * 2.0 * PI;
    let offset = normal.dot(start);

    // N·γ(t) decreases from h(φ) to −h(φ+π) on [φ, φ+π]
    let g = |t: f64| normal.dot(boundary_point(spec, t)) - offset;
    let (mut lo, mut hi) = (phi, phi + PI);
    let (g_lo, g_hi) = (g(lo), g(hi));
    if !(g_lo >= 0.0 && g_hi < 0.0) {
        return Err(BilliardError::IntersectionFailure(format!(
            "no sign change along the chord: g = ({g_lo:e}, {g_hi:e})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let psi1 = 0.5 * (lo + hi);
    let (s1, c1) = psi1.sin_cos();
    let n1 = Point2::new(c1, s1);
    let t1 = Point2::new(-s1, c1);
    let un = u.dot(n1);
    let reflected = Point2::new(u.x - 2.0 * un * n1.x, u.y - 2.0 * un * n1.y);
    let delta1 = (-reflected.dot(n1)).atan2(reflected.dot(t1));
    if !(delta1 > 0.0 && delta1 < PI) {
        return Err(BilliardError::IntersectionFailure(format!(
            "reflected ray leaves the table (delta1 = {delta1})"
        )));
    }
    Ok(BoundaryCoord {
        psi: psi1,
        delta: delta1,
    })
}

/// Stencil step of [`jacobian_check`] relative to the distance from grazing.
pub const JACOBIAN_STEP: f64 = 3e-4;

/// Determinant of the finite-difference Jacobian of [`forward_map`] at `line`.
///
/// Fourth-order central differences with step `JACOBIAN_STEP·min(sin δ₀, sin δ)²`,
/// where `δ₀` is the angle the line leaves the boundary at and `δ` the half-angle
/// of the reflection. Near grazing `h − p ≈ ρδ²/2`, so the map varies on the
/// scale `sin²δ` in `p`, and its large entries cancel down to a determinant of 1.
pub fn jacobian_check(spec: &SupportSpec, line: LineCoord) -> Result<f64> {
    let leaving = backward_delta(spec, line)?;
    let reflecting = forward_step(spec, line)?.delta;
    let eps = JACOBIAN_STEP * leaving.sin().min(reflecting.sin()).powi(2);
    let at = |dp: f64, dphi: f64| {
        forward_map(
            spec,
            LineCoord {
                p: line.p + dp,
                phi: line.phi + dphi,
            },
        )
    };
    let derivative = |dir: (f64, f64)| -> Result<(f64, f64)> {
        let [a, b, c, d] = [2.0, 1.0, -1.0, -2.0].map(|k| at(k * eps * dir.0, k * eps * dir.1));
        let (a, b, c, d) = (a?, b?, c?, d?);
        let stencil =
            |f2: f64, f1: f64, m1: f64, m2: f64| (-f2 + 8.0 * f1 - 8.0 * m1 + m2) / (12.0 * eps);
        Ok((
            stencil(a.p, b.p, c.p, d.p),
            stencil(a.phi, b.phi, c.phi, d.phi),
        ))
    };
    let (dp1_dp, dphi1_dp) = derivative((1.0, 0.0))?;
    let (dp1_dphi, dphi1_dphi) = derivative((0.0, 1.0))?;
    Ok(dp1_dp * dphi1_dphi - dp1_dphi * dphi1_dp)
}

/// Caustic parameter `λ = a²cos²φ + b²sin²φ − p²` of a line in an axis-aligned ellipse.
pub fn caustic_parameter(a: f64, b: f64, line: LineCoord) -> f64 {
    let (s, c) = line.phi.sin_cos();
    a * a * c * c + b * b * s * s - line.p * line.p
}

/// One row of an orbit trace: the outgoing line at the `step`-th bounce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitRow {
    pub step: usize,
    pub psi: f64,
    pub delta: f64,
    pub p: f64,
    pub phi: f64,
    pub x: f64,
    pub y: f64,
}

/// Iterate the map from a boundary coordinate. Returns all rows computed
/// before a failure, and the failure if one occurred.
pub fn trace_orbit(
    spec: &SupportSpec,
    start: BoundaryCoord,
    steps: usize,
) -> (Vec<OrbitRow>, Option<BilliardError>) {
    let mut rows = Vec::with_capacity(steps + 1);
    let row = |step: usize, bc: BoundaryCoord, line: LineCoord| {
        let pt = boundary_point(spec, bc.psi);
        OrbitRow {
            step,
            psi: bc.psi,
            delta: bc.delta,
            p: line.p,
            phi: line.phi,
            x: pt.x,
            y: pt.y,
        }
    };
    if let Err(e) = check_grazing(start.delta) {
        return (rows, Some(e));
    }
    let mut line = chart_to_line(spec, start);
    rows.push(row(0, start, line));
    for step in 1..=steps {
        match forward_step(spec, line) {
            Ok(s) => {
                line = s.image;
                let bc = BoundaryCoord {
                    psi: line.phi - s.delta,
                    delta: s.delta,
                };
                rows.push(row(step, bc, line));
            }
            Err(e) => return (rows, Some(e)),
        }
    }
    (rows, None)
}
