//! Where the inequalities become equalities: confocal caustics of an ellipse and
//! the ellipse recovered from `cos 2d = A cos 2ψ`.

use serde::Serialize;

use crate::beam::{caustic_slope, riccati_step};
use crate::billmap::{caustic_parameter, forward_step, LineCoord};
use crate::error::{BilliardError, Result};
use crate::supportfn::{ellipse_support, SupportSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopfDefect {
    pub lambda: f64,
    pub omega: f64,
    pub omega1: f64,
    pub nu1: f64,
    pub image: (f64, f64),
    /// `p₁²ω₁ − p²ω − (p²S₁₁ + p₁²S₂₂ + S₁₂(p²ν₁ + p₁²/ν₁))`.
    pub identity: f64,
    /// `p²ν₁ + p₁²/ν₁ − 2pp₁`.
    pub am_gm: f64,
    /// `ν₁ − p₁/p`.
    pub ratio: f64,
}

/// Residuals of the weighted slope identity along a line tangent to a confocal
/// caustic of the ellipse with semi-axes `a ≥ b` (major axis along `ψ = 0`).
pub fn hopf_identity_ellipse(a: f64, b: f64, line: LineCoord) -> Result<HopfDefect> {
    let spec = ellipse_support(a, b)?;
    let lambda = caustic_parameter(a, b, line);
    if !(lambda > 0.0 && lambda < b * b) {
        return Err(BilliardError::NoRealCaustic { lambda });
    }
    let step = forward_step(&spec, line)?;
    let sd = step.derivatives;
    let image = step.image;
    let omega = caustic_slope(a, b, line);
    let omega1 = caustic_slope(a, b, image);
    let nu1 = riccati_step(&sd, omega)?.nu1;
    let (p, p1) = (line.p, image.p);
    let lhs = p1 * p1 * omega1 - p * p * omega;
    let rhs = p * p * sd.s11 + p1 * p1 * sd.s22 + sd.s12 * (p * p * nu1 + p1 * p1 / nu1);
    Ok(HopfDefect {
        lambda,
        omega,
        omega1,
        nu1,
        image: (image.p, image.phi),
        identity: lhs - rhs,
        am_gm: p * p * nu1 + p1 * p1 / nu1 - 2.0 * p * p1,
        ratio: nu1 - p1 / p,
    })
}

/// Ellipse with `h² = R²(1−A)/2 cos²ψ + R²(1+A)/2 sin²ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EqualityEllipse {
    /// Semi-axis along `ψ = 0`.
    pub along_x: f64,
    /// Semi-axis along `ψ = π/2`.
    pub along_y: f64,
}

impl EqualityEllipse {
    /// `(major, minor)`.
    pub fn semi_axes(&self) -> (f64, f64) {
        (
            self.along_x.max(self.along_y),
            self.along_x.min(self.along_y),
        )
    }

    pub fn support(&self) -> Result<SupportSpec> {
        SupportSpec::axis_aligned_ellipse(self.along_x, self.along_y)
    }
}

/// The table with `cos 2d(ψ) = A cos 2ψ` and orthoptic radius `R`.
///
/// The phase is fixed to zero, so for `A > 0` the major axis lies along
/// `ψ = π/2`; a rotated ellipse would need a nonzero phase.
pub fn equality_reconstruct(amplitude: f64, radius: f64) -> Result<EqualityEllipse> {
    if !(0.0..1.0).contains(&amplitude) {
        return Err(BilliardError::InvalidParameter(format!(
            "amplitude {amplitude} outside [0, 1)"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(BilliardError::InvalidParameter(format!(
            "radius {radius} must be positive"
        )));
    }
    Ok(EqualityEllipse {
        along_x: radius * ((1.0 - amplitude) / 2.0).sqrt(),
        along_y: radius * ((1.0 + amplitude) / 2.0).sqrt(),
    })
}
