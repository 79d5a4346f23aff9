//! Support functions of convex tables.
//!
//! A table is described by its support function `h(ψ)`, the signed distance
//! from the origin to the tangent line with outer normal angle `ψ`. The curve
//! is recovered as `γ(ψ) = h·n + h′·t` and its radius of curvature is
//! `ρ = h + h″`, which must stay positive.
//!
//! Three representations share one evaluation interface:
//! - a finite Fourier series,
//! - the closed-form ellipse `h² = a²cos²ψ + b²sin²ψ`,
//! - a table built from an angle profile, `h = R sin d(ψ)`.

use std::f64::consts::{PI, TAU};

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::angle;
use crate::error::{BilliardError, Result};
use crate::fourperiodic::{AngleFunction, AngleProfile, Harmonic};

/// Default number of grid points used when validating a table.
pub const VALIDATION_GRID: usize = 512;

/// `(h, h′, h″)` at one normal angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub h: f64,
    pub dh: f64,
    pub ddh: f64,
}

impl Jet2 {
    /// Radius of curvature `h + h″`.
    #[inline]
    pub fn rho(&self) -> f64 {
        self.h + self.ddh
    }

    #[inline]
    pub fn curvature(&self) -> f64 {
        1.0 / self.rho()
    }
}

/// Truncated Fourier series `c0 + Σₖ (aₖ cos kψ + bₖ sin kψ)`; `cos[k-1]` is harmonic `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    pub c0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    fn jet(&self, psi: f64) -> Jet2 {
        let psi = angle::reduce(psi);
        let mut jet = Jet2 {
            h: self.c0,
            dh: 0.0,
            ddh: 0.0,
        };
        let terms = self.cos.len().max(self.sin.len());
        for k in 1..=terms {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            let kf = k as f64;
            let (s, c) = (kf * psi).sin_cos();
            let v = a * c + b * s;
            jet.h += v;
            jet.dh += kf * (b * c - a * s);
            jet.ddh -= kf * kf * v;
        }
        jet
    }

    /// `∫₀^ψ h` for `ψ ∈ [0, 2π]`, term by term.
    fn integral_of_h(&self, psi: f64) -> f64 {
        let mut acc = self.c0 * psi;
        let terms = self.cos.len().max(self.sin.len());
        for k in 1..=terms {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            let kf = k as f64;
            acc += (a * (kf * psi).sin() + b * (1.0 - (kf * psi).cos())) / kf;
        }
        acc
    }
}

/// A validated convex table. Construct through [`SupportSpec::fourier`],
/// [`ellipse_support`], [`table_from_profile`] or from JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportSpec {
    Fourier(FourierSeries),
    /// Axis-aligned ellipse with semi-axis `a` along `ψ = 0` and `b` along `ψ = π/2`.
    Ellipse {
        a: f64,
        b: f64,
    },
    Profile {
        profile: AngleFunction,
        radius: f64,
    },
}

impl SupportSpec {
    pub fn fourier(c0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if !(c0.is_finite() && cos.iter().chain(&sin).all(|v| v.is_finite())) {
            return Err(BilliardError::InvalidParameter(
                "non-finite Fourier coefficient".into(),
            ));
        }
        let spec = SupportSpec::Fourier(FourierSeries { c0, cos, sin });
        spec.validate(VALIDATION_GRID)?;
        Ok(spec)
    }

    /// Ellipse with semi-axes along the coordinate axes, in either order.
    pub fn axis_aligned_ellipse(along_x: f64, along_y: f64) -> Result<Self> {
        if !(along_x > 0.0 && along_y > 0.0 && along_x.is_finite() && along_y.is_finite()) {
            return Err(BilliardError::InvalidAxes {
                a: along_x,
                b: along_y,
            });
        }
        Ok(SupportSpec::Ellipse {
            a: along_x,
            b: along_y,
        })
    }

    pub fn circle(radius: f64) -> Result<Self> {
        ellipse_support(radius, radius)
    }

    pub fn jet(&self, psi: f64) -> Jet2 {
        match self {
            SupportSpec::Fourier(f) => f.jet(psi),
            SupportSpec::Ellipse { a, b } => ellipse_jet(*a, *b, psi),
            SupportSpec::Profile { profile, radius } => {
                let j = profile.eval(psi);
                let (s, c) = j.d.sin_cos();
                Jet2 {
                    h: radius * s,
                    dh: radius * c * j.dd,
                    ddh: radius * (c * j.ddd - s * j.dd * j.dd),
                }
            }
        }
    }

    #[inline]
    pub fn h(&self, psi: f64) -> f64 {
        match self {
            SupportSpec::Ellipse { a, b } => {
                let (s, c) = psi.sin_cos();
                (a * a * c * c + b * b * s * s).sqrt()
            }
            _ => self.jet(psi).h,
        }
    }

    /// The angle profile attached to a profile-built table.
    pub fn profile(&self) -> Option<&AngleFunction> {
        match self {
            SupportSpec::Profile { profile, .. } => Some(profile),
            _ => None,
        }
    }

    /// Check `h > 0` and `ρ > 0` (strictly) on `grid` points over `[0, 2π)`.
    pub fn validate(&self, grid: usize) -> Result<()> {
        for psi in angle::grid(grid, TAU) {
            let j = self.jet(psi);
            if !(j.h > 0.0) {
                return Err(BilliardError::NonPositiveSupport { psi, h: j.h });
            }
            if !(j.rho() > 0.0) {
                return Err(BilliardError::CurvatureViolation { psi, rho: j.rho() });
            }
        }
        Ok(())
    }

    /// Smallest `(h, ρ)` seen on the grid.
    pub fn grid_minima(&self, grid: usize) -> (f64, f64) {
        angle::grid(grid, TAU).fold((f64::INFINITY, f64::INFINITY), |(mh, mr), psi| {
            let j = self.jet(psi);
            (mh.min(j.h), mr.min(j.rho()))
        })
    }

    /// `max |h(ψ + π) − h(ψ)|` on the grid.
    pub fn symmetry_deviation(&self, grid: usize) -> f64 {
        angle::grid(grid, PI)
            .map(|psi| (self.h(psi + PI) - self.h(psi)).abs())
            .fold(0.0, f64::max)
    }

    pub fn require_central_symmetry(&self, grid: usize, tol: f64) -> Result<()> {
        let deviation = self.symmetry_deviation(grid);
        if deviation > tol {
            return Err(BilliardError::NotCentrallySymmetric { deviation });
        }
        Ok(())
    }

    /// Arclength `s(ψ) = ∫₀^ψ ρ` on the lifted angle.
    pub fn arclength(&self, psi: f64) -> f64 {
        let turns = (psi / TAU).floor();
        let rest = psi - turns * TAU;
        turns * self.perimeter() + self.arclength_within_turn(rest)
    }

    /// Total perimeter `∫₀^{2π} h`.
    pub fn perimeter(&self) -> f64 {
        match self {
            SupportSpec::Fourier(f) => TAU * f.c0,
            _ => self.integral_of_h(TAU),
        }
    }

    fn arclength_within_turn(&self, psi: f64) -> f64 {
        // ∫ρ = ∫h + h′(ψ) − h′(0)
        let dh = self.jet(psi).dh - self.jet(0.0).dh;
        match self {
            SupportSpec::Fourier(f) => f.integral_of_h(psi) + dh,
            _ => self.integral_of_h(psi) + dh,
        }
    }

    fn integral_of_h(&self, psi: f64) -> f64 {
        if psi <= 0.0 {
            return 0.0;
        }
        let rule = GaussLegendre::new(20).expect("20-point Gauss-Legendre rule");
        let panels = ((psi / TAU) * 32.0).ceil().max(1.0) as usize;
        let width = psi / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = k as f64 * width;
                rule.integrate(lo, lo + width, |t| self.h(t))
            })
            .sum()
    }
}

fn ellipse_jet(a: f64, b: f64, psi: f64) -> Jet2 {
    let (s, c) = psi.sin_cos();
    let (s2, c2) = (2.0 * psi).sin_cos();
    let q = a * a * c * c + b * b * s * s;
    let dq = (b * b - a * a) * s2;
    let ddq = 2.0 * (b * b - a * a) * c2;
    let h = q.sqrt();
    let dh = dq / (2.0 * h);
    Jet2 {
        h,
        dh,
        ddh: (0.5 * ddq - dh * dh) / h,
    }
}

/// Ellipse table with semi-axes `a ≥ b > 0`, major axis along `ψ = 0`.
pub fn ellipse_support(a: f64, b: f64) -> Result<SupportSpec> {
    if !(b > 0.0 && a >= b && a.is_finite()) {
        return Err(BilliardError::InvalidAxes { a, b });
    }
    Ok(SupportSpec::Ellipse { a, b })
}

/// Table `h = R sin d(ψ)` built from an invariant-curve profile.
///
/// Fails with `CurvatureViolation` when the profile is too wild to bound a
/// convex table.
pub fn table_from_profile(profile: impl Into<AngleFunction>, radius: f64) -> Result<SupportSpec> {
    table_from_profile_on(profile, radius, VALIDATION_GRID)
}

pub fn table_from_profile_on(
    profile: impl Into<AngleFunction>,
    radius: f64,
    grid: usize,
) -> Result<SupportSpec> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(BilliardError::InvalidParameter(format!(
            "radius {radius} must be positive"
        )));
    }
    let profile = profile.into();
    profile.validate(grid.max(1024))?;
    let spec = SupportSpec::Profile { profile, radius };
    spec.validate(grid)?;
    Ok(spec)
}

/// JSON table description.
///
/// ```json
/// {"type":"ellipse","a":2,"b":1}
/// {"type":"fourier","c0":1,"cos":[0,0.1],"sin":[]}
/// {"type":"profile","R":1,"d_modes":[[2,0.1,0],[6,0.01,0]]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TableJson {
    Ellipse {
        a: f64,
        b: f64,
    },
    Fourier {
        c0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Profile {
        #[serde(rename = "R")]
        radius: f64,
        #[serde(default)]
        d_modes: Vec<[f64; 3]>,
    },
}

impl TableJson {
    /// Harmonics of a profile description; rejects non-integer or inadmissible indices.
    pub fn angle_profile(&self) -> Option<Result<AngleProfile>> {
        let TableJson::Profile { d_modes, .. } = self else {
            return None;
        };
        let modes: Result<Vec<Harmonic>> = d_modes
            .iter()
            .map(|&[n, cos, sin]| {
                if n.fract() != 0.0 || n < 0.0 || n > u32::MAX as f64 {
                    return Err(BilliardError::InvalidParameter(format!(
                        "harmonic index {n} is not a non-negative integer"
                    )));
                }
                Ok(Harmonic {
                    n: n as u32,
                    cos,
                    sin,
                })
            })
            .collect();
        Some(modes.and_then(AngleProfile::new))
    }
}

impl TryFrom<&TableJson> for SupportSpec {
    type Error = BilliardError;

    fn try_from(json: &TableJson) -> Result<Self> {
        match json {
            TableJson::Ellipse { a, b } => ellipse_support(*a, *b),
            TableJson::Fourier { c0, cos, sin } => {
                SupportSpec::fourier(*c0, cos.clone(), sin.clone())
            }
            TableJson::Profile { radius, .. } => {
                let profile = json.angle_profile().expect("profile variant")?;
                table_from_profile(profile, *radius)
            }
        }
    }
}

/// Outcome of validating a JSON table description, check by check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableValidation {
    pub min_h: f64,
    pub min_rho: f64,
    pub positive_support: bool,
    pub positive_curvature: bool,
    pub symmetry_deviation: f64,
    pub centrally_symmetric: bool,
    /// `None` for non-profile tables.
    pub admissible_modes: Option<bool>,
    pub profile_in_range: Option<bool>,
    pub errors: Vec<String>,
}

impl TableValidation {
    pub fn passed(&self) -> bool {
        self.positive_support
            && self.positive_curvature
            && self.centrally_symmetric
            && self.admissible_modes.unwrap_or(true)
            && self.profile_in_range.unwrap_or(true)
    }
}

/// Run every table check without stopping at the first failure.
pub fn validate_table(json: &TableJson, grid: usize, symmetry_tol: f64) -> TableValidation {
    let mut errors = Vec::new();
    let mut admissible_modes = None;
    let mut profile_in_range = None;
    let raw: Option<SupportSpec> = match json {
        TableJson::Ellipse { a, b } => match ellipse_support(*a, *b) {
            Ok(s) => Some(s),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        },
        TableJson::Fourier { c0, cos, sin } => Some(SupportSpec::Fourier(FourierSeries {
            c0: *c0,
            cos: cos.clone(),
            sin: sin.clone(),
        })),
        TableJson::Profile { radius, .. } => match json.angle_profile().expect("profile variant") {
            Ok(profile) => {
                admissible_modes = Some(true);
                let in_range = profile.validate(grid.max(1024));
                if let Err(e) = &in_range {
                    errors.push(e.to_string());
                }
                profile_in_range = Some(in_range.is_ok());
                if *radius > 0.0 {
                    Some(SupportSpec::Profile {
                        profile: profile.into(),
                        radius: *radius,
                    })
                } else {
                    errors.push(format!("radius {radius} must be positive"));
                    None
                }
            }
            Err(e) => {
                admissible_modes = Some(false);
                errors.push(e.to_string());
                None
            }
        },
    };
    let Some(spec) = raw else {
        return TableValidation {
            min_h: f64::NAN,
            min_rho: f64::NAN,
            positive_support: false,
            positive_curvature: false,
            symmetry_deviation: f64::NAN,
            centrally_symmetric: false,
            admissible_modes,
            profile_in_range,
            errors,
        };
    };
    let (min_h, min_rho) = spec.grid_minima(grid);
    if !(min_h > 0.0) {
        errors.push(format!(
            "support function not positive (min h = {min_h:.6e})"
        ));
    }
    if !(min_rho > 0.0) {
        errors.push(
            BilliardError::CurvatureViolation {
                psi: argmin_rho(&spec, grid),
                rho: min_rho,
            }
            .to_string(),
        );
    }
    let symmetry_deviation = spec.symmetry_deviation(grid);
    if symmetry_deviation > symmetry_tol {
        errors.push(
            BilliardError::NotCentrallySymmetric {
                deviation: symmetry_deviation,
            }
            .to_string(),
        );
    }
    TableValidation {
        min_h,
        min_rho,
        positive_support: min_h > 0.0,
        positive_curvature: min_rho > 0.0,
        symmetry_deviation,
        centrally_symmetric: symmetry_deviation <= symmetry_tol,
        admissible_modes,
        profile_in_range,
        errors,
    }
}

fn argmin_rho(spec: &SupportSpec, grid: usize) -> f64 {
    angle::grid(grid, TAU)
        .map(|psi| (psi, spec.jet(psi).rho()))
        .fold((0.0, f64::INFINITY), |best, cur| {
            if cur.1 < best.1 {
                cur
            } else {
                best
            }
        })
        .0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourperiodic::{ellipse_profile, AngleProfile};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn ellipse_jet_at_vertex() {
        let e = ellipse_support(2.0, 1.0).unwrap();
        let j = e.jet(0.0);
        assert_close(j.h, 2.0, 1e-15);
        assert_close(j.dh, 0.0, 1e-15);
        assert_close(j.ddh, -1.5, 1e-15);
        assert_close(j.rho(), 0.5, 1e-15);
        assert_close(e.h(FRAC_PI_2), 1.0, 1e-15);
        assert_close(e.h(FRAC_PI_4), 2.5f64.sqrt(), 1e-15);
    }

    #[test]
    fn unit_circle_representations() {
        let f = SupportSpec::fourier(1.0, vec![], vec![]).unwrap();
        let c = SupportSpec::circle(1.0).unwrap();
        let p = table_from_profile(AngleProfile::constant(), SQRT_2).unwrap();
        for psi in [0.0, 0.7, 2.0, -3.3, 40.0] {
            for spec in [&f, &c, &p] {
                let j = spec.jet(psi);
                assert_close(j.h, 1.0, 1e-15);
                assert_close(j.dh, 0.0, 1e-15);
                assert_close(j.ddh, 0.0, 1e-15);
            }
        }
        let small = table_from_profile(AngleProfile::constant(), 1.0).unwrap();
        assert_close(small.h(0.3), FRAC_PI_4.sin(), 1e-15);
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(ellipse_support(1.0, 2.0).is_err());
        assert!(ellipse_support(1.0, 0.0).is_err());
        assert!(ellipse_support(-1.0, -2.0).is_err());
        assert!(SupportSpec::axis_aligned_ellipse(1.0, 2.0).is_ok());
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let specs = [
            ellipse_support(2.0, 1.0).unwrap(),
            SupportSpec::fourier(1.0, vec![0.0, 0.05, 0.0, 0.01], vec![0.0, -0.03]).unwrap(),
            table_from_profile(
                AngleProfile::constant()
                    .with_mode(2, 0.1, 0.02)
                    .unwrap()
                    .with_mode(6, 0.01, 0.0)
                    .unwrap(),
                1.5,
            )
            .unwrap(),
        ];
        let step = 1e-5;
        for spec in &specs {
            for k in 0..64 {
                let psi = 0.1 * k as f64;
                let j = spec.jet(psi);
                let (hp, hm) = (spec.jet(psi + step).h, spec.jet(psi - step).h);
                let fd1 = (hp - hm) / (2.0 * step);
                let fd2 = (hp - 2.0 * j.h + hm) / (step * step);
                assert!((j.dh - fd1).abs() <= 1e-6 * j.dh.abs().max(1.0));
                assert!((j.ddh - fd2).abs() <= 1e-4 * j.ddh.abs().max(1.0));
            }
        }
    }

    #[test]
    fn ellipse_quarter_turn_identity() {
        let e = ellipse_support(2.0, 1.0).unwrap();
        for k in 0..2048 {
            let psi = TAU * k as f64 / 2048.0;
            let s = e.h(psi).powi(2) + e.h(psi + FRAC_PI_2).powi(2);
            assert_close(s, 5.0, 1e-10);
        }
    }

    #[test]
    fn profile_of_ellipse_reproduces_ellipse() {
        let from_profile =
            table_from_profile(ellipse_profile(2.0, 1.0).unwrap(), 5f64.sqrt()).unwrap();
        let e = ellipse_support(2.0, 1.0).unwrap();
        for k in 0..1000 {
            let psi = TAU * k as f64 / 1000.0;
            let (a, b) = (from_profile.jet(psi), e.jet(psi));
            assert_close(a.h, b.h, 1e-10);
            assert_close(a.dh, b.dh, 1e-9);
            assert_close(a.ddh, b.ddh, 1e-8);
        }
    }

    #[test]
    fn wild_profile_is_rejected() {
        // π/4 + 0.4 cos 2ψ + 0.3 cos 6ψ: ρ dips to about -6.8
        let wild = AngleProfile::constant()
            .with_mode(2, 0.4, 0.0)
            .unwrap()
            .with_mode(6, 0.3, 0.0)
            .unwrap();
        assert!(matches!(
            table_from_profile(wild, 1.0),
            Err(BilliardError::CurvatureViolation { .. })
        ));
    }

    #[test]
    fn large_second_harmonic_breaks_convexity() {
        assert!(matches!(
            SupportSpec::fourier(1.0, vec![0.0, 0.9], vec![]),
            Err(BilliardError::CurvatureViolation { .. })
        ));
    }

    #[test]
    fn arclength_basics() {
        let c = SupportSpec::circle(1.0).unwrap();
        assert_close(c.arclength(PI), PI, 1e-13);
        assert_close(c.arclength(-PI), -PI, 1e-13);
        let e = ellipse_support(2.0, 1.0).unwrap();
        let perimeter = e.perimeter();
        for psi in [0.0, 0.4, 1.9, 5.0] {
            assert_close(
                e.arclength(psi + PI) - e.arclength(psi),
                perimeter / 2.0,
                1e-12,
            );
        }
        assert_close(e.arclength(TAU), perimeter, 1e-12);
        let f = SupportSpec::fourier(1.0, vec![0.0, 0.05], vec![0.0, 0.02]).unwrap();
        assert_close(f.arclength(TAU), TAU, 1e-13);
        let mut prev = f.arclength(0.0);
        for k in 1..200 {
            let s = f.arclength(0.05 * k as f64);
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn json_schema_round_trip() {
        let src = r#"{"type":"profile","R":1.0,"d_modes":[[2,0.1,0],[6,0.01,0]]}"#;
        let json: TableJson = serde_json::from_str(src).unwrap();
        let spec = SupportSpec::try_from(&json).unwrap();
        assert!(matches!(spec, SupportSpec::Profile { .. }));
        let back: TableJson = serde_json::from_str(&serde_json::to_string(&json).unwrap()).unwrap();
        assert_eq!(back, json);

        let bad: TableJson =
            serde_json::from_str(r#"{"type":"profile","R":1,"d_modes":[[3,0.1,0]]}"#).unwrap();
        assert_eq!(
            SupportSpec::try_from(&bad),
            Err(BilliardError::InadmissibleHarmonic(3))
        );
        let report = validate_table(&bad, 512, 1e-12);
        assert_eq!(report.admissible_modes, Some(false));
        assert!(!report.passed());
    }

    #[test]
    fn validation_report_flags_asymmetry() {
        let json = TableJson::Fourier {
            c0: 1.0,
            cos: vec![0.05],
            sin: vec![],
        };
        let report = validate_table(&json, 512, 1e-12);
        assert!(report.positive_curvature);
        assert!(!report.centrally_symmetric);
        assert!(!report.passed());
        let json = TableJson::Ellipse { a: 2.0, b: 1.0 };
        assert!(validate_table(&json, 512, 1e-12).passed());
    }
}
