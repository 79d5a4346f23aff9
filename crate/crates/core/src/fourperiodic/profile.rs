//! Angle functions `d(ψ)` describing a candidate invariant curve `{δ = d(ψ)}`
//! of 4-periodic orbits.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::angle;
use crate::error::{BilliardError, Result};

/// Value and first two derivatives of an angle function at one `ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleJet {
    pub d: f64,
    pub dd: f64,
    pub ddd: f64,
}

/// One Fourier mode `cos·cos(nψ) + sin·sin(nψ)` of an angle profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub n: u32,
    pub cos: f64,
    pub sin: f64,
}

/// `d(ψ) = π/4 + Σ (cₙ cos nψ + sₙ sin nψ)` with every `n ≡ 2 (mod 4)`.
///
/// The mean is not a parameter: `d(ψ + π/2) = π/2 − d(ψ)` forces it to be π/4,
/// and the harmonic restriction makes the relation hold structurally.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AngleProfile {
    harmonics: Vec<Harmonic>,
}

impl AngleProfile {
    /// The constant profile `d ≡ π/4` (circular tables).
    pub fn constant() -> Self {
        Self::default()
    }

    pub fn new(harmonics: impl IntoIterator<Item = Harmonic>) -> Result<Self> {
        harmonics
            .into_iter()
            .try_fold(Self::constant(), |p, m| p.with_mode(m.n, m.cos, m.sin))
    }

    /// Add a mode; rejects harmonics with `n ≢ 2 (mod 4)`.
    pub fn with_mode(mut self, n: u32, cos: f64, sin: f64) -> Result<Self> {
        if n % 4 != 2 {
            return Err(BilliardError::InadmissibleHarmonic(n));
        }
        if !cos.is_finite() || !sin.is_finite() {
            return Err(BilliardError::InvalidParameter(format!(
                "non-finite amplitude for harmonic {n}"
            )));
        }
        self.harmonics.push(Harmonic { n, cos, sin });
        Ok(self)
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn eval(&self, psi: f64) -> AngleJet {
        let psi = angle::reduce_half(psi);
        let mut jet = AngleJet {
            d: FRAC_PI_4,
            dd: 0.0,
            ddd: 0.0,
        };
        for m in &self.harmonics {
            let n = m.n as f64;
            let (s, c) = (n * psi).sin_cos();
            let v = m.cos * c + m.sin * s;
            jet.d += v;
            jet.dd += n * (m.sin * c - m.cos * s);
            jet.ddd -= n * n * v;
        }
        jet
    }

    /// Check `0 < d < π/2` on a uniform grid over one period.
    pub fn validate(&self, grid: usize) -> Result<()> {
        check_range(|psi| self.eval(psi).d, grid)
    }
}

fn check_range(d: impl Fn(f64) -> f64, grid: usize) -> Result<()> {
    for psi in angle::grid(grid, std::f64::consts::PI) {
        let v = d(psi);
        if !(v > 0.0 && v < FRAC_PI_2) {
            return Err(BilliardError::ProfileOutOfRange { psi, d: v });
        }
    }
    Ok(())
}

/// Closed-form invariant curve of an ellipse: `cos 2d(ψ) = A cos 2ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseProfile {
    amplitude: f64,
}

impl EllipseProfile {
    /// `|A| < 1` is required so that `d` stays inside `(0, π/2)`.
    pub fn from_amplitude(amplitude: f64) -> Result<Self> {
        if !(amplitude.abs() < 1.0) {
            return Err(BilliardError::InvalidParameter(format!(
                "ellipse profile amplitude {amplitude} outside (-1, 1)"
            )));
        }
        Ok(Self { amplitude })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn eval(&self, psi: f64) -> AngleJet {
        let a = self.amplitude;
        let (s2, c2) = (2.0 * psi).sin_cos();
        let mu = a * c2;
        let root = (1.0 - mu * mu).sqrt();
        AngleJet {
            d: 0.5 * mu.acos(),
            dd: a * s2 / root,
            ddd: 2.0 * a * c2 * (1.0 - a * a) / (root * root * root),
        }
    }
}

/// Invariant-curve profile of the ellipse with semi-axes `a` (along ψ = 0) and `b`.
pub fn ellipse_profile(a: f64, b: f64) -> Result<EllipseProfile> {
    if !(b > 0.0 && a >= b && a.is_finite()) {
        return Err(BilliardError::InvalidAxes { a, b });
    }
    EllipseProfile::from_amplitude((b * b - a * a) / (a * a + b * b))
}

/// Either representation of an angle function.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleFunction {
    Modes(AngleProfile),
    Ellipse(EllipseProfile),
}

impl AngleFunction {
    pub fn eval(&self, psi: f64) -> AngleJet {
        match self {
            AngleFunction::Modes(p) => p.eval(psi),
            AngleFunction::Ellipse(p) => p.eval(psi),
        }
    }

    pub fn d(&self, psi: f64) -> f64 {
        self.eval(psi).d
    }

    pub fn validate(&self, grid: usize) -> Result<()> {
        check_range(|psi| self.d(psi), grid)
    }
}

impl From<AngleProfile> for AngleFunction {
    fn from(p: AngleProfile) -> Self {
        AngleFunction::Modes(p)
    }
}

impl From<EllipseProfile> for AngleFunction {
    fn from(p: EllipseProfile) -> Self {
        AngleFunction::Ellipse(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn empty_profile_is_quarter_pi() {
        let j = AngleProfile::constant().eval(1.234);
        assert_eq!(
            j,
            AngleJet {
                d: FRAC_PI_4,
                dd: 0.0,
                ddd: 0.0
            }
        );
    }

    #[test]
    fn single_mode_at_origin() {
        let eps = 0.07;
        let j = AngleProfile::constant()
            .with_mode(2, eps, 0.0)
            .unwrap()
            .eval(0.0);
        assert!((j.d - (FRAC_PI_4 + eps)).abs() < 1e-15);
        assert_eq!(j.dd, 0.0);
        assert!((j.ddd + 4.0 * eps).abs() < 1e-15);
    }

    #[test]
    fn rejects_inadmissible_harmonics() {
        for n in [0, 1, 3, 4, 5, 8, 12] {
            assert_eq!(
                AngleProfile::constant().with_mode(n, 0.1, 0.0),
                Err(BilliardError::InadmissibleHarmonic(n))
            );
        }
        assert!(AngleProfile::constant().with_mode(10, 0.01, 0.0).is_ok());
    }

    #[test]
    fn quarter_turn_symmetry_is_structural() {
        let p = AngleProfile::new([
            Harmonic {
                n: 2,
                cos: 0.1,
                sin: -0.04,
            },
            Harmonic {
                n: 6,
                cos: 0.01,
                sin: 0.02,
            },
            Harmonic {
                n: 10,
                cos: -0.003,
                sin: 0.0,
            },
        ])
        .unwrap();
        for k in 0..1000 {
            let psi = -7.0 + 0.0137 * k as f64;
            let s = p.eval(psi).d + p.eval(psi + FRAC_PI_2).d;
            assert!((s - FRAC_PI_2).abs() < 1e-14, "psi = {psi}: {s}");
            assert!((p.eval(psi).d - p.eval(psi + PI).d).abs() < 1e-14);
        }
    }

    #[test]
    fn ellipse_profile_values() {
        let circle = ellipse_profile(1.0, 1.0).unwrap();
        assert!((circle.eval(0.3).d - FRAC_PI_4).abs() < 1e-15);

        let e = ellipse_profile(2.0, 1.0).unwrap();
        let d0 = e.eval(0.0).d;
        assert!((d0 - 0.5 * (-0.6f64).acos()).abs() < 1e-15);
        assert!((5f64.sqrt() * d0.sin() - 2.0).abs() < 1e-14);
        assert!((e.eval(FRAC_PI_4).d - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn ellipse_profile_derivatives_match_finite_differences() {
        let e = ellipse_profile(2.0, 1.0).unwrap();
        let h = 1e-5;
        for k in 0..50 {
            let psi = 0.123 * k as f64;
            let j = e.eval(psi);
            let fd1 = (e.eval(psi + h).d - e.eval(psi - h).d) / (2.0 * h);
            let fd2 = (e.eval(psi + h).d - 2.0 * j.d + e.eval(psi - h).d) / (h * h);
            assert!((j.dd - fd1).abs() < 1e-8);
            assert!((j.ddd - fd2).abs() < 1e-4);
        }
    }

    #[test]
    fn profile_range_check() {
        let wild = AngleProfile::constant().with_mode(2, 0.9, 0.0).unwrap();
        assert!(matches!(
            wild.validate(1024),
            Err(BilliardError::ProfileOutOfRange { .. })
        ));
        let tame = AngleProfile::constant().with_mode(2, 0.2, 0.0).unwrap();
        assert!(tame.validate(1024).is_ok());
    }
}
