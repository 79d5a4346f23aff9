//! Named verification checks with a uniform JSON report.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::billmap::{chart_to_line, jacobian_check, s_derivatives, BoundaryCoord, LineCoord};
use crate::error::{BilliardError, Result};
use crate::fourperiodic::{
    curve_profile, derived_angle, scan_quads, verify_d_h_relations, verify_orthoptic,
};
use crate::rng::UniformStream;
use crate::supportfn::SupportSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Twist,
    Symplectic,
    Poncelet,
    Orthoptic,
    Relations,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::Twist,
        Check::Symplectic,
        Check::Poncelet,
        Check::Orthoptic,
        Check::Relations,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Twist => "twist",
            Check::Symplectic => "symplectic",
            Check::Poncelet => "poncelet",
            Check::Orthoptic => "orthoptic",
            Check::Relations => "relations",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    One(Check),
    All,
}

impl Suite {
    pub fn checks(self) -> Vec<Check> {
        match self {
            Suite::One(c) => vec![c],
            Suite::All => Check::ALL.to_vec(),
        }
    }
}

impl FromStr for Suite {
    type Err = BilliardError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(Suite::All);
        }
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .map(Suite::One)
            .ok_or_else(|| BilliardError::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Suite::One(c) => f.write_str(c.name()),
            Suite::All => f.write_str("all"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub grid: usize,
    pub max_residual: f64,
    pub pass: bool,
    pub tolerance: f64,
}

pub const SYMPLECTIC_LINES: usize = 1000;
pub const SYMPLECTIC_SEED: u64 = 1;
/// Floor for the symplectic tolerance: finite differences do not resolve below it.
pub const SYMPLECTIC_TOL: f64 = 1e-6;
/// Random interior lines leave the boundary at `δ ∈ [m, π − m]`.
pub const INTERIOR_MARGIN: f64 = 0.05;

/// Seeded lines with `ψ` uniform and `δ` uniform in `[m, π − m]`.
pub fn random_interior_lines(spec: &SupportSpec, count: usize, seed: u64) -> Vec<LineCoord> {
    let mut stream = UniformStream::new(seed);
    (0..count)
        .map(|_| {
            let psi = stream.range(0.0, TAU);
            let delta = stream.range(INTERIOR_MARGIN, PI - INTERIOR_MARGIN);
            chart_to_line(spec, BoundaryCoord { psi, delta })
        })
        .collect()
}

/// Smallest `S₁₂` over `n` launch angles × `n` interior angles `δ = (k + ½)π/n`.
pub fn min_twist(spec: &SupportSpec, n: usize) -> Result<f64> {
    let rows: Vec<Result<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let psi = TAU * i as f64 / n as f64;
            let mut worst = f64::INFINITY;
            for k in 0..n {
                let delta = (k as f64 + 0.5) * PI / n as f64;
                worst = worst.min(s_derivatives(spec, psi - delta, psi + delta)?.s12);
            }
            Ok(worst)
        })
        .collect();
    rows.into_iter()
        .try_fold(f64::INFINITY, |acc, r| r.map(|v| acc.min(v)))
}

/// Worst `|det DT − 1|` over the given lines.
pub fn max_jacobian_defect(spec: &SupportSpec, lines: &[LineCoord]) -> Result<f64> {
    let defects: Vec<Result<f64>> = lines
        .par_iter()
        .map(|&l| Ok((jacobian_check(spec, l)? - 1.0).abs()))
        .collect();
    defects
        .into_iter()
        .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))
}

/// Invariant-curve angle for a table: closed form when known, otherwise the
/// candidate `atan2(h(ψ), h(ψ + π/2))`.
fn curve_angle(spec: &SupportSpec) -> Box<dyn Fn(f64) -> f64 + Sync + '_> {
    match curve_profile(spec) {
        Some((profile, _)) => Box::new(move |psi| profile.d(psi)),
        None => Box::new(move |psi| derived_angle(spec, psi)),
    }
}

/// Run one check. `tol` applies to the geometric checks; twist requires
/// `S₁₂ > 0` strictly and symplecticity uses at least [`SYMPLECTIC_TOL`].
pub fn run_check(spec: &SupportSpec, check: Check, grid: usize, tol: f64) -> Result<CheckReport> {
    let report = |grid, max_residual: f64, tolerance: f64, pass: bool| CheckReport {
        check: check.name().to_owned(),
        grid,
        max_residual,
        pass,
        tolerance,
    };
    Ok(match check {
        Check::Twist => {
            let min = min_twist(spec, grid)?;
            report(grid, (-min).max(0.0), 0.0, min > 0.0)
        }
        Check::Symplectic => {
            let lines = random_interior_lines(spec, SYMPLECTIC_LINES, SYMPLECTIC_SEED);
            let defect = max_jacobian_defect(spec, &lines)?;
            let tolerance = tol.max(SYMPLECTIC_TOL);
            report(SYMPLECTIC_LINES, defect, tolerance, defect <= tolerance)
        }
        Check::Poncelet => {
            let d = curve_angle(spec);
            let residual = match scan_quads(spec, d.as_ref(), grid) {
                Ok((quad, rect)) => quad.max().max(rect),
                Err(_) => f64::INFINITY,
            };
            report(grid, residual, tol, residual <= tol)
        }
        Check::Orthoptic => {
            let (_, deviation) = verify_orthoptic(spec, grid);
            report(grid, deviation, tol, deviation <= tol)
        }
        Check::Relations => {
            let d = curve_angle(spec);
            let r = verify_d_h_relations(spec, d.as_ref(), grid);
            let residual = r.support_ratio.max(r.derivative_ratio);
            report(grid, residual, tol, residual <= tol)
        }
    })
}

pub fn run_suite(
    spec: &SupportSpec,
    suite: Suite,
    grid: usize,
    tol: f64,
) -> Result<Vec<CheckReport>> {
    if grid == 0 {
        return Err(BilliardError::InvalidGrid(grid));
    }
    if !(tol > 0.0) {
        return Err(BilliardError::InvalidParameter(format!(
            "tolerance {tol} must be positive"
        )));
    }
    suite
        .checks()
        .into_iter()
        .map(|c| run_check(spec, c, grid, tol))
        .collect()
}
