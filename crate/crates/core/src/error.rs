use thiserror::Error;

/// Errors raised by table construction, the billiard map and the verification pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BilliardError {
    #[error("invalid semi-axes a = {a}, b = {b} (need a >= b > 0)")]
    InvalidAxes { a: f64, b: f64 },
    #[error("radius of curvature {rho:.3e} <= 0 at psi = {psi:.6}")]
    CurvatureViolation { psi: f64, rho: f64 },
    #[error("support function {h:.3e} <= 0 at psi = {psi:.6}: origin is not interior")]
    NonPositiveSupport { psi: f64, h: f64 },
    #[error("table is not centrally symmetric: |h(psi + pi) - h(psi)| = {deviation:.3e}")]
    NotCentrallySymmetric { deviation: f64 },
    #[error("harmonic {0} is not admissible for an invariant 4-periodic curve (need n = 2 mod 4)")]
    InadmissibleHarmonic(u32),
    #[error("angle profile leaves (0, pi/2): d = {d:.6} at psi = {psi:.6}")]
    ProfileOutOfRange { psi: f64, d: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("half separation {delta:.6} outside (0, pi)")]
    SeparationOutOfRange { delta: f64 },
    #[error("line (p = {p}, phi = {phi}) does not cross the table interior")]
    LineOutsideCylinder { p: f64, phi: f64 },
    #[error("grazing ray: incidence angle {delta:.3e} too close to the boundary")]
    GrazingRay { delta: f64 },
    #[error("root solver failed to bracket: {0}")]
    BracketFailure(String),
    #[error("chord/curve intersection failed: {0}")]
    IntersectionFailure(String),
    #[error("monotonicity break: nu1 = {nu1:.3e} <= 0")]
    MonotonicityBreak { nu1: f64 },
    #[error("no real confocal caustic: lambda = {lambda:.6e} outside (0, b^2)")]
    NoRealCaustic { lambda: f64 },
    #[error("grid size {0} must be a power of two and at least 64")]
    InvalidGrid(usize),
    #[error("unsupported table representation: {0}")]
    UnsupportedRepresentation(&'static str),
}

pub type Result<T> = std::result::Result<T, BilliardError>;
