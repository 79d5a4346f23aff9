//! Convex billiard tables described by support functions.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod angle;
mod error;
mod roots;

pub mod beam;
pub mod billmap;
pub mod fourperiodic;
pub mod rng;
pub mod suite;
pub mod supportfn;
pub mod wirtinger;

pub use billmap::{BoundaryCoord, LineCoord, Point2, SDerivatives};
pub use error::{BilliardError, Result};
pub use fourperiodic::{AngleFunction, AngleProfile, EllipseProfile, Harmonic};
pub use supportfn::{Jet2, SupportSpec, TableJson};
