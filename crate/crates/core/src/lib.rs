//! Billiards inside n-symmetric ovals given by support functions.
//!
//! The phase space is the cylinder of pairs `(φ, p)` where `φ` is the tangent
//! angle of the impact point and `p = cos α` the tangential momentum.

pub mod config;
pub mod dynamics;
pub mod geometry;
pub mod hyperbolic;
pub mod invariant;
mod jet;
pub mod orbits;
pub mod portrait;
pub mod report;
mod roots;
pub mod tolerances;
pub mod vec2;

pub use dynamics::{PhasePoint, QuotientPoint};

pub use geometry::{
    critical_points, perturb_bump, perturb_constant, validate, Bump, BumpPower, CriticalKind, CriticalPoint,
    GeometryError, Harmonic, Oval, PerturbedCurve, SupportCurve, SupportFunction, SupportJet, ValidationReport,
};
pub use tolerances::Tolerances;
pub use vec2::Vec2;
