//! Support functions, the ovals they define, and the perturbations used to
//! break resonances and tangencies.

mod bump;
mod critical;
mod oval;
mod support;
mod validate;

pub use bump::{perturb_bump, Bump, BumpPower, PerturbedCurve};
pub use critical::{critical_points, CriticalKind, CriticalPoint};
pub use oval::{Embedding, Oval};
pub use support::{Harmonic, SupportCurve, SupportFunction, SupportJet, MAX_HARMONIC};
pub use validate::{validate, ValidationReport};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("symmetry order must be at least 2, got {n}")]
    InvalidSymmetry { n: u32 },
    #[error("constant term must be positive and finite, got {a0}")]
    InvalidConstant { a0: f64 },
    #[error("harmonic index 0 is reserved for the constant term")]
    ZeroHarmonic,
    #[error("harmonic index {k} above the supported maximum {max}")]
    HarmonicTooHigh { k: u32, max: u32 },
    #[error("harmonic not multiple of n: k = {k}, n = {n}")]
    HarmonicNotMultiple { k: u32, n: u32 },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("critical points of a circle are not isolated")]
    DegenerateCircle,
    #[error("invalid result: {0}")]
    InvalidResult(String),
    #[error("bump support too wide: {0}")]
    SupportTooWide(String),
    #[error("bump needs 0 < delta1 < delta2, got delta1 = {delta1}, delta2 = {delta2}")]
    InvalidBump { delta1: f64, delta2: f64 },
    #[error("bump ramp delta2 - delta1 = {width:e} is narrower than {min:e}")]
    BumpTooNarrow { width: f64, min: f64 },
    #[error("not convex: min R = {min_radius:.6e} at phi = {at:.6}")]
    NotConvex { min_radius: f64, at: f64 },
    #[error("support function not positive: min g = {min_g:.6e} at phi = {at:.6}")]
    NotPositive { min_g: f64, at: f64 },
    #[error("{samples} samples cannot resolve the curve (need at least {required})")]
    TooFewSamples { samples: usize, required: usize },
}

/// `g + eps`: same critical points and derivatives, resonance gaps shifted.
pub fn perturb_constant(sf: &SupportFunction, eps: f64) -> Result<SupportFunction, GeometryError> {
    let next = sf
        .shifted(eps)
        .map_err(|e| GeometryError::InvalidResult(e.to_string()))?;
    let report = validate(&next, next.resolution())?;
    if !report.passed {
        return Err(GeometryError::InvalidResult(format!(
            "g + {eps} is not a valid oval (min g = {:.3e}, min R = {:.3e})",
            report.min_g, report.min_radius
        )));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_shift() {
        let sf = SupportFunction::constant(3, 1.0).unwrap();
        assert_eq!(perturb_constant(&sf, 0.1).unwrap().a0(), 1.1);
        let t = SupportFunction::cosine(3, 1.0, 0.05).unwrap();
        assert_eq!(perturb_constant(&t, 0.0).unwrap(), t);
        assert!(matches!(perturb_constant(&t, -0.7), Err(GeometryError::InvalidResult(_))));
        assert!(matches!(perturb_constant(&sf, -2.0), Err(GeometryError::InvalidResult(_))));
    }

    #[test]
    fn shift_keeps_critical_points() {
        let t = SupportFunction::cosine(3, 1.0, 0.1).unwrap();
        let before = critical_points(&t, 1e-9).unwrap();
        let after = critical_points(&perturb_constant(&t, 0.01).unwrap(), 1e-9).unwrap();
        assert_eq!(before.len(), after.len());
        for (b, a) in before.iter().zip(&after) {
            assert_eq!(b.phi0, a.phi0);
            assert_eq!(b.kind, a.kind);
            assert_eq!(b.g_second, a.g_second);
        }
    }
}
