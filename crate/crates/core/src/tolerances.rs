use serde::Serialize;
use thiserror::Error;

/// Every numerical threshold used by the analyses, overridable by name.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Tolerances {
    /// `|g'(φ0)|` accepted at a critical point.
    pub critical: f64,
    /// `|g''(φ0)|` below which a critical point is degenerate.
    pub degenerate: f64,
    /// `|g(φ0) - R(φ0)|` below which a family is parabolic.
    pub parabolic: f64,
    /// Threshold for the resonance flags.
    pub resonance: f64,
    /// Closure error after one period.
    pub closure: f64,
    /// Slope difference below which a crossing is called tangent.
    pub tangency: f64,
    /// Match between `sin²(mπ/n)` and the root of the zero-twist equation.
    pub tau_zero: f64,
    /// Sup-variation of the width for constant-width detection.
    pub width: f64,
    /// Accepted drift from an invariant horizontal curve.
    pub invariance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            critical: 1e-9,
            degenerate: 1e-9,
            parabolic: 1e-9,
            resonance: 1e-9,
            closure: 1e-8,
            tangency: 1e-4,
            tau_zero: 1e-9,
            width: 1e-10,
            invariance: 1e-6,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ToleranceError {
    #[error("unknown tolerance '{0}' (known: {known})", known = Tolerances::NAMES.join(", "))]
    Unknown(String),
    #[error("tolerance {name} must be positive and finite, got {value}")]
    Invalid { name: String, value: f64 },
}

impl Tolerances {
    pub const NAMES: [&'static str; 9] = [
        "critical",
        "degenerate",
        "parabolic",
        "resonance",
        "closure",
        "tangency",
        "tauZero",
        "width",
        "invariance",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "critical" => &mut self.critical,
            "degenerate" => &mut self.degenerate,
            "parabolic" => &mut self.parabolic,
            "resonance" => &mut self.resonance,
            "closure" => &mut self.closure,
            "tangency" => &mut self.tangency,
            "tauZero" => &mut self.tau_zero,
            "width" => &mut self.width,
            "invariance" => &mut self.invariance,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ToleranceError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(ToleranceError::Invalid { name: name.to_string(), value });
        }
        let slot = self.slot(name).ok_or_else(|| ToleranceError::Unknown(name.to_string()))?;
        *slot = value;
        Ok(())
    }
}
