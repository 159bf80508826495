use std::f64::consts::PI;

use serde::Serialize;

use super::{check_index, family_kind, OrbitError, OrbitKind};
use crate::dynamics::{radius_arclength_derivatives, symmetric_side, DynamicsError};
use crate::geometry::{Oval, SupportCurve, SupportJet};
use crate::tolerances::Tolerances;

/// Low-order resonance flags of a symmetric fixed point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Resonance {
    /// `3g - g''`; zero when `λ³ = 1`.
    pub gap3: f64,
    /// `g - g''`; zero when `λ⁴ = 1`.
    pub gap4: f64,
    pub resonance3: bool,
    pub resonance4: bool,
}

impl Resonance {
    pub fn any(&self) -> bool {
        self.resonance3 || self.resonance4
    }
}

/// Works on any support function, valid oval or not; the flags do not depend on `m`.
pub fn resonance_check<C: SupportCurve + ?Sized>(curve: &C, phi0: f64, tol: f64) -> Resonance {
    let j = curve.jet(phi0);
    let gap3 = 3.0 * j.g - j.d2;
    let gap4 = j.g - j.d2;
    Resonance { gap3, gap4, resonance3: gap3.abs() < tol, resonance4: gap4.abs() < tol }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwistEntry {
    pub m: u32,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TwistReport {
    pub phi0: f64,
    pub resonance3: bool,
    pub resonance4: bool,
    pub tau: Vec<TwistEntry>,
    /// Root in `sin²α` of the zero-twist equation, when it has one.
    pub tau_zero_sin2: Option<f64>,
    pub tau_zero_m: Option<u32>,
}

fn tau_from_jet(j: &SupportJet, alpha: f64) -> f64 {
    let r = j.radius();
    let (r1, r2) = radius_arclength_derivatives(j);
    let (s, c) = alpha.sin_cos();
    let l = symmetric_side(j.g, alpha);
    let rs = r * s;
    -1.0 / (8.0 * r * s.powi(3)) + 3.0 * c * c / (8.0 * s * s * (2.0 * l - rs))
        - 0.125 * l / (l - 2.0 * rs).powi(2) * (3.0 + (l - rs) / (2.0 * l - rs)) * r1 * r1
        - l / (8.0 * s * (l - 2.0 * rs)) * r2
}

pub(super) fn check_elliptic<C: SupportCurve>(oval: &Oval<C>, phi0: f64, tol: &Tolerances) -> Result<SupportJet, OrbitError> {
    let j = oval.curve().jet(phi0);
    if j.d1.abs() > tol.critical {
        return Err(DynamicsError::NotCritical { phi0, slope: j.d1 }.into());
    }
    let kind = family_kind(j.g, j.radius(), tol.parabolic);
    if kind != OrbitKind::Elliptic {
        return Err(OrbitError::NotElliptic { phi0, kind });
    }
    let res = resonance_check(oval.curve(), phi0, tol.resonance);
    if res.resonance4 {
        return Err(OrbitError::Resonant4 { phi0 });
    }
    if res.resonance3 {
        return Err(OrbitError::Resonant3 { phi0 });
    }
    Ok(j)
}

/// First Birkhoff coefficient of the symmetric orbit `(φ0, cos(mπ/n))`.
pub fn twist_coefficient<C: SupportCurve>(oval: &Oval<C>, phi0: f64, m: u32) -> Result<f64, OrbitError> {
    twist_coefficient_tol(oval, phi0, m, &Tolerances::default())
}

pub fn twist_coefficient_tol<C: SupportCurve>(
    oval: &Oval<C>,
    phi0: f64,
    m: u32,
    tol: &Tolerances,
) -> Result<f64, OrbitError> {
    let n = oval.order();
    check_index(m, n)?;
    let j = check_elliptic(oval, phi0, tol)?;
    Ok(tau_from_jet(&j, m as f64 * PI / n as f64))
}

/// Coefficients `(A, B)` of the zero-twist condition `A + B sin²α = 0`.
fn tau_zero_coefficients(j: &SupportJet) -> (f64, f64) {
    let g = j.g;
    let r = j.radius();
    let (r1, r2) = radius_arclength_derivatives(j);
    let a = 4.0 * (g - r) / (r * (4.0 * g - r));
    let b = 3.0 / (4.0 * g - r)
        + g / (2.0 * (g - r).powi(2)) * (3.0 + (2.0 * g - r) / (4.0 * g - r)) * r1 * r1
        + g / (g - r) * r2;
    (a, b)
}

fn tau_zero_solution(j: &SupportJet) -> Option<f64> {
    let (a, b) = tau_zero_coefficients(j);
    let x = -a / b;
    (x.is_finite() && x > 0.0 && x <= 1.0).then_some(x)
}

/// The polygon class `m ≤ n/2` whose twist coefficient vanishes, if any.
pub fn tau_zero_m<C: SupportCurve + ?Sized>(curve: &C, phi0: f64, tol: f64) -> Option<u32> {
    let x = tau_zero_solution(&curve.jet(phi0))?;
    let n = curve.order();
    (1..=n / 2).find(|&m| ((m as f64 * PI / n as f64).sin().powi(2) - x).abs() < tol)
}

/// Twist data for every `m` of the elliptic family at `φ0`.
pub fn twist_report<C: SupportCurve>(oval: &Oval<C>, phi0: f64, tol: &Tolerances) -> Result<TwistReport, OrbitError> {
    let j = check_elliptic(oval, phi0, tol)?;
    let n = oval.order();
    let tau = (1..n)
        .map(|m| TwistEntry { m, tau: tau_from_jet(&j, m as f64 * PI / n as f64) })
        .collect();
    Ok(TwistReport {
        phi0,
        resonance3: false,
        resonance4: false,
        tau,
        tau_zero_sin2: tau_zero_solution(&j),
        tau_zero_m: tau_zero_m(oval.curve(), phi0, tol.tau_zero),
    })
}

/// Change of `τ` caused by shifting `d²R/dφ²` at `φ0` by `delta_r2` while
/// `R` and `dR/dφ` stay put (a quartic bump adds `24ε`).
pub fn tau_shift_from_bump<C: SupportCurve>(oval: &Oval<C>, phi0: f64, m: u32, delta_r2: f64) -> f64 {
    let j = oval.curve().jet(phi0);
    let alpha = m as f64 * PI / oval.order() as f64;
    let s = alpha.sin();
    let r = j.radius();
    let l = symmetric_side(j.g, alpha);
    -l / (8.0 * s * (l - 2.0 * r * s)) * delta_r2 / (r * r)
}
