use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use super::twist::check_elliptic;
use super::{check_index, OrbitError};
use crate::dynamics::{dt_symmetric_fixed_point, quotient_lifted};
use crate::geometry::{Oval, SupportCurve};
use crate::tolerances::Tolerances;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleSettings {
    /// Ring radii in the normalized coordinates.
    pub radii: Vec<f64>,
    /// Iterations per starting point.
    pub iters: usize,
    /// Starting angles per ring.
    pub angles: usize,
    /// An orbit farther than `escape_factor · radius` from the fixed point is rejected.
    pub escape_factor: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            radii: vec![1e-4, 2e-4, 3e-4, 4e-4, 5e-4, 6e-4, 7e-4, 8e-4, 9e-4, 1e-3],
            iters: 10_000,
            angles: 8,
            escape_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleFit {
    pub zeta_fit: f64,
    pub tau_fit: f64,
    /// Mean angular advance per iterate for each ring.
    pub advances: Vec<f64>,
}

/// Normal-form coordinates `w = P⁻¹ (R0 Δφ, Δp)` of an elliptic fixed point,
/// with `P = [u | J u]`, `M = cos ζ + sin ζ J` and `|det P| = 1`.
struct Frame {
    phi0: f64,
    p0: f64,
    r0: f64,
    p: [[f64; 2]; 2],
    p_inv: [[f64; 2]; 2],
}

impl Frame {
    fn to_phase(&self, w: [f64; 2]) -> (f64, f64) {
        let x = self.p[0][0] * w[0] + self.p[0][1] * w[1];
        let y = self.p[1][0] * w[0] + self.p[1][1] * w[1];
        (self.phi0 + x / self.r0, self.p0 + y)
    }

    fn to_normal(&self, phi: f64, p: f64) -> [f64; 2] {
        let x = self.r0 * (phi - self.phi0);
        let y = p - self.p0;
        [
            self.p_inv[0][0] * x + self.p_inv[0][1] * y,
            self.p_inv[1][0] * x + self.p_inv[1][1] * y,
        ]
    }
}

fn wrap(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Weighted Birkhoff average of the angle advanced per step along one orbit.
fn ring_advance<C: SupportCurve>(
    oval: &Oval<C>,
    frame: &Frame,
    m: u32,
    zeta: f64,
    w0: [f64; 2],
    iters: usize,
    limit: f64,
    radius: f64,
) -> Result<f64, OrbitError> {
    let (mut phi, mut p) = frame.to_phase(w0);
    let mut w = w0;
    let mut sum = 0.0;
    let mut total = 0.0;
    for k in 0..iters {
        let next = quotient_lifted(oval, phi, p, m)?;
        phi = next.0;
        p = next.1;
        let w1 = frame.to_normal(phi, p);
        let reached = w1[0].hypot(w1[1]);
        if reached > limit {
            return Err(OrbitError::EscapedNeighborhood { radius, reached });
        }
        let raw = w1[1].atan2(w1[0]) - w[1].atan2(w[0]);
        let step = zeta + wrap(raw - zeta);
        let t = (k as f64 + 1.0) / (iters as f64 + 1.0);
        let weight = (-1.0 / (t * (1.0 - t))).exp();
        sum += weight * step;
        total += weight;
        w = w1;
    }
    Ok(sum / total)
}

/// Measures the rotation number of `T_m` on small rings around the elliptic
/// fixed point `(φ0, cos(mπ/n))` and fits `advance = ζ + τ r²`.
pub fn rotation_number_oracle<C: SupportCurve>(
    oval: &Oval<C>,
    phi0: f64,
    m: u32,
    settings: &OracleSettings,
) -> Result<OracleFit, OrbitError> {
    let n = oval.order();
    check_index(m, n)?;
    check_elliptic(oval, phi0, &Tolerances::default())?;
    let r0 = oval.radius(phi0);
    // the symmetric Jacobian maps φ0 to itself, so R is the same at both ends
    let mat = dt_symmetric_fixed_point(oval, phi0, m)?.to_arclength(r0, r0);
    let zeta = (0.5 * mat.trace()).acos();
    let (sz, cz) = zeta.sin_cos();
    let j11 = (mat.dphi_dphi - cz) / sz;
    let j21 = mat.dp_dphi / sz;
    let u = 1.0 / j21.abs().sqrt();
    let p = [[u, j11 * u], [0.0, j21 * u]];
    let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
    let p_inv = [[p[1][1] / det, -p[0][1] / det], [-p[1][0] / det, p[0][0] / det]];
    let p0 = (m as f64 * PI / n as f64).cos();
    let frame = Frame { phi0, p0, r0, p, p_inv };

    let advances: Vec<f64> = settings
        .radii
        .par_iter()
        .map(|&radius| {
            let mut acc = 0.0;
            for a in 0..settings.angles {
                let theta = TAU * (a as f64 + 0.5) / settings.angles as f64;
                let w0 = [radius * theta.cos(), radius * theta.sin()];
                acc += ring_advance(oval, &frame, m, zeta, w0, settings.iters, settings.escape_factor * radius, radius)?;
            }
            Ok(acc / settings.angles as f64)
        })
        .collect::<Result<_, OrbitError>>()?;

    let k = advances.len() as f64;
    let xs: Vec<f64> = settings.radii.iter().map(|r| r * r).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = advances.iter().sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&advances) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let tau_fit = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(OracleFit { zeta_fit: my - tau_fit * mx, tau_fit, advances })
}
