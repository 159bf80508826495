use serde::Serialize;

use super::{GeometryError, SupportCurve};
use crate::roots::bisect;

const GRID: usize = 4096;
/// Irrational grid offset so that symmetric critical points never land on a node.
const GRID_OFFSET: f64 = std::f64::consts::FRAC_1_PI;
const ROOT_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Minimum,
    Maximum,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CriticalPoint {
    /// In `[0, 2π/n)`.
    pub phi0: f64,
    pub kind: CriticalKind,
    pub g_value: f64,
    pub g_second: f64,
}

/// Roots of `g'` in one symmetry period, sorted by angle.
///
/// `tol` is the `|g''|` threshold below which a root is reported degenerate.
pub fn critical_points<C: SupportCurve + ?Sized>(curve: &C, tol: f64) -> Result<Vec<CriticalPoint>, GeometryError> {
    if curve.is_circle() {
        return Err(GeometryError::DegenerateCircle);
    }
    let period = curve.period();
    let h = period / GRID as f64;
    let node = |i: usize| (i as f64 + GRID_OFFSET) * h;
    let slope = |phi: f64| curve.value_slope(phi).1;

    let values: Vec<f64> = (0..GRID).map(|i| slope(node(i))).collect();
    let mut out: Vec<CriticalPoint> = Vec::new();
    for i in 0..GRID {
        let (a, b) = (node(i), node(i + 1));
        let (fa, fb) = (values[i], values[(i + 1) % GRID]);
        if fa != 0.0 && fa.signum() == fb.signum() {
            continue;
        }
        let mut root = if fa == 0.0 { a } else { bisect(slope, a, b, ROOT_TOL) };

        // one or two Newton steps kept inside the bracket
        for _ in 0..2 {
            let j = curve.jet(root);
            if j.d2.abs() <= tol {
                break;
            }
            let next = root - j.d1 / j.d2;
            if next < a || next > b {
                break;
            }
            root = next;
        }

        let mut phi0 = root.rem_euclid(period);
        if period - phi0 < 1e-12 {
            phi0 = 0.0;
        }
        let j = curve.jet(phi0);
        let kind = if j.d2.abs() <= tol {
            CriticalKind::Degenerate
        } else if j.d2 > 0.0 {
            CriticalKind::Minimum
        } else {
            CriticalKind::Maximum
        };
        out.push(CriticalPoint { phi0, kind, g_value: j.g, g_second: j.d2 });
    }
    out.sort_by(|x, y| x.phi0.total_cmp(&y.phi0));
    out.dedup_by(|x, y| (x.phi0 - y.phi0).abs() < 1e-10);
    Ok(out)
}
