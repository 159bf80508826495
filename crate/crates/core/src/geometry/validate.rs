use std::f64::consts::TAU;

use serde::Serialize;

use super::{GeometryError, SupportCurve};

/// Sampled minima of `g` and `R = g + g''`, each polished by Newton's method.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub samples: usize,
    pub min_g: f64,
    pub argmin_g: f64,
    pub min_radius: f64,
    pub argmin_radius: f64,
    pub passed: bool,
}

/// Checks `g > 0` and `g + g'' > 0` on a uniform grid of `samples` points.
pub fn validate<C: SupportCurve + ?Sized>(curve: &C, samples: usize) -> Result<ValidationReport, GeometryError> {
    let required = minimum_samples(curve);
    if samples < required {
        return Err(GeometryError::TooFewSamples { samples, required });
    }
    let h = TAU / samples as f64;
    let grid: Vec<(f64, f64)> = (0..samples)
        .map(|i| {
            let j = curve.jet(i as f64 * h);
            (j.g, j.radius())
        })
        .collect();

    let (min_g, argmin_g) = polished_minimum(
        &grid.iter().map(|v| v.0).collect::<Vec<_>>(),
        h,
        |phi| {
            let j = curve.jet(phi);
            (j.g, j.d1, j.d2)
        },
    );
    let (min_radius, argmin_radius) = polished_minimum(
        &grid.iter().map(|v| v.1).collect::<Vec<_>>(),
        h,
        |phi| {
            let j = curve.jet(phi);
            (j.radius(), j.radius_d1(), j.radius_d2())
        },
    );

    Ok(ValidationReport {
        samples,
        min_g,
        argmin_g,
        min_radius,
        argmin_radius,
        passed: min_g > 0.0 && min_radius > 0.0,
    })
}

/// `4 × (largest harmonic)`, and never fewer than 16 points.
pub(crate) fn minimum_samples<C: SupportCurve + ?Sized>(curve: &C) -> usize {
    (curve.resolution() / 256).max(16)
}

/// Smallest value over the discrete local minima after Newton polishing.
fn polished_minimum<F>(values: &[f64], h: f64, f: F) -> (f64, f64)
where
    F: Fn(f64) -> (f64, f64, f64),
{
    let n = values.len();
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..n {
        let (prev, cur, next) = (values[(i + n - 1) % n], values[i], values[(i + 1) % n]);
        if cur > prev || cur > next {
            continue;
        }
        let lo = (i as f64 - 1.0) * h;
        let hi = (i as f64 + 1.0) * h;
        let mut phi = i as f64 * h;
        let mut val = cur;
        for _ in 0..20 {
            let (v, d1, d2) = f(phi);
            val = val.min(v);
            if d2 <= 0.0 {
                break;
            }
            let next_phi = phi - d1 / d2;
            if !(lo..=hi).contains(&next_phi) {
                break;
            }
            let done = (next_phi - phi).abs() < 1e-15;
            phi = next_phi;
            if done {
                break;
            }
        }
        let v = f(phi).0.min(val);
        if v < best.0 {
            best = (v, phi.rem_euclid(TAU));
        }
    }
    best
}
