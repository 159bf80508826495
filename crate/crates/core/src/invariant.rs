//! Horizontal invariant curves: Gutkin ovals and constant-width tables.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{billiard_step, DynamicsError, PhasePoint};
use crate::geometry::{validate, GeometryError, Oval, SupportCurve, SupportFunction};
use crate::roots::brent;
use crate::tolerances::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantError {
    #[error("amplitude must satisfy |a1| < 1, got {a1}")]
    InvalidAmplitude { a1: f64 },
    #[error("momentum must satisfy |p0| < 1 - 1e-9, got {p0}")]
    InvalidMomentum { p0: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

const ROOT_SUBINTERVALS: usize = 10_000;
const WIDTH_SAMPLES: usize = 4096;
const PERIOD_TWO_SAMPLES: usize = 100;
const P0_SEEDS: usize = 16;
const P0_ITERS: usize = 100;

/// Support function whose radius of curvature is `1 + a1 cos(nφ)`.
pub fn gutkin_oval(n: u32, a1: f64) -> Result<SupportFunction, InvariantError> {
    if !a1.is_finite() || a1.abs() >= 1.0 {
        return Err(InvariantError::InvalidAmplitude { a1 });
    }
    let sf = if a1 == 0.0 {
        SupportFunction::constant(n, 1.0)?
    } else {
        let nf = n as f64;
        SupportFunction::cosine(n, 1.0, a1 / (1.0 - nf * nf))?
    };
    let report = validate(&sf, 1024.max(64 * n as usize))?;
    if !report.passed {
        return Err(GeometryError::InvalidResult(format!("gutkin oval n = {n}, a1 = {a1} fails validation")).into());
    }
    Ok(sf)
}

fn gutkin_residual(n: f64, a: f64) -> f64 {
    (n * a).sin() * a.cos() - n * (n * a).cos() * a.sin()
}

/// Roots of `tan(nα) = n tan(α)` in `(0, π/2]`, increasing.
pub fn gutkin_alpha(n: u32) -> Vec<f64> {
    let nf = n as f64;
    let h = FRAC_PI_2 / ROOT_SUBINTERVALS as f64;
    let f = |a: f64| gutkin_residual(nf, a);
    let odd = n % 2 == 1;
    // the residual vanishes at π/2 for odd n; stop one cell short and add it exactly
    let last = if odd { ROOT_SUBINTERVALS - 1 } else { ROOT_SUBINTERVALS };
    let mut roots = Vec::new();
    let mut a = h;
    let mut fa = f(a);
    for i in 2..=last {
        let b = i as f64 * h;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            if let Some(r) = brent(&f, a, b, fa, fb, 1e-15, 200) {
                roots.push(r);
            }
        }
        a = b;
        fa = fb;
    }
    if odd {
        roots.push(FRAC_PI_2);
    }
    roots
}

/// Largest `|p - p0|` over `iters` steps from `seeds` equispaced angles at momentum `p0`.
pub fn check_horizontal_invariance<C: SupportCurve + Sync>(
    oval: &Oval<C>,
    p0: f64,
    seeds: usize,
    iters: usize,
) -> Result<f64, InvariantError> {
    if !p0.is_finite() || p0.abs() >= 1.0 - 1e-9 {
        return Err(InvariantError::InvalidMomentum { p0 });
    }
    let per_seed: Vec<Result<f64, DynamicsError>> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let mut x = PhasePoint::new(TAU * i as f64 / seeds as f64, p0);
            let mut worst = 0.0f64;
            for _ in 0..iters {
                x = billiard_step(oval, x)?.point;
                worst = worst.max((x.p - p0).abs());
            }
            Ok(worst)
        })
        .collect();
    let mut worst = 0.0f64;
    for d in per_seed {
        worst = worst.max(d?);
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GutkinResult {
    pub n: u32,
    pub a1: f64,
    pub alpha0: Vec<f64>,
    pub p0: Vec<f64>,
    /// One entry per root.
    pub max_deviation: Vec<f64>,
    pub seeds: usize,
    pub iters: usize,
    pub warnings: Vec<String>,
}

/// Builds the Gutkin oval and measures the drift along each candidate curve `p = cos α0`.
pub fn gutkin_check(n: u32, a1: f64, seeds: usize, iters: usize) -> Result<GutkinResult, InvariantError> {
    let mut warnings = Vec::new();
    if n < 4 {
        warnings.push(format!("n = {n} is below the range n >= 4 covered by the theorem"));
    }
    let oval = Oval::new(gutkin_oval(n, a1)?)?;
    let alpha0 = gutkin_alpha(n);
    let p0: Vec<f64> = alpha0.iter().map(|a| if *a == FRAC_PI_2 { 0.0 } else { a.cos() }).collect();
    let max_deviation = p0
        .iter()
        .map(|&p| check_horizontal_invariance(&oval, p, seeds, iters))
        .collect::<Result<_, _>>()?;
    Ok(GutkinResult { n, a1, alpha0, p0, max_deviation, seeds, iters, warnings })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstantWidth {
    pub is_constant_width: bool,
    /// Mean of `g(φ) + g(φ + π)` over the samples.
    pub width: f64,
    /// Spread `max - min` of the sampled width.
    pub width_variation: f64,
    /// Only computed for constant width.
    pub p0_deviation: Option<f64>,
    /// Largest distance between `T(φ, 0)` and `(φ + π, 0)`.
    pub period_two_error: Option<f64>,
}

pub fn constant_width_check<C: SupportCurve + Sync>(oval: &Oval<C>) -> Result<ConstantWidth, InvariantError> {
    constant_width_check_tol(oval, &Tolerances::default())
}

pub fn constant_width_check_tol<C: SupportCurve + Sync>(
    oval: &Oval<C>,
    tol: &Tolerances,
) -> Result<ConstantWidth, InvariantError> {
    let curve = oval.curve();
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for i in 0..WIDTH_SAMPLES {
        let phi = TAU * i as f64 / WIDTH_SAMPLES as f64;
        let w = curve.jet(phi).g + curve.jet(phi + PI).g;
        lo = lo.min(w);
        hi = hi.max(w);
        sum += w;
    }
    let width_variation = hi - lo;
    let is_constant_width = width_variation < tol.width;
    let (mut p0_deviation, mut period_two_error) = (None, None);
    if is_constant_width {
        p0_deviation = Some(check_horizontal_invariance(oval, 0.0, P0_SEEDS, P0_ITERS)?);
        let mut worst = 0.0f64;
        for i in 0..PERIOD_TWO_SAMPLES {
            let phi = TAU * (i as f64 + 0.5) / PERIOD_TWO_SAMPLES as f64;
            let next = billiard_step(oval, PhasePoint::new(phi, 0.0))?.point;
            let dphi = (next.phi - phi).rem_euclid(TAU) - PI;
            worst = worst.max(dphi.abs()).max(next.p.abs());
        }
        period_two_error = Some(worst);
    }
    Ok(ConstantWidth {
        is_constant_width,
        width: sum / WIDTH_SAMPLES as f64,
        width_variation,
        p0_deviation,
        period_two_error,
    })
}
