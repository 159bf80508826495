use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{critical_points, validate, GeometryError, SupportCurve, SupportFunction, SupportJet};
use crate::jet::{smooth_step, Jet};

/// Exponent of the local factor `(φ - center)^power` multiplying the bump.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BumpPower {
    /// Changes `g''` (and so `R`) at the center by `2ε`, keeps `g`, `g'`.
    Quadratic,
    /// Changes `g''''` at the center by `24ε`, keeps `g` through `g'''`.
    Quartic,
}

impl BumpPower {
    pub fn exponent(self) -> u32 {
        match self {
            BumpPower::Quadratic => 2,
            BumpPower::Quartic => 4,
        }
    }

    pub fn from_exponent(p: u32) -> Option<Self> {
        match p {
            2 => Some(BumpPower::Quadratic),
            4 => Some(BumpPower::Quartic),
            _ => None,
        }
    }
}

/// `ε (φ - center)^power ρ(φ - center)`, replicated with period `2π/n`.
///
/// `ρ` is even, equal to 1 on `[-δ1, δ1]`, 0 outside `[-δ2, δ2]` and monotone
/// in between (built from the `exp(-1/x)` smooth step).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub eps: f64,
    pub power: BumpPower,
    pub delta1: f64,
    pub delta2: f64,
}

impl Bump {
    pub fn new(center: f64, eps: f64, power: BumpPower, delta1: f64, delta2: f64) -> Self {
        Self { center, eps, power, delta1, delta2 }
    }

    fn check_shape(&self, period: f64) -> Result<(), GeometryError> {
        let finite = [self.center, self.eps, self.delta1, self.delta2].iter().all(|v| v.is_finite());
        if !finite || !(0.0 < self.delta1 && self.delta1 < self.delta2) {
            return Err(GeometryError::InvalidBump {
                delta1: self.delta1,
                delta2: self.delta2,
            });
        }
        if self.delta2 - self.delta1 < MIN_RAMP {
            return Err(GeometryError::BumpTooNarrow { width: self.delta2 - self.delta1, min: MIN_RAMP });
        }
        if self.delta2 >= 0.5 * period {
            return Err(GeometryError::SupportTooWide(format!(
                "delta2 = {} overlaps its symmetric copies (must be < π/n = {})",
                self.delta2,
                0.5 * period
            )));
        }
        Ok(())
    }

    /// Offset of `phi` from the nearest copy of the center, in `[-P/2, P/2)`.
    fn offset(&self, phi: f64, period: f64) -> f64 {
        (phi - self.center + 0.5 * period).rem_euclid(period) - 0.5 * period
    }

    fn jet(&self, phi: f64, period: f64) -> Jet {
        let t = self.offset(phi, period);
        if t.abs() >= self.delta2 || self.eps == 0.0 {
            return Jet::ZERO;
        }
        let local = Jet::variable(t);
        let rho = if t.abs() <= self.delta1 {
            Jet::constant(1.0)
        } else {
            let abs_t = if t > 0.0 { local } else { -local };
            let u = (abs_t - Jet::constant(self.delta1)).scale(1.0 / (self.delta2 - self.delta1));
            Jet::constant(1.0) - smooth_step(u)
        };
        (local.powi(self.power.exponent()) * rho).scale(self.eps)
    }

    /// Profile `ρ(t)` alone, exposed for inspection and tests.
    pub fn profile(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= self.delta1 {
            1.0
        } else if a >= self.delta2 {
            0.0
        } else {
            1.0 - smooth_step(Jet::constant((a - self.delta1) / (self.delta2 - self.delta1))).value()
        }
    }
}

/// A Fourier support function plus locally supported bump terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbedCurve {
    base: SupportFunction,
    bumps: Vec<Bump>,
}

impl From<SupportFunction> for PerturbedCurve {
    fn from(base: SupportFunction) -> Self {
        Self { base, bumps: Vec::new() }
    }
}

impl PerturbedCurve {
    pub fn base(&self) -> &SupportFunction {
        &self.base
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    /// Adds one more bump, checking the support against the critical points
    /// of the current curve and the validity of the result.
    pub fn with_bump(&self, bump: Bump) -> Result<PerturbedCurve, GeometryError> {
        let period = self.period();
        bump.check_shape(period)?;
        if self.is_circle() {
            return Err(GeometryError::SupportTooWide(
                "critical points of a circle are not isolated".into(),
            ));
        }
        let before = critical_points(self, DEFAULT_DEGENERACY)?;
        for cp in &before {
            let dist = bump.offset(cp.phi0, period).abs();
            let clash = match bump.power {
                BumpPower::Quartic => dist < bump.delta2 && dist > CENTER_MATCH,
                BumpPower::Quadratic => dist < bump.delta2,
            };
            if clash {
                return Err(GeometryError::SupportTooWide(format!(
                    "critical point at {:.6} lies inside the bump support around {:.6}",
                    cp.phi0, bump.center
                )));
            }
        }

        let mut bumps = self.bumps.clone();
        bumps.push(bump);
        let next = PerturbedCurve { base: self.base.clone(), bumps };
        if bump.eps == 0.0 {
            return Ok(next);
        }

        let report = validate(&next, next.resolution())?;
        if !report.passed {
            return Err(GeometryError::InvalidResult(format!(
                "bump breaks positivity/convexity (min g = {:.3e}, min R = {:.3e})",
                report.min_g, report.min_radius
            )));
        }
        if bump.power == BumpPower::Quartic {
            let after = critical_points(&next, DEFAULT_DEGENERACY)?;
            if after.len() != before.len() {
                return Err(GeometryError::InvalidResult(format!(
                    "bump changes the number of critical points ({} -> {})",
                    before.len(),
                    after.len()
                )));
            }
        }
        Ok(next)
    }
}

const DEFAULT_DEGENERACY: f64 = 1e-9;
/// Validation samples scale like `1/(δ2 - δ1)`.
const MIN_RAMP: f64 = 1e-4;
const CENTER_MATCH: f64 = 1e-9;

impl SupportCurve for PerturbedCurve {
    fn order(&self) -> u32 {
        self.base.order()
    }

    fn jet(&self, phi: f64) -> SupportJet {
        let mut j = self.base.jet(phi);
        let period = self.period();
        for b in &self.bumps {
            let d = b.jet(phi, period).derivatives();
            j.g += d[0];
            j.d1 += d[1];
            j.d2 += d[2];
            j.d3 += d[3];
            j.d4 += d[4];
        }
        j
    }

    fn value_slope(&self, phi: f64) -> (f64, f64) {
        let (mut g, mut d1) = self.base.value_slope(phi);
        let period = self.period();
        for b in &self.bumps {
            if b.offset(phi, period).abs() < b.delta2 {
                let d = b.jet(phi, period).derivatives();
                g += d[0];
                d1 += d[1];
            }
        }
        (g, d1)
    }

    fn resolution(&self) -> usize {
        self.bumps
            .iter()
            .map(|b| (16.0 * TAU / (b.delta2 - b.delta1)).ceil() as usize)
            .fold(self.base.resolution(), usize::max)
    }

    fn is_circle(&self) -> bool {
        self.base.is_circle() && self.bumps.iter().all(|b| b.eps == 0.0)
    }
}

/// Adds `ε (φ - center)^power ρ(φ - center)` (replicated with the symmetry) to `sf`.
pub fn perturb_bump(sf: &SupportFunction, bump: Bump) -> Result<PerturbedCurve, GeometryError> {
    PerturbedCurve::from(sf.clone()).with_bump(bump)
}
