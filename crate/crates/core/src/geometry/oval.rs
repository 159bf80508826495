use std::f64::consts::TAU;
use std::sync::OnceLock;

use super::{validate, GeometryError, SupportCurve};
use crate::roots::integrate;
use crate::vec2::Vec2;

const ARCLENGTH_KNOTS: usize = 4096;
const QUAD_TOL: f64 = 1e-13;

/// Boundary point, unit tangent `σ`, inward unit normal `η` and curvature radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Embedding {
    pub point: Vec2,
    pub tangent: Vec2,
    pub normal: Vec2,
    pub radius: f64,
}

#[derive(Debug)]
struct ArclengthTable {
    /// `s` at `φ_i = 2π i / K`, `i = 0..=K`.
    knots: Vec<f64>,
}

/// A validated oval together with its lazily built arclength table.
///
/// The curve is parametrized by the tangent angle `φ`:
/// `Γ(φ) = -g(φ) η(φ) + g'(φ) σ(φ)` with `σ = (cos φ, sin φ)` and
/// `η = (-sin φ, cos φ)`.
#[derive(Debug)]
pub struct Oval<C: SupportCurve> {
    curve: C,
    arclength: OnceLock<ArclengthTable>,
}

impl<C: SupportCurve + Clone> Clone for Oval<C> {
    fn clone(&self) -> Self {
        Self::new_unchecked(self.curve.clone())
    }
}

impl<C: SupportCurve> Oval<C> {
    /// Validates positivity and convexity before accepting the curve.
    pub fn new(curve: C) -> Result<Self, GeometryError> {
        let report = validate(&curve, curve.resolution())?;
        if report.min_g <= 0.0 {
            return Err(GeometryError::NotPositive { min_g: report.min_g, at: report.argmin_g });
        }
        if report.min_radius <= 0.0 {
            return Err(GeometryError::NotConvex {
                min_radius: report.min_radius,
                at: report.argmin_radius,
            });
        }
        Ok(Self::new_unchecked(curve))
    }

    pub(crate) fn new_unchecked(curve: C) -> Self {
        Self { curve, arclength: OnceLock::new() }
    }

    pub fn curve(&self) -> &C {
        &self.curve
    }

    pub fn order(&self) -> u32 {
        self.curve.order()
    }

    pub fn period(&self) -> f64 {
        self.curve.period()
    }

    pub fn position(&self, phi: f64) -> Vec2 {
        let (g, dg) = self.curve.value_slope(phi);
        let (s, c) = phi.sin_cos();
        Vec2::new(g * s + dg * c, -g * c + dg * s)
    }

    pub fn radius(&self, phi: f64) -> f64 {
        self.curve.jet(phi).radius()
    }

    pub fn embed(&self, phi: f64) -> Embedding {
        let j = self.curve.jet(phi);
        let (s, c) = phi.sin_cos();
        Embedding {
            point: Vec2::new(j.g * s + j.d1 * c, -j.g * c + j.d1 * s),
            tangent: Vec2::new(c, s),
            normal: Vec2::new(-s, c),
            radius: j.radius(),
        }
    }

    fn table(&self) -> &ArclengthTable {
        self.arclength.get_or_init(|| {
            let h = TAU / ARCLENGTH_KNOTS as f64;
            let r = |phi: f64| self.radius(phi);
            let mut knots = Vec::with_capacity(ARCLENGTH_KNOTS + 1);
            let mut s = 0.0;
            knots.push(0.0);
            for i in 0..ARCLENGTH_KNOTS {
                s += integrate(&r, i as f64 * h, (i + 1) as f64 * h, QUAD_TOL / ARCLENGTH_KNOTS as f64);
                knots.push(s);
            }
            ArclengthTable { knots }
        })
    }

    /// Perimeter `∫ R dφ` over a full turn.
    pub fn total_length(&self) -> f64 {
        self.table().knots[ARCLENGTH_KNOTS]
    }

    /// Arclength `s(φ)` with `s(0) = 0`, extended to all real `φ` by periodicity.
    pub fn arclength(&self, phi: f64) -> f64 {
        let table = self.table();
        let total = table.knots[ARCLENGTH_KNOTS];
        let turns = (phi / TAU).floor();
        let rest = phi - turns * TAU;
        let h = TAU / ARCLENGTH_KNOTS as f64;
        let i = ((rest / h) as usize).min(ARCLENGTH_KNOTS - 1);
        let left = i as f64 * h;
        let partial = integrate(&|t: f64| self.radius(t), left, rest, QUAD_TOL / ARCLENGTH_KNOTS as f64);
        turns * total + table.knots[i] + partial
    }

    /// Inverse of [`arclength`](Self::arclength).
    pub fn phi_of_s(&self, s: f64) -> f64 {
        let table = self.table();
        let total = table.knots[ARCLENGTH_KNOTS];
        let turns = (s / total).floor();
        let rest = s - turns * total;
        let h = TAU / ARCLENGTH_KNOTS as f64;
        let i = table.knots.partition_point(|&k| k <= rest).clamp(1, ARCLENGTH_KNOTS) - 1;

        // Cubic Hermite guess on the knot interval (dφ/ds = 1/R), then Newton.
        let (s0, s1) = (table.knots[i], table.knots[i + 1]);
        let (p0, p1) = (i as f64 * h, (i + 1) as f64 * h);
        let (m0, m1) = (1.0 / self.radius(p0), 1.0 / self.radius(p1));
        let ds = s1 - s0;
        let t = if ds > 0.0 { (rest - s0) / ds } else { 0.0 };
        let (t2, t3) = (t * t, t * t * t);
        let mut phi = (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * ds * m0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * ds * m1;
        phi = phi.clamp(p0, p1);
        for _ in 0..4 {
            let err = table.knots[i] + integrate(&|x: f64| self.radius(x), p0, phi, 1e-15) - rest;
            let step = err / self.radius(phi);
            phi = (phi - step).clamp(p0, p1);
            if step.abs() < 1e-15 {
                break;
            }
        }
        turns * TAU + phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SupportFunction;
    use std::f64::consts::PI;

    fn trefoil() -> Oval<SupportFunction> {
        Oval::new(SupportFunction::cosine(3, 1.0, 0.05).unwrap()).unwrap()
    }

    #[test]
    fn circle_embedding() {
        let o = Oval::new(SupportFunction::constant(3, 1.0).unwrap()).unwrap();
        let e = o.embed(0.0);
        assert!((e.point - Vec2::new(0.0, -1.0)).norm() < 1e-15);
        assert!((e.tangent - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(e.radius, 1.0);
        assert!((o.position(PI / 2.0) - Vec2::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn trefoil_embedding_at_minimum() {
        let o = trefoil();
        let e = o.embed(PI / 3.0);
        assert!((e.point.norm() - 0.95).abs() < 1e-14);
        assert!((e.radius - 1.4).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_convex() {
        let e = Oval::new(SupportFunction::cosine(3, 1.0, 0.2).unwrap()).unwrap_err();
        match e {
            GeometryError::NotConvex { min_radius, .. } => assert!((min_radius + 0.6).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arclength_examples() {
        let circle = Oval::new(SupportFunction::constant(3, 1.0).unwrap()).unwrap();
        for &phi in &[0.3, 2.0, 5.9] {
            assert!((circle.arclength(phi) - phi).abs() < 1e-12);
        }
        let o = trefoil();
        assert!((o.total_length() - TAU).abs() < 1e-12);
        assert!((o.arclength(TAU) - TAU).abs() < 1e-12);
        assert!((o.arclength(TAU / 3.0) - o.total_length() / 3.0).abs() < 1e-12);
        // closed form for a single cosine harmonic: s = φ + a(1 - 9) sin(3φ)/3
        for &phi in &[0.4f64, 1.7, 3.3, 6.1] {
            let exact = phi - 8.0 * 0.05 * (3.0 * phi).sin() / 3.0;
            assert!((o.arclength(phi) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn arclength_round_trip() {
        let o = trefoil();
        for i in 0..300 {
            let phi = -3.0 + i as f64 * 0.041;
            let s = o.arclength(phi);
            assert!((o.phi_of_s(s) - phi).abs() < 1e-10, "phi={phi}");
        }
        let mut prev = -1.0;
        for i in 0..500 {
            let s = o.arclength(i as f64 * TAU / 500.0);
            assert!(s > prev);
            prev = s;
        }
    }
}
