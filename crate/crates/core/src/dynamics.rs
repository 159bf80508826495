//! The billiard map `T` on the phase cylinder, its inverse, Jacobians and the
//! quotient maps `T_m`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Oval, SupportCurve, SupportJet};
use crate::roots::brent;

/// `|p|` at or above this is treated as a grazing trajectory.
pub const GRAZING_LIMIT: f64 = 1.0 - 1e-12;

/// Default step for [`jacobian_numeric`].
pub const JACOBIAN_STEP: f64 = 1e-6;

/// Default `|g'|` tolerance when checking that an angle is critical.
pub const CRITICAL_TOL: f64 = 1e-9;

const BRACKET_CELLS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("grazing orbit: |p| = {p} is too close to 1")]
    Grazing { p: f64 },
    #[error("next impact not bracketed from phi = {phi}, p = {p}")]
    RootNotBracketed { phi: f64, p: f64 },
    #[error("quotient index m = {m} outside 1..{n}")]
    InvalidIndex { m: u32, n: u32 },
    #[error("phi0 = {phi0} is not a critical point of g (g' = {slope:.3e})")]
    NotCritical { phi0: f64, slope: f64 },
    #[error("step {index}: {source}")]
    AtStep {
        index: usize,
        #[source]
        source: Box<DynamicsError>,
    },
}

/// `(φ, p)` with `p = cos α`, `α` the angle between the outgoing ray and the tangent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhasePoint {
    pub phi: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(phi: f64, p: f64) -> Self {
        Self { phi, p }
    }

    pub fn alpha(&self) -> f64 {
        self.p.acos()
    }

    /// The involution `I(φ, p) = (φ, -p)`.
    pub fn reversed(&self) -> Self {
        Self { phi: self.phi, p: -self.p }
    }
}

/// A point of the quotient cylinder `Ω / (2π/n)` used by `T_m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuotientPoint {
    pub phi: f64,
    pub p: f64,
    pub m: u32,
}

/// `[[dφ1/dφ, dφ1/dp], [dp1/dφ, dp1/dp]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Jacobian2 {
    pub dphi_dphi: f64,
    pub dphi_dp: f64,
    pub dp_dphi: f64,
    pub dp_dp: f64,
}

impl Jacobian2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { dphi_dphi: a, dphi_dp: b, dp_dphi: c, dp_dp: d }
    }

    pub fn det(&self) -> f64 {
        self.dphi_dphi * self.dp_dp - self.dphi_dp * self.dp_dphi
    }

    pub fn trace(&self) -> f64 {
        self.dphi_dphi + self.dp_dp
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.dphi_dphi, self.dphi_dp, self.dp_dphi, self.dp_dp]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.dphi_dphi * v[0] + self.dphi_dp * v[1],
            self.dp_dphi * v[0] + self.dp_dp * v[1],
        ]
    }

    pub fn mul(&self, o: &Jacobian2) -> Jacobian2 {
        Jacobian2::new(
            self.dphi_dphi * o.dphi_dphi + self.dphi_dp * o.dp_dphi,
            self.dphi_dphi * o.dphi_dp + self.dphi_dp * o.dp_dp,
            self.dp_dphi * o.dphi_dphi + self.dp_dp * o.dp_dphi,
            self.dp_dphi * o.dphi_dp + self.dp_dp * o.dp_dp,
        )
    }

    /// Same map in `(s, p)` coordinates, given `R` at the start and end points.
    pub fn to_arclength(&self, r0: f64, r1: f64) -> Jacobian2 {
        Jacobian2::new(
            self.dphi_dphi * r1 / r0,
            self.dphi_dp * r1,
            self.dp_dphi / r0,
            self.dp_dp,
        )
    }
}

/// Result of one bounce.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub point: PhasePoint,
    pub chord: f64,
}

/// Next impact with `φ1` lifted into `(φ, φ + 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Lifted {
    pub phi: f64,
    pub p: f64,
    pub chord: f64,
}

pub(crate) fn reduce(phi: f64, period: f64) -> f64 {
    let r = phi.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

fn check_momentum(p: f64) -> Result<(), DynamicsError> {
    if !(p.abs() < GRAZING_LIMIT) {
        return Err(DynamicsError::Grazing { p });
    }
    Ok(())
}

/// One bounce without reducing the new angle.
///
/// The next impact `ψ` is the root of the chord-angle function
/// `h(ψ) = ∠(σ(φ), Γ(ψ) - Γ(φ)) - α`, which increases from `-α` to `π - α`
/// on `(φ, φ + 2π)` for a strictly convex curve.
pub(crate) fn lifted_step<C: SupportCurve>(oval: &Oval<C>, phi: f64, p: f64) -> Result<Lifted, DynamicsError> {
    check_momentum(p)?;
    let alpha = p.acos();
    let start = oval.position(phi);
    let (sin_phi, cos_phi) = phi.sin_cos();
    let h = |psi: f64| {
        let d = oval.position(psi) - start;
        let along = cos_phi * d.x + sin_phi * d.y;
        let across = -sin_phi * d.x + cos_phi * d.y;
        across.atan2(along) - alpha
    };
    let cell = TAU / BRACKET_CELLS as f64;
    let fail = || DynamicsError::RootNotBracketed { phi, p };

    // h is monotone, so binary search over the coarse grid
    let (mut lo, mut hi) = (0usize, BRACKET_CELLS);
    let (mut h_lo, mut h_hi) = (-alpha, PI - alpha);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let v = h(phi + mid as f64 * cell);
        if v < 0.0 {
            lo = mid;
            h_lo = v;
        } else {
            hi = mid;
            h_hi = v;
        }
        if v == 0.0 {
            let psi = phi + mid as f64 * cell;
            return Ok(finish(oval, start, phi, alpha, psi));
        }
    }
    let mut a = phi + lo as f64 * cell;
    let mut b = phi + hi as f64 * cell;

    // the end cells touch the trivial root at φ and φ + 2π; pull them in
    if lo == 0 {
        let mut gap = b - phi;
        loop {
            gap *= 0.25;
            if gap < 1e-300 {
                return Err(fail());
            }
            let v = h(phi + gap);
            if v < 0.0 {
                a = phi + gap;
                h_lo = v;
                break;
            }
            b = phi + gap;
            h_hi = v;
        }
    }
    if hi == BRACKET_CELLS {
        let end = phi + TAU;
        let mut gap = end - a;
        loop {
            gap *= 0.25;
            if gap < 1e-300 {
                return Err(fail());
            }
            let v = h(end - gap);
            if v > 0.0 {
                b = end - gap;
                h_hi = v;
                break;
            }
            a = end - gap;
            h_lo = v;
        }
    }
    let psi = brent(h, a, b, h_lo, h_hi, 1e-15, 200).ok_or_else(fail)?;
    Ok(finish(oval, start, phi, alpha, psi))
}

fn finish<C: SupportCurve>(oval: &Oval<C>, start: crate::Vec2, phi: f64, alpha: f64, psi: f64) -> Lifted {
    Lifted {
        phi: psi,
        p: (psi - phi - alpha).cos(),
        chord: (oval.position(psi) - start).norm(),
    }
}

/// Preimage with `φ_{-1}` lifted into `(φ - 2π, φ)`; uses `T⁻¹ = I ∘ T ∘ I`.
pub(crate) fn lifted_inverse<C: SupportCurve>(oval: &Oval<C>, phi: f64, p: f64) -> Result<Lifted, DynamicsError> {
    let fwd = lifted_step(oval, phi, -p)?;
    Ok(Lifted { phi: fwd.phi - TAU, p: -fwd.p, chord: fwd.chord })
}

/// `T_m` on lifted coordinates: one bounce, then rotate back by `2πm/n`.
pub(crate) fn quotient_lifted<C: SupportCurve>(oval: &Oval<C>, phi: f64, p: f64, m: u32) -> Result<(f64, f64), DynamicsError> {
    let s = lifted_step(oval, phi, p)?;
    Ok((s.phi - m as f64 * oval.period(), s.p))
}

/// `T_m⁻¹` on lifted coordinates.
pub(crate) fn quotient_lifted_inverse<C: SupportCurve>(
    oval: &Oval<C>,
    phi: f64,
    p: f64,
    m: u32,
) -> Result<(f64, f64), DynamicsError> {
    let s = lifted_inverse(oval, phi, p)?;
    Ok((s.phi + m as f64 * oval.period(), s.p))
}

/// The billiard map. The returned angle lies in `[0, 2π)`.
pub fn billiard_step<C: SupportCurve>(oval: &Oval<C>, x: PhasePoint) -> Result<Step, DynamicsError> {
    let s = lifted_step(oval, x.phi, x.p)?;
    Ok(Step { point: PhasePoint::new(reduce(s.phi, TAU), s.p), chord: s.chord })
}

pub fn billiard_inverse<C: SupportCurve>(oval: &Oval<C>, x: PhasePoint) -> Result<PhasePoint, DynamicsError> {
    let s = lifted_inverse(oval, x.phi, x.p)?;
    Ok(PhasePoint::new(reduce(s.phi, TAU), s.p))
}

/// `steps + 1` points starting with `x0`.
pub fn iterate<C: SupportCurve>(oval: &Oval<C>, x0: PhasePoint, steps: usize) -> Result<Vec<PhasePoint>, DynamicsError> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x0);
    let mut x = x0;
    for index in 0..steps {
        x = billiard_step(oval, x)
            .map_err(|e| DynamicsError::AtStep { index, source: Box::new(e) })?
            .point;
        out.push(x);
    }
    Ok(out)
}

fn check_index(m: u32, n: u32) -> Result<(), DynamicsError> {
    if m == 0 || m >= n {
        return Err(DynamicsError::InvalidIndex { m, n });
    }
    Ok(())
}

/// `T_m`: one bounce, angle reduced to `[0, 2π/n)`.
pub fn quotient_step<C: SupportCurve>(oval: &Oval<C>, q: QuotientPoint) -> Result<QuotientPoint, DynamicsError> {
    check_index(q.m, oval.order())?;
    let s = lifted_step(oval, q.phi, q.p)?;
    Ok(QuotientPoint { phi: reduce(s.phi, oval.period()), p: s.p, m: q.m })
}

/// Central differences with one Richardson step (`h` and `h/2`).
pub fn jacobian_numeric<C: SupportCurve>(oval: &Oval<C>, x: PhasePoint, h: f64) -> Result<Jacobian2, DynamicsError> {
    check_momentum(x.p.abs() + h)?;
    let diff = |dphi: f64, dp: f64| -> Result<[f64; 2], DynamicsError> {
        let plus = lifted_step(oval, x.phi + dphi, x.p + dp)?;
        let minus = lifted_step(oval, x.phi - dphi, x.p - dp)?;
        let w = 0.5 / (dphi + dp);
        Ok([(plus.phi - minus.phi) * w, (plus.p - minus.p) * w])
    };
    let rich = |coarse: [f64; 2], fine: [f64; 2]| [(4.0 * fine[0] - coarse[0]) / 3.0, (4.0 * fine[1] - coarse[1]) / 3.0];
    let col_phi = rich(diff(h, 0.0)?, diff(0.5 * h, 0.0)?);
    let col_p = rich(diff(0.0, h)?, diff(0.0, 0.5 * h)?);
    Ok(Jacobian2::new(col_phi[0], col_p[0], col_phi[1], col_p[1]))
}

/// Numeric Jacobian in `(s, p)` coordinates, where the map preserves area.
pub fn jacobian_numeric_sp<C: SupportCurve>(oval: &Oval<C>, x: PhasePoint, h: f64) -> Result<Jacobian2, DynamicsError> {
    let j = jacobian_numeric(oval, x, h)?;
    let next = lifted_step(oval, x.phi, x.p)?;
    Ok(j.to_arclength(oval.radius(x.phi), oval.radius(next.phi)))
}

/// Side length of the symmetric polygon through `φ0`, `L_m = 2 g(φ0) sin(mπ/n)`.
pub(crate) fn symmetric_side(g: f64, alpha: f64) -> f64 {
    2.0 * g * alpha.sin()
}

/// Closed-form `DT` at the symmetric fixed point `(φ0, cos(mπ/n))`.
pub fn dt_symmetric_fixed_point<C: SupportCurve>(oval: &Oval<C>, phi0: f64, m: u32) -> Result<Jacobian2, DynamicsError> {
    dt_symmetric_fixed_point_tol(oval, phi0, m, CRITICAL_TOL)
}

pub fn dt_symmetric_fixed_point_tol<C: SupportCurve>(
    oval: &Oval<C>,
    phi0: f64,
    m: u32,
    tol: f64,
) -> Result<Jacobian2, DynamicsError> {
    let n = oval.order();
    check_index(m, n)?;
    let j = oval.curve().jet(phi0);
    if j.d1.abs() > tol {
        return Err(DynamicsError::NotCritical { phi0, slope: j.d1 });
    }
    let alpha = m as f64 * PI / n as f64;
    let s = alpha.sin();
    let r = j.radius();
    let l = symmetric_side(j.g, alpha);
    let diag = (l - r * s) / (r * s);
    Ok(Jacobian2::new(diag, -l / (r * s * s), -(l - 2.0 * r * s) / r, diag))
}

/// `(dR/ds, d²R/ds²)` from the `φ`-jet of the support function.
pub fn radius_arclength_derivatives(j: &SupportJet) -> (f64, f64) {
    let r = j.radius();
    let r1 = j.radius_d1();
    let r2 = j.radius_d2();
    (r1 / r, r2 / (r * r) - r1 * r1 / (r * r * r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SupportFunction;
    use std::f64::consts::FRAC_PI_4;

    fn circle() -> Oval<SupportFunction> {
        Oval::new(SupportFunction::constant(3, 1.0).unwrap()).unwrap()
    }

    fn trefoil() -> Oval<SupportFunction> {
        Oval::new(SupportFunction::cosine(3, 1.0, 0.05).unwrap()).unwrap()
    }

    #[test]
    fn circle_step() {
        let s = billiard_step(&circle(), PhasePoint::new(0.0, FRAC_PI_4.cos())).unwrap();
        assert!((s.point.phi - PI / 2.0).abs() < 1e-14);
        assert!((s.point.p - FRAC_PI_4.cos()).abs() < 1e-14);
        assert!((s.chord - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn constant_width_diameter() {
        let o = trefoil();
        for &phi in &[0.0, 0.4, 2.5] {
            let s = billiard_step(&o, PhasePoint::new(phi, 0.0)).unwrap();
            assert!((s.point.phi - (phi + PI)).abs() < 1e-12);
            assert!(s.point.p.abs() < 1e-12);
            assert!((s.chord - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_period_three() {
        let o = trefoil();
        let p = (PI / 3.0).cos();
        let s = billiard_step(&o, PhasePoint::new(PI / 3.0, p)).unwrap();
        assert!((s.point.phi - PI).abs() < 1e-13);
        assert!((s.point.p - p).abs() < 1e-13);
        assert!((s.chord - 0.95 * 3f64.sqrt()).abs() < 1e-13);
        let back = billiard_inverse(&o, s.point).unwrap();
        assert!((back.phi - PI / 3.0).abs() < 1e-13);
        assert!((back.p - p).abs() < 1e-13);
        let orbit = iterate(&o, PhasePoint::new(PI / 3.0, p), 3).unwrap();
        assert_eq!(orbit.len(), 4);
        assert!((orbit[3].phi - PI / 3.0).abs() < 1e-9);
    }

    #[test]
    fn circle_inverse_and_iterate() {
        let c = circle();
        let back = billiard_inverse(&c, PhasePoint::new(PI / 2.0, FRAC_PI_4.cos())).unwrap();
        assert!(back.phi.abs() < 1e-14 || (back.phi - TAU).abs() < 1e-14);
        let x0 = PhasePoint::new(0.3, (PI / 3.0).cos());
        let orbit = iterate(&c, x0, 6).unwrap();
        assert!((orbit[6].phi - 0.3).abs() < 1e-12);
        assert_eq!(iterate(&c, x0, 0).unwrap(), vec![x0]);
    }

    #[test]
    fn grazing_is_rejected() {
        let e = billiard_step(&trefoil(), PhasePoint::new(0.1, 1.0 - 1e-13)).unwrap_err();
        assert!(matches!(e, DynamicsError::Grazing { .. }));
        let e = iterate(&trefoil(), PhasePoint::new(0.1, 1.0), 3).unwrap_err();
        assert!(matches!(e, DynamicsError::AtStep { index: 0, .. }));
    }

    #[test]
    fn near_grazing_steps_are_short() {
        let o = trefoil();
        for &p in &[0.999999, -0.999999, 1.0 - 1e-11] {
            let s = lifted_step(&o, 1.0, p).unwrap();
            let alpha = p.acos();
            assert!(s.phi > 1.0);
            assert!((s.phi - 1.0) < 10.0 * alpha || (1.0 + TAU - s.phi) < 10.0 * alpha);
        }
    }

    #[test]
    fn quotient_fixed_points() {
        let o = trefoil();
        let p = (PI / 3.0).cos();
        for &phi in &[PI / 3.0, 0.0] {
            let q = quotient_step(&o, QuotientPoint { phi, p, m: 1 }).unwrap();
            let d = (q.phi - phi).abs();
            assert!(d < 1e-12 || (d - o.period()).abs() < 1e-12);
            assert!((q.p - p).abs() < 1e-12);
        }
        assert!(matches!(
            quotient_step(&o, QuotientPoint { phi: 0.0, p, m: 3 }),
            Err(DynamicsError::InvalidIndex { .. })
        ));
    }

    #[test]
    fn closed_form_traces() {
        let o = trefoil();
        let e = dt_symmetric_fixed_point(&o, PI / 3.0, 1).unwrap();
        assert!((e.trace() - (4.0 * 0.95 / 1.4 - 2.0)).abs() < 1e-12);
        assert!((e.det() - 1.0).abs() < 1e-12);
        let h = dt_symmetric_fixed_point(&o, 0.0, 1).unwrap();
        assert!((h.trace() - 5.0).abs() < 1e-12);
        let c = dt_symmetric_fixed_point(&circle(), 1.234, 2).unwrap();
        assert!((c.trace() - 2.0).abs() < 1e-12);
        assert!(matches!(dt_symmetric_fixed_point(&o, 0.3, 1), Err(DynamicsError::NotCritical { .. })));
    }

    #[test]
    fn numeric_jacobian_matches_closed_form() {
        let o = trefoil();
        let numeric = jacobian_numeric(&o, PhasePoint::new(PI / 3.0, (PI / 3.0).cos()), JACOBIAN_STEP).unwrap();
        let closed = dt_symmetric_fixed_point(&o, PI / 3.0, 1).unwrap();
        for (a, b) in numeric.entries().iter().zip(closed.entries()) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn arclength_derivative_identities() {
        let sf = SupportFunction::cosine(3, 1.0, 0.05).unwrap();
        let o = Oval::new(sf.clone()).unwrap();
        let phi = 0.37;
        let (d1, d2) = radius_arclength_derivatives(&sf.jet(phi));
        // differentiate R along s numerically
        let s0 = o.arclength(phi);
        let rs = |ds: f64| o.radius(o.phi_of_s(s0 + ds));
        let h = 1e-3;
        let fd1 = (rs(h) - rs(-h)) / (2.0 * h);
        let fd2 = (rs(h) - 2.0 * rs(0.0) + rs(-h)) / (h * h);
        assert!((d1 - fd1).abs() < 1e-5 * d1.abs().max(1.0));
        assert!((d2 - fd2).abs() < 1e-4 * d2.abs().max(1.0));
        let (z1, z2) = radius_arclength_derivatives(&sf.jet(PI / 3.0));
        assert!(z1.abs() < 1e-12);
        assert!((z2 - (-3.6 / 1.96)).abs() < 1e-12);
    }
}
