//! Stable and unstable manifolds of hyperbolic symmetric fixed points of
//! `T_m`, their crossings, and the bump that turns a tangency transversal.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{
    dt_symmetric_fixed_point, quotient_lifted, quotient_lifted_inverse, reduce, DynamicsError, Jacobian2, PhasePoint,
    QuotientPoint,
};
use crate::geometry::{Bump, BumpPower, GeometryError, Oval, PerturbedCurve, SupportCurve};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ManifoldError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("fixed point is not hyperbolic (trace = {trace})")]
    NotHyperbolic { trace: f64 },
    #[error("manifold refinement exhausted: {0}")]
    RefinementLimit(String),
    #[error("crossing search needs one unstable and one stable segment of the same T_m")]
    BranchMismatch,
    #[error("crossing is not tangent (slope difference {difference:.3e})")]
    NotTangent { difference: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Stable,
    Unstable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Eigenpairs of a hyperbolic fixed point in `(φ, p)` coordinates, unit vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EigenDirections {
    pub lambda_u: f64,
    pub v_u: [f64; 2],
    pub lambda_s: f64,
    pub v_s: [f64; 2],
}

fn eigenvector(j: &Jacobian2, lambda: f64) -> [f64; 2] {
    let a = [j.dphi_dp, lambda - j.dphi_dphi];
    let b = [lambda - j.dp_dp, j.dp_dphi];
    let v = if a[0].hypot(a[1]) >= b[0].hypot(b[1]) { a } else { b };
    let norm = v[0].hypot(v[1]);
    let s = if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) { -1.0 } else { 1.0 };
    [s * v[0] / norm, s * v[1] / norm]
}

/// Eigen-decomposition of a unit-determinant matrix with `|trace| > 2`;
/// a negative trace gives negative eigenvalues (reflection hyperbolic).
pub fn eigen_decomposition(j: &Jacobian2) -> Result<EigenDirections, ManifoldError> {
    let trace = j.trace();
    if !(trace.abs() > 2.0) {
        return Err(ManifoldError::NotHyperbolic { trace });
    }
    let half = 0.5 * trace;
    let lambda_u = half + half.signum() * (half * half - j.det()).sqrt();
    let lambda_s = j.det() / lambda_u;
    Ok(EigenDirections {
        lambda_u,
        v_u: eigenvector(j, lambda_u),
        lambda_s,
        v_s: eigenvector(j, lambda_s),
    })
}

pub fn eigen_directions<C: SupportCurve>(oval: &Oval<C>, phi0: f64, m: u32) -> Result<EigenDirections, ManifoldError> {
    eigen_decomposition(&dt_symmetric_fixed_point(oval, phi0, m)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowSettings {
    pub seed_distance: f64,
    /// Stop once the polyline is this long.
    pub max_arc: f64,
    pub max_points: usize,
    /// Largest distance between consecutive points.
    pub arc_step: f64,
    /// Largest turning angle between consecutive edges, radians.
    pub max_turn: f64,
}

impl Default for GrowSettings {
    fn default() -> Self {
        Self { seed_distance: 1e-7, max_arc: 5.0, max_points: 200_000, arc_step: 1e-2, max_turn: 0.1 }
    }
}

/// A branch of `W^u` or `W^s` grown from a fundamental domain.
///
/// Points are parametrized by `u ≥ 0`: with `k = ⌊u⌋` and `f = u - k`,
/// `point(u) = G^k(anchor + d μ^f v)` where `G` is `T_m` (unstable) or
/// `T_m⁻¹` (stable), applied twice when the eigenvalue is negative.
/// Angles are lifted, so the polyline is continuous.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifoldSegment {
    pub anchor: QuotientPoint,
    pub branch: Branch,
    pub side: Side,
    pub eigenvalue: f64,
    pub seed_distance: f64,
    direction: [f64; 2],
    /// Stretch factor per fundamental domain.
    mu: f64,
    steps_per_domain: usize,
    pub params: Vec<f64>,
    pub points: Vec<PhasePoint>,
}

impl ManifoldSegment {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| dist(w[0], w[1])).sum()
    }

    fn seed(&self, f: f64) -> (f64, f64) {
        let d = self.seed_distance * self.mu.powf(f) * self.side.sign();
        (self.anchor.phi + d * self.direction[0], self.anchor.p + d * self.direction[1])
    }

    /// Point at parameter `u`, recomputed from the seed.
    pub fn evaluate<C: SupportCurve>(&self, oval: &Oval<C>, u: f64) -> Result<PhasePoint, ManifoldError> {
        let k = u.floor();
        let (mut phi, mut p) = self.seed(u - k);
        for _ in 0..(k as usize * self.steps_per_domain) {
            (phi, p) = self.map(oval, phi, p)?;
        }
        Ok(PhasePoint::new(phi, p))
    }

    fn map<C: SupportCurve>(&self, oval: &Oval<C>, phi: f64, p: f64) -> Result<(f64, f64), DynamicsError> {
        match self.branch {
            Branch::Unstable => quotient_lifted(oval, phi, p, self.anchor.m),
            Branch::Stable => quotient_lifted_inverse(oval, phi, p, self.anchor.m),
        }
    }

    fn map_point<C: SupportCurve>(&self, oval: &Oval<C>, x: PhasePoint) -> Result<PhasePoint, ManifoldError> {
        let (mut phi, mut p) = (x.phi, x.p);
        for _ in 0..self.steps_per_domain {
            (phi, p) = self.map(oval, phi, p)?;
        }
        Ok(PhasePoint::new(phi, p))
    }
}

fn dist(a: PhasePoint, b: PhasePoint) -> f64 {
    (a.phi - b.phi).hypot(a.p - b.p)
}

fn turn(a: PhasePoint, b: PhasePoint, c: PhasePoint) -> f64 {
    let (x1, y1) = (b.phi - a.phi, b.p - a.p);
    let (x2, y2) = (c.phi - b.phi, c.p - b.p);
    (x1 * y2 - y1 * x2).atan2(x1 * x2 + y1 * y2).abs()
}

const INITIAL_SAMPLES: usize = 16;
const MIN_PARAM_GAP: f64 = 1e-13;

/// Grows one branch of the manifold of the hyperbolic fixed point `(φ0, cos(mπ/n))`.
pub fn grow_manifold<C: SupportCurve>(
    oval: &Oval<C>,
    phi0: f64,
    m: u32,
    branch: Branch,
    side: Side,
    settings: &GrowSettings,
) -> Result<ManifoldSegment, ManifoldError> {
    let eig = eigen_directions(oval, phi0, m)?;
    let (lambda, direction) = match branch {
        Branch::Unstable => (eig.lambda_u, eig.v_u),
        Branch::Stable => (eig.lambda_s, eig.v_s),
    };
    // expansion rate of G along its own unstable direction
    let rate = match branch {
        Branch::Unstable => lambda,
        Branch::Stable => 1.0 / lambda,
    };
    let (steps_per_domain, mu) = if rate > 0.0 { (1, rate) } else { (2, rate * rate) };
    let anchor = QuotientPoint { phi: phi0, p: (m as f64 * PI / oval.order() as f64).cos(), m };
    let mut seg = ManifoldSegment {
        anchor,
        branch,
        side,
        eigenvalue: lambda,
        seed_distance: settings.seed_distance,
        direction,
        mu,
        steps_per_domain,
        params: Vec::new(),
        points: Vec::new(),
    };

    let mut arc = 0.0;
    let mut domain: Vec<(f64, PhasePoint)> = Vec::new();
    for i in 0..=INITIAL_SAMPLES {
        let f = i as f64 / INITIAL_SAMPLES as f64;
        let (phi, p) = seg.seed(f);
        domain.push((f, PhasePoint::new(phi, p)));
    }
    let mut k = 0usize;
    loop {
        let budget = settings.max_points.saturating_sub(seg.points.len());
        match refine(oval, &seg, &mut domain, settings, budget) {
            Ok(()) => {}
            Err(e) if k == 0 => return Err(e),
            Err(_) => break,
        }
        // the first point of a later domain repeats the last point of the previous one
        for (i, &(u, x)) in domain.iter().enumerate() {
            if i == 0 && k > 0 {
                continue;
            }
            if let Some(&last) = seg.points.last() {
                arc += dist(last, x);
            }
            seg.params.push(u);
            seg.points.push(x);
            if arc >= settings.max_arc {
                return Ok(seg);
            }
        }
        if seg.points.len() >= settings.max_points {
            return Ok(seg);
        }
        let mut next = Vec::with_capacity(domain.len());
        for &(u, x) in &domain {
            next.push((u + 1.0, seg.map_point(oval, x)?));
        }
        domain = next;
        k += 1;
    }
    Ok(seg)
}

/// Inserts points until spacing and turning limits hold inside one domain.
fn refine<C: SupportCurve>(
    oval: &Oval<C>,
    seg: &ManifoldSegment,
    domain: &mut Vec<(f64, PhasePoint)>,
    settings: &GrowSettings,
    budget: usize,
) -> Result<(), ManifoldError> {
    loop {
        let mut wanted = vec![false; domain.len()];
        for i in 0..domain.len() - 1 {
            if dist(domain[i].1, domain[i + 1].1) > settings.arc_step {
                wanted[i] = true;
            }
        }
        for i in 1..domain.len() - 1 {
            if turn(domain[i - 1].1, domain[i].1, domain[i + 1].1) > settings.max_turn {
                wanted[i - 1] = true;
                wanted[i] = true;
            }
        }
        let count = wanted.iter().filter(|&&w| w).count();
        if count == 0 {
            return Ok(());
        }
        if domain.len() + count > budget {
            return Err(ManifoldError::RefinementLimit(format!(
                "domain needs more than {} points",
                settings.max_points
            )));
        }
        let mut next = Vec::with_capacity(domain.len() + count);
        for i in 0..domain.len() {
            next.push(domain[i]);
            if i + 1 < domain.len() && wanted[i] {
                let (a, b) = (domain[i].0, domain[i + 1].0);
                if b - a < MIN_PARAM_GAP {
                    return Err(ManifoldError::RefinementLimit(format!("parameter spacing below {MIN_PARAM_GAP:e}")));
                }
                let u = 0.5 * (a + b);
                next.push((u, seg.evaluate(oval, u)?));
            }
        }
        *domain = next;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingKind {
    Transversal,
    Tangent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CrossingReport {
    /// Angle reduced to `[0, 2π/n)`.
    pub location: PhasePoint,
    pub kind: CrossingKind,
    pub m: u32,
    /// `dα/dφ` along `W^u` and along `W^s`.
    pub slopes: [f64; 2],
    pub slope_difference: f64,
    /// `d+` from the stable slope, `d-` from the unstable slope.
    pub focusing: [f64; 2],
    /// Sign of the turn from the stable to the unstable tangent.
    pub orientation: i8,
    pub param_u: f64,
    pub param_s: f64,
    /// The stable segment was shifted by `shift · 2π/n`.
    pub shift: i32,
}

fn segment_hit(a0: PhasePoint, a1: PhasePoint, b0: PhasePoint, b1: PhasePoint) -> Option<(f64, f64)> {
    let (rx, ry) = (a1.phi - a0.phi, a1.p - a0.p);
    let (sx, sy) = (b1.phi - b0.phi, b1.p - b0.p);
    let den = rx * sy - ry * sx;
    if den == 0.0 {
        return None;
    }
    let (qx, qy) = (b0.phi - a0.phi, b0.p - a0.p);
    let t = (qx * sy - qy * sx) / den;
    let s = (qx * ry - qy * rx) / den;
    ((0.0..1.0).contains(&t) && (0.0..1.0).contains(&s)).then_some((t, s))
}

fn shifted(x: PhasePoint, dphi: f64) -> PhasePoint {
    PhasePoint::new(x.phi + dphi, x.p)
}

/// Bisects the parameter intervals of two crossing chords until the crossing
/// is located to working precision.
fn refine_crossing<C: SupportCurve>(
    oval: &Oval<C>,
    seg_u: &ManifoldSegment,
    seg_s: &ManifoldSegment,
    dphi: f64,
    (mut ua, mut ub): (f64, f64),
    (mut va, mut vb): (f64, f64),
) -> Result<(f64, f64, PhasePoint), ManifoldError> {
    let eval_s = |v: f64| -> Result<PhasePoint, ManifoldError> { Ok(shifted(seg_s.evaluate(oval, v)?, dphi)) };
    let (mut pa, mut pb) = (seg_u.evaluate(oval, ua)?, seg_u.evaluate(oval, ub)?);
    let (mut qa, mut qb) = (eval_s(va)?, eval_s(vb)?);
    for _ in 0..60 {
        if dist(pa, pb) < 1e-13 && dist(qa, qb) < 1e-13 {
            break;
        }
        let (um, vm) = (0.5 * (ua + ub), 0.5 * (va + vb));
        if um <= ua || um >= ub || vm <= va || vm >= vb {
            break;
        }
        let (pm, qm) = (seg_u.evaluate(oval, um)?, eval_s(vm)?);
        let halves_u = [((ua, um), (pa, pm)), ((um, ub), (pm, pb))];
        let halves_s = [((va, vm), (qa, qm)), ((vm, vb), (qm, qb))];
        let mut chosen = None;
        'search: for hu in &halves_u {
            for hs in &halves_s {
                if segment_hit(hu.1 .0, hu.1 .1, hs.1 .0, hs.1 .1).is_some() {
                    chosen = Some((*hu, *hs));
                    break 'search;
                }
            }
        }
        let Some((hu, hs)) = chosen else { break };
        (ua, ub, pa, pb) = (hu.0 .0, hu.0 .1, hu.1 .0, hu.1 .1);
        (va, vb, qa, qb) = (hs.0 .0, hs.0 .1, hs.1 .0, hs.1 .1);
    }
    // final linear interpolation inside the smallest chords
    let (t, s) = segment_hit(pa, pb, qa, qb).unwrap_or((0.5, 0.5));
    let u = ua + t * (ub - ua);
    let v = va + s * (vb - va);
    let x = PhasePoint::new(pa.phi + t * (pb.phi - pa.phi), pa.p + t * (pb.p - pa.p));
    Ok((u, v, x))
}

/// `dp/dφ` along a segment at parameter `u`, using points about `scale` apart.
fn local_slope<C: SupportCurve>(
    oval: &Oval<C>,
    seg: &ManifoldSegment,
    u: f64,
    speed: f64,
    scale: f64,
) -> Result<(f64, f64, f64), ManifoldError> {
    let du = (scale / speed).max(1e-12);
    let a = seg.evaluate(oval, u - du)?;
    let b = seg.evaluate(oval, u + du)?;
    Ok((b.phi - a.phi, b.p - a.p, (b.p - a.p) / (b.phi - a.phi)))
}

const SLOPE_SCALE: f64 = 1e-5;
const ANCHOR_EXCLUSION: f64 = 1e-5;

/// All crossings of an unstable segment with the stable segment and its
/// copies shifted by multiples of `2π/n` that overlap it.
pub fn find_crossings<C: SupportCurve>(
    oval: &Oval<C>,
    seg_u: &ManifoldSegment,
    seg_s: &ManifoldSegment,
    tol: f64,
) -> Result<Vec<CrossingReport>, ManifoldError> {
    if seg_u.branch != Branch::Unstable || seg_s.branch != Branch::Stable || seg_u.anchor.m != seg_s.anchor.m {
        return Err(ManifoldError::BranchMismatch);
    }
    if seg_u.len() < 2 || seg_s.len() < 2 {
        return Ok(Vec::new());
    }
    let period = oval.period();
    let range = |s: &ManifoldSegment| {
        s.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x.phi), hi.max(x.phi)))
    };
    let (ulo, uhi) = range(seg_u);
    let (slo, shi) = range(seg_s);
    let j_min = ((ulo - shi) / period).floor() as i32;
    let j_max = ((uhi - slo) / period).ceil() as i32;

    // spatial hash of the unstable edges
    let cell = 4.0 * seg_u.points.windows(2).map(|w| dist(w[0], w[1])).fold(1e-6, f64::max);
    let key = |x: f64, y: f64| ((x / cell).floor() as i64, (y / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, w) in seg_u.points.windows(2).enumerate() {
        let (a, b) = key(w[0].phi.min(w[1].phi), w[0].p.min(w[1].p));
        let (c, d) = key(w[0].phi.max(w[1].phi), w[0].p.max(w[1].p));
        for x in a..=c {
            for y in b..=d {
                grid.entry((x, y)).or_default().push(i);
            }
        }
    }
    let anchors: Vec<PhasePoint> = [seg_u.anchor, seg_s.anchor]
        .iter()
        .map(|a| PhasePoint::new(a.phi, a.p))
        .collect();
    let near_anchor = |x: PhasePoint| {
        anchors.iter().any(|a| {
            let dphi = (x.phi - a.phi) - ((x.phi - a.phi) / period).round() * period;
            dphi.hypot(x.p - a.p) < ANCHOR_EXCLUSION
        })
    };

    let mut out = Vec::new();
    for j in j_min..=j_max {
        let dphi = j as f64 * period;
        let mut hits: Vec<(usize, usize)> = Vec::new();
        for (k, w) in seg_s.points.windows(2).enumerate() {
            let (b0, b1) = (shifted(w[0], dphi), shifted(w[1], dphi));
            let (a, b) = key(b0.phi.min(b1.phi), b0.p.min(b1.p));
            let (c, d) = key(b0.phi.max(b1.phi), b0.p.max(b1.p));
            let mut seen: Vec<usize> = Vec::new();
            for x in a..=c {
                for y in b..=d {
                    if let Some(list) = grid.get(&(x, y)) {
                        seen.extend(list);
                    }
                }
            }
            seen.sort_unstable();
            seen.dedup();
            for i in seen {
                let (a0, a1) = (seg_u.points[i], seg_u.points[i + 1]);
                if segment_hit(a0, a1, b0, b1).is_some() {
                    hits.push((i, k));
                }
            }
        }
        hits.sort_unstable();
        for (i, k) in hits {
            let (a0, a1) = (seg_u.points[i], seg_u.points[i + 1]);
            let (b0, b1) = (shifted(seg_s.points[k], dphi), shifted(seg_s.points[k + 1], dphi));
            if near_anchor(a0) || near_anchor(b0) {
                continue;
            }
            let pu = (seg_u.params[i], seg_u.params[i + 1]);
            let ps = (seg_s.params[k], seg_s.params[k + 1]);
            let (u, v, x) = refine_crossing(oval, seg_u, seg_s, dphi, pu, ps)?;
            if near_anchor(x) {
                continue;
            }
            let speed_u = dist(a0, a1) / (pu.1 - pu.0);
            let speed_s = dist(b0, b1) / (ps.1 - ps.0);
            let (ux, uy, slope_u) = local_slope(oval, seg_u, u, speed_u, SLOPE_SCALE)?;
            let (sx, sy, slope_s) = local_slope(oval, seg_s, v, speed_s, SLOPE_SCALE)?;
            let sin_a = (1.0 - x.p * x.p).sqrt();
            let alpha_u = -slope_u / sin_a;
            let alpha_s = -slope_s / sin_a;
            let difference = (alpha_u - alpha_s).abs();
            let r = oval.radius(x.phi);
            out.push(CrossingReport {
                location: PhasePoint::new(reduce(x.phi, period), x.p),
                kind: if difference < tol { CrossingKind::Tangent } else { CrossingKind::Transversal },
                m: seg_u.anchor.m,
                slopes: [alpha_u, alpha_s],
                slope_difference: difference,
                focusing: [r * sin_a / (1.0 + alpha_s), r * sin_a / (1.0 - alpha_u)],
                orientation: (sx * uy - sy * ux).signum() as i8,
                param_u: u,
                param_s: v,
                shift: j,
            });
        }
    }
    Ok(out)
}

/// First-order change of `(dα^u/dφ, dα^s/dφ)` at a crossing when `R` grows by `2ε` there.
pub fn predicted_slope_shift(crossing: &CrossingReport, r: f64, eps: f64) -> [f64; 2] {
    let [au, as_] = crossing.slopes;
    [-2.0 * eps * (1.0 - au) / r, 2.0 * eps * (1.0 + as_) / r]
}

/// Adds a quadratic bump centred at a tangent crossing so that it becomes
/// transversal. The crossing orbit is followed `horizon` steps each way and
/// must stay outside the bump support.
pub fn tangency_break<C: SupportCurve>(
    oval: &Oval<C>,
    curve: &PerturbedCurve,
    crossing: &CrossingReport,
    eps: f64,
    delta1: f64,
    delta2: f64,
    horizon: usize,
) -> Result<PerturbedCurve, ManifoldError> {
    if crossing.kind != CrossingKind::Tangent {
        return Err(ManifoldError::NotTangent { difference: crossing.slope_difference });
    }
    check_orbit_clearance(oval, crossing, delta2, horizon)?;
    let bump = Bump::new(crossing.location.phi, eps, BumpPower::Quadratic, delta1, delta2);
    Ok(curve.with_bump(bump)?)
}

/// Checks that the orbit of the crossing (excluding the crossing itself)
/// stays at least `delta2` away from it modulo the symmetry.
pub fn check_orbit_clearance<C: SupportCurve>(
    oval: &Oval<C>,
    crossing: &CrossingReport,
    delta2: f64,
    horizon: usize,
) -> Result<(), ManifoldError> {
    let period = oval.period();
    let center = crossing.location.phi;
    let m = crossing.m;
    let clear = |phi: f64| {
        let d = (phi - center).rem_euclid(period);
        d.min(period - d) >= delta2
    };
    for forward in [true, false] {
        let (mut phi, mut p) = (crossing.location.phi, crossing.location.p);
        for step in 0..horizon {
            (phi, p) = if forward {
                quotient_lifted(oval, phi, p, m)?
            } else {
                quotient_lifted_inverse(oval, phi, p, m)?
            };
            if !clear(phi) {
                return Err(GeometryError::SupportTooWide(format!(
                    "orbit of the crossing returns to the bump support after {} {} steps",
                    step + 1,
                    if forward { "forward" } else { "backward" }
                ))
                .into());
            }
        }
    }
    Ok(())
}
