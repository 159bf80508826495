use std::f64::consts::PI;

use symbill::dynamics::{quotient_step, PhasePoint, QuotientPoint};
use symbill::hyperbolic::*;
use symbill::*;

fn trefoil() -> Oval<PerturbedCurve> {
    Oval::new(PerturbedCurve::from(SupportFunction::cosine(3, 1.0, 0.05).unwrap())).unwrap()
}

fn short() -> GrowSettings {
    GrowSettings { max_arc: 1.0, ..GrowSettings::default() }
}

fn circ(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

// distance from x to the polyline, φ taken modulo the period
fn polyline_distance(x: PhasePoint, pts: &[PhasePoint], period: f64) -> f64 {
    let mut best = f64::INFINITY;
    for w in pts.windows(2) {
        let shift = ((x.phi - w[0].phi) / period).round() * period;
        let (ax, ay) = (w[0].phi + shift, w[0].p);
        let (dx, dy) = (w[1].phi - w[0].phi, w[1].p - w[0].p);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 { (((x.phi - ax) * dx + (x.p - ay) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
        best = best.min((x.phi - ax - t * dx).hypot(x.p - ay - t * dy));
    }
    best
}

#[test]
fn growth_matches_unstable_eigenvalue() {
    let o = trefoil();
    let seg = grow_manifold(&o, 0.0, 1, Branch::Unstable, Side::Plus, &short()).unwrap();
    let lambda = (5.0 + 21f64.sqrt()) / 2.0;
    assert!((seg.eigenvalue - lambda).abs() < 1e-6);
    let d = |u: f64| {
        let x = seg.evaluate(&o, u).unwrap();
        (x.phi - seg.anchor.phi).hypot(x.p - seg.anchor.p)
    };
    for k in 0..4 {
        let ratio = d(k as f64 + 1.0) / d(k as f64);
        assert!((ratio / lambda - 1.0).abs() < 0.01, "k = {k}: ratio {ratio}");
    }
}

#[test]
fn stable_growth_matches_stable_eigenvalue() {
    let o = trefoil();
    let seg = grow_manifold(&o, 0.0, 2, Branch::Stable, Side::Minus, &short()).unwrap();
    let lambda = (5.0 + 21f64.sqrt()) / 2.0;
    assert!((seg.eigenvalue * lambda - 1.0).abs() < 1e-6);
    let x0 = seg.evaluate(&o, 0.0).unwrap();
    let x1 = seg.evaluate(&o, 1.0).unwrap();
    let ratio = (x1.phi - seg.anchor.phi).hypot(x1.p - seg.anchor.p) / (x0.phi - seg.anchor.phi).hypot(x0.p - seg.anchor.p);
    assert!((ratio / lambda - 1.0).abs() < 0.01);
}

#[test]
fn unstable_segment_is_invariant() {
    let o = trefoil();
    let period = o.period();
    for m in [1, 2] {
        let seg = grow_manifold(&o, 0.0, m, Branch::Unstable, Side::Minus, &short()).unwrap();
        for (x, &u) in seg.points.iter().zip(&seg.params) {
            let image = quotient_step(&o, QuotientPoint { phi: x.phi, p: x.p, m }).unwrap();
            let extended = seg.evaluate(&o, u + 1.0).unwrap();
            let gap = circ(image.phi, extended.phi, period).hypot(image.p - extended.p);
            assert!(gap < 1e-6, "m = {m}, u = {u}: gap {gap}");
        }
    }
}

#[test]
fn stable_segment_is_invariant_under_inverse() {
    let o = trefoil();
    let period = o.period();
    let seg = grow_manifold(&o, 0.0, 1, Branch::Stable, Side::Plus, &short()).unwrap();
    for (x, &u) in seg.points.iter().zip(&seg.params).filter(|(_, &u)| u >= 1.0) {
        // one forward step brings a stable point one domain closer to the anchor
        let image = quotient_step(&o, QuotientPoint { phi: x.phi, p: x.p, m: 1 }).unwrap();
        let back = seg.evaluate(&o, u - 1.0).unwrap();
        assert!(circ(image.phi, back.phi, period).hypot(image.p - back.p) < 1e-6);
    }
}

#[test]
fn reversal_maps_unstable_to_stable() {
    let o = trefoil();
    let period = o.period();
    let st = short();
    let wu = grow_manifold(&o, 0.0, 1, Branch::Unstable, Side::Plus, &st).unwrap();
    let ws: Vec<ManifoldSegment> = [Side::Plus, Side::Minus]
        .into_iter()
        .map(|side| grow_manifold(&o, 0.0, 2, Branch::Stable, side, &GrowSettings { max_arc: 1.5, ..st.clone() }).unwrap())
        .collect();
    for x in &wu.points {
        let y = x.reversed();
        let d = ws.iter().map(|s| polyline_distance(y, &s.points, period)).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-6, "distance {d} at {x:?}");
    }
}

#[test]
fn homoclinic_crossings_are_transversal() {
    let o = trefoil();
    let st = GrowSettings::default();
    let wu = grow_manifold(&o, 0.0, 1, Branch::Unstable, Side::Plus, &st).unwrap();
    let ws = grow_manifold(&o, 0.0, 1, Branch::Stable, Side::Plus, &st).unwrap();
    let found = find_crossings(&o, &wu, &ws, 1e-4).unwrap();
    assert!(found.iter().any(|c| c.kind == CrossingKind::Transversal));
    for c in &found {
        assert!(c.location.phi >= 0.0 && c.location.phi < o.period());
        let a = wu.evaluate(&o, c.param_u).unwrap();
        let b = ws.evaluate(&o, c.param_s).unwrap();
        let gap = circ(a.phi, b.phi, o.period()).hypot(a.p - b.p);
        // rounding grows like λ^u along the branch; u reaches about 14 here
        assert!(gap < 1e-7, "gap {gap} at {c:?}");
    }
}

#[test]
fn crossing_orientation_alternates_along_unstable_branch() {
    let o = trefoil();
    let st = GrowSettings::default();
    let wu = grow_manifold(&o, 0.0, 1, Branch::Unstable, Side::Minus, &st).unwrap();
    let ws = grow_manifold(&o, 0.0, 1, Branch::Stable, Side::Minus, &st).unwrap();
    let found = find_crossings(&o, &wu, &ws, 1e-4).unwrap();
    let mut shifts: Vec<i32> = found.iter().map(|c| c.shift).collect();
    shifts.sort();
    shifts.dedup();
    let mut checked = 0;
    for j in shifts {
        let mut along: Vec<&CrossingReport> = found.iter().filter(|c| c.shift == j).collect();
        along.sort_by(|a, b| a.param_u.total_cmp(&b.param_u));
        for w in along.windows(2) {
            assert_eq!(w[0].orientation, -w[1].orientation, "shift {j}: {:?} then {:?}", w[0], w[1]);
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn rejects_mismatched_branches() {
    let o = trefoil();
    let a = grow_manifold(&o, 0.0, 1, Branch::Unstable, Side::Plus, &short()).unwrap();
    assert!(matches!(find_crossings(&o, &a, &a, 1e-4), Err(ManifoldError::BranchMismatch)));
    let o = Oval::new(PerturbedCurve::from(SupportFunction::cosine(3, 1.0, 0.05).unwrap())).unwrap();
    assert!(matches!(eigen_directions(&o, PI / 3.0, 1), Err(ManifoldError::NotHyperbolic { .. })));
}

fn near_tangent_crossing(o: &Oval<PerturbedCurve>) -> (CrossingReport, Side, Side) {
    let st = GrowSettings::default();
    let mut best: Option<(CrossingReport, Side, Side)> = None;
    for su in [Side::Plus, Side::Minus] {
        let wu = grow_manifold(o, 0.0, 1, Branch::Unstable, su, &st).unwrap();
        for ss in [Side::Plus, Side::Minus] {
            let ws = grow_manifold(o, 0.0, 1, Branch::Stable, ss, &st).unwrap();
            for c in find_crossings(o, &wu, &ws, 1e-4).unwrap() {
                if check_orbit_clearance(o, &c, 0.02, 30).is_err() {
                    continue;
                }
                if best.as_ref().map_or(true, |b| c.slope_difference < b.0.slope_difference) {
                    best = Some((c, su, ss));
                }
            }
        }
    }
    best.unwrap()
}

#[test]
fn bump_splits_slopes_as_predicted() {
    let o = trefoil();
    let (c, su, ss) = near_tangent_crossing(&o);
    // no exact tangency at desk scale: the closest crossing is relabelled tangent
    assert!(c.slope_difference < 0.05);
    let mut tangent = c;
    tangent.kind = CrossingKind::Tangent;
    let eps = 1e-4;
    let bumped = tangency_break(&o, o.curve(), &tangent, eps, 0.01, 0.02, 30).unwrap();
    let po = Oval::new(bumped).unwrap();

    let before = eigen_directions(&o, 0.0, 1).unwrap();
    let after = eigen_directions(&po, 0.0, 1).unwrap();
    assert!((before.lambda_u - after.lambda_u).abs() < 1e-10);
    assert!((before.v_u[0] - after.v_u[0]).abs() < 1e-10 && (before.v_u[1] - after.v_u[1]).abs() < 1e-10);

    let st = GrowSettings::default();
    let wu = grow_manifold(&po, 0.0, 1, Branch::Unstable, su, &st).unwrap();
    let ws = grow_manifold(&po, 0.0, 1, Branch::Stable, ss, &st).unwrap();
    let d = find_crossings(&po, &wu, &ws, 1e-4)
        .unwrap()
        .into_iter()
        .find(|d| d.shift == c.shift && circ(d.location.phi, c.location.phi, po.period()).hypot(d.location.p - c.location.p) < 1e-3)
        .expect("crossing survives the bump");
    let r = o.radius(c.location.phi);
    let pred = predicted_slope_shift(&c, r, eps);
    let du = d.slopes[0] - c.slopes[0];
    let ds = d.slopes[1] - c.slopes[1];
    assert!((du / pred[0] - 1.0).abs() < 0.2, "unstable {du} vs {}", pred[0]);
    assert!((ds / pred[1] - 1.0).abs() < 0.2, "stable {ds} vs {}", pred[1]);
    let split = ds - du;
    assert!((split / (pred[1] - pred[0]) - 1.0).abs() < 0.2);
    assert!((split / (4.0 * eps / r) - 1.0).abs() < 0.2);
}

#[test]
fn zero_bump_leaves_slopes() {
    let o = trefoil();
    let (c, su, ss) = near_tangent_crossing(&o);
    let mut tangent = c;
    tangent.kind = CrossingKind::Tangent;
    let po = Oval::new(tangency_break(&o, o.curve(), &tangent, 0.0, 0.01, 0.02, 30).unwrap()).unwrap();
    let st = GrowSettings::default();
    let wu = grow_manifold(&po, 0.0, 1, Branch::Unstable, su, &st).unwrap();
    let ws = grow_manifold(&po, 0.0, 1, Branch::Stable, ss, &st).unwrap();
    let d = find_crossings(&po, &wu, &ws, 1e-4)
        .unwrap()
        .into_iter()
        .find(|d| d.shift == c.shift && (d.location.phi - c.location.phi).abs() < 1e-6)
        .unwrap();
    assert!((d.slopes[0] - c.slopes[0]).abs() < 1e-12 && (d.slopes[1] - c.slopes[1]).abs() < 1e-12);
}

#[test]
fn transversal_crossing_cannot_be_broken() {
    let o = trefoil();
    let (c, _, _) = near_tangent_crossing(&o);
    assert!(matches!(tangency_break(&o, o.curve(), &c, 1e-4, 0.01, 0.02, 30), Err(ManifoldError::NotTangent { .. })));
}
