//! Symmetric periodic orbits: the families through critical points of `g`,
//! their linear stability, resonances and twist coefficients.

mod oracle;
mod twist;

pub use oracle::{rotation_number_oracle, OracleFit, OracleSettings};
pub use twist::{
    resonance_check, tau_shift_from_bump, tau_zero_m, twist_coefficient, twist_coefficient_tol, twist_report,
    Resonance, TwistEntry, TwistReport,
};

use std::f64::consts::{PI, TAU};

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{
    dt_symmetric_fixed_point_tol, jacobian_numeric, lifted_step, symmetric_side, DynamicsError, Jacobian2,
    PhasePoint, JACOBIAN_STEP,
};
use crate::geometry::{critical_points, CriticalKind, GeometryError, Oval, SupportCurve};
use crate::tolerances::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("index m = {m} outside 1..{n}")]
    InvalidIndex { m: u32, n: u32 },
    #[error("family at phi0 = {phi0} is {kind:?}, not elliptic")]
    NotElliptic { phi0: f64, kind: OrbitKind },
    #[error("resonant: 3g(φ₀)=g″(φ₀) at phi0 = {phi0}")]
    Resonant3 { phi0: f64 },
    #[error("resonant: g(φ₀)=g″(φ₀) at phi0 = {phi0}")]
    Resonant4 { phi0: f64 },
    #[error("orbit through phi0 = {phi0}, m = {m} misses closure by {error:.3e}")]
    ClosureFailed { phi0: f64, m: u32, error: f64 },
    #[error("orbit started at radius {radius:.3e} left the neighborhood (reached {reached:.3e})")]
    EscapedNeighborhood { radius: f64, reached: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitKind {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

/// One polygon class `m` of a family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilyMember {
    pub m: u32,
    /// `n / gcd(n, m)`.
    pub period: u32,
    /// `mπ/n`.
    pub alpha: f64,
    pub p: f64,
    /// Distinct trajectories, `2 gcd(n, m)`.
    pub count: u32,
    pub side_length: f64,
    /// Worst return error over the checked starting points.
    pub closure_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OrbitFamily {
    pub phi0: f64,
    pub kind: OrbitKind,
    pub critical: CriticalKind,
    pub g_value: f64,
    pub r_value: f64,
    pub members: Vec<FamilyMember>,
}

impl OrbitFamily {
    pub fn member(&self, m: u32) -> Option<&FamilyMember> {
        self.members.iter().find(|x| x.m == m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StabilityReport {
    pub m: u32,
    pub kind: OrbitKind,
    pub trace: f64,
    pub det: f64,
    pub eigenvalues: [Eigenvalue; 2],
    /// Rotation angle with `cos ζ = trace/2`, elliptic only.
    pub zeta: Option<f64>,
    pub jacobian: Jacobian2,
    /// Largest entrywise relative difference to the finite-difference Jacobian.
    pub numeric_deviation: f64,
}

pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn check_index(m: u32, n: u32) -> Result<(), OrbitError> {
    if m == 0 || m >= n {
        return Err(OrbitError::InvalidIndex { m, n });
    }
    Ok(())
}

/// Impact angles `φ + 2kmπ/n`, `k = 0..n/gcd(n, m)`, reduced to `[0, 2π)`.
pub fn polygon_vertices(n: u32, phi: f64, m: u32) -> Result<Vec<f64>, OrbitError> {
    check_index(m, n)?;
    let period = n / gcd(n, m);
    Ok((0..period)
        .map(|k| {
            let turn = ((k * m) % n) as f64 * TAU / n as f64;
            crate::dynamics::reduce(phi + turn, TAU)
        })
        .collect())
}

/// `(L, dL/dφ)` for the chord joining `Γ(φ)` to its rotation by `2mπ/n`.
pub fn side_length<C: SupportCurve>(oval: &Oval<C>, phi: f64, m: u32) -> Result<(f64, f64), OrbitError> {
    let n = oval.order();
    check_index(m, n)?;
    let alpha = m as f64 * PI / n as f64;
    let l = (oval.position(phi + 2.0 * alpha) - oval.position(phi)).norm();
    let j = oval.curve().jet(phi);
    // from L² = 4 (g² + g'²) sin²α
    let dl = 4.0 * j.d1 * j.radius() * alpha.sin().powi(2) / l;
    Ok((l, dl))
}

pub(crate) fn family_kind(g: f64, r: f64, tol: f64) -> OrbitKind {
    if (g - r).abs() < tol {
        OrbitKind::Parabolic
    } else if g < r {
        OrbitKind::Elliptic
    } else {
        OrbitKind::Hyperbolic
    }
}

pub fn find_families<C: SupportCurve>(oval: &Oval<C>) -> Result<Vec<OrbitFamily>, OrbitError> {
    find_families_tol(oval, &Tolerances::default())
}

/// One family per critical point of `g` in `[0, 2π/n)`; every member is
/// checked to close up after its period.
pub fn find_families_tol<C: SupportCurve>(oval: &Oval<C>, tol: &Tolerances) -> Result<Vec<OrbitFamily>, OrbitError> {
    let n = oval.order();
    let cps = critical_points(oval.curve(), tol.degenerate)?;
    let mut out = Vec::with_capacity(cps.len());
    for cp in cps {
        let j = oval.curve().jet(cp.phi0);
        let mut members = Vec::with_capacity(n as usize - 1);
        for m in 1..n {
            let d = gcd(n, m);
            let alpha = m as f64 * PI / n as f64;
            let p = alpha.cos();
            let period = n / d;
            let mut worst: f64 = 0.0;
            for k in 0..d {
                let start = cp.phi0 + k as f64 * oval.period();
                let (mut phi, mut q) = (start, p);
                for _ in 0..period {
                    let s = lifted_step(oval, phi, q)?;
                    phi = s.phi;
                    q = s.p;
                }
                let dphi = phi - start - TAU * (m / d) as f64;
                worst = worst.max(dphi.abs()).max((q - p).abs());
            }
            if !(worst < tol.closure) {
                return Err(OrbitError::ClosureFailed { phi0: cp.phi0, m, error: worst });
            }
            members.push(FamilyMember {
                m,
                period,
                alpha,
                p,
                count: 2 * d,
                side_length: symmetric_side(j.g, alpha),
                closure_error: worst,
            });
        }
        out.push(OrbitFamily {
            phi0: cp.phi0,
            kind: family_kind(j.g, j.radius(), tol.parabolic),
            critical: cp.kind,
            g_value: j.g,
            r_value: j.radius(),
            members,
        });
    }
    Ok(out)
}

/// Eigenvalues of a unit-determinant matrix from its trace.
pub fn unit_det_eigenvalues(trace: f64) -> [Eigenvalue; 2] {
    let half = 0.5 * trace;
    let disc = half * half - 1.0;
    if disc >= 0.0 {
        let root = disc.sqrt();
        // avoid cancellation in the small eigenvalue
        let big = half + half.signum() * root;
        let small = 1.0 / big;
        let (a, b) = if big.abs() >= small.abs() { (big, small) } else { (small, big) };
        [Eigenvalue { re: a, im: 0.0 }, Eigenvalue { re: b, im: 0.0 }]
    } else {
        let root = (-disc).sqrt();
        [Eigenvalue { re: half, im: root }, Eigenvalue { re: half, im: -root }]
    }
}

pub fn classify<C: SupportCurve>(oval: &Oval<C>, family: &OrbitFamily, m: u32) -> Result<StabilityReport, OrbitError> {
    classify_tol(oval, family, m, &Tolerances::default())
}

pub fn classify_tol<C: SupportCurve>(
    oval: &Oval<C>,
    family: &OrbitFamily,
    m: u32,
    tol: &Tolerances,
) -> Result<StabilityReport, OrbitError> {
    check_index(m, oval.order())?;
    let jac = dt_symmetric_fixed_point_tol(oval, family.phi0, m, tol.critical)?;
    let trace = jac.trace();
    let alpha = m as f64 * PI / oval.order() as f64;
    let numeric = jacobian_numeric(oval, PhasePoint::new(family.phi0, alpha.cos()), JACOBIAN_STEP)?;
    let numeric_deviation = jac
        .entries()
        .iter()
        .zip(numeric.entries())
        .map(|(a, b)| (a - b).abs() / a.abs().max(1e-8))
        .fold(0.0, f64::max);
    let zeta = (trace.abs() < 2.0).then(|| (0.5 * trace).acos());
    Ok(StabilityReport {
        m,
        kind: family.kind,
        trace,
        det: jac.det(),
        eigenvalues: unit_det_eigenvalues(trace),
        zeta,
        jacobian: jac,
        numeric_deviation,
    })
}
