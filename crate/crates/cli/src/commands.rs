use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use symbill::config::{parse_curve_config, CurveConfig};
use symbill::hyperbolic::{
    eigen_directions, find_crossings, grow_manifold, Branch, CrossingReport, EigenDirections, GrowSettings,
    ManifoldSegment, Side,
};
use symbill::invariant::{check_horizontal_invariance, constant_width_check_tol, gutkin_alpha, gutkin_check, gutkin_oval};
use symbill::orbits::{
    classify_tol, find_families_tol, resonance_check, rotation_number_oracle, tau_zero_m, twist_coefficient_tol,
    twist_report, Eigenvalue, OracleSettings, OrbitKind, TwistEntry,
};
use symbill::portrait::{run_portrait, write_portrait_csv, write_status_csv, PortraitConfig};
use symbill::report::{to_json, write_manifold_csv, Envelope};
use symbill::{validate as validate_curve, GeometryError, Oval, PerturbedCurve, Tolerances};

use crate::Common;

pub enum Failure {
    Input(String),
    Validation(String),
    Analysis(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Analysis(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input: {m}"),
            Failure::Validation(m) => write!(f, "validation failed: {m}"),
            Failure::Analysis(m) => write!(f, "analysis: {m}"),
        }
    }
}

fn analysis(e: impl fmt::Display) -> Failure {
    Failure::Analysis(e.to_string())
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Metadata<'a, E: Serialize> {
    config: Option<String>,
    tolerances: &'a Tolerances,
    workers: usize,
    #[serde(flatten)]
    extra: E,
}

#[derive(Serialize)]
struct NoExtra {}

fn tolerances(common: &Common) -> Tolerances {
    let mut t = Tolerances::default();
    for (name, value) in &common.tolerances {
        t.set(name, *value).expect("checked while parsing flags");
    }
    t
}

fn load_config(common: &Common) -> Result<(PathBuf, CurveConfig), Failure> {
    let path = common.config.clone().ok_or_else(|| Failure::Input("--config is required".into()))?;
    let text = fs::read_to_string(&path).map_err(|e| io_failure(&path, e))?;
    let config = parse_curve_config(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok((path, config))
}

fn geometry_failure(e: GeometryError) -> Failure {
    match e {
        GeometryError::NotConvex { .. } | GeometryError::NotPositive { .. } | GeometryError::InvalidResult(_) => {
            Failure::Validation(e.to_string())
        }
        other => Failure::Input(other.to_string()),
    }
}

fn load_oval(common: &Common) -> Result<(PathBuf, Oval<PerturbedCurve>), Failure> {
    let (path, config) = load_config(common)?;
    let curve = config.curve().map_err(geometry_failure)?;
    let oval = Oval::new(curve).map_err(geometry_failure)?;
    Ok((path, oval))
}

fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| io_failure(p, e)),
        None => io::stdout().write_all(bytes).map_err(|e| Failure::Input(format!("standard output: {e}"))),
    }
}

fn emit<M: Serialize, R: Serialize>(common: &Common, command: &str, metadata: M, result: R) -> Result<(), Failure> {
    let text = to_json(&Envelope::new(command, metadata, result)).map_err(analysis)?;
    write_bytes(common.out.as_deref(), text.as_bytes())
}

fn metadata<'a, E: Serialize>(common: &Common, path: Option<&Path>, tol: &'a Tolerances, extra: E) -> Metadata<'a, E> {
    Metadata {
        config: path.map(|p| p.display().to_string()),
        tolerances: tol,
        workers: common.workers,
        extra,
    }
}

#[derive(Serialize)]
struct SamplesMeta {
    samples: usize,
}

pub fn validate(common: &Common, samples: Option<usize>) -> Result<(), Failure> {
    let tol = tolerances(common);
    let (path, config) = load_config(common)?;
    let samples = samples.unwrap_or(1024 * config.support.max_harmonic().max(1) as usize);
    let report = validate_curve(&config.support, samples).map_err(|e| Failure::Input(e.to_string()))?;
    let bumped = if report.passed && !config.bumps.is_empty() { Some(config.curve()) } else { None };
    emit(common, "validate", metadata(common, Some(&path), &tol, SamplesMeta { samples }), &report)?;
    if !report.passed {
        return Err(Failure::Validation(if report.min_g <= 0.0 {
            format!("min g = {:.6e} at phi = {:.6}", report.min_g, report.argmin_g)
        } else {
            format!("min R = {:.6e} at phi = {:.6}", report.min_radius, report.argmin_radius)
        }));
    }
    if let Some(Err(e)) = bumped {
        return Err(geometry_failure(e));
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PortraitSummary {
    seeds: usize,
    rows: usize,
    stopped: usize,
    status_path: Option<String>,
}

pub fn portrait(common: &Common, grid: (usize, usize), p_range: (f64, f64), iters: usize) -> Result<(), Failure> {
    let tol = tolerances(common);
    let (path, oval) = load_oval(common)?;
    let settings = PortraitConfig { grid, p_range, iters };
    settings.check().map_err(|e| Failure::Input(e.to_string()))?;
    let orbits = run_portrait(&oval, &settings.seeds(), iters, common.workers).map_err(|e| Failure::Input(e.to_string()))?;
    let mut csv = Vec::new();
    write_portrait_csv(&mut csv, &orbits).map_err(analysis)?;
    write_bytes(common.out.as_deref(), &csv)?;
    let Some(out) = &common.out else {
        return Ok(());
    };
    let mut status = Vec::new();
    let stopped = write_status_csv(&mut status, &orbits).map_err(analysis)?;
    let mut status_path = out.clone().into_os_string();
    status_path.push(".status.csv");
    let status_path = PathBuf::from(status_path);
    fs::write(&status_path, status).map_err(|e| io_failure(&status_path, e))?;
    let summary = PortraitSummary {
        seeds: orbits.len(),
        rows: orbits.iter().map(|o| o.points.len()).sum(),
        stopped,
        status_path: Some(status_path.display().to_string()),
    };
    let text = to_json(&Envelope::new("portrait", metadata(common, Some(&path), &tol, &settings), summary)).map_err(analysis)?;
    write_bytes(None, text.as_bytes())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct MemberOut {
    m: u32,
    period: u32,
    alpha: f64,
    p: f64,
    #[serde(rename = "L")]
    side_length: f64,
    trace: f64,
    eigenvalues: [Eigenvalue; 2],
    resonance3: bool,
    resonance4: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    closure_error: f64,
    numeric_deviation: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct FamilyOut {
    phi0: f64,
    kind: OrbitKind,
    g_value: f64,
    #[serde(rename = "RValue")]
    r_value: f64,
    members: Vec<MemberOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_zero_m: Option<u32>,
}

fn check_m(m: Option<u32>, n: u32) -> Result<Vec<u32>, Failure> {
    match m {
        Some(m) if m == 0 || m >= n => Err(Failure::Input(format!("--m must lie in 1..{n}, got {m}"))),
        Some(m) => Ok(vec![m]),
        None => Ok((1..n).collect()),
    }
}

pub fn families(common: &Common, m: Option<u32>) -> Result<(), Failure> {
    let tol = tolerances(common);
    let (path, oval) = load_oval(common)?;
    let ms = check_m(m, oval.order())?;
    let found = find_families_tol(&oval, &tol).map_err(analysis)?;
    let mut out = Vec::new();
    for fam in &found {
        let res = resonance_check(oval.curve(), fam.phi0, tol.resonance);
        let mut members = Vec::new();
        for mem in fam.members.iter().filter(|x| ms.contains(&x.m)) {
            let st = classify_tol(&oval, fam, mem.m, &tol).map_err(analysis)?;
            let tau = if fam.kind == OrbitKind::Elliptic && !res.any() {
                twist_coefficient_tol(&oval, fam.phi0, mem.m, &tol).ok()
            } else {
                None
            };
            members.push(MemberOut {
                m: mem.m,
                period: mem.period,
                alpha: mem.alpha,
                p: mem.p,
                side_length: mem.side_length,
                trace: st.trace,
                eigenvalues: st.eigenvalues,
                resonance3: res.resonance3,
                resonance4: res.resonance4,
                tau,
                closure_error: mem.closure_error,
                numeric_deviation: st.numeric_deviation,
            });
        }
        let tau_zero = if fam.kind == OrbitKind::Elliptic { tau_zero_m(oval.curve(), fam.phi0, tol.tau_zero) } else { None };
        out.push(FamilyOut {
            phi0: fam.phi0,
            kind: fam.kind,
            g_value: fam.g_value,
            r_value: fam.r_value,
            members,
            tau_zero_m: tau_zero,
        });
    }
    emit(common, "families", metadata(common, Some(&path), &tol, NoExtra {}), &out)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct OracleOut {
    m: u32,
    zeta_fit: f64,
    tau_fit: f64,
    tau: f64,
    relative_error: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TwistOut {
    phi0: f64,
    resonance3: bool,
    resonance4: bool,
    tau: Vec<TwistEntry>,
    tau_zero_sin2: Option<f64>,
    tau_zero_m: Option<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    oracle: Vec<OracleOut>,
}

#[derive(Serialize)]
struct OracleMeta<'a> {
    oracle: Option<&'a OracleSettings>,
}

pub fn twist(common: &Common, m: Option<u32>, oracle: bool) -> Result<(), Failure> {
    let tol = tolerances(common);
    let (path, oval) = load_oval(common)?;
    let ms = check_m(m, oval.order())?;
    let settings = OracleSettings::default();
    let found = find_families_tol(&oval, &tol).map_err(analysis)?;
    let mut out = Vec::new();
    for fam in found.iter().filter(|f| f.kind == OrbitKind::Elliptic) {
        let report = twist_report(&oval, fam.phi0, &tol).map_err(analysis)?;
        let tau: Vec<TwistEntry> = report.tau.into_iter().filter(|e| ms.contains(&e.m)).collect();
        let mut fits = Vec::new();
        if oracle {
            let oracle_ms = if m.is_some() { ms.clone() } else { vec![1] };
            for &k in &oracle_ms {
                let fit = rotation_number_oracle(&oval, fam.phi0, k, &settings).map_err(analysis)?;
                let t = tau.iter().find(|e| e.m == k).map(|e| e.tau).expect("tau listed for every m");
                fits.push(OracleOut {
                    m: k,
                    zeta_fit: fit.zeta_fit,
                    tau_fit: fit.tau_fit,
                    tau: t,
                    relative_error: ((t - fit.tau_fit) / fit.tau_fit).abs(),
                });
            }
        }
        out.push(TwistOut {
            phi0: report.phi0,
            resonance3: report.resonance3,
            resonance4: report.resonance4,
            tau,
            tau_zero_sin2: report.tau_zero_sin2,
            tau_zero_m: report.tau_zero_m,
            oracle: fits,
        });
    }
    if out.is_empty() {
        return Err(Failure::Analysis("no elliptic family".into()));
    }
    let meta = OracleMeta { oracle: oracle.then_some(&settings) };
    emit(common, "twist", metadata(common, Some(&path), &tol, meta), &out)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SegmentOut {
    branch: Branch,
    side: Side,
    eigenvalue: f64,
    points: usize,
    arc_length: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ManifoldOut {
    phi0: f64,
    m: u32,
    eigen: EigenDirections,
    segments: Vec<SegmentOut>,
    crossings: Vec<CrossingReport>,
}

pub fn manifolds(
    common: &Common,
    m: Option<u32>,
    max_arc: f64,
    seed_distance: f64,
    polylines: Option<&Path>,
) -> Result<(), Failure> {
    let tol = tolerances(common);
    if !(max_arc > 0.0 && max_arc.is_finite() && seed_distance > 0.0 && seed_distance < 1e-2) {
        return Err(Failure::Input("need --max-arc > 0 and 0 < --seed-distance < 1e-2".into()));
    }
    let (path, oval) = load_oval(common)?;
    let ms = check_m(m, oval.order())?;
    let settings = GrowSettings { seed_distance, max_arc, ..GrowSettings::default() };
    let found = find_families_tol(&oval, &tol).map_err(analysis)?;
    let mut out = Vec::new();
    let mut all_segments: Vec<ManifoldSegment> = Vec::new();
    for fam in found.iter().filter(|f| f.kind == OrbitKind::Hyperbolic) {
        for &k in &ms {
            let eigen = eigen_directions(&oval, fam.phi0, k).map_err(analysis)?;
            let mut segs = Vec::new();
            for branch in [Branch::Unstable, Branch::Stable] {
                for side in [Side::Plus, Side::Minus] {
                    segs.push(grow_manifold(&oval, fam.phi0, k, branch, side, &settings).map_err(analysis)?);
                }
            }
            let mut crossings = Vec::new();
            for u in segs.iter().filter(|s| s.branch == Branch::Unstable) {
                for s in segs.iter().filter(|s| s.branch == Branch::Stable) {
                    crossings.extend(find_crossings(&oval, u, s, tol.tangency).map_err(analysis)?);
                }
            }
            out.push(ManifoldOut {
                phi0: fam.phi0,
                m: k,
                eigen,
                segments: segs
                    .iter()
                    .map(|s| SegmentOut {
                        branch: s.branch,
                        side: s.side,
                        eigenvalue: s.eigenvalue,
                        points: s.len(),
                        arc_length: s.arc_length(),
                    })
                    .collect(),
                crossings,
            });
            all_segments.extend(segs);
        }
    }
    if let Some(p) = polylines {
        let mut buf = Vec::new();
        write_manifold_csv(&mut buf, &all_segments).map_err(analysis)?;
        write_bytes(Some(p), &buf)?;
    }
    emit(common, "manifolds", metadata(common, Some(&path), &tol, &settings), &out)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct GutkinOut<W: Serialize> {
    n: u32,
    a1: Option<f64>,
    alpha0: Vec<f64>,
    p0: Vec<f64>,
    max_deviation: Vec<f64>,
    invariant: Vec<bool>,
    warnings: Vec<String>,
    constant_width: W,
}

#[derive(Serialize)]
struct GutkinMeta {
    seeds: usize,
    iters: usize,
}

pub fn gutkin(common: &Common, n: Option<u32>, a1: Option<f64>, seeds: usize, iters: usize) -> Result<(), Failure> {
    let tol = tolerances(common);
    if seeds == 0 || iters == 0 {
        return Err(Failure::Input("--seeds and --iters must be at least 1".into()));
    }
    let meta = GutkinMeta { seeds, iters };
    match (n, a1, &common.config) {
        (Some(n), Some(a1), None) => {
            let r = gutkin_check(n, a1, seeds, iters).map_err(|e| Failure::Input(e.to_string()))?;
            let oval = Oval::new(gutkin_oval(n, a1).map_err(|e| Failure::Input(e.to_string()))?).map_err(geometry_failure)?;
            let cw = constant_width_check_tol(&oval, &tol).map_err(analysis)?;
            let out = GutkinOut {
                n,
                a1: Some(a1),
                invariant: r.max_deviation.iter().map(|d| *d < tol.invariance).collect(),
                alpha0: r.alpha0,
                p0: r.p0,
                max_deviation: r.max_deviation,
                warnings: r.warnings,
                constant_width: cw,
            };
            emit(common, "gutkin", metadata(common, None, &tol, meta), &out)
        }
        (None, None, Some(_)) => {
            let (path, oval) = load_oval(common)?;
            let order = oval.order();
            let alpha0 = gutkin_alpha(order);
            let p0: Vec<f64> = alpha0.iter().map(|a| if *a == std::f64::consts::FRAC_PI_2 { 0.0 } else { a.cos() }).collect();
            let max_deviation = p0
                .iter()
                .map(|&p| check_horizontal_invariance(&oval, p, seeds, iters))
                .collect::<Result<Vec<f64>, _>>()
                .map_err(analysis)?;
            let cw = constant_width_check_tol(&oval, &tol).map_err(analysis)?;
            let out = GutkinOut {
                n: order,
                a1: None,
                invariant: max_deviation.iter().map(|d| *d < tol.invariance).collect(),
                alpha0,
                p0,
                max_deviation,
                warnings: Vec::new(),
                constant_width: cw,
            };
            emit(common, "gutkin", metadata(common, Some(&path), &tol, meta), &out)
        }
        _ => Err(Failure::Input("give either --n and --a1, or --config".into())),
    }
}
