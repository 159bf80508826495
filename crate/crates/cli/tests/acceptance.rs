//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symbill::dynamics::{
    billiard_step, dt_symmetric_fixed_point, iterate, jacobian_numeric, jacobian_numeric_sp, JACOBIAN_STEP,
};
use symbill::hyperbolic::{eigen_directions, find_crossings, grow_manifold, Branch, CrossingKind, GrowSettings, Side};
use symbill::invariant::{check_horizontal_invariance, constant_width_check, gutkin_check, gutkin_oval};
use symbill::orbits::{
    find_families, gcd, resonance_check, rotation_number_oracle, tau_shift_from_bump, twist_coefficient,
    OracleSettings, OrbitKind,
};
use symbill::*;
use tempfile::TempDir;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn cosine(n: u32, a: f64) -> SupportFunction {
    SupportFunction::cosine(n, 1.0, a).unwrap()
}

fn oval(n: u32, a: f64) -> Oval<SupportFunction> {
    Oval::new(cosine(n, a)).unwrap()
}

fn test_ovals() -> Vec<(&'static str, Oval<SupportFunction>)> {
    vec![
        ("circle", Oval::new(SupportFunction::constant(3, 1.0).unwrap()).unwrap()),
        ("n=3 a=0.05", oval(3, 0.05)),
        ("n=4 a=0.02", oval(4, 0.02)),
    ]
}

fn circ(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

fn conservativity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut det_err, mut rev_err, mut sym_err) = (0.0f64, 0.0f64, 0.0f64);
    for (_, o) in test_ovals() {
        let period = o.period();
        for _ in 0..100 {
            let x = PhasePoint::new(rng.random_range(0.0..TAU), rng.random_range(-0.95..0.95));
            let sp = jacobian_numeric_sp(&o, x, JACOBIAN_STEP).map_err(|e| e.to_string())?;
            det_err = det_err.max((sp.det() - 1.0).abs());

            let y = billiard_step(&o, x.reversed()).map_err(|e| e.to_string())?.point;
            let z = billiard_step(&o, y.reversed()).map_err(|e| e.to_string())?.point;
            rev_err = rev_err.max(circ(z.phi, x.phi, TAU).max((z.p - x.p).abs()));

            let a = billiard_step(&o, x).map_err(|e| e.to_string())?.point;
            let b = billiard_step(&o, PhasePoint::new(x.phi + period, x.p)).map_err(|e| e.to_string())?.point;
            sym_err = sym_err.max(circ(b.phi, a.phi + period, TAU).max((b.p - a.p).abs()));
        }
    }
    let elapsed = start.elapsed();
    ensure!(det_err < 1e-6, "det error {det_err:.3e}");
    ensure!(rev_err < 1e-8, "reversibility error {rev_err:.3e}");
    ensure!(sym_err < 1e-9, "symmetry error {sym_err:.3e}");
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("det {det_err:.1e}, reversal {rev_err:.1e}, symmetry {sym_err:.1e}, {elapsed:.2?}"))
}

fn trace_formula() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (name, o) in test_ovals().into_iter().skip(1) {
        let n = o.order();
        for fam in find_families(&o).map_err(|e| e.to_string())? {
            let j = o.curve().jet(fam.phi0);
            for m in 1..n {
                let closed = dt_symmetric_fixed_point(&o, fam.phi0, m).map_err(|e| e.to_string())?;
                let p = (m as f64 * PI / n as f64).cos();
                let numeric =
                    jacobian_numeric(&o, PhasePoint::new(fam.phi0, p), JACOBIAN_STEP).map_err(|e| e.to_string())?;
                for (a, b) in closed.entries().iter().zip(numeric.entries()) {
                    worst = worst.max((a - b).abs() / a.abs());
                }
                let expected = 4.0 * j.g / (j.g + j.d2) - 2.0;
                ensure!(
                    (closed.trace() - expected).abs() < 1e-12,
                    "{name} phi0 = {}, m = {m}: trace {} vs {expected}",
                    fam.phi0,
                    closed.trace()
                );
                count += 1;
            }
        }
    }
    ensure!(worst < 1e-4, "entrywise deviation {worst:.3e}");
    let o = oval(3, 0.05);
    let elliptic = dt_symmetric_fixed_point(&o, PI / 3.0, 1).map_err(|e| e.to_string())?.trace();
    let hyperbolic = dt_symmetric_fixed_point(&o, 0.0, 1).map_err(|e| e.to_string())?.trace();
    ensure!((elliptic - 0.714286).abs() < 1e-6, "elliptic trace {elliptic}");
    ensure!((hyperbolic - 5.0).abs() < 1e-6, "hyperbolic trace {hyperbolic}");
    Ok(format!("{count} fixed points, deviation {worst:.1e}, traces {elliptic:.6} and {hyperbolic:.6}"))
}

// harmonics n and 2n with Σ (k² - 1)|c| ≤ 0.5, so R ≥ 0.5
fn random_oval(rng: &mut ChaCha8Rng) -> SupportFunction {
    loop {
        let n = rng.random_range(3..=6u32);
        let (k1, k2) = (n as f64, 2.0 * n as f64);
        let share: f64 = rng.random_range(0.2..1.0);
        let b1 = 0.5 * share / (k1 * k1 - 1.0);
        let b2 = 0.5 * (1.0 - share) / (k2 * k2 - 1.0);
        let theta: f64 = rng.random_range(0.0..TAU);
        let c2 = b2 * rng.random_range(-1.0..1.0);
        let sf = SupportFunction::new(
            n,
            1.0,
            vec![
                Harmonic::new(n, b1 / 2f64.sqrt() * theta.cos(), b1 / 2f64.sqrt() * theta.sin()),
                Harmonic::new(2 * n, c2, 0.0),
            ],
        )
        .unwrap();
        let morse = critical_points(&sf, 1e-6)
            .map(|cps| cps.iter().all(|c| c.kind != CriticalKind::Degenerate))
            .unwrap_or(false);
        if morse {
            return sf;
        }
    }
}

fn classification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut families, mut worst) = (0, 0.0f64);
    for trial in 0..20 {
        let sf = random_oval(&mut rng);
        let o = Oval::new(sf).map_err(|e| e.to_string())?;
        ensure!(
            validate(o.curve(), 4096).map_err(|e| e.to_string())?.min_radius >= 0.5 - 1e-12,
            "oval {trial} is below the curvature bound"
        );
        let n = o.order();
        for fam in find_families(&o).map_err(|e| e.to_string())? {
            let expected = match fam.critical {
                CriticalKind::Minimum => OrbitKind::Elliptic,
                CriticalKind::Maximum => OrbitKind::Hyperbolic,
                CriticalKind::Degenerate => return Err(format!("oval {trial}: degenerate critical point")),
            };
            ensure!(fam.kind == expected, "oval {trial} phi0 = {}: {:?} at a {:?}", fam.phi0, fam.kind, fam.critical);
            for m in 1..n {
                let period = (n / gcd(n, m)) as usize;
                let x0 = PhasePoint::new(fam.phi0, (m as f64 * PI / n as f64).cos());
                let orbit = iterate(&o, x0, period).map_err(|e| e.to_string())?;
                let last = orbit[period];
                let err = circ(last.phi, x0.phi, TAU).max((last.p - x0.p).abs());
                ensure!(err < 1e-8, "oval {trial} phi0 = {}, m = {m}: closure {err:.3e}", fam.phi0);
                worst = worst.max(err);
            }
            families += 1;
        }
    }
    Ok(format!("20 ovals, {families} families, closure {worst:.1e}"))
}

fn twist_oracle() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for (n, a, phi0) in [(4u32, 0.02, PI / 4.0), (3, 0.05, PI / 3.0)] {
        let o = oval(n, a);
        let tau = twist_coefficient(&o, phi0, 1).map_err(|e| e.to_string())?;
        let fit = rotation_number_oracle(&o, phi0, 1, &OracleSettings::default()).map_err(|e| e.to_string())?;
        let rel = (tau - fit.tau_fit).abs() / fit.tau_fit.abs();
        ensure!(rel < 0.05, "n = {n}: tau {tau} vs fit {} (rel {rel:.3e})", fit.tau_fit);
        parts.push(format!("n={n} rel {rel:.1e}"));
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{}, {elapsed:.2?}", parts.join(", ")))
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn resonance_thresholds() -> Outcome {
    let tol = Tolerances::default().resonance;
    let phi0 = PI / 3.0;
    let at = |a: f64| resonance_check(&cosine(3, a), phi0, tol);
    let a4 = bisect(|a| at(a).gap4, 0.05, 0.15);
    let a3 = bisect(|a| at(a).gap3, 0.2, 0.3);
    ensure!((a4 - 0.1).abs() < 1e-9, "fourth-order threshold at {a4}");
    ensure!((a3 - 0.25).abs() < 1e-9, "third-order threshold at {a3}");
    ensure!(at(a4).resonance4 && !at(a4 - 1e-9).resonance4 && !at(a4 + 1e-9).resonance4, "fourth-order flag");
    ensure!(at(a3).resonance3 && !at(a3 - 1e-9).resonance3 && !at(a3 + 1e-9).resonance3, "third-order flag");
    ensure!(!at(a4).resonance3 && !at(a3).resonance4, "flags overlap");
    Ok(format!("flips at a = {a4:.12} and a = {a3:.12}"))
}

fn bump_calculus() -> Outcome {
    let base = cosine(3, 0.05);
    let o = Oval::new(base.clone()).unwrap();
    let center = PI / 3.0;
    let eps = 1e-4;
    let quartic = perturb_bump(&base, Bump::new(center, eps, BumpPower::Quartic, 0.05, 0.1)).map_err(|e| e.to_string())?;
    // a quadratic bump may not touch the symmetric orbits, so it sits between critical points
    let side = PI / 6.0;
    let quadratic =
        perturb_bump(&base, Bump::new(side, eps, BumpPower::Quadratic, 0.05, 0.1)).map_err(|e| e.to_string())?;
    let j0 = base.jet(center);
    let d4 = quartic.jet(center).d4 - j0.d4;
    let dr = quadratic.jet(side).radius() - base.jet(side).radius();
    ensure!((d4 - 24.0 * eps).abs() < 1e-12, "g'''' changed by {d4}");
    ensure!((dr - 2.0 * eps).abs() < 1e-12, "R changed by {dr}");

    let bumped = Oval::new(quartic).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for m in 1..3 {
        let predicted = tau_shift_from_bump(&o, center, m, 24.0 * eps);
        let t0 = twist_coefficient(&o, center, m).map_err(|e| e.to_string())?;
        let t1 = twist_coefficient(&bumped, center, m).map_err(|e| e.to_string())?;
        // only d²R/ds² moves, by 24ε/R², which enters τ through -L/(8 sinα (L - 2R sinα))
        let alpha = m as f64 * PI / 3.0;
        let s = alpha.sin();
        let r = j0.radius();
        let l = 2.0 * j0.g * s;
        let by_hand = -l / (8.0 * s * (l - 2.0 * r * s)) * 24.0 * eps / (r * r);
        for other in [t1 - t0, by_hand] {
            worst = worst.max((predicted - other).abs() / other.abs());
        }
    }
    ensure!(worst < 1e-6, "tau shift relative error {worst:.3e}");
    Ok(format!("g'''' shift {d4:.3e}, R shift {dr:.3e}, tau shift error {worst:.1e}"))
}

fn gutkin() -> Outcome {
    let start = Instant::now();
    let res = gutkin_check(5, 0.3, 10, 10_000).map_err(|e| e.to_string())?;
    let i = res.alpha0.iter().position(|&a| a > 0.0 && a < FRAC_PI_2).ok_or("no interior root")?;
    let (p0, dev) = (res.p0[i], res.max_deviation[i]);
    let o = Oval::new(gutkin_oval(5, 0.3).map_err(|e| e.to_string())?).unwrap();
    let control = check_horizontal_invariance(&o, p0 + 0.05, 10, 10_000).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(dev < 1e-6, "deviation {dev:.3e} at p0 = {p0}");
    ensure!(control > 100.0 * dev, "control {control:.3e} vs {dev:.3e}");
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("p0 = {p0:.6}, deviation {dev:.1e}, control {control:.1e}, {elapsed:.2?}"))
}

fn constant_width() -> Outcome {
    let o = oval(3, 0.05);
    let cw = constant_width_check(&o).map_err(|e| e.to_string())?;
    ensure!(cw.is_constant_width, "not recognized as constant width");
    ensure!((cw.width - 2.0).abs() < 1e-10 && cw.width_variation < 1e-10, "width {} +- {}", cw.width, cw.width_variation);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let phi = TAU * (k as f64 + 0.5) / 100.0;
        let y = billiard_step(&o, PhasePoint::new(phi, 0.0)).map_err(|e| e.to_string())?.point;
        worst = worst.max(circ(y.phi, phi + PI, TAU).max(y.p.abs()));
    }
    ensure!(worst < 1e-8, "diameter error {worst:.3e}");
    Ok(format!("width {:.12}, diameter error {worst:.1e}", cw.width))
}

fn hyperbolic_structure() -> Outcome {
    let o = Oval::new(PerturbedCurve::from(cosine(3, 0.05))).unwrap();
    let families = find_families(&o).map_err(|e| e.to_string())?;
    let mut crossings = 0;
    let mut worst_product = 0.0f64;
    let mut worst_growth = 0.0f64;
    for fam in families.iter().filter(|f| f.kind == OrbitKind::Hyperbolic) {
        for m in 1..o.order() {
            let e = eigen_directions(&o, fam.phi0, m).map_err(|e| e.to_string())?;
            worst_product = worst_product.max((e.lambda_u * e.lambda_s - 1.0).abs());

            let short = GrowSettings { max_arc: 1.0, ..GrowSettings::default() };
            let seg = grow_manifold(&o, fam.phi0, m, Branch::Unstable, Side::Plus, &short).map_err(|e| e.to_string())?;
            let d = |u: f64| -> Result<f64, String> {
                let x = seg.evaluate(&o, u).map_err(|e| e.to_string())?;
                Ok((x.phi - seg.anchor.phi).hypot(x.p - seg.anchor.p))
            };
            for k in 0..3 {
                let ratio = d(k as f64 + 1.0)? / d(k as f64)?;
                worst_growth = worst_growth.max((ratio / seg.eigenvalue.abs() - 1.0).abs());
            }

            let st = GrowSettings::default();
            for side in [Side::Plus, Side::Minus] {
                let wu = grow_manifold(&o, fam.phi0, m, Branch::Unstable, side, &st).map_err(|e| e.to_string())?;
                let ws = grow_manifold(&o, fam.phi0, m, Branch::Stable, side, &st).map_err(|e| e.to_string())?;
                crossings += find_crossings(&o, &wu, &ws, Tolerances::default().tangency)
                    .map_err(|e| e.to_string())?
                    .iter()
                    .filter(|c| c.kind == CrossingKind::Transversal)
                    .count();
            }
        }
    }
    ensure!(worst_product < 1e-12, "lambda_u lambda_s - 1 = {worst_product:.3e}");
    ensure!(worst_growth < 0.01, "growth off by {worst_growth:.3e}");
    ensure!(crossings > 0, "no transversal crossing");
    Ok(format!("product {worst_product:.1e}, growth {worst_growth:.1e}, {crossings} transversal crossings"))
}

fn determinism() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let config = dir.path().join("trefoil.curve");
    fs::write(&config, "n = 3\nharmonic = 3 0.05 0\n").map_err(|e| e.to_string())?;
    let run = |workers: &str, tag: usize| -> Result<Vec<u8>, String> {
        let out = dir.path().join(format!("portrait-{workers}-{tag}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_symbill"))
            .args(["portrait", "--grid", "16x8", "--iters", "500", "--workers", workers, "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(status.status.success(), "portrait failed: {}", String::from_utf8_lossy(&status.stderr));
        fs::read(&out).map_err(|e| e.to_string())
    };
    let reference = run("1", 0)?;
    for (tag, workers) in ["8", "1", "8"].into_iter().enumerate() {
        ensure!(run(workers, tag + 1)? == reference, "--workers {workers} (run {}) differs", tag + 2);
    }
    Ok(format!("4 runs, {} bytes each", reference.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("conservativity", conservativity),
        ("trace formula", trace_formula),
        ("classification", classification),
        ("twist oracle", twist_oracle),
        ("resonance thresholds", resonance_thresholds),
        ("bump calculus", bump_calculus),
        ("gutkin invariance", gutkin),
        ("constant width", constant_width),
        ("hyperbolic structure", hyperbolic_structure),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
