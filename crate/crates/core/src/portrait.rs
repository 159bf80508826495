//! Phase portraits: many seeds iterated independently, written as CSV.

use std::f64::consts::TAU;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{billiard_step, DynamicsError, PhasePoint};
use crate::geometry::{Oval, SupportCurve};
use crate::report::fmt_f64;

#[derive(Debug, Error)]
pub enum PortraitError {
    #[error("invalid portrait settings: {0}")]
    InvalidConfig(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PortraitConfig {
    /// `(nPhi, nP)` seeds.
    pub grid: (usize, usize),
    pub p_range: (f64, f64),
    pub iters: usize,
}

impl PortraitConfig {
    pub fn check(&self) -> Result<(), PortraitError> {
        let (a, b) = self.p_range;
        if self.grid.0 == 0 || self.grid.1 == 0 {
            return Err(PortraitError::InvalidConfig("grid counts must be at least 1".into()));
        }
        if !(a > -1.0 && a <= b && b < 1.0) {
            return Err(PortraitError::InvalidConfig(format!("p range ({a}, {b}) not inside (-1, 1)")));
        }
        if self.iters == 0 {
            return Err(PortraitError::InvalidConfig("iters must be at least 1".into()));
        }
        Ok(())
    }

    /// Seeds ordered with `φ` outer and `p` inner; `φ` is equispaced on `[0, 2π)`.
    pub fn seeds(&self) -> Vec<PhasePoint> {
        let (n_phi, n_p) = self.grid;
        let (a, b) = self.p_range;
        let mut out = Vec::with_capacity(n_phi * n_p);
        for i in 0..n_phi {
            let phi = TAU * i as f64 / n_phi as f64;
            for j in 0..n_p {
                let p = if n_p == 1 { a } else { a + (b - a) * j as f64 / (n_p - 1) as f64 };
                out.push(PhasePoint::new(phi, p));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", tag = "status")]
pub enum SeedStatus {
    Complete,
    /// The step from iterate `iter` failed.
    Stopped { iter: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedOrbit {
    /// Starting point followed by every successful iterate, `φ` in `[0, 2π)`.
    pub points: Vec<PhasePoint>,
    pub status: SeedStatus,
}

fn orbit<C: SupportCurve>(oval: &Oval<C>, seed: PhasePoint, iters: usize) -> SeedOrbit {
    let mut points = Vec::with_capacity(iters + 1);
    let mut x = PhasePoint::new(seed.phi.rem_euclid(TAU), seed.p);
    points.push(x);
    for k in 0..iters {
        match billiard_step(oval, x) {
            Ok(s) => {
                x = PhasePoint::new(s.point.phi.rem_euclid(TAU), s.point.p);
                points.push(x);
            }
            Err(e) => {
                let reason = match e {
                    DynamicsError::Grazing { .. } => "grazing".to_string(),
                    other => other.to_string(),
                };
                return SeedOrbit { points, status: SeedStatus::Stopped { iter: k, reason } };
            }
        }
    }
    SeedOrbit { points, status: SeedStatus::Complete }
}

/// Iterates every seed on a pool of `workers` threads. The output order is the
/// seed order whatever the number of workers.
pub fn run_portrait<C: SupportCurve + Sync>(
    oval: &Oval<C>,
    seeds: &[PhasePoint],
    iters: usize,
    workers: usize,
) -> Result<Vec<SeedOrbit>, PortraitError> {
    if workers == 0 {
        return Err(PortraitError::InvalidConfig("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PortraitError::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| seeds.par_iter().map(|&s| orbit(oval, s, iters)).collect()))
}

pub fn write_portrait_csv<W: Write>(out: W, orbits: &[SeedOrbit]) -> Result<(), PortraitError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seedIndex", "iter", "phi", "p"])?;
    for (s, o) in orbits.iter().enumerate() {
        for (k, x) in o.points.iter().enumerate() {
            w.write_record([s.to_string(), k.to_string(), fmt_f64(x.phi), fmt_f64(x.p)])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Rows `seedIndex,status,iter,reason` for seeds that stopped early.
pub fn write_status_csv<W: Write>(out: W, orbits: &[SeedOrbit]) -> Result<usize, PortraitError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seedIndex", "status", "iter", "reason"])?;
    let mut stopped = 0;
    for (s, o) in orbits.iter().enumerate() {
        if let SeedStatus::Stopped { iter, reason } = &o.status {
            w.write_record([s.to_string(), "stopped".to_string(), iter.to_string(), reason.clone()])?;
            stopped += 1;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(stopped)
}
