//! Text inputs: curve definition files and command-line values.
//!
//! A curve file is a list of `key = value` lines; `#` starts a comment.
//!
//! ```text
//! n = 3
//! a0 = 1.0
//! harmonic = 3 0.05 0.0      # k, cos coefficient, sin coefficient
//! bump = 0.4 1e-4 2 0.01 0.02 # center, eps, power, delta1, delta2
//! ```
//!
//! `a0` defaults to 1; `harmonic` and `bump` may repeat.

use thiserror::Error;

use crate::geometry::{Bump, BumpPower, GeometryError, Harmonic, PerturbedCurve, SupportFunction};
use crate::tolerances::{ToleranceError, Tolerances};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveConfig {
    pub support: SupportFunction,
    pub bumps: Vec<Bump>,
}

impl CurveConfig {
    /// The support function with every bump applied, validated.
    pub fn curve(&self) -> Result<PerturbedCurve, GeometryError> {
        let mut c = PerturbedCurve::from(self.support.clone());
        for b in &self.bumps {
            c = c.with_bump(*b)?;
        }
        Ok(c)
    }
}

fn syntax(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Syntax { line, message: message.into() }
}

fn number(line: usize, key: &str, s: &str) -> Result<f64, ConfigError> {
    let v: f64 = s.parse().map_err(|_| syntax(line, format!("{key}: '{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(syntax(line, format!("{key}: value must be finite")));
    }
    Ok(v)
}

fn integer(line: usize, key: &str, s: &str) -> Result<u32, ConfigError> {
    s.parse().map_err(|_| syntax(line, format!("{key}: '{s}' is not a non-negative integer")))
}

fn fields<'a>(line: usize, key: &str, value: &'a str, count: usize) -> Result<Vec<&'a str>, ConfigError> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != count {
        return Err(syntax(line, format!("{key} expects {count} values, got {}", parts.len())));
    }
    Ok(parts)
}

pub fn parse_curve_config(text: &str) -> Result<CurveConfig, ConfigError> {
    let mut n = None;
    let mut a0 = None;
    let mut harmonics = Vec::new();
    let mut bumps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(syntax(line, format!("expected 'key = value', got '{content}'")));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "n" => {
                if n.is_some() {
                    return Err(syntax(line, "duplicate key 'n'"));
                }
                n = Some(integer(line, key, value)?);
            }
            "a0" => {
                if a0.is_some() {
                    return Err(syntax(line, "duplicate key 'a0'"));
                }
                a0 = Some(number(line, key, value)?);
            }
            "harmonic" => {
                let f = fields(line, key, value, 3)?;
                harmonics.push(Harmonic::new(integer(line, key, f[0])?, number(line, key, f[1])?, number(line, key, f[2])?));
            }
            "bump" => {
                let f = fields(line, key, value, 5)?;
                let power = integer(line, key, f[2])?;
                let power = BumpPower::from_exponent(power)
                    .ok_or_else(|| syntax(line, format!("bump power must be 2 or 4, got {power}")))?;
                bumps.push(Bump::new(
                    number(line, key, f[0])?,
                    number(line, key, f[1])?,
                    power,
                    number(line, key, f[3])?,
                    number(line, key, f[4])?,
                ));
            }
            other => return Err(syntax(line, format!("unknown key '{other}'"))),
        }
    }
    let n = n.ok_or(ConfigError::Missing("n"))?;
    let support = SupportFunction::new(n, a0.unwrap_or(1.0), harmonics)?;
    Ok(CurveConfig { support, bumps })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlagError {
    #[error("expected NAME=VALUE, got '{0}'")]
    ToleranceSyntax(String),
    #[error(transparent)]
    Tolerance(#[from] ToleranceError),
    #[error("expected a grid like 20x10 with both counts at least 1, got '{0}'")]
    Grid(String),
    #[error("expected a range 'pmin,pmax' with -1 < pmin <= pmax < 1, got '{0}'")]
    PRange(String),
}

/// Parses `NAME=VALUE` and checks it against the known tolerances.
pub fn parse_tolerance(s: &str) -> Result<(String, f64), FlagError> {
    let (name, value) = s.split_once('=').ok_or_else(|| FlagError::ToleranceSyntax(s.to_string()))?;
    let name = name.trim();
    let value: f64 = value.trim().parse().map_err(|_| FlagError::ToleranceSyntax(s.to_string()))?;
    Tolerances::default().set(name, value)?;
    Ok((name.to_string(), value))
}

/// Parses `NxM` into `(nPhi, nP)`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), FlagError> {
    let err = || FlagError::Grid(s.to_string());
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(err)?;
    let a: usize = a.trim().parse().map_err(|_| err())?;
    let b: usize = b.trim().parse().map_err(|_| err())?;
    if a == 0 || b == 0 {
        return Err(err());
    }
    Ok((a, b))
}

/// Parses `a,b` with `-1 < a <= b < 1`.
pub fn parse_p_range(s: &str) -> Result<(f64, f64), FlagError> {
    let err = || FlagError::PRange(s.to_string());
    let (a, b) = s.split_once(',').ok_or_else(err)?;
    let a: f64 = a.trim().parse().map_err(|_| err())?;
    let b: f64 = b.trim().parse().map_err(|_| err())?;
    if !(a > -1.0 && a <= b && b < 1.0) {
        return Err(err());
    }
    Ok((a, b))
}
