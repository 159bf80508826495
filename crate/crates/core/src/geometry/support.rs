use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// A support function and its first four derivatives at one angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportJet {
    pub g: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl SupportJet {
    /// Curvature radius `R = g + g''`.
    pub fn radius(&self) -> f64 {
        self.g + self.d2
    }

    /// `dR/dphi = g' + g'''`.
    pub fn radius_d1(&self) -> f64 {
        self.d1 + self.d3
    }

    /// `d2R/dphi2 = g'' + g''''`.
    pub fn radius_d2(&self) -> f64 {
        self.d2 + self.d4
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.g, self.d1, self.d2, self.d3, self.d4]
    }
}

/// Common evaluation interface for every representation of an n-symmetric
/// support function (pure Fourier series or a bump-perturbed series).
pub trait SupportCurve: Send + Sync + fmt::Debug {
    /// Rotational symmetry order `n`.
    fn order(&self) -> u32;

    /// `g` and its first four derivatives; `phi` is taken mod 2π.
    fn jet(&self, phi: f64) -> SupportJet;

    /// `(g, g')`, all that is needed to place a boundary point.
    fn value_slope(&self, phi: f64) -> (f64, f64) {
        let j = self.jet(phi);
        (j.g, j.d1)
    }

    /// Sample count that resolves every feature of the curve over one full turn.
    fn resolution(&self) -> usize;

    /// True when `g' ≡ 0`.
    fn is_circle(&self) -> bool;

    /// Period of the symmetry, `2π/n`.
    fn period(&self) -> f64 {
        TAU / self.order() as f64
    }
}

/// One Fourier term `cos·cos(kφ) + sin·sin(kφ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: u32,
    pub cos: f64,
    pub sin: f64,
}

impl Harmonic {
    pub fn new(k: u32, cos: f64, sin: f64) -> Self {
        Self { k, cos, sin }
    }
}

/// Finite Fourier series `g(φ) = a0 + Σ (a_k cos kφ + b_k sin kφ)` whose
/// harmonic indices are all multiples of the symmetry order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportFunction {
    n: u32,
    a0: f64,
    harmonics: Vec<Harmonic>,
}

/// Largest symmetry order and harmonic index; sampling costs grow linearly with it.
pub const MAX_HARMONIC: u32 = 4096;

impl SupportFunction {
    pub fn new(n: u32, a0: f64, harmonics: Vec<Harmonic>) -> Result<Self, GeometryError> {
        if n < 2 {
            return Err(GeometryError::InvalidSymmetry { n });
        }
        if n > MAX_HARMONIC {
            return Err(GeometryError::HarmonicTooHigh { k: n, max: MAX_HARMONIC });
        }
        if !a0.is_finite() || a0 <= 0.0 {
            return Err(GeometryError::InvalidConstant { a0 });
        }
        for h in &harmonics {
            if h.k == 0 {
                return Err(GeometryError::ZeroHarmonic);
            }
            if h.k > MAX_HARMONIC {
                return Err(GeometryError::HarmonicTooHigh { k: h.k, max: MAX_HARMONIC });
            }
            if h.k % n != 0 {
                return Err(GeometryError::HarmonicNotMultiple { k: h.k, n });
            }
            if !h.cos.is_finite() || !h.sin.is_finite() {
                return Err(GeometryError::NonFinite);
            }
        }
        Ok(Self { n, a0, harmonics })
    }

    /// `g ≡ a0`, viewed as an `n`-symmetric curve.
    pub fn constant(n: u32, a0: f64) -> Result<Self, GeometryError> {
        Self::new(n, a0, Vec::new())
    }

    /// `g = a0 + amplitude·cos(nφ)`.
    pub fn cosine(n: u32, a0: f64, amplitude: f64) -> Result<Self, GeometryError> {
        Self::new(n, a0, vec![Harmonic::new(n, amplitude, 0.0)])
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn max_harmonic(&self) -> u32 {
        self.harmonics.iter().map(|h| h.k).max().unwrap_or(0)
    }

    /// Same curve with every coefficient multiplied by `c` (a homothety).
    pub fn scaled(&self, c: f64) -> Result<Self, GeometryError> {
        let harmonics = self
            .harmonics
            .iter()
            .map(|h| Harmonic::new(h.k, h.cos * c, h.sin * c))
            .collect();
        Self::new(self.n, self.a0 * c, harmonics)
    }

    /// `g + eps` without validation; [`perturb_constant`](super::perturb_constant) checks the result.
    pub(crate) fn shifted(&self, eps: f64) -> Result<Self, GeometryError> {
        Self::new(self.n, self.a0 + eps, self.harmonics.clone())
    }
}

impl SupportCurve for SupportFunction {
    fn order(&self) -> u32 {
        self.n
    }

    fn jet(&self, phi: f64) -> SupportJet {
        let mut j = SupportJet { g: self.a0, d1: 0.0, d2: 0.0, d3: 0.0, d4: 0.0 };
        for h in &self.harmonics {
            let k = h.k as f64;
            let (s, c) = (k * phi).sin_cos();
            let even = h.cos * c + h.sin * s;
            let odd = -h.cos * s + h.sin * c;
            let k2 = k * k;
            j.g += even;
            j.d1 += k * odd;
            j.d2 -= k2 * even;
            j.d3 -= k2 * k * odd;
            j.d4 += k2 * k2 * even;
        }
        j
    }

    fn value_slope(&self, phi: f64) -> (f64, f64) {
        let mut g = self.a0;
        let mut d1 = 0.0;
        for h in &self.harmonics {
            let k = h.k as f64;
            let (s, c) = (k * phi).sin_cos();
            g += h.cos * c + h.sin * s;
            d1 += k * (h.sin * c - h.cos * s);
        }
        (g, d1)
    }

    fn resolution(&self) -> usize {
        1024 * (self.max_harmonic() as usize).max(1)
    }

    fn is_circle(&self) -> bool {
        self.harmonics.iter().all(|h| h.cos == 0.0 && h.sin == 0.0)
    }
}
