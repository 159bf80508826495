//! Truncated Taylor arithmetic up to fourth order.
//!
//! Used to differentiate the bump perturbations exactly; the smooth step built
//! from `exp(-1/x)` has no convenient closed-form fourth derivative.

use std::ops::{Add, Mul, Neg, Sub};

const ORDER: usize = 4;
const FACTORIALS: [f64; ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Taylor coefficients `c[k] = f^(k)(x0) / k!`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Jet([f64; ORDER + 1]);

impl Jet {
    pub(crate) const ZERO: Jet = Jet([0.0; ORDER + 1]);

    pub(crate) fn constant(value: f64) -> Self {
        Jet([value, 0.0, 0.0, 0.0, 0.0])
    }

    /// The identity function expanded at `x0`.
    pub(crate) fn variable(x0: f64) -> Self {
        Jet([x0, 1.0, 0.0, 0.0, 0.0])
    }

    pub(crate) fn value(&self) -> f64 {
        self.0[0]
    }

    /// `[f, f', f'', f''', f'''']` at the expansion point.
    pub(crate) fn derivatives(&self) -> [f64; ORDER + 1] {
        let mut out = self.0;
        for (k, v) in out.iter_mut().enumerate() {
            *v *= FACTORIALS[k];
        }
        out
    }

    pub(crate) fn recip(self) -> Self {
        let b = self.0;
        let mut r = [0.0; ORDER + 1];
        r[0] = 1.0 / b[0];
        for k in 1..=ORDER {
            let acc: f64 = (1..=k).map(|j| b[j] * r[k - j]).sum();
            r[k] = -acc * r[0];
        }
        Jet(r)
    }

    pub(crate) fn exp(self) -> Self {
        let a = self.0;
        let mut e = [0.0; ORDER + 1];
        e[0] = a[0].exp();
        for k in 1..=ORDER {
            let acc: f64 = (1..=k).map(|j| j as f64 * a[j] * e[k - j]).sum();
            e[k] = acc / k as f64;
        }
        Jet(e)
    }

    pub(crate) fn powi(self, n: u32) -> Self {
        (0..n).fold(Jet::constant(1.0), |acc, _| acc * self)
    }

    pub(crate) fn scale(self, s: f64) -> Self {
        Jet(self.0.map(|c| c * s))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o += r;
        }
        Jet(out)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let (a, b) = (self.0, rhs.0);
        let mut c = [0.0; ORDER + 1];
        for k in 0..=ORDER {
            c[k] = (0..=k).map(|j| a[j] * b[k - j]).sum();
        }
        Jet(c)
    }
}

/// `exp(-1/x)` for `x > 0`, identically zero for `x <= 0`.
///
/// Below `x = 1/700` the value and all four derivatives underflow to
/// negligible magnitudes, so the flat branch is used there as well.
pub(crate) fn flat_exp(x: Jet) -> Jet {
    if x.value() <= 1.0 / 700.0 {
        Jet::ZERO
    } else {
        (-x.recip()).exp()
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, C-infinity in between.
pub(crate) fn smooth_step(x: Jet) -> Jet {
    let left = flat_exp(x);
    let right = flat_exp(Jet::constant(1.0) - x);
    let total = left + right;
    if total.value() == 0.0 {
        // Only reachable in the middle of the step, where neither branch underflows.
        return Jet::constant(0.5);
    }
    left * total.recip()
}
