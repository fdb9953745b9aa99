//! Smooth radial switch function used by the annulus example field.
//!
//! `α(r) = exp(-width / (r - onset))` for `r > onset` and `0` otherwise. It is
//! C^∞, flat at the onset circle, and both `α` and `α'` are positive past it.

use serde::{Deserialize, Serialize};

use super::interval::Interval;
use crate::error::{Error, Result};

/// Relative slack applied to bump enclosures. The argument `width / u` is at
/// most ~745 before `exp` underflows, so a few ulps of error in it amount to a
/// relative error well below this.
const REL_SLACK: f64 = 1e-11;
/// Absolute slack covering subnormal results.
const ABS_SLACK: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpShape {
    /// Radius below which α vanishes identically.
    pub onset: f64,
    /// Scale of the essential singularity; smaller is sharper.
    pub width: f64,
}

impl Default for BumpShape {
    /// `α(r) = exp(-1/(r-1))`.
    fn default() -> Self {
        Self { onset: 1.0, width: 1.0 }
    }
}

impl BumpShape {
    /// Shape used by the built-in annulus field. The unit-width default is so
    /// flat near the onset (`α(1.001)` underflows) that no orbit computation
    /// can locate the annulus boundary to better than ~0.05; a width of 0.01
    /// makes α reach 1e-7 within 6e-4 of the onset.
    pub const ANNULUS: BumpShape = BumpShape { onset: 1.0, width: 0.01 };

    pub fn new(onset: f64, width: f64) -> Result<Self> {
        if !(onset > 0.0 && onset.is_finite() && width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bump shape needs positive finite onset and width, got onset={onset}, width={width}"
            )));
        }
        Ok(Self { onset, width })
    }

    /// `(α(r), α'(r))` without the domain check.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let u = r - self.onset;
        if u <= 0.0 {
            return (0.0, 0.0);
        }
        let a = (-self.width / u).exp();
        (a, a * self.width / (u * u))
    }

    /// Peak of `α'`, attained at `r = onset + width / 2`.
    pub fn max_derivative(&self) -> f64 {
        4.0 * (-2.0f64).exp() / self.width
    }

    fn derivative_at_offset(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else {
            let a = (-self.width / u).exp();
            a * self.width / (u * u)
        }
    }

    /// Enclosure of `α` over `r ∈ radius` (α is non-decreasing).
    pub fn alpha_interval(&self, radius: Interval) -> Interval {
        if radius.hi() <= self.onset {
            return Interval::ZERO;
        }
        let lo = self.eval(radius.lo()).0;
        let hi = self.eval(radius.hi()).0;
        loosen(lo, hi, 1.0)
    }

    /// Enclosure of `α'` over `r ∈ radius`. α' rises on `(onset, onset + w/2]`
    /// and decays afterwards.
    pub fn derivative_interval(&self, radius: Interval) -> Interval {
        if radius.hi() <= self.onset {
            return Interval::ZERO;
        }
        let ul = (radius.lo() - self.onset).max(0.0);
        let uh = radius.hi() - self.onset;
        let peak = 0.5 * self.width;
        let gl = self.derivative_at_offset(ul);
        let gh = self.derivative_at_offset(uh);
        let hi = if ul <= peak && peak <= uh { self.max_derivative() } else { gl.max(gh) };
        loosen(gl.min(gh), hi, f64::INFINITY)
    }

    /// Enclosure of `α'(r) / (2r)` (the derivative of `α(√s)` in `s = r²`).
    pub fn slope_interval(&self, radius: Interval) -> Interval {
        if radius.hi() <= self.onset {
            return Interval::ZERO;
        }
        let d = self.derivative_interval(radius);
        let r_lo = radius.lo().max(self.onset);
        let lo = d.lo() / (2.0 * radius.hi());
        let hi = d.hi() / (2.0 * r_lo);
        loosen(lo, hi, f64::INFINITY)
    }
}

fn loosen(lo: f64, hi: f64, cap: f64) -> Interval {
    let lo = (lo * (1.0 - REL_SLACK) - ABS_SLACK).max(0.0);
    let hi = (hi * (1.0 + REL_SLACK) + ABS_SLACK).min(cap);
    Interval::new(lo, hi)
}

/// `(α(r), α'(r))` for `r ≥ 0`.
pub fn alpha_bump(r: f64, shape: &BumpShape) -> Result<(f64, f64)> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::InvalidArgument(format!("bump radius must be non-negative, got {r}")));
    }
    Ok(shape.eval(r))
}
