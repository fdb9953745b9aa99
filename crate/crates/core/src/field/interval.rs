//! Closed real intervals with outward-rounded arithmetic.
//!
//! Additions, products, quotients and square roots are rounded with
//! error-free transformations (two-sum and fused multiply-add residuals), so an
//! endpoint is only moved by one ulp when the floating-point result was
//! actually inexact. Exact results such as `0 * [a, b]` or `0 + 0` stay
//! degenerate, which lets identically-zero quantities certify as `[0, 0]`.
//! Transcendental functions are widened by two ulps at each end.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Results smaller than this may have lost bits to gradual underflow, where
/// the fma residual is no longer exact.
const TINY: f64 = 1e-290;

#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    /// Marker for an undefined enclosure (e.g. `sqrt` of a negative box).
    pub const NAN: Interval = Interval { lo: f64::NAN, hi: f64::NAN };

    /// Panics if `lo > hi`.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi || lo.is_nan() || hi.is_nan(), "interval bounds out of order: [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub const fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// Largest absolute value in the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Intersection of two enclosures of the same quantity. If rounding made
    /// them disjoint the hull is returned instead.
    pub fn intersect(&self, other: &Interval) -> Interval {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Interval { lo, hi }
        } else {
            self.hull(other)
        }
    }

    pub fn powi(&self, n: u32) -> Interval {
        if n == 0 {
            return Interval::point(1.0);
        }
        if n == 1 {
            return *self;
        }
        if n % 2 == 1 {
            let lo = signed_pow(self.lo, n, Round::Down);
            let hi = signed_pow(self.hi, n, Round::Up);
            return Interval { lo, hi };
        }
        if self.lo >= 0.0 {
            Interval { lo: pow_nonneg(self.lo, n, Round::Down), hi: pow_nonneg(self.hi, n, Round::Up) }
        } else if self.hi <= 0.0 {
            Interval { lo: pow_nonneg(-self.hi, n, Round::Down), hi: pow_nonneg(-self.lo, n, Round::Up) }
        } else {
            Interval { lo: 0.0, hi: pow_nonneg(self.mag(), n, Round::Up) }
        }
    }

    pub fn sqrt(&self) -> Interval {
        if self.hi < 0.0 || self.lo.is_nan() {
            return Interval::NAN;
        }
        let lo = self.lo.max(0.0);
        Interval { lo: sqrt_dir(lo, Round::Down), hi: sqrt_dir(self.hi, Round::Up) }
    }

    pub fn exp(&self) -> Interval {
        let lo = widen_down(self.lo.exp(), 2).max(0.0);
        let hi = widen_up(self.hi.exp(), 2);
        Interval { lo, hi }
    }

    pub fn sin(&self) -> Interval {
        use std::f64::consts::{FRAC_PI_2, PI};
        self.periodic(|v| v.sin(), FRAC_PI_2, FRAC_PI_2 + PI)
    }

    pub fn cos(&self) -> Interval {
        use std::f64::consts::PI;
        self.periodic(|v| v.cos(), 0.0, PI)
    }

    /// Enclosure of a 2π-periodic unit-amplitude function whose maxima sit at
    /// `max_at + 2kπ` and minima at `min_at + 2kπ`.
    fn periodic(&self, f: impl Fn(f64) -> f64, max_at: f64, min_at: f64) -> Interval {
        use std::f64::consts::TAU;
        if !self.is_finite() || self.width() >= TAU {
            return Interval { lo: -1.0, hi: 1.0 };
        }
        let a = f(self.lo);
        let b = f(self.hi);
        let mut lo = widen_down(a.min(b), 2).max(-1.0);
        let mut hi = widen_up(a.max(b), 2).min(1.0);
        // slack absorbs rounding in the critical-point positions
        let hits = |c: f64| {
            let k = ((self.lo - c) / TAU).ceil();
            c + k * TAU <= self.hi + 1e-9 * (1.0 + self.hi.abs()) || c + (k - 1.0) * TAU >= self.lo - 1e-9 * (1.0 + self.lo.abs())
        };
        if hits(max_at) {
            hi = 1.0;
        }
        if hits(min_at) {
            lo = -1.0;
        }
        Interval { lo, hi }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl From<f64> for Interval {
    fn from(v: f64) -> Self {
        Interval::point(v)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval { lo: add_dir(self.lo, rhs.lo, Round::Down), hi: add_dir(self.hi, rhs.hi, Round::Up) }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        self + (-rhs)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        if self == Interval::ZERO || rhs == Interval::ZERO {
            return Interval::ZERO;
        }
        let pairs = [(self.lo, rhs.lo), (self.lo, rhs.hi), (self.hi, rhs.lo), (self.hi, rhs.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in pairs {
            let d = mul_dir(a, b, Round::Down);
            let u = mul_dir(a, b, Round::Up);
            if d.is_nan() || u.is_nan() {
                return Interval::ENTIRE;
            }
            lo = lo.min(d);
            hi = hi.max(u);
        }
        Interval { lo, hi }
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        if rhs.contains_zero() || rhs.lo.is_nan() {
            return Interval::ENTIRE;
        }
        if self == Interval::ZERO {
            return Interval::ZERO;
        }
        let pairs = [(self.lo, rhs.lo), (self.lo, rhs.hi), (self.hi, rhs.lo), (self.hi, rhs.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in pairs {
            let d = div_dir(a, b, Round::Down);
            let u = div_dir(a, b, Round::Up);
            if d.is_nan() || u.is_nan() {
                return Interval::ENTIRE;
            }
            lo = lo.min(d);
            hi = hi.max(u);
        }
        Interval { lo, hi }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Round {
    Down,
    Up,
}

fn nudge(v: f64, err: f64, dir: Round) -> f64 {
    match dir {
        Round::Down if err < 0.0 => v.next_down(),
        Round::Up if err > 0.0 => v.next_up(),
        _ => v,
    }
}

fn add_dir(a: f64, b: f64, dir: Round) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    nudge(s, err, dir)
}

fn mul_dir(a: f64, b: f64, dir: Round) -> f64 {
    let p = a * b;
    if !p.is_finite() || a == 0.0 || b == 0.0 {
        return p;
    }
    if p.abs() < TINY {
        return match dir {
            Round::Down => p.next_down(),
            Round::Up => p.next_up(),
        };
    }
    nudge(p, a.mul_add(b, -p), dir)
}

fn div_dir(a: f64, b: f64, dir: Round) -> f64 {
    let q = a / b;
    if !q.is_finite() || a == 0.0 {
        return q;
    }
    if q.abs() < TINY || a.abs() < TINY {
        return match dir {
            Round::Down => q.next_down(),
            Round::Up => q.next_up(),
        };
    }
    // a = q*b + r exactly, so a/b = q + r/b
    let r = (-q).mul_add(b, a);
    nudge(q, r * b.signum(), dir)
}

fn sqrt_dir(a: f64, dir: Round) -> f64 {
    let s = a.sqrt();
    if s == 0.0 || !s.is_finite() {
        return s;
    }
    if a < TINY {
        return match dir {
            Round::Down => s.next_down().max(0.0),
            Round::Up => s.next_up(),
        };
    }
    nudge(s, (-s).mul_add(s, a), dir)
}

fn pow_nonneg(x: f64, n: u32, dir: Round) -> f64 {
    let mut acc = 1.0;
    let mut base = x;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc = mul_dir(acc, base, dir);
        }
        k >>= 1;
        if k > 0 {
            base = mul_dir(base, base, dir);
        }
    }
    acc
}

/// `x^n` for odd `n`, rounded in direction `dir`.
fn signed_pow(x: f64, n: u32, dir: Round) -> f64 {
    if x >= 0.0 {
        pow_nonneg(x, n, dir)
    } else {
        let flipped = if dir == Round::Down { Round::Up } else { Round::Down };
        -pow_nonneg(-x, n, flipped)
    }
}

pub(crate) fn widen_down(v: f64, ulps: u32) -> f64 {
    (0..ulps).fold(v, |acc, _| acc.next_down())
}

pub(crate) fn widen_up(v: f64, ulps: u32) -> f64 {
    (0..ulps).fold(v, |acc, _| acc.next_up())
}
