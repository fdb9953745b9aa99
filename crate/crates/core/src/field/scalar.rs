//! Number types a field can be evaluated over: plain `f64`, [`Interval`],
//! and forward-mode [`Dual`] numbers built on either.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::bump::BumpShape;
use super::interval::Interval;

pub trait Scalar: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self> {
    fn constant(c: f64) -> Self;
    fn powi(&self, n: u32) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    /// `α(√s)` where `self = s = r²`.
    fn radial_bump(&self, shape: &BumpShape) -> Self;
}

/// Scalars that can seed a [`Dual`]: they also provide the derivative of
/// the radial bump with respect to `s = r²`.
pub trait Base: Scalar + Copy {
    /// `(α(√s), α'(√s) / (2√s))`.
    fn radial_bump_with_slope(&self, shape: &BumpShape) -> (Self, Self);
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn radial_bump(&self, shape: &BumpShape) -> Self {
        shape.eval(self.max(0.0).sqrt()).0
    }
}

impl Base for f64 {
    fn radial_bump_with_slope(&self, shape: &BumpShape) -> (Self, Self) {
        let r = self.max(0.0).sqrt();
        let (a, da) = shape.eval(r);
        let slope = if da == 0.0 { 0.0 } else { da / (2.0 * r) };
        (a, slope)
    }
}

impl Scalar for Interval {
    fn constant(c: f64) -> Self {
        Interval::point(c)
    }
    fn powi(&self, n: u32) -> Self {
        Interval::powi(self, n)
    }
    fn sqrt(&self) -> Self {
        Interval::sqrt(self)
    }
    fn exp(&self) -> Self {
        Interval::exp(self)
    }
    fn sin(&self) -> Self {
        Interval::sin(self)
    }
    fn cos(&self) -> Self {
        Interval::cos(self)
    }
    fn radial_bump(&self, shape: &BumpShape) -> Self {
        shape.alpha_interval(self.sqrt())
    }
}

impl Base for Interval {
    fn radial_bump_with_slope(&self, shape: &BumpShape) -> (Self, Self) {
        let r = self.sqrt();
        (shape.alpha_interval(r), shape.slope_interval(r))
    }
}

/// First-order jet in two variables: value plus partials in `x` and `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub v: T,
    pub dx: T,
    pub dy: T,
}

impl<T: Base> Dual<T> {
    pub fn var_x(v: T) -> Self {
        Self { v, dx: T::constant(1.0), dy: T::constant(0.0) }
    }

    pub fn var_y(v: T) -> Self {
        Self { v, dx: T::constant(0.0), dy: T::constant(1.0) }
    }

    fn chain(&self, v: T, dv: T) -> Self {
        Self { v, dx: dv * self.dx, dy: dv * self.dy }
    }
}

impl<T: Base> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { v: self.v + rhs.v, dx: self.dx + rhs.dx, dy: self.dy + rhs.dy }
    }
}

impl<T: Base> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { v: self.v - rhs.v, dx: self.dx - rhs.dx, dy: self.dy - rhs.dy }
    }
}

impl<T: Base> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self { v: self.v * rhs.v, dx: self.dx * rhs.v + self.v * rhs.dx, dy: self.dy * rhs.v + self.v * rhs.dy }
    }
}

impl<T: Base> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q = self.v / rhs.v;
        Self { v: q, dx: (self.dx - q * rhs.dx) / rhs.v, dy: (self.dy - q * rhs.dy) / rhs.v }
    }
}

impl<T: Base> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, dx: -self.dx, dy: -self.dy }
    }
}

impl<T: Base> Scalar for Dual<T> {
    fn constant(c: f64) -> Self {
        Self { v: T::constant(c), dx: T::constant(0.0), dy: T::constant(0.0) }
    }

    fn powi(&self, n: u32) -> Self {
        if n == 0 {
            return Self::constant(1.0);
        }
        let dv = T::constant(n as f64) * self.v.powi(n - 1);
        self.chain(self.v.powi(n), dv)
    }

    fn sqrt(&self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, T::constant(1.0) / (T::constant(2.0) * s))
    }

    fn exp(&self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }

    fn sin(&self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }

    fn cos(&self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }

    fn radial_bump(&self, shape: &BumpShape) -> Self {
        let (a, slope) = self.v.radial_bump_with_slope(shape);
        self.chain(a, slope)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let x = Dual::var_x(3.0);
        let y = Dual::var_y(2.0);
        let f = x * y + x.powi(2) / y;
        // f = xy + x²/y; f_x = y + 2x/y, f_y = x - x²/y²
        assert_eq!(f.v, 6.0 + 4.5);
        assert_eq!(f.dx, 2.0 + 3.0);
        assert_eq!(f.dy, 3.0 - 9.0 / 4.0);
    }

    #[test]
    fn elementary_functions() {
        let x = Dual::var_x(0.7);
        assert!((x.sin().dx - 0.7f64.cos()).abs() < 1e-15);
        assert!((x.cos().dx + 0.7f64.sin()).abs() < 1e-15);
        assert!((x.exp().dx - 0.7f64.exp()).abs() < 1e-15);
        assert!((x.sqrt().dx - 0.5 / 0.7f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bump_chain_rule_is_flat_inside_onset() {
        let shape = BumpShape::default();
        let s = Dual::var_x(0.5).powi(2) + Dual::var_y(0.5).powi(2);
        let a = s.radial_bump(&shape);
        assert_eq!((a.v, a.dx, a.dy), (0.0, 0.0, 0.0));
    }

    #[test]
    fn interval_duals_enclose_point_duals() {
        let xi = Interval::new(0.9, 1.1);
        let yi = Interval::new(-0.2, 0.3);
        let f = |x: Dual<Interval>, y: Dual<Interval>| x.powi(3) * y - y.sin() * x;
        let g = |x: Dual<f64>, y: Dual<f64>| x.powi(3) * y - y.sin() * x;
        let fi = f(Dual::var_x(xi), Dual::var_y(yi));
        for i in 0..=10 {
            for j in 0..=10 {
                let px = (0.9 + 0.02 * i as f64).min(1.1);
                let py = (-0.2 + 0.05 * j as f64).min(0.3);
                let fp = g(Dual::var_x(px), Dual::var_y(py));
                assert!(fi.v.contains(fp.v) && fi.dx.contains(fp.dx) && fi.dy.contains(fp.dy));
            }
        }
    }
}
