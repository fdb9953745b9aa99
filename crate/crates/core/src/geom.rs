//! Points and axis-aligned rectangles in the plane.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product `self × other`.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn from_polar(r: f64, angle: f64) -> Self {
        Self::new(r * angle.cos(), r * angle.sin())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self::new(x, y)
    }
}

/// Closed axis-aligned rectangle `[xmin, xmax] × [ymin, ymax]` with finite,
/// non-degenerate sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Region {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self, Error> {
        let finite = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite());
        if !finite || xmin >= xmax || ymin >= ymax {
            return Err(Error::InvalidRegion { xmin, xmax, ymin, ymax });
        }
        Ok(Self { xmin, xmax, ymin, ymax })
    }

    /// Square `[-h, h]²` centred at `c`.
    pub fn square(c: Point, half: f64) -> Result<Self, Error> {
        Self::new(c.x - half, c.x + half, c.y - half, c.y + half)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn contains_region(&self, other: &Region) -> bool {
        other.xmin >= self.xmin && other.xmax <= self.xmax && other.ymin >= self.ymin && other.ymax <= self.ymax
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.xmin, self.ymin),
            Point::new(self.xmax, self.ymin),
            Point::new(self.xmax, self.ymax),
            Point::new(self.xmin, self.ymax),
        ]
    }

    /// Splits into four quadrants at the centre, in the order
    /// lower-left, lower-right, upper-left, upper-right.
    pub fn quadrants(&self) -> [Region; 4] {
        let c = self.center();
        [
            Region { xmin: self.xmin, xmax: c.x, ymin: self.ymin, ymax: c.y },
            Region { xmin: c.x, xmax: self.xmax, ymin: self.ymin, ymax: c.y },
            Region { xmin: self.xmin, xmax: c.x, ymin: c.y, ymax: self.ymax },
            Region { xmin: c.x, xmax: self.xmax, ymin: c.y, ymax: self.ymax },
        ]
    }

    /// Euclidean distance from `p` to the nearest point of the rectangle.
    pub fn distance_to(&self, p: Point) -> f64 {
        let dx = (self.xmin - p.x).max(p.x - self.xmax).max(0.0);
        let dy = (self.ymin - p.y).max(p.y - self.ymax).max(0.0);
        dx.hypot(dy)
    }

    /// Euclidean distance from `p` to the farthest corner.
    pub fn max_distance_to(&self, p: Point) -> f64 {
        let dx = (p.x - self.xmin).abs().max((self.xmax - p.x).abs());
        let dy = (p.y - self.ymin).abs().max((self.ymax - p.y).abs());
        dx.hypot(dy)
    }

    /// Distance from an interior point to the nearest edge.
    pub fn inner_radius(&self, p: Point) -> f64 {
        (p.x - self.xmin).min(self.xmax - p.x).min(p.y - self.ymin).min(self.ymax - p.y)
    }

    pub fn translated(&self, by: Point) -> Region {
        Region { xmin: self.xmin + by.x, xmax: self.xmax + by.x, ymin: self.ymin + by.y, ymax: self.ymax + by.y }
    }

    /// Maps the unit square onto this rectangle.
    pub fn lerp(&self, u: f64, v: f64) -> Point {
        Point::new(self.xmin + u * self.width(), self.ymin + v * self.height())
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.xmin, self.xmax, self.ymin, self.ymax)
    }
}
