//! Simple counterclockwise polygons and their transport by the flow.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{flow_to, IntegratorConfig};
use crate::error::{ensure, Error, Result};
use crate::field::FieldDef;
use crate::geom::{Point, Region};

/// A simple polygon with counterclockwise vertex order and positive area.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates vertex count, finiteness, orientation and simplicity.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let poly = Self::new_unchecked_simple(vertices)?;
        ensure(poly.is_simple(), || "polygon edges intersect".into())?;
        Ok(poly)
    }

    /// Checks everything but self-intersection, which costs `O(n²)`.
    fn new_unchecked_simple(vertices: Vec<Point>) -> Result<Self> {
        ensure(vertices.len() >= 3, || format!("polygon needs at least 3 vertices, got {}", vertices.len()))?;
        ensure(vertices.iter().all(|p| p.is_finite()), || "polygon vertices must be finite".into())?;
        let poly = Self { vertices };
        let a = poly.signed_area();
        ensure(a > 0.0, || format!("polygon must be counterclockwise with positive area, got signed area {a}"))?;
        Ok(poly)
    }

    /// Regular `n`-gon inscribed in the circle of radius `r`.
    pub fn regular(center: Point, r: f64, n: usize) -> Result<Self> {
        ensure(r > 0.0, || format!("radius must be positive, got {r}"))?;
        let verts = (0..n).map(|k| center + Point::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64)).collect();
        Self::new_unchecked_simple(verts)
    }

    pub fn rect(region: &Region) -> Self {
        let [ll, lr, ur, ul] = [
            Point::new(region.xmin, region.ymin),
            Point::new(region.xmax, region.ymin),
            Point::new(region.xmax, region.ymax),
            Point::new(region.xmin, region.ymax),
        ];
        Self { vertices: vec![ll, lr, ur, ul] }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace formula.
    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn vertex_mean(&self) -> Point {
        let s = self.vertices.iter().fold(Point::ORIGIN, |acc, &p| acc + p);
        s * (1.0 / self.vertices.len() as f64)
    }

    /// Splits every edge longer than `max_edge` into equal pieces.
    pub fn densify(&self, max_edge: f64) -> Self {
        let mut out = Vec::with_capacity(self.vertices.len());
        for (a, b) in self.edges() {
            let pieces = (a.distance(b) / max_edge).ceil().max(1.0) as usize;
            for k in 0..pieces {
                out.push(a + (b - a) * (k as f64 / pieces as f64));
            }
        }
        Self { vertices: out }
    }

    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        let edges: Vec<(Point, Point)> = self.edges().collect();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // adjacent edges may only share their common vertex
                    let (a, b) = edges[i];
                    let (c, d) = edges[j];
                    let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    if (p - shared).cross(q - shared) == 0.0 && (p - shared).dot(q - shared) > 0.0 {
                        return false;
                    }
                    continue;
                }
                if segments_intersect(edges[i], edges[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// CSV ring with header `x,y`; the first vertex is not repeated.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y")?;
        for p in &self.vertices {
            writeln!(w, "{:?},{:?}", p.x, p.y)?;
        }
        Ok(())
    }

    /// Reads the format of [`Polygon::write_csv`]; a repeated closing vertex
    /// is dropped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut verts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (lineno == 0 && line.eq_ignore_ascii_case("x,y")) {
                continue;
            }
            let bad = || Error::InvalidArgument(format!("polygon line {}: expected `x,y`, got `{line}`", lineno + 1));
            let (x, y) = line.split_once(',').ok_or_else(bad)?;
            let x: f64 = x.trim().parse().map_err(|_| bad())?;
            let y: f64 = y.trim().parse().map_err(|_| bad())?;
            verts.push(Point::new(x, y));
        }
        if verts.len() > 3 && verts.first() == verts.last() {
            verts.pop();
        }
        Self::new(verts)
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect((a, b): (Point, Point), (c, d): (Point, Point)) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportConfig {
    pub integrator: IntegratorConfig,
    /// Image edges longer than this get a new vertex at the source midpoint.
    pub max_spacing: f64,
    pub max_vertices: usize,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self { integrator: IntegratorConfig::default(), max_spacing: 0.1, max_vertices: 20_000 }
    }
}

/// Advances every vertex by `φ(t, ·)`, inserting vertices where the image
/// stretches. Flow maps preserve orientation, so the image is checked for
/// positive area but not re-tested for simplicity.
pub fn transport_polygon(field: &FieldDef, poly: &Polygon, t: f64, cfg: &TransportConfig) -> Result<Polygon> {
    ensure(cfg.max_spacing > 0.0, || format!("max_spacing must be positive, got {}", cfg.max_spacing))?;
    let map = |p: Point| flow_to(field, p, t, &cfg.integrator);
    let mut src = poly.vertices.clone();
    let mut img = src.iter().map(|&p| map(p)).collect::<Result<Vec<_>>>()?;
    loop {
        let n = src.len();
        let mut inserted = false;
        let mut new_src = Vec::with_capacity(n);
        let mut new_img = Vec::with_capacity(n);
        for i in 0..n {
            let j = (i + 1) % n;
            new_src.push(src[i]);
            new_img.push(img[i]);
            if new_src.len() + (n - i) < cfg.max_vertices && img[i].distance(img[j]) > cfg.max_spacing {
                let mid = (src[i] + src[j]) * 0.5;
                new_src.push(mid);
                new_img.push(map(mid)?);
                inserted = true;
            }
        }
        src = new_src;
        img = new_img;
        if !inserted || src.len() >= cfg.max_vertices {
            break;
        }
    }
    Polygon::new_unchecked_simple(img).map_err(|e| Error::Integration(format!("transported polygon degenerated: {e}")))
}
