//! Static phase portraits: orbit polylines, nullclines and critical points
//! drawn into a single SVG.

use std::fmt::Write as _;

use crate::geom::{Point, Region};

/// Zero set of `f` on an `n × n` cell grid by marching squares, as line
/// segments. Saddle cells are resolved with the cell-center value.
pub fn zero_contour(region: &Region, n: usize, f: impl Fn(Point) -> f64) -> Vec<(Point, Point)> {
    let n = n.max(1);
    let node = |i: usize, j: usize| region.lerp(i as f64 / n as f64, j as f64 / n as f64);
    let vals: Vec<Vec<f64>> = (0..=n).map(|j| (0..=n).map(|i| f(node(i, j))).collect()).collect();
    let mut segs = Vec::new();
    for j in 0..n {
        for i in 0..n {
            // corners counter-clockwise from lower left
            let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let v: Vec<f64> = c.iter().map(|&(a, b)| vals[b][a]).collect();
            if v.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let mut cross = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (v[e], v[(e + 1) % 4]);
                if (a < 0.0) != (b < 0.0) {
                    let s = a / (a - b);
                    let (pa, pb) = (node(c[e].0, c[e].1), node(c[(e + 1) % 4].0, c[(e + 1) % 4].1));
                    cross.push((e, pa + (pb - pa) * s));
                }
            }
            match cross.len() {
                2 => segs.push((cross[0].1, cross[1].1)),
                4 => {
                    let mid = f(region.lerp((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64));
                    // pair each crossing with a neighbour so the center's sign region stays connected
                    if (mid < 0.0) == (v[0] < 0.0) {
                        segs.push((cross[0].1, cross[1].1));
                        segs.push((cross[2].1, cross[3].1));
                    } else {
                        segs.push((cross[3].1, cross[0].1));
                        segs.push((cross[1].1, cross[2].1));
                    }
                }
                _ => {}
            }
        }
    }
    segs
}

/// Splits a sampled orbit into the pieces that stay inside `region`.
pub fn clip_polyline(points: &[Point], region: &Region) -> Vec<Vec<Point>> {
    let mut pieces = Vec::new();
    let mut cur = Vec::new();
    for &p in points {
        if region.contains(p) && p.is_finite() {
            cur.push(p);
        } else if !cur.is_empty() {
            pieces.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        pieces.push(cur);
    }
    pieces.retain(|p| p.len() >= 2);
    pieces
}

pub struct Portrait<'a> {
    pub region: &'a Region,
    pub title: &'a str,
    pub orbits: &'a [Vec<Point>],
    pub p_nullcline: &'a [(Point, Point)],
    pub q_nullcline: &'a [(Point, Point)],
    pub critical: &'a [Point],
    pub width: f64,
}

impl Portrait<'_> {
    pub fn to_svg(&self) -> String {
        let r = self.region;
        let w = self.width;
        let h = (w * r.height() / r.width()).round();
        let map = |p: Point| ((p.x - r.xmin) / r.width() * w, (r.ymax - p.y) / r.height() * h);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
        let _ = writeln!(s, "<title>{}</title>", escape(self.title));
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white" stroke="black"/>"#);
        if r.contains(Point::ORIGIN) {
            let (ox, oy) = map(Point::ORIGIN);
            let _ = writeln!(
                s,
                r##"<g stroke="#bbbbbb" stroke-width="0.5"><line x1="0" y1="{oy:.2}" x2="{w}" y2="{oy:.2}"/><line x1="{ox:.2}" y1="0" x2="{ox:.2}" y2="{h}"/></g>"##
            );
        }
        for (segs, colour, label) in [(self.p_nullcline, "#2a9d4b", "P = 0"), (self.q_nullcline, "#d1495b", "Q = 0")] {
            let _ = writeln!(s, r#"<g stroke="{colour}" stroke-width="1" fill="none"><desc>{label}</desc>"#);
            for &(a, b) in segs {
                let ((x1, y1), (x2, y2)) = (map(a), map(b));
                let _ = writeln!(s, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
            }
            let _ = writeln!(s, "</g>");
        }
        let _ = writeln!(s, r##"<g stroke="#1d3557" stroke-width="0.8" fill="none">"##);
        for orbit in self.orbits {
            let pts: Vec<String> = orbit.iter().map(|&p| map(p)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(s, r#"<polyline points="{}"/>"#, pts.join(" "));
        }
        let _ = writeln!(s, "</g>");
        for &c in self.critical {
            let (x, y) = map(c);
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="black"/>"#);
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
