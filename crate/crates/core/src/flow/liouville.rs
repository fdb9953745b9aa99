//! The Liouville identity `dA/dt = ∬ T dx dy` for a transported polygon.
//!
//! `dA/dt` is a central difference of shoelace areas of the polygon mapped
//! by `φ(±h, ·)`. Straight edges bend under the flow, so before mapping every
//! edge is split until the chord midpoint velocity matches the velocity at
//! the chord midpoint to `sag_tol`; the lost area is then of order
//! `h · sag_tol · perimeter`. The trace integral uses a signed fan
//! triangulation from the vertex mean, which is exact for any simple
//! polygon, with a globally adaptive 7-point degree-5 rule. A cell whose
//! interval enclosure of `T` is much wider than the spread at its nodes is
//! kept in the queue, so features thinner than the node spacing (the bump's
//! onset shell) cannot slip between nodes unnoticed.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::polygon::Polygon;
use super::{flow_to, IntegratorConfig};
use crate::error::{ensure, Result};
use crate::field::FieldDef;
use crate::geom::{Point, Region};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleConfig {
    pub integrator: IntegratorConfig,
    /// Half-width of the central difference in time.
    pub h: f64,
    pub max_edge: f64,
    pub min_edge: f64,
    pub sag_tol: f64,
    /// Absolute tolerance for the trace integral.
    pub quad_tol: f64,
    pub quad_max_cells: usize,
}

impl Default for LiouvilleConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::with_tolerances(1e-12, 1e-14),
            h: 1e-3,
            max_edge: 0.01,
            min_edge: 1e-5,
            sag_tol: 1e-7,
            quad_tol: 1e-8,
            quad_max_cells: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    pub da_dt: f64,
    pub integral_t: f64,
    pub residual: f64,
    /// Vertices actually transported after edge refinement.
    pub vertices_used: usize,
}

pub fn liouville_residual(field: &FieldDef, poly: &Polygon, cfg: &LiouvilleConfig) -> Result<LiouvilleReport> {
    ensure(cfg.h > 0.0 && cfg.max_edge > 0.0 && cfg.sag_tol > 0.0 && cfg.quad_tol > 0.0, || {
        "liouville config values must be positive".into()
    })?;
    let fine = refine_edges(field, &poly.densify(cfg.max_edge), cfg)?;
    let shoelace = |t: f64| -> Result<f64> {
        let mut acc = 0.0;
        let mapped = fine.iter().map(|&p| flow_to(field, p, t, &cfg.integrator)).collect::<Result<Vec<_>>>()?;
        for i in 0..mapped.len() {
            acc += mapped[i].cross(mapped[(i + 1) % mapped.len()]);
        }
        Ok(0.5 * acc)
    };
    let da_dt = (shoelace(cfg.h)? - shoelace(-cfg.h)?) / (2.0 * cfg.h);
    let integral_t = integrate_trace(field, poly, cfg)?;
    Ok(LiouvilleReport { da_dt, integral_t, residual: (da_dt - integral_t).abs(), vertices_used: fine.len() })
}

fn velocity(field: &FieldDef, p: Point) -> Result<Point> {
    field.eval_velocity(p)
}

fn refine_edges(field: &FieldDef, poly: &Polygon, cfg: &LiouvilleConfig) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(poly.len());
    for (a, b) in poly.edges() {
        let (fa, fb) = (velocity(field, a)?, velocity(field, b)?);
        split_edge(field, a, b, fa, fb, cfg, &mut out)?;
    }
    Ok(out)
}

/// Pushes `a` and any interior points needed on `[a, b)`.
fn split_edge(field: &FieldDef, a: Point, b: Point, fa: Point, fb: Point, cfg: &LiouvilleConfig, out: &mut Vec<Point>) -> Result<()> {
    let m = (a + b) * 0.5;
    let fm = velocity(field, m)?;
    let sag = (fm - (fa + fb) * 0.5).norm();
    if sag <= cfg.sag_tol || a.distance(b) <= cfg.min_edge {
        out.push(a);
        return Ok(());
    }
    split_edge(field, a, m, fa, fm, cfg, out)?;
    split_edge(field, m, b, fm, fb, cfg, out)
}

// degree-5 rule on the reference triangle, barycentric weights
const CENTER_WEIGHT: f64 = 0.225;

fn dunavant7() -> [(f64, f64, f64, f64); 7] {
    let s = 15f64.sqrt();
    let a1 = (6.0 - s) / 21.0;
    let w1 = (155.0 - s) / 1200.0;
    let a2 = (6.0 + s) / 21.0;
    let w2 = (155.0 + s) / 1200.0;
    let b1 = 1.0 - 2.0 * a1;
    let b2 = 1.0 - 2.0 * a2;
    let third = 1.0 / 3.0;
    [
        (third, third, third, CENTER_WEIGHT),
        (a1, a1, b1, w1),
        (a1, b1, a1, w1),
        (b1, a1, a1, w1),
        (a2, a2, b2, w2),
        (a2, b2, a2, w2),
        (b2, a2, a2, w2),
    ]
}

struct TraceQuad<'a> {
    field: &'a FieldDef,
    rule: [(f64, f64, f64, f64); 7],
    min_edge: f64,
}

impl TraceQuad<'_> {
    /// Signed integral over the triangle `(a, b, c)` and the spread of `T`
    /// over the rule nodes.
    fn rule(&self, a: Point, b: Point, c: Point) -> Result<(f64, f64)> {
        let area2 = (b - a).cross(c - a);
        let mut s = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(l1, l2, l3, w) in &self.rule {
            let t = self.field.jet(a * l1 + b * l2 + c * l3)?.trace;
            s += w * t;
            lo = lo.min(t);
            hi = hi.max(t);
        }
        Ok((0.5 * area2 * s, hi - lo))
    }

    /// `area * width(T)` if the enclosure over the bounding box shows
    /// variation the samples did not see, else zero.
    fn unresolved_bound(&self, t: &[Point; 3], spread: f64) -> f64 {
        let [a, b, c] = *t;
        if a.distance(b).max(b.distance(c)).max(c.distance(a)) <= self.min_edge {
            return 0.0;
        }
        let lo = |v: [f64; 3]| v[0].min(v[1]).min(v[2]);
        let hi = |v: [f64; 3]| v[0].max(v[1]).max(v[2]);
        let (xs, ys) = ([a.x, b.x, c.x], [a.y, b.y, c.y]);
        let Ok(j) = Region::new(lo(xs), hi(xs), lo(ys), hi(ys)).and_then(|r| self.field.interval_jet(&r)) else {
            return 0.0;
        };
        let width = j.trace.width();
        if width <= RESOLVE_SPREAD * spread + RESOLVE_FLOOR * (1.0 + j.trace.mag()) {
            return 0.0;
        }
        let area = 0.5 * (b - a).cross(c - a).abs();
        area * width.min(1e100)
    }

    fn split(&self, t: [Point; 3], whole: f64) -> Result<Cell> {
        let [a, b, c] = t;
        let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
        let kids = [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]];
        let mut values = [0.0; 4];
        let mut guard = 0.0;
        for (v, k) in values.iter_mut().zip(&kids) {
            let (value, spread) = self.rule(k[0], k[1], k[2])?;
            *v = value;
            guard += self.unresolved_bound(k, spread);
        }
        let refined: f64 = values.iter().sum();
        Ok(Cell { err: (refined - whole).abs() + guard, value: refined, kids, values })
    }
}

/// A triangle already split once: `value` is the sum over its children.
struct Cell {
    err: f64,
    value: f64,
    kids: [[Point; 3]; 4],
    values: [f64; 4],
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// `∬ T dx dy` over the polygon. Refinement is global: the cell with the
/// largest error estimate is split until the summed estimate meets
/// `quad_tol` or `quad_max_cells` splits have been made. Cells whose own
/// estimate is negligible are retired from the queue.
pub fn integrate_trace(field: &FieldDef, poly: &Polygon, cfg: &LiouvilleConfig) -> Result<f64> {
    let quad = TraceQuad { field, rule: dunavant7(), min_edge: cfg.min_edge };
    let c = poly.vertex_mean();
    let mut acc = Queue { heap: BinaryHeap::new(), total: 0.0, err: 0.0, negligible: 1e-6 * cfg.quad_tol / poly.len() as f64 };
    for (a, b) in poly.edges() {
        acc.push(quad.split([c, a, b], quad.rule(c, a, b)?.0)?);
    }
    let mut splits = 0;
    while splits < cfg.quad_max_cells && acc.err > cfg.quad_tol {
        let Some(cell) = acc.heap.pop() else { break };
        acc.total -= cell.value;
        acc.err -= cell.err;
        for (k, v) in cell.kids.iter().zip(cell.values) {
            acc.push(quad.split(*k, v)?);
        }
        splits += 1;
    }
    Ok(acc.total)
}

// A cell is resolved once the enclosure of T over its bounding box is within
// RESOLVE_SPREAD times the spread seen at its rule nodes, up to a
// floor of RESOLVE_FLOOR * (1 + |T|). Unresolved cells carry the bound
// area * width(T) in their error so they cannot be retired.
const RESOLVE_SPREAD: f64 = 16.0;
const RESOLVE_FLOOR: f64 = 1e-3;

struct Queue {
    heap: BinaryHeap<Cell>,
    total: f64,
    err: f64,
    negligible: f64,
}

impl Queue {
    fn push(&mut self, cell: Cell) {
        self.total += cell.value;
        self.err += cell.err;
        if cell.err > self.negligible {
            self.heap.push(cell);
        }
    }
}
