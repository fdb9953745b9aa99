//! The two pointwise criteria at a critical point: the trace vanishing on a
//! neighbourhood, and membership in the closure of `T₋ = {T < 0}`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::field::{FieldDef, JetSample};
use crate::geom::{Point, Region};

/// Three-valued outcome; `Indeterminate` is an honest third answer, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    True,
    False,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceNearReport {
    pub decision: Decision,
    pub center: Point,
    pub radius: f64,
    pub tol: f64,
    /// Point of the disk with `|T| > tol`, when the decision is false.
    pub witness: Option<JetSample>,
    pub boxes_processed: usize,
    /// Upper bound of `|T|` over the certified cover.
    pub sup_abs_trace: f64,
}

const TRACE_MAX_DEPTH: u32 = 14;
const TRACE_MAX_BOXES: usize = 1 << 20;

/// Decides `sup |T| ≤ tol` over the closed disk of `radius` around `center`
/// by an interval box cover; boxes missing the disk are discarded.
pub fn trace_vanishes_near(field: &FieldDef, center: Point, radius: f64, tol: f64) -> Result<TraceNearReport> {
    ensure(radius > 0.0 && radius.is_finite(), || format!("radius must be positive, got {radius}"))?;
    let cover = Region::square(center, radius)?;
    let keep = |b: &Region| b.distance_to(center) <= radius;
    let sample = |b: &Region| -> Vec<Point> {
        std::iter::once(b.center())
            .chain(b.corners())
            .map(|p| {
                let d = p.distance(center);
                if d > radius {
                    center + (p - center) * (radius / d * (1.0 - 4.0 * f64::EPSILON))
                } else {
                    p
                }
            })
            .collect()
    };
    let mut rep = run_cover(field, cover, tol, keep, sample)?;
    rep.center = center;
    rep.radius = radius;
    Ok(rep)
}

/// Same decision over a rectangle.
pub fn trace_vanishes_on(field: &FieldDef, region: &Region, tol: f64) -> Result<TraceNearReport> {
    let sample = |b: &Region| -> Vec<Point> { std::iter::once(b.center()).chain(b.corners()).collect() };
    let mut rep = run_cover(field, *region, tol, |_| true, sample)?;
    rep.center = region.center();
    rep.radius = 0.5 * region.width().hypot(region.height());
    Ok(rep)
}

fn run_cover(
    field: &FieldDef,
    cover: Region,
    tol: f64,
    keep: impl Fn(&Region) -> bool,
    sample: impl Fn(&Region) -> Vec<Point>,
) -> Result<TraceNearReport> {
    ensure(tol >= 0.0, || format!("tol must be non-negative, got {tol}"))?;
    let mut rep = TraceNearReport {
        decision: Decision::True,
        center: cover.center(),
        radius: 0.0,
        tol,
        witness: None,
        boxes_processed: 0,
        sup_abs_trace: 0.0,
    };
    let mut level = vec![cover];
    for depth in 0..=TRACE_MAX_DEPTH {
        let mut next = Vec::new();
        for b in level.iter().filter(|b| keep(b)) {
            rep.boxes_processed += 1;
            if let Ok(jet) = field.interval_jet(b) {
                let mag = jet.trace.mag();
                if mag <= tol {
                    rep.sup_abs_trace = rep.sup_abs_trace.max(mag);
                    continue;
                }
            }
            for p in sample(b) {
                let jet = field.jet(p)?;
                if jet.trace.abs() > tol {
                    rep.decision = Decision::False;
                    rep.witness = Some(jet);
                    return Ok(rep);
                }
            }
            if depth < TRACE_MAX_DEPTH && next.len() < TRACE_MAX_BOXES {
                next.extend(b.quadrants());
            } else {
                rep.decision = Decision::Indeterminate;
            }
        }
        level = next;
    }
    if rep.decision == Decision::Indeterminate {
        rep.sup_abs_trace = f64::NAN;
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureConfig {
    /// Smallest probed radius; radii run `1, 1/2, …` down to it.
    pub r_min: f64,
    /// A witness needs `T < −delta`.
    pub delta: f64,
    /// Grid points per side of the search square at each radius.
    pub grid_n: usize,
    /// Tolerance handed to [`trace_vanishes_near`] at `r_min`.
    pub trace_tol: f64,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        Self { r_min: 1.0 / 1024.0, delta: 1e-10, grid_n: 33, trace_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureReport {
    pub decision: Decision,
    pub point: Point,
    /// `(radius, witness)` for every radius where `T < −delta` was found.
    pub witnesses: Vec<(f64, JetSample)>,
    /// Innermost witness, when every radius produced one.
    pub innermost: Option<JetSample>,
    /// The complementary check at `r_min`, run when some radius had no witness.
    pub trace_near: Option<TraceNearReport>,
}

/// Decides whether `point` lies in the closure of `{T < 0}`.
pub fn in_closure_t_minus(field: &FieldDef, point: Point, cfg: &ClosureConfig) -> Result<ClosureReport> {
    ensure(cfg.r_min > 0.0 && cfg.r_min <= 1.0, || format!("r_min must lie in (0, 1], got {}", cfg.r_min))?;
    ensure(cfg.delta > 0.0, || format!("delta must be positive, got {}", cfg.delta))?;
    ensure(cfg.grid_n >= 3, || "grid_n must be at least 3".into())?;
    let mut rep = ClosureReport { decision: Decision::True, point, witnesses: Vec::new(), innermost: None, trace_near: None };
    let mut r = 1.0;
    let mut all = true;
    loop {
        match min_trace_in_disk(field, point, r, cfg.grid_n)? {
            Some(jet) if jet.trace < -cfg.delta => rep.witnesses.push((r, jet)),
            _ => {
                all = false;
                break;
            }
        }
        if r <= cfg.r_min {
            break;
        }
        r = (0.5 * r).max(cfg.r_min);
    }
    if all {
        rep.innermost = rep.witnesses.last().map(|w| w.1);
        return Ok(rep);
    }
    let near = trace_vanishes_near(field, point, cfg.r_min, cfg.trace_tol)?;
    rep.decision = match near.decision {
        Decision::True => Decision::False,
        _ => Decision::Indeterminate,
    };
    rep.trace_near = Some(near);
    Ok(rep)
}

/// Grid search over the disk followed by a compass search from the best
/// grid points. Returns the jet with the smallest trace found.
fn min_trace_in_disk(field: &FieldDef, c: Point, r: f64, n: usize) -> Result<Option<JetSample>> {
    let trace = |p: Point| field.jet(p);
    let mut grid: Vec<JetSample> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let p = c + Point::new(-r + 2.0 * r * i as f64 / (n - 1) as f64, -r + 2.0 * r * j as f64 / (n - 1) as f64);
            if p.distance(c) <= r {
                grid.push(trace(p)?);
            }
        }
    }
    grid.sort_by(|a, b| a.trace.total_cmp(&b.trace));
    let mut best = grid.first().copied();
    let h0 = 2.0 * r / (n - 1) as f64;
    for start in grid.iter().take(3) {
        let mut cur = *start;
        let mut h = h0;
        while h > 1e-4 * h0 {
            let mut moved = false;
            for d in [Point::new(1.0, 0.0), Point::new(-1.0, 0.0), Point::new(0.0, 1.0), Point::new(0.0, -1.0)] {
                let p = cur.point + d * h;
                if p.distance(c) > r {
                    continue;
                }
                let jet = trace(p)?;
                if jet.trace < cur.trace {
                    cur = jet;
                    moved = true;
                }
            }
            if !moved {
                h *= 0.5;
            }
        }
        if best.is_none_or(|b| cur.trace < b.trace) {
            best = Some(cur);
        }
    }
    Ok(best)
}
