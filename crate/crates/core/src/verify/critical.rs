//! Critical points by damped Newton iteration from a seed grid.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::field::FieldDef;
use crate::geom::{Point, Region};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalConfig {
    /// Seeds per side of the grid.
    pub grid_n: usize,
    pub max_iter: usize,
    /// Accept a root when `|F| < residual_tol`.
    pub residual_tol: f64,
    /// Roots closer than this are merged.
    pub dedupe: f64,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        Self { grid_n: 21, max_iter: 60, residual_tol: 1e-10, dedupe: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoints {
    /// Sorted by `(x, y)`.
    pub points: Vec<Point>,
    pub residuals: Vec<f64>,
    pub seeds: usize,
    pub converged: usize,
    pub dropped: usize,
}

pub fn find_critical_points(field: &FieldDef, region: &Region, cfg: &CriticalConfig) -> Result<CriticalPoints> {
    ensure(cfg.grid_n >= 1 && cfg.max_iter >= 1, || "grid_n and max_iter must be positive".into())?;
    let n = cfg.grid_n;
    let mut found: Vec<(Point, f64)> = Vec::new();
    let (mut converged, mut dropped) = (0, 0);
    let seeds = n * n;
    for i in 0..n {
        for j in 0..n {
            let u = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
            let v = if n == 1 { 0.5 } else { j as f64 / (n - 1) as f64 };
            match newton(field, region.lerp(u, v), cfg) {
                Some((p, res)) if region.contains(p) => {
                    converged += 1;
                    match found.iter_mut().find(|(q, _)| q.distance(p) <= cfg.dedupe) {
                        Some(slot) if res < slot.1 => *slot = (p, res),
                        Some(_) => {}
                        None => found.push((p, res)),
                    }
                }
                _ => dropped += 1,
            }
        }
    }
    found.sort_by(|a, b| a.0.x.total_cmp(&b.0.x).then(a.0.y.total_cmp(&b.0.y)));
    Ok(CriticalPoints {
        points: found.iter().map(|f| f.0).collect(),
        residuals: found.iter().map(|f| f.1).collect(),
        seeds,
        converged,
        dropped,
    })
}

/// Newton's method with step halving on `|F|`.
pub(crate) fn newton(field: &FieldDef, start: Point, cfg: &CriticalConfig) -> Option<(Point, f64)> {
    newton_to(field, start, Point::ORIGIN, cfg.max_iter, cfg.residual_tol)
}

/// Solves `F(p) = target` from `start`; returns the root and its residual.
pub(crate) fn newton_to(field: &FieldDef, start: Point, target: Point, max_iter: usize, tol: f64) -> Option<(Point, f64)> {
    let mut p = start;
    let mut jet = field.jet(p).ok()?;
    let mut res = (jet.value - target).norm();
    for _ in 0..max_iter {
        if res < 0.01 * tol {
            break;
        }
        let [[a, b], [c, d]] = jet.jac;
        if jet.det == 0.0 || !jet.det.is_finite() {
            return None;
        }
        let r = jet.value - target;
        let step = Point::new(d * r.x - b * r.y, -c * r.x + a * r.y) * (1.0 / jet.det);
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let q = p - step * lambda;
            if let Ok(jq) = field.jet(q) {
                let rq = (jq.value - target).norm();
                if rq < res {
                    p = q;
                    jet = jq;
                    res = rq;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (res < tol).then_some((p, res))
}
