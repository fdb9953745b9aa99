//! Hamiltonian reconstruction where the trace vanishes.
//!
//! `T ≡ 0` is exactly the closedness of the form `Q dx − P dy`, so on a
//! certified rectangle its line integral from a base point defines `H` with
//! `P = −H_y`, `Q = H_x`. The integral runs along an axis-parallel L-path
//! and each leg is evaluated by adaptive Simpson quadrature.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::field::FieldDef;
use crate::flow::{integrate, IntegratorConfig, TrajectoryStatus};
use crate::geom::{Point, Region};
use crate::verify::{trace_vanishes_on, Decision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PathOrder {
    /// Along `x` at the base height, then along `y`.
    XFirst,
    YFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianConfig {
    pub quad_tol: f64,
    pub path: PathOrder,
    /// Tolerance for the `T ≡ 0` certificate.
    pub trace_tol: f64,
}

impl Default for HamiltonianConfig {
    fn default() -> Self {
        Self { quad_tol: 1e-10, path: PathOrder::XFirst, trace_tol: 1e-12 }
    }
}

/// Samples of a scalar function on a uniform `nx × ny` node grid, stored
/// row by row from `ymin` upwards.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub base: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    pub spacing: (f64, f64),
    pub base: Point,
}

impl ScalarGrid {
    pub fn from_fn(region: Region, nx: usize, ny: usize, base: Point, f: impl Fn(Point) -> f64) -> Result<Self> {
        ensure(nx >= 2 && ny >= 2, || format!("grid needs at least 2x2 nodes, got {nx}x{ny}"))?;
        let mut g = Self { region, nx, ny, values: Vec::with_capacity(nx * ny), base };
        for j in 0..ny {
            for i in 0..nx {
                let v = f(g.node(i, j));
                g.values.push(v);
            }
        }
        Ok(g)
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.region.width() / (self.nx - 1) as f64, self.region.height() / (self.ny - 1) as f64)
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        let (dx, dy) = self.spacing();
        let x = if i + 1 == self.nx { self.region.xmax } else { self.region.xmin + dx * i as f64 };
        let y = if j + 1 == self.ny { self.region.ymax } else { self.region.ymin + dy * j as f64 };
        Point::new(x, y)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, p: Point) -> Option<f64> {
        if !self.region.contains(p) {
            return None;
        }
        let (dx, dy) = self.spacing();
        let u = ((p.x - self.region.xmin) / dx).clamp(0.0, (self.nx - 1) as f64);
        let v = ((p.y - self.region.ymin) / dy).clamp(0.0, (self.ny - 1) as f64);
        let i = (u.floor() as usize).min(self.nx - 2);
        let j = (v.floor() as usize).min(self.ny - 2);
        let (s, t) = (u - i as f64, v - j as f64);
        let a = self.at(i, j) * (1.0 - s) + self.at(i + 1, j) * s;
        let b = self.at(i, j + 1) * (1.0 - s) + self.at(i + 1, j + 1) * s;
        Some(a * (1.0 - t) + b * t)
    }

    pub fn header(&self) -> GridHeader {
        GridHeader { region: self.region, nx: self.nx, ny: self.ny, spacing: self.spacing(), base: self.base }
    }

    /// One CSV row per grid row, lowest `y` first, no header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for row in self.values.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Builds `H` on an `n × n` grid over `region` with `H(base) = 0`.
/// Refuses unless `T ≡ 0` is certified on the whole rectangle.
pub fn reconstruct_hamiltonian(field: &FieldDef, base: Point, region: &Region, n: usize, cfg: &HamiltonianConfig) -> Result<ScalarGrid> {
    ensure(n >= 2, || format!("grid size must be at least 2, got {n}"))?;
    ensure(region.contains(base), || format!("base point {base} lies outside {region}"))?;
    let cert = trace_vanishes_on(field, region, cfg.trace_tol)?;
    if cert.decision != Decision::True {
        let why = match cert.witness {
            Some(w) => format!("trace {:e} at {}", w.trace, w.point),
            None => "certificate inconclusive".into(),
        };
        return Err(Error::Refused(format!("T is not certified to vanish on {region} ({why}); H would depend on the path")));
    }
    let p = |x: f64, y: f64| field.eval(x, y).0;
    let q = |x: f64, y: f64| field.eval(x, y).1;
    let mut grid = ScalarGrid::from_fn(*region, n, n, base, |_| 0.0)?;
    let xs: Vec<f64> = (0..n).map(|i| grid.node(i, 0).x).collect();
    let ys: Vec<f64> = (0..n).map(|j| grid.node(0, j).y).collect();
    let tol = cfg.quad_tol / n as f64;
    // first leg at fixed base coordinate, second leg cumulative along each line
    let (first, second): (Vec<f64>, Vec<Vec<f64>>) = match cfg.path {
        PathOrder::XFirst => {
            let first = cumulative(&xs, base.x, |s| q(s, base.y), tol);
            let second = xs.iter().map(|&x| cumulative(&ys, base.y, |s| -p(x, s), tol)).collect();
            (first, second)
        }
        PathOrder::YFirst => {
            let first = cumulative(&ys, base.y, |s| -p(base.x, s), tol);
            let second = ys.iter().map(|&y| cumulative(&xs, base.x, |s| q(s, y), tol)).collect();
            (first, second)
        }
    };
    for j in 0..n {
        for i in 0..n {
            grid.values[j * n + i] = match cfg.path {
                PathOrder::XFirst => first[i] + second[i][j],
                PathOrder::YFirst => first[j] + second[j][i],
            };
        }
    }
    Ok(grid)
}

/// `H(p)` by a single L-path integral from `base`, without the `T ≡ 0`
/// certificate; the value is path-dependent when `T` does not vanish.
pub fn hamiltonian_at(field: &FieldDef, base: Point, p: Point, path: PathOrder, tol: f64) -> f64 {
    let fp = |x: f64, y: f64| field.eval(x, y).0;
    let fq = |x: f64, y: f64| field.eval(x, y).1;
    match path {
        PathOrder::XFirst => adaptive_simpson(&|s| fq(s, base.y), base.x, p.x, tol) - adaptive_simpson(&|s| fp(p.x, s), base.y, p.y, tol),
        PathOrder::YFirst => -adaptive_simpson(&|s| fp(base.x, s), base.y, p.y, tol) + adaptive_simpson(&|s| fq(s, p.y), base.x, p.x, tol),
    }
}

/// `∫_{origin}^{node} f` at every (sorted) node, accumulating segment by segment.
fn cumulative(nodes: &[f64], origin: f64, f: impl Fn(f64) -> f64, tol: f64) -> Vec<f64> {
    let mut out = vec![0.0; nodes.len()];
    let split = nodes.partition_point(|&v| v < origin);
    let (mut acc, mut at) = (0.0, origin);
    for k in split..nodes.len() {
        acc += adaptive_simpson(&f, at, nodes[k], tol);
        at = nodes[k];
        out[k] = acc;
    }
    let (mut acc, mut at) = (0.0, origin);
    for k in (0..split).rev() {
        acc += adaptive_simpson(&f, at, nodes[k], tol);
        at = nodes[k];
        out[k] = acc;
    }
    out
}

/// Max over random interior nodes of `|P + H_y| + |Q − H_x|`, with central
/// differences for the gradient.
pub fn hamiltonian_residual(field: &FieldDef, h: &ScalarGrid, samples: usize, seed: u64) -> Result<f64> {
    ensure(h.nx >= 3 && h.ny >= 3, || "residual needs interior nodes".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dx, dy) = h.spacing();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let i = rng.gen_range(1..h.nx - 1);
        let j = rng.gen_range(1..h.ny - 1);
        let hx = (h.at(i + 1, j) - h.at(i - 1, j)) / (2.0 * dx);
        let hy = (h.at(i, j + 1) - h.at(i, j - 1)) / (2.0 * dy);
        let v = field.eval_velocity(h.node(i, j))?;
        worst = worst.max((v.x + hy).abs() + (v.y - hx).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExtremumKind {
    Min,
    Max,
    Indefinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HessianReport {
    pub point: Point,
    /// `[[Q_x, Q_y], [−P_x, −P_y]]`.
    pub matrix: [[f64; 2]; 2],
    pub det: f64,
    /// Jacobian determinant at the point, for comparison.
    pub jacobian_det: f64,
    pub kind: ExtremumKind,
    pub note: Option<String>,
}

/// Second-derivative test for `H` at a critical point, using the Hessian
/// that `P = −H_y`, `Q = H_x` induce. Either definite kind makes the point
/// a center; which one appears depends on the orientation of the field.
pub fn hessian_extremum(field: &FieldDef, o: Point) -> Result<HessianReport> {
    let jet = field.jet(o)?;
    let residual = jet.value.norm();
    if residual > 1e-8 {
        return Err(Error::NotCriticalPoint { point: o, residual });
    }
    let [[px, py], [qx, qy]] = jet.jac;
    let m = [[qx, qy], [-px, -py]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let (kind, note) = if det <= 0.0 {
        (ExtremumKind::Indefinite, Some(format!("Hessian determinant {det:e} is not positive; D > 0 fails at {o}")))
    } else if qx > 0.0 {
        (ExtremumKind::Min, None)
    } else {
        (ExtremumKind::Max, None)
    };
    Ok(HessianReport { point: o, matrix: m, det, jacobian_det: jet.det, kind, note })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationReport {
    pub max_drift: f64,
    pub samples: usize,
    /// The orbit left the grid; the drift covers only the part inside.
    pub partial: bool,
    pub t_reached: f64,
}

/// Max of `|H(φ(t, x0)) − H(x0)|` over `[0, t_end]`, with `H` interpolated.
pub fn conservation_check(field: &FieldDef, h: &ScalarGrid, x0: Point, t_end: f64, cfg: &IntegratorConfig) -> Result<ConservationReport> {
    let h0 = h.interpolate(x0).ok_or_else(|| Error::InvalidArgument(format!("start {x0} lies outside the grid")))?;
    let traj = integrate(field, x0, t_end, cfg)?;
    let n = (traj.times.len() * 8).max(2000);
    let mut rep = ConservationReport { max_drift: 0.0, samples: 0, partial: traj.status != TrajectoryStatus::Completed, t_reached: 0.0 };
    for (t, p) in traj.resample(n) {
        let Some(v) = h.interpolate(p) else {
            rep.partial = true;
            break;
        };
        rep.samples += 1;
        rep.t_reached = t;
        rep.max_drift = rep.max_drift.max((v - h0).abs());
    }
    Ok(rep)
}
