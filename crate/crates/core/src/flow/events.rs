//! Event location on the dense output.
//!
//! Each accepted step is scanned at a few interior points for a sign change
//! of the event function `g`. The bracket is then bisected with genuine
//! Dormand–Prince steps taken from the start of the step, so the reported
//! state carries the integrator's own accuracy rather than the interpolant's.

use serde::{Deserialize, Serialize};

use super::dopri::{dp_step, Advance, DenseSegment, Stepper};
use super::IntegratorConfig;
use crate::error::{ensure, Error, Result};
use crate::field::FieldDef;
use crate::geom::{Point, Region};

const SUBSAMPLES: usize = 8;
const MAX_BISECTIONS: usize = 200;

/// A ray `base + r·direction`, `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub base: Point,
    pub direction: Point,
}

impl Section {
    pub fn new(base: Point, direction: Point) -> Result<Self> {
        let n = direction.norm();
        ensure(n > 0.0 && n.is_finite() && base.is_finite(), || {
            format!("section needs a finite base and non-zero direction, got {base} / {direction}")
        })?;
        Ok(Self { base, direction: direction * (1.0 / n) })
    }

    pub fn from_angle(base: Point, angle: f64) -> Self {
        Self { base, direction: Point::new(angle.cos(), angle.sin()) }
    }

    pub fn positive_x_axis() -> Self {
        Self::from_angle(Point::ORIGIN, 0.0)
    }

    pub fn point_at(&self, r: f64) -> Point {
        self.base + self.direction * r
    }

    /// Coordinate along the ray of the orthogonal projection of `p`.
    pub fn param(&self, p: Point) -> f64 {
        (p - self.base).dot(self.direction)
    }

    /// Signed distance of `p` from the supporting line, positive on the
    /// counterclockwise side of the ray.
    pub fn normal(&self, p: Point) -> f64 {
        self.direction.cross(p - self.base)
    }
}

/// Orientation in which a ray crossing counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Sense {
    CounterClockwise,
    Clockwise,
    /// The rotation sense of the field about the section base at the start point.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    RayCrossing { section: Section, sense: Sense },
    EnterBall { center: Point, radius: f64 },
    ExitBox(Region),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventStatus {
    Found,
    NotFound,
    Blowup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventOutcome {
    /// Event state when found, otherwise the last state reached.
    pub state: Point,
    pub time: f64,
    pub status: EventStatus,
    pub steps: usize,
}

/// Event function; the event fires when `g` moves from negative to `>= 0`
/// and `accept` holds at the located state.
struct Detector {
    kind: Event,
    sign: f64,
}

impl Detector {
    fn g(&self, p: Point) -> f64 {
        match self.kind {
            Event::RayCrossing { section, .. } => self.sign * section.normal(p),
            Event::EnterBall { center, radius } => radius - p.distance(center),
            Event::ExitBox(r) => (r.xmin - p.x).max(p.x - r.xmax).max(r.ymin - p.y).max(p.y - r.ymax),
        }
    }

    fn accept(&self, field: &FieldDef, p: Point) -> bool {
        match self.kind {
            Event::RayCrossing { section, .. } => {
                let (u, v) = field.eval(p.x, p.y);
                section.param(p) > 0.0 && self.sign * section.direction.cross(Point::new(u, v)) > 0.0
            }
            _ => true,
        }
    }
}

fn resolve_sense(field: &FieldDef, x0: Point, section: &Section, sense: Sense) -> Result<f64> {
    match sense {
        Sense::CounterClockwise => Ok(1.0),
        Sense::Clockwise => Ok(-1.0),
        Sense::Auto => {
            let v = field.eval_velocity(x0)?;
            let arm = if (x0 - section.base).norm() > 0.0 { x0 - section.base } else { section.direction };
            let w = arm.cross(v);
            if w > 0.0 {
                Ok(1.0)
            } else if w < 0.0 {
                Ok(-1.0)
            } else {
                Err(Error::InvalidArgument(format!("no rotation about {} at {x0}; give the crossing sense explicitly", section.base)))
            }
        }
    }
}

/// Integrates from `x0` until `event` fires, `t_max` passes (may be
/// infinite), or the step budget runs out.
pub fn integrate_until_event(field: &FieldDef, x0: Point, event: Event, t_max: f64, cfg: &IntegratorConfig) -> Result<EventOutcome> {
    cfg.validate()?;
    ensure(t_max > 0.0, || format!("t_max must be positive, got {t_max}"))?;
    ensure(x0.is_finite(), || format!("initial state {x0} is not finite"))?;
    let sign = match &event {
        Event::RayCrossing { section, sense } => resolve_sense(field, x0, section, *sense)?,
        Event::EnterBall { radius, .. } => {
            ensure(*radius > 0.0, || format!("ball radius must be positive, got {radius}"))?;
            1.0
        }
        Event::ExitBox(_) => 1.0,
    };
    let det = Detector { kind: event, sign };
    let not_found = |state, time, steps, status| EventOutcome { state, time, status, steps };

    if !matches!(event, Event::RayCrossing { .. }) && det.g(x0) >= 0.0 {
        return Ok(not_found(x0, 0.0, 0, EventStatus::Found));
    }
    let Some(mut stepper) = Stepper::new(field, x0, cfg) else {
        return Ok(not_found(x0, 0.0, 0, EventStatus::Blowup));
    };
    let mut g_prev = det.g(x0);
    while stepper.t < t_max {
        let seg = match stepper.advance(t_max) {
            Advance::Step(seg) => seg,
            Advance::Blowup => return Ok(not_found(stepper.y, stepper.t, stepper.accepted, EventStatus::Blowup)),
            Advance::StepLimit => return Ok(not_found(stepper.y, stepper.t, stepper.accepted, EventStatus::NotFound)),
        };
        let mut t_a = seg.t0;
        for k in 1..=SUBSAMPLES {
            let t_b = if k == SUBSAMPLES { seg.t1() } else { seg.t0 + seg.h * k as f64 / SUBSAMPLES as f64 };
            let p_b = if k == SUBSAMPLES { seg.end() } else { seg.eval(t_b) };
            let g_b = det.g(p_b);
            if g_prev < 0.0 && g_b >= 0.0 {
                let (t, p) = refine(field, &det, &seg, t_a, t_b);
                if det.accept(field, p) {
                    return Ok(EventOutcome { state: p, time: t, status: EventStatus::Found, steps: stepper.accepted });
                }
            }
            g_prev = g_b;
            t_a = t_b;
        }
        // the accepted endpoint is exact; resynchronise with it
        g_prev = det.g(stepper.y);
    }
    Ok(not_found(stepper.y, stepper.t, stepper.accepted, EventStatus::NotFound))
}

/// Bisects `[t_a, t_b]` with states recomputed by a single step from the
/// segment start. Returns the first time at which `g >= 0`.
fn refine(field: &FieldDef, det: &Detector, seg: &DenseSegment, t_a: f64, t_b: f64) -> (f64, Point) {
    let y0 = seg.start();
    let (u, v) = field.eval(y0.x, y0.y);
    let k1 = Point::new(u, v);
    let state = |t: f64| -> Point {
        if t <= seg.t0 {
            return y0;
        }
        match dp_step(field, y0, k1, t - seg.t0) {
            Some(s) => s.y1,
            None => seg.eval(t),
        }
    };
    let (mut lo, mut hi) = (t_a, t_b);
    let mut p_hi = state(hi);
    if det.g(state(lo)) >= 0.0 || det.g(p_hi) < 0.0 {
        // the interpolant and the step disagree on the bracket; widen it
        lo = seg.t0;
        hi = seg.t1();
        p_hi = state(hi);
        if det.g(p_hi) < 0.0 {
            return (t_b, seg.eval(t_b));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p_mid = state(mid);
        if det.g(p_mid) >= 0.0 {
            hi = mid;
            p_hi = p_mid;
        } else {
            lo = mid;
        }
    }
    (hi, p_hi)
}
