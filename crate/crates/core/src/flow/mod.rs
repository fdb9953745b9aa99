//! Numerical flow `φ(t, x, y)` of a field.
//!
//! Integration uses an explicit embedded Dormand–Prince 5(4) pair with
//! per-step error control `|err_i| ≤ atol + rtol·|y_i|` (RMS over the two
//! components) and keeps the continuous extension of every accepted step.
//! Fields satisfying the standing hypotheses have eigenvalues with
//! non-positive real parts, so no stiff solver is provided.

mod dopri;
pub mod events;
pub mod liouville;
pub mod polygon;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use dopri::DenseSegment;
pub use events::{integrate_until_event, Event, EventOutcome, EventStatus, Section, Sense};
pub use liouville::{liouville_residual, LiouvilleConfig, LiouvilleReport};
pub use polygon::{transport_polygon, Polygon, TransportConfig};

use crate::error::{ensure, Error, Result};
use crate::field::FieldDef;
use crate::geom::Point;
use dopri::{Advance, Stepper};

/// States whose norm exceeds this are reported as blow-up.
pub const BLOWUP_NORM: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: 1e-3, h_max: 0.5, max_steps: 1_000_000 }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.rtol > 0.0 && self.rtol.is_finite(), || format!("rtol must be positive, got {}", self.rtol))?;
        ensure(self.atol > 0.0 && self.atol.is_finite(), || format!("atol must be positive, got {}", self.atol))?;
        ensure(self.h_init > 0.0 && self.h_init <= self.h_max, || {
            format!("need 0 < h_init <= h_max, got h_init={}, h_max={}", self.h_init, self.h_max)
        })?;
        ensure(self.max_steps >= 1, || "max_steps must be at least 1".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TrajectoryStatus {
    Completed,
    Event,
    StepLimit,
    Blowup,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Point>,
    /// One segment per accepted step; `dense[i]` spans `times[i]..times[i+1]`.
    pub dense: Vec<DenseSegment>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn final_state(&self) -> Point {
        *self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least the initial state")
    }

    /// Dense-output state at time `t` within the integrated span.
    pub fn state_at(&self, t: f64) -> Option<Point> {
        if t < self.times[0] || t > self.final_time() {
            return None;
        }
        let i = self.dense.partition_point(|s| s.t1() < t);
        match self.dense.get(i) {
            Some(seg) => Some(seg.eval(t)),
            None => Some(self.final_state()),
        }
    }

    /// Samples the dense output on a uniform time grid of `n + 1` points.
    pub fn resample(&self, n: usize) -> Vec<(f64, Point)> {
        let t0 = self.times[0];
        let t1 = self.final_time();
        (0..=n)
            .filter_map(|i| {
                let t = t0 + (t1 - t0) * i as f64 / n.max(1) as f64;
                self.state_at(t).map(|p| (t, p))
            })
            .collect()
    }

    /// CSV with header `t,x,y`, one row per accepted step.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,y")?;
        for (t, p) in self.times.iter().zip(&self.states) {
            writeln!(w, "{t:?},{:?},{:?}", p.x, p.y)?;
        }
        Ok(())
    }
}

/// Integrates forward from `x0` to `t_end > 0`. Use [`FieldDef::reversed`]
/// for backward time.
pub fn integrate(field: &FieldDef, x0: Point, t_end: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    ensure(t_end > 0.0 && t_end.is_finite(), || format!("t_end must be positive and finite, got {t_end}"))?;
    ensure(x0.is_finite(), || format!("initial state {x0} is not finite"))?;
    let mut traj = Trajectory { times: vec![0.0], states: vec![x0], dense: Vec::new(), status: TrajectoryStatus::Completed };
    let Some(mut stepper) = Stepper::new(field, x0, cfg) else {
        traj.status = TrajectoryStatus::Blowup;
        return Ok(traj);
    };
    while stepper.t < t_end {
        match stepper.advance(t_end) {
            Advance::Step(seg) => {
                traj.times.push(stepper.t);
                traj.states.push(stepper.y);
                traj.dense.push(seg);
            }
            Advance::Blowup => {
                traj.status = TrajectoryStatus::Blowup;
                break;
            }
            Advance::StepLimit => {
                traj.status = TrajectoryStatus::StepLimit;
                break;
            }
        }
    }
    Ok(traj)
}

/// `φ(t, x0)` for any real `t`, without storing the path.
pub fn flow_to(field: &FieldDef, x0: Point, t: f64, cfg: &IntegratorConfig) -> Result<Point> {
    cfg.validate()?;
    if t == 0.0 {
        return Ok(x0);
    }
    let reversed;
    let field = if t < 0.0 {
        reversed = field.reversed();
        &reversed
    } else {
        field
    };
    let t_end = t.abs();
    let mut stepper = Stepper::new(field, x0, cfg).ok_or_else(|| Error::Integration(format!("non-finite velocity at {x0}")))?;
    while stepper.t < t_end {
        match stepper.advance(t_end) {
            Advance::Step(_) => {}
            Advance::Blowup => return Err(Error::Integration(format!("blow-up from {x0} before t = {t}"))),
            Advance::StepLimit => return Err(Error::Integration(format!("step limit from {x0} before t = {t}"))),
        }
    }
    Ok(stepper.y)
}
