//! Dormand–Prince 5(4) with Hairer's 4th-order continuous extension.

use super::IntegratorConfig;
use crate::field::FieldDef;
use crate::geom::Point;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th- and 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Continuous extension over one accepted step `[t0, t0 + h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    pub coeffs: [Point; 5],
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> Point {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = self.coeffs;
        r1 + (r2 + (r3 + (r4 + r5 * theta1) * theta) * theta1) * theta
    }

    pub fn start(&self) -> Point {
        self.coeffs[0]
    }

    pub fn end(&self) -> Point {
        self.coeffs[0] + self.coeffs[1]
    }
}

pub(crate) struct StepResult {
    pub y1: Point,
    pub k7: Point,
    pub err: Point,
    pub dense: [Point; 5],
}

/// One Dormand–Prince step of length `h` from `y0` with `k1 = F(y0)`.
/// Returns `None` when any stage evaluates to a non-finite velocity.
pub(crate) fn dp_step(field: &FieldDef, y0: Point, k1: Point, h: f64) -> Option<StepResult> {
    let f = |p: Point| -> Option<Point> {
        let (a, b) = field.eval(p.x, p.y);
        let v = Point::new(a, b);
        v.is_finite().then_some(v)
    };
    let k2 = f(y0 + k1 * (h * A21))?;
    let k3 = f(y0 + (k1 * A31 + k2 * A32) * h)?;
    let k4 = f(y0 + (k1 * A41 + k2 * A42 + k3 * A43) * h)?;
    let k5 = f(y0 + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h)?;
    let k6 = f(y0 + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h)?;
    let y1 = y0 + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * h;
    let k7 = f(y1)?;
    let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
    let ydiff = y1 - y0;
    let bspl = k1 * h - ydiff;
    let dense = [y0, ydiff, bspl, ydiff - k7 * h - bspl, (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * h];
    Some(StepResult { y1, k7, err, dense })
}

pub(crate) enum Advance {
    Step(DenseSegment),
    Blowup,
    StepLimit,
}

/// Adaptive driver that hands out accepted steps one at a time.
pub(crate) struct Stepper<'a> {
    field: &'a FieldDef,
    cfg: IntegratorConfig,
    pub t: f64,
    pub y: Point,
    pub k1: Point,
    h: f64,
    pub attempts: usize,
    pub accepted: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(field: &'a FieldDef, x0: Point, cfg: &IntegratorConfig) -> Option<Self> {
        let (a, b) = field.eval(x0.x, x0.y);
        let k1 = Point::new(a, b);
        if !k1.is_finite() || !x0.is_finite() {
            return None;
        }
        Some(Self { field, cfg: *cfg, t: 0.0, y: x0, k1, h: cfg.h_init, attempts: 0, accepted: 0 })
    }

    /// Takes one accepted step, never past `t_limit`.
    pub fn advance(&mut self, t_limit: f64) -> Advance {
        let mut rejected = false;
        loop {
            if self.attempts >= self.cfg.max_steps {
                return Advance::StepLimit;
            }
            self.attempts += 1;
            let remaining = t_limit - self.t;
            let mut h = self.h.min(self.cfg.h_max);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h <= f64::EPSILON * self.t.abs().max(1.0) {
                return Advance::Blowup;
            }
            let Some(step) = dp_step(self.field, self.y, self.k1, h) else {
                self.h = 0.25 * h;
                rejected = true;
                continue;
            };
            let err = self.error_norm(self.y, step.y1, step.err);
            if err <= 1.0 {
                let fac = if err == 0.0 { FAC_MAX } else { (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX) };
                let fac = if rejected { fac.min(1.0) } else { fac };
                let seg = DenseSegment { t0: self.t, h, coeffs: step.dense };
                self.t = if last { t_limit } else { self.t + h };
                self.y = step.y1;
                self.k1 = step.k7;
                self.accepted += 1;
                // keep the proposed size unless this was a truncated final step
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
                if self.y.norm() > super::BLOWUP_NORM {
                    return Advance::Blowup;
                }
                return Advance::Step(seg);
            }
            self.h = h * (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            rejected = true;
        }
    }

    fn error_norm(&self, y0: Point, y1: Point, e: Point) -> f64 {
        let sx = self.cfg.atol + self.cfg.rtol * y0.x.abs().max(y1.x.abs());
        let sy = self.cfg.atol + self.cfg.rtol * y0.y.abs().max(y1.y.abs());
        (((e.x / sx).powi(2) + (e.y / sy).powi(2)) * 0.5).sqrt()
    }
}
