//! The trichotomy: global center, globally asymptotically stable point, or
//! center inside a globally attracting compact set.
//!
//! With `D > 0` and `T ≤ 0` certified on a region, the decision at a
//! critical point `O` reduces to whether `O` lies in the closure of
//! `{T < 0}`. If it does, `O` is globally asymptotically stable. If not,
//! `T` vanishes near `O` and `O` is a center: a global one for analytic
//! fields, otherwise the outer cycle of its period annulus bounds a compact
//! global attractor.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::field::FieldDef;
use crate::flow::{integrate, integrate_until_event, Event, EventStatus, IntegratorConfig};
use crate::geom::{Point, Region};
use crate::hamiltonian::{hessian_extremum, HessianReport};
use crate::poincare::{annulus_boundary, return_map, AnnulusBoundary, AnnulusConfig, ReturnStatus};
use crate::verify::{
    in_closure_t_minus, verify_hypotheses, CertStatus, ClosureConfig, ClosureReport, Decision, VerificationReport, VerifyConfig,
};

/// A critical point must satisfy `|F(O)| <` this.
pub const CRITICAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    GlobalCenter,
    GasPoint,
    CenterWithCompactAttractor,
    HypothesesNotCertified,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::GlobalCenter => "GLOBAL_CENTER",
            Verdict::GasPoint => "GAS_POINT",
            Verdict::CenterWithCompactAttractor => "CENTER_WITH_COMPACT_ATTRACTOR",
            Verdict::HypothesesNotCertified => "HYPOTHESES_NOT_CERTIFIED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasProbeConfig {
    /// Radius of the target ball around `O`.
    pub rho: f64,
    /// Time budget per orbit.
    pub t_max: f64,
    pub integrator: IntegratorConfig,
}

impl Default for GasProbeConfig {
    fn default() -> Self {
        Self {
            rho: 1e-2,
            t_max: 1e5,
            integrator: IntegratorConfig { max_steps: 50_000_000, ..IntegratorConfig::with_tolerances(1e-8, 1e-12) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GasProbe {
    pub radii: Vec<f64>,
    pub n_angles: usize,
    pub rho: f64,
    pub converged: usize,
    pub total: usize,
    /// Largest entry time among converged orbits.
    pub max_entry_time: Option<f64>,
    /// Starts that did not enter the ball within budget.
    pub failures: Vec<Point>,
}

impl GasProbe {
    pub fn all_converged(&self) -> bool {
        self.converged == self.total
    }
}

/// Launches an orbit from every `(radius, angle)` start around `o` and
/// counts those entering the ball of radius `cfg.rho`. Purely empirical.
pub fn verify_gas_empirically(field: &FieldDef, o: Point, radii: &[f64], n_angles: usize, cfg: &GasProbeConfig) -> Result<GasProbe> {
    ensure(radii.iter().all(|r| *r > 0.0 && r.is_finite()), || format!("radii must be positive, got {radii:?}"))?;
    ensure(n_angles >= 1, || "n_angles must be at least 1".into())?;
    ensure(cfg.rho > 0.0, || format!("rho must be positive, got {}", cfg.rho))?;
    let mut probe =
        GasProbe { radii: radii.to_vec(), n_angles, rho: cfg.rho, converged: 0, total: 0, max_entry_time: None, failures: Vec::new() };
    let ball = Event::EnterBall { center: o, radius: cfg.rho };
    for &r in radii {
        for k in 0..n_angles {
            let start = o + Point::from_polar(r, std::f64::consts::TAU * k as f64 / n_angles as f64);
            probe.total += 1;
            let out = integrate_until_event(field, start, ball, cfg.t_max, &cfg.integrator)?;
            if out.status == EventStatus::Found {
                probe.converged += 1;
                probe.max_entry_time = Some(probe.max_entry_time.map_or(out.time, |t: f64| t.max(out.time)));
            } else {
                probe.failures.push(start);
            }
        }
    }
    Ok(probe)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub verify: VerifyConfig,
    pub closure: ClosureConfig,
    /// `r_max` is replaced by the distance from `O` to the region edge.
    pub annulus: AnnulusConfig,
    pub gas: GasProbeConfig,
    /// GAS probe radii as fractions of the distance from `O` to the region edge.
    pub gas_radius_fractions: Vec<f64>,
    pub gas_angles: usize,
    /// Vertices of the boundary-cycle polyline.
    pub cycle_points: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            verify: VerifyConfig::default(),
            closure: ClosureConfig::default(),
            annulus: AnnulusConfig::default(),
            gas: GasProbeConfig::default(),
            gas_radius_fractions: vec![0.1, 0.5, 1.0],
            gas_angles: 16,
            cycle_points: 256,
        }
    }
}

/// The compact attractor `M`: the closed region bounded by `cycle`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attractor {
    pub radius: f64,
    pub boundary: AnnulusBoundary,
    pub period: f64,
    /// One revolution of the boundary orbit, starting on the section.
    pub cycle: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Evidence {
    pub hypotheses: Vec<VerificationReport>,
    pub closure: Option<ClosureReport>,
    pub hessian: Option<HessianReport>,
    pub attractor: Option<Attractor>,
    pub gas_probe: Option<GasProbe>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub point: Point,
    /// Every claim holds on this region only.
    pub region: Region,
    pub analytic_used: bool,
    /// Set for a center whose annulus reached the region edge without an
    /// inward regime: global only as far as the region goes.
    pub region_limited: bool,
    pub evidence: Evidence,
    pub diagnostics: Vec<String>,
}

impl Classification {
    /// The `T ≡ 0 near O` outcome, if the closure test reached it.
    pub fn trace_near(&self) -> Option<Decision> {
        self.evidence.closure.as_ref().and_then(|c| c.trace_near.as_ref()).map(|t| t.decision)
    }

    pub fn closure(&self) -> Option<Decision> {
        self.evidence.closure.as_ref().map(|c| c.decision)
    }

    pub fn attractor_radius(&self) -> Option<f64> {
        self.evidence.attractor.as_ref().map(|a| a.radius)
    }
}

pub fn classify_critical_point(field: &FieldDef, o: Point, region: &Region, cfg: &ClassifyConfig) -> Result<Classification> {
    ensure(region.contains(o), || format!("{o} lies outside {region}"))?;
    let residual = field.eval_velocity(o)?.norm();
    if residual >= CRITICAL_TOL {
        return Err(Error::NotCriticalPoint { point: o, residual });
    }
    let reach = region.inner_radius(o);
    let mut out = Classification {
        verdict: Verdict::HypothesesNotCertified,
        point: o,
        region: *region,
        analytic_used: false,
        region_limited: false,
        evidence: Evidence::default(),
        diagnostics: Vec::new(),
    };

    out.evidence.hypotheses = verify_hypotheses(field, region, &cfg.verify)?;
    for rep in &out.evidence.hypotheses {
        match rep.status {
            CertStatus::Certified => {}
            CertStatus::Violated => {
                let at = rep.witness.as_ref().map(|w| format!(" at {}", w.point)).unwrap_or_default();
                out.diagnostics.push(format!("{:?} violated{at}", rep.property));
            }
            CertStatus::SampledOk => out
                .diagnostics
                .push(format!("{:?} holds on samples but {:.3e} of the region is uncertified", rep.property, rep.unresolved_fraction)),
        }
    }
    if !out.diagnostics.is_empty() {
        return Ok(out);
    }

    let closure = in_closure_t_minus(field, o, &cfg.closure)?;
    let decision = closure.decision;
    out.evidence.closure = Some(closure);
    match decision {
        Decision::Indeterminate => {
            out.diagnostics.push(format!("membership of {o} in the closure of {{T < 0}} is indeterminate"));
            return Ok(out);
        }
        Decision::True => {
            let radii: Vec<f64> = cfg.gas_radius_fractions.iter().map(|f| f * reach).collect();
            let probe = verify_gas_empirically(field, o, &radii, cfg.gas_angles, &cfg.gas)?;
            if !probe.all_converged() {
                out.diagnostics.push(format!(
                    "{} of {} probe orbits did not enter the {:e}-ball within t = {:e}",
                    probe.total - probe.converged,
                    probe.total,
                    probe.rho,
                    cfg.gas.t_max
                ));
            }
            out.evidence.gas_probe = Some(probe);
            out.verdict = Verdict::GasPoint;
            return Ok(out);
        }
        Decision::False => {}
    }

    out.evidence.hessian = Some(hessian_extremum(field, o)?);
    if field.analytic {
        out.analytic_used = true;
        out.verdict = Verdict::GlobalCenter;
        return Ok(out);
    }
    let mut annulus = AnnulusConfig { r_max: reach, ..cfg.annulus };
    let found = loop {
        match annulus_boundary(field, o, &annulus) {
            Err(Error::NoPeriodAnnulus { r }) if r > cfg.closure.r_min => annulus.r_max = r / 2.0,
            other => break other,
        }
    };
    match found {
        Ok(boundary) => {
            out.evidence.attractor = Some(boundary_cycle(field, boundary, &annulus, cfg.cycle_points)?);
            out.verdict = Verdict::CenterWithCompactAttractor;
            out.diagnostics.push(format!("T is not identically zero on {region}; the attractor is established on this region only"));
        }
        Err(Error::NoInwardRegime { r_max }) => {
            out.verdict = Verdict::GlobalCenter;
            out.region_limited = true;
            out.diagnostics.push(format!("returns stay neutral up to r = {r_max}; field is not declared analytic"));
        }
        Err(Error::NoPeriodAnnulus { r }) => {
            out.diagnostics.push(format!("no neutral returns resolved down to r = {r}"));
        }
        Err(e) => return Err(e),
    }
    Ok(out)
}

fn boundary_cycle(field: &FieldDef, boundary: AnnulusBoundary, cfg: &AnnulusConfig, n: usize) -> Result<Attractor> {
    let sample = return_map(field, &boundary.section, boundary.radius, &cfg.poincare)?;
    if sample.status != ReturnStatus::Ok {
        return Err(Error::Integration(format!("boundary orbit at r = {} did not return", boundary.radius)));
    }
    let start = boundary.section.point_at(boundary.radius);
    let traj = integrate(field, start, sample.flight_time, &cfg.poincare.integrator)?;
    let n = n.max(3);
    // the last sample closes the loop and repeats the first
    let cycle = traj.resample(n).into_iter().take(n).map(|(_, p)| p).collect();
    Ok(Attractor { radius: boundary.radius, boundary, period: sample.flight_time, cycle })
}
