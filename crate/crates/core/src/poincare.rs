//! Return maps on ray sections through a critical point.
//!
//! The displacement `g(r) = r_out − r` classifies each sampled orbit as
//! neutral (`|g| ≤ tol_fixed`, a cycle up to integrator noise), inward or
//! outward. Runs of neutral samples are period-annulus bands; sign changes
//! between inward and outward are isolated cycles.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::field::FieldDef;
pub use crate::flow::Section;
use crate::flow::{integrate_until_event, Event, EventStatus, IntegratorConfig, Sense};
use crate::geom::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareConfig {
    pub integrator: IntegratorConfig,
    /// Longest flight allowed before a return counts as not found.
    pub t_max: f64,
    pub grid_n: usize,
    pub tol_fixed: f64,
    /// Bisection stops once a bracket is this narrow.
    pub bracket_width: f64,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        Self { integrator: IntegratorConfig::default(), t_max: 1e3, grid_n: 64, tol_fixed: 1e-7, bracket_width: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReturnStatus {
    Ok,
    NotFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnSample {
    pub r_in: f64,
    /// `NaN` unless the status is `Ok`.
    pub r_out: f64,
    pub flight_time: f64,
    pub status: ReturnStatus,
}

impl ReturnSample {
    pub fn displacement(&self) -> Option<f64> {
        (self.status == ReturnStatus::Ok).then_some(self.r_out - self.r_in)
    }
}

/// First return to `section` from `section.point_at(r)`, in the rotation
/// sense of the field at the start point.
pub fn return_map(field: &FieldDef, section: &Section, r: f64, cfg: &PoincareConfig) -> Result<ReturnSample> {
    ensure(r > 0.0 && r.is_finite(), || format!("section parameter must be positive, got {r}"))?;
    let x0 = section.point_at(r);
    let event = Event::RayCrossing { section: *section, sense: Sense::Auto };
    let out = integrate_until_event(field, x0, event, cfg.t_max, &cfg.integrator)?;
    Ok(match out.status {
        EventStatus::Found => ReturnSample { r_in: r, r_out: section.param(out.state), flight_time: out.time, status: ReturnStatus::Ok },
        _ => ReturnSample { r_in: r, r_out: f64::NAN, flight_time: out.time, status: ReturnStatus::NotFound },
    })
}

/// Return samples on `n` evenly spaced parameters of `[lo, hi]`.
pub fn return_profile(
    field: &FieldDef,
    section: &Section,
    (lo, hi): (f64, f64),
    n: usize,
    cfg: &PoincareConfig,
) -> Result<Vec<ReturnSample>> {
    ensure(lo > 0.0 && hi > lo, || format!("need 0 < lo < hi, got [{lo}, {hi}]"))?;
    ensure(n >= 2, || "need at least two samples".into())?;
    (0..n).map(|i| return_map(field, section, lo + (hi - lo) * i as f64 / (n - 1) as f64, cfg)).collect()
}

/// CSV with header `r_in,r_out,flight_time`.
pub fn write_profile_csv<W: Write>(samples: &[ReturnSample], mut w: W) -> std::io::Result<()> {
    writeln!(w, "r_in,r_out,flight_time")?;
    for s in samples {
        writeln!(w, "{:?},{:?},{:?}", s.r_in, s.r_out, s.flight_time)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stability {
    Attracting,
    Repelling,
    SemiStable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolatedCycle {
    pub r: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub isolated: Vec<IsolatedCycle>,
    pub neutral_bands: Vec<(f64, f64)>,
    pub samples: Vec<ReturnSample>,
    pub not_found: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sign {
    Inward,
    Neutral,
    Outward,
}

fn classify(g: f64, tol: f64) -> Sign {
    if g > tol {
        Sign::Outward
    } else if g < -tol {
        Sign::Inward
    } else {
        Sign::Neutral
    }
}

fn stability(left: Option<Sign>, right: Option<Sign>) -> Stability {
    match (left, right) {
        (Some(Sign::Outward), Some(Sign::Inward)) => Stability::Attracting,
        (Some(Sign::Inward), Some(Sign::Outward)) => Stability::Repelling,
        _ => Stability::SemiStable,
    }
}

struct Probe<'a> {
    field: &'a FieldDef,
    section: &'a Section,
    cfg: &'a PoincareConfig,
}

impl Probe<'_> {
    fn sign(&self, r: f64) -> Result<Option<Sign>> {
        let s = return_map(self.field, self.section, r, self.cfg)?;
        Ok(s.displacement().map(|g| classify(g, self.cfg.tol_fixed)))
    }

    /// Narrows `[a, b]` where `a` has class `sa` and `b` does not; returns
    /// the final bracket. Samples without a return end the search.
    fn bisect(&self, mut a: f64, mut b: f64, sa: Sign) -> Result<(f64, f64)> {
        while (b - a).abs() > self.cfg.bracket_width {
            let m = 0.5 * (a + b);
            match self.sign(m)? {
                Some(s) if s == sa => a = m,
                Some(_) => b = m,
                None => break,
            }
        }
        Ok((a, b))
    }
}

/// Scans `g` on a grid over `r_range` and reports isolated cycles and
/// neutral bands, with band ends and crossings refined by bisection.
pub fn detect_cycles(field: &FieldDef, section: &Section, r_range: (f64, f64), cfg: &PoincareConfig) -> Result<CycleReport> {
    let samples = return_profile(field, section, r_range, cfg.grid_n, cfg)?;
    let probe = Probe { field, section, cfg };
    let valid: Vec<(f64, Sign)> = samples.iter().filter_map(|s| s.displacement().map(|g| (s.r_in, classify(g, cfg.tol_fixed)))).collect();
    let not_found = samples.len() - valid.len();
    let mut isolated = Vec::new();
    let mut bands = Vec::new();
    let mut i = 0;
    while i < valid.len() {
        let (r, s) = valid[i];
        if s == Sign::Neutral {
            let start = i;
            while i + 1 < valid.len() && valid[i + 1].1 == Sign::Neutral {
                i += 1;
            }
            let left = start.checked_sub(1).map(|k| valid[k]);
            let right = valid.get(i + 1).copied();
            if i > start {
                let lo = match left {
                    Some((rl, _)) => probe.bisect(r, rl, Sign::Neutral)?.0,
                    None => r,
                };
                let hi = match right {
                    Some((rr, _)) => probe.bisect(valid[i].0, rr, Sign::Neutral)?.0,
                    None => valid[i].0,
                };
                bands.push((lo, hi));
            } else {
                isolated.push(IsolatedCycle { r, stability: stability(left.map(|v| v.1), right.map(|v| v.1)) });
            }
        } else if let Some(&(rn, sn)) = valid.get(i + 1) {
            if sn != Sign::Neutral && sn != s {
                let (a, b) = probe.bisect(r, rn, s)?;
                isolated.push(IsolatedCycle { r: 0.5 * (a + b), stability: stability(Some(s), Some(sn)) });
            }
        }
        i += 1;
    }
    Ok(CycleReport { isolated, neutral_bands: bands, samples, not_found })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusConfig {
    pub poincare: PoincareConfig,
    pub r_max: f64,
    /// Scan points on `(0, r_max]`.
    pub scan_n: usize,
    /// Direction of the section ray, radians.
    pub angle: f64,
}

impl Default for AnnulusConfig {
    fn default() -> Self {
        Self { poincare: PoincareConfig { bracket_width: 1e-5, ..Default::default() }, r_max: 4.0, scan_n: 64, angle: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusBoundary {
    pub radius: f64,
    /// Last neutral and first inward parameter.
    pub band: (f64, f64),
    pub section: Section,
}

/// Outer edge of the period annulus around `center`: the parameter where
/// neutral returns give way to strictly inward ones.
pub fn annulus_boundary(field: &FieldDef, center: Point, cfg: &AnnulusConfig) -> Result<AnnulusBoundary> {
    ensure(cfg.r_max > 0.0 && cfg.scan_n >= 2, || "annulus scan needs r_max > 0 and at least two points".into())?;
    let section = Section::from_angle(center, cfg.angle);
    let probe = Probe { field, section: &section, cfg: &cfg.poincare };
    let mut last_neutral = None;
    for k in 1..=cfg.scan_n {
        let r = cfg.r_max * k as f64 / cfg.scan_n as f64;
        match probe.sign(r)? {
            Some(Sign::Neutral) => last_neutral = Some(r),
            Some(Sign::Inward) => {
                let Some(a) = last_neutral else {
                    return Err(Error::NoPeriodAnnulus { r });
                };
                let (a, b) = probe.bisect(a, r, Sign::Neutral)?;
                return Ok(AnnulusBoundary { radius: 0.5 * (a + b), band: (a, b), section });
            }
            Some(Sign::Outward) | None => {}
        }
    }
    Err(Error::NoInwardRegime { r_max: cfg.r_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BumpShape;
    use std::f64::consts::TAU;

    fn x_axis() -> Section {
        Section::positive_x_axis()
    }

    /// ρ' = −ρ α(ρ) over one revolution (θ̇ = −1 for the bump field), by
    /// classical RK4 with a fixed fine step.
    fn radial_oracle(shape: &BumpShape, r0: f64) -> f64 {
        let f = |r: f64| -r * shape.eval(r).0;
        let n = 200_000;
        let h = TAU / n as f64;
        let mut r = r0;
        for _ in 0..n {
            let k1 = f(r);
            let k2 = f(r + 0.5 * h * k1);
            let k3 = f(r + 0.5 * h * k2);
            let k4 = f(r + h * k3);
            r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        r
    }

    #[test]
    fn rotation_returns_in_one_period() {
        let s = return_map(&FieldDef::linear_rotation(), &x_axis(), 1.0, &PoincareConfig::default()).unwrap();
        assert_eq!(s.status, ReturnStatus::Ok);
        assert!((s.r_out - 1.0).abs() < 1e-8);
        assert!((s.flight_time - TAU).abs() < 1e-8);
    }

    #[test]
    fn bump_returns_match_the_radial_oracle() {
        let f = FieldDef::bump_annulus();
        let cfg = PoincareConfig::default();
        let inner = return_map(&f, &x_axis(), 0.5, &cfg).unwrap();
        assert!((inner.r_out - 0.5).abs() < 1e-8);
        let outer = return_map(&f, &x_axis(), 2.0, &cfg).unwrap();
        let oracle = radial_oracle(&BumpShape::ANNULUS, 2.0);
        assert!((outer.r_out - oracle).abs() < 1e-6, "{} vs {oracle}", outer.r_out);
        assert!((outer.flight_time - TAU).abs() < 1e-6);
    }

    #[test]
    fn bump_has_interior_band_and_no_outer_cycle() {
        let f = FieldDef::bump_annulus();
        let rep = detect_cycles(&f, &x_axis(), (0.1, 3.0), &PoincareConfig::default()).unwrap();
        assert_eq!(rep.not_found, 0);
        assert!(rep.isolated.is_empty(), "{:?}", rep.isolated);
        assert_eq!(rep.neutral_bands.len(), 1);
        let (lo, hi) = rep.neutral_bands[0];
        assert_eq!(lo, 0.1);
        assert!((hi - 1.0).abs() < 1e-3, "{hi}");
        // monotone return map, strictly inward beyond the band
        let ok: Vec<_> = rep.samples.iter().filter(|s| s.status == ReturnStatus::Ok).collect();
        assert!(ok.windows(2).all(|w| w[1].r_out > w[0].r_out));
        assert!(ok.iter().filter(|s| s.r_in > 1.001).all(|s| s.r_out < s.r_in));
    }

    #[test]
    fn rotation_band_covers_the_range() {
        let rep = detect_cycles(&FieldDef::linear_rotation(), &x_axis(), (0.1, 3.0), &PoincareConfig::default()).unwrap();
        assert_eq!(rep.neutral_bands, vec![(0.1, 3.0)]);
        assert!(rep.isolated.is_empty());
    }

    #[test]
    fn cubic_has_neither_cycles_nor_bands() {
        let f = FieldDef::cubic_damped();
        let rep = detect_cycles(&f, &x_axis(), (0.1, 3.0), &PoincareConfig { grid_n: 24, ..Default::default() }).unwrap();
        assert!(rep.isolated.is_empty() && rep.neutral_bands.is_empty());
        // energy (x² + y²)/2 strictly drops along each return
        assert!(rep.samples.iter().all(|s| s.r_out < s.r_in));
    }

    #[test]
    fn isolated_cycles_are_located_with_stability() {
        // ṙ = r(r² − 1)(4 − r²)/10, θ̇ = 1: r = 1 repels, r = 2 attracts
        let k = "0.1*(x^2 + y^2 - 1)*(4 - x^2 - y^2)";
        let src = format!("P = {k}*x - y ; Q = {k}*y + x");
        let f = crate::field::parse_field(&src, &Default::default()).unwrap();
        let cfg = PoincareConfig { grid_n: 16, ..Default::default() };
        let rep = detect_cycles(&f, &x_axis(), (0.5, 2.5), &cfg).unwrap();
        assert_eq!(rep.isolated.len(), 2, "{rep:?}");
        assert!((rep.isolated[0].r - 1.0).abs() < 1e-5);
        assert_eq!(rep.isolated[0].stability, Stability::Repelling);
        assert!((rep.isolated[1].r - 2.0).abs() < 1e-5);
        assert_eq!(rep.isolated[1].stability, Stability::Attracting);
        // reversed, r = 1 attracts; beyond r = 2 orbits blow up before returning
        let rep = detect_cycles(&f.reversed(), &x_axis(), (0.5, 1.9), &cfg).unwrap();
        let kinds: Vec<_> = rep.isolated.iter().map(|c| c.stability).collect();
        assert_eq!(kinds, vec![Stability::Attracting]);
        let rep = detect_cycles(&f.reversed(), &x_axis(), (2.1, 2.5), &cfg).unwrap();
        assert_eq!(rep.not_found, cfg.grid_n);
    }

    #[test]
    fn annulus_boundary_of_the_bump() {
        let f = FieldDef::bump_annulus();
        let b = annulus_boundary(&f, Point::ORIGIN, &AnnulusConfig::default()).unwrap();
        assert!((b.radius - 1.0).abs() < 1e-3, "{b:?}");
        assert!(b.band.1 - b.band.0 <= 1e-5);
    }

    #[test]
    fn annulus_boundary_tracks_the_onset() {
        let f = FieldDef::bump_annulus_with(BumpShape::new(2.0, 0.01).unwrap());
        let b = annulus_boundary(&f, Point::ORIGIN, &AnnulusConfig::default()).unwrap();
        assert!((b.radius - 2.0).abs() < 1e-3, "{b:?}");
    }

    #[test]
    fn rotation_has_no_inward_regime() {
        let err = annulus_boundary(&FieldDef::linear_rotation(), Point::ORIGIN, &AnnulusConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NoInwardRegime { .. }));
    }

    #[test]
    fn profile_csv() {
        let s = return_profile(&FieldDef::linear_rotation(), &x_axis(), (0.5, 1.0), 2, &PoincareConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r_in,r_out,flight_time\n0.5,"));
        assert_eq!(text.lines().count(), 3);
    }
}
