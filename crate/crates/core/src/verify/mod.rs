//! Certification of the standing hypotheses `D > 0`, `T ≤ 0` and "no real
//! positive eigenvalue" over a rectangle, plus the pointwise criteria,
//! critical-point search and injectivity probes built on the same jets.
//!
//! Boxes are processed breadth-first in a fixed quadrant order, so reports
//! are deterministic. A box is accepted only when its interval enclosure
//! proves the property; a failing box has its centre evaluated, and a
//! pointwise violation there ends the search with a witness.

mod criteria;
mod critical;
mod injectivity;

pub use criteria::{in_closure_t_minus, trace_vanishes_near, trace_vanishes_on, ClosureConfig, ClosureReport, Decision, TraceNearReport};
pub use critical::{find_critical_points, CriticalConfig, CriticalPoints};
pub use injectivity::{injectivity_falsify, Collision, InjectivityReport};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{FieldDef, IntervalJet, JetSample};
use crate::geom::Region;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Property {
    DetPositive,
    TraceNonpositive,
    NoRealPositiveEig,
}

impl Property {
    pub const ALL: [Property; 3] = [Property::DetPositive, Property::TraceNonpositive, Property::NoRealPositiveEig];

    /// Certified margin of the box, if the enclosure proves the property.
    /// For the eigenvalue test the margin is `D_lo` on the real branch and
    /// `D_lo − max T²/4` on the complex branch.
    fn box_margin(self, jet: &IntervalJet, tol: f64) -> Option<f64> {
        let (t, d) = (jet.trace, jet.det);
        match self {
            Property::DetPositive => (d.lo() > 0.0).then_some(d.lo()),
            Property::TraceNonpositive => (t.hi() <= tol).then_some(-t.hi()),
            Property::NoRealPositiveEig => {
                let real_branch = (t.hi() <= tol && d.lo() > 0.0).then_some(d.lo());
                let t2 = t.powi(2);
                // D − T²/4 > 0 rules out real eigenvalues altogether
                let complex = d.lo() - 0.25 * t2.hi() * (1.0 + 4.0 * f64::EPSILON);
                let complex_branch = (complex > 0.0).then_some(complex);
                match (real_branch, complex_branch) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                }
            }
        }
    }

    /// Pointwise check; the violation margin is positive when violated.
    pub fn violation(self, jet: &JetSample, tol: f64) -> Option<f64> {
        match self {
            Property::DetPositive => (jet.det <= 0.0).then_some(-jet.det),
            Property::TraceNonpositive => (jet.trace > tol).then_some(jet.trace),
            Property::NoRealPositiveEig => jet.has_real_positive_eigenvalue(tol).then_some(jet.eig_re.1),
        }
    }

    /// Pointwise margin by which the property holds (negative if it fails).
    pub fn sample_margin(self, jet: &JetSample) -> f64 {
        match self {
            Property::DetPositive => jet.det,
            Property::TraceNonpositive => -jet.trace,
            Property::NoRealPositiveEig => {
                if jet.trace * jet.trace >= 4.0 * jet.det {
                    -jet.eig_re.1
                } else {
                    jet.det - 0.25 * jet.trace * jet.trace
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertStatus {
    Certified,
    SampledOk,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub max_depth: u32,
    pub tol: f64,
    /// Hard cap on boxes per property; boxes left over count as unresolved.
    pub max_boxes: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { max_depth: 12, tol: 1e-12, max_boxes: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub property: Property,
    pub status: CertStatus,
    pub region: Region,
    pub witness: Option<JetSample>,
    pub boxes_processed: usize,
    pub boxes_certified: usize,
    /// Infimum of the certified margins (e.g. the lower bound of `D`).
    pub min_margin: Option<f64>,
    /// Fraction of the region's area left without a certificate.
    pub unresolved_fraction: f64,
    pub samples: usize,
    pub min_sampled_margin: Option<f64>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn is_certified(&self) -> bool {
        self.status == CertStatus::Certified
    }
}

/// Runs all three properties over `region`.
pub fn verify_hypotheses(field: &FieldDef, region: &Region, cfg: &VerifyConfig) -> Result<Vec<VerificationReport>> {
    Ok(Property::ALL.iter().map(|&p| verify_property(field, region, p, cfg)).collect())
}

/// True when every report is `CERTIFIED`.
pub fn all_certified(reports: &[VerificationReport]) -> bool {
    reports.iter().all(VerificationReport::is_certified)
}

pub fn verify_property(field: &FieldDef, region: &Region, property: Property, cfg: &VerifyConfig) -> VerificationReport {
    let mut rep = VerificationReport {
        property,
        status: CertStatus::Certified,
        region: *region,
        witness: None,
        boxes_processed: 0,
        boxes_certified: 0,
        min_margin: None,
        unresolved_fraction: 0.0,
        samples: 0,
        min_sampled_margin: None,
        notes: Vec::new(),
    };
    let total_area = region.area();
    let mut unresolved_area = 0.0;
    let mut enclosure_failures = 0usize;
    let mut level = vec![*region];
    let mut depth = 0;
    while !level.is_empty() {
        let mut next = Vec::new();
        for (i, b) in level.iter().enumerate() {
            if rep.boxes_processed >= cfg.max_boxes {
                unresolved_area += level[i..].iter().map(Region::area).sum::<f64>();
                rep.notes.push(format!("box budget of {} exhausted", cfg.max_boxes));
                next.clear();
                break;
            }
            rep.boxes_processed += 1;
            let margin = match field.interval_jet(b) {
                Ok(jet) => property.box_margin(&jet, cfg.tol),
                Err(_) => {
                    enclosure_failures += 1;
                    None
                }
            };
            if let Some(m) = margin {
                rep.boxes_certified += 1;
                rep.min_margin = Some(rep.min_margin.map_or(m, |old: f64| old.min(m)));
                continue;
            }
            let probes: Vec<_> =
                if depth >= cfg.max_depth { std::iter::once(b.center()).chain(b.corners()).collect() } else { vec![b.center()] };
            for p in probes {
                let Ok(jet) = field.jet(p) else { continue };
                rep.samples += 1;
                let m = property.sample_margin(&jet);
                rep.min_sampled_margin = Some(rep.min_sampled_margin.map_or(m, |old: f64| old.min(m)));
                if property.violation(&jet, cfg.tol).is_some() {
                    rep.status = CertStatus::Violated;
                    rep.witness = Some(jet);
                    return finish(rep);
                }
            }
            if depth >= cfg.max_depth {
                unresolved_area += b.area();
            } else {
                next.extend(b.quadrants());
            }
        }
        level = next;
        depth += 1;
    }
    rep.unresolved_fraction = unresolved_area / total_area;
    if unresolved_area > 0.0 {
        rep.status = CertStatus::SampledOk;
        rep.notes.push(format!(
            "{:.3e} of the area has no certificate at depth {}; every sample satisfied the property",
            rep.unresolved_fraction, cfg.max_depth
        ));
    }
    if enclosure_failures > 0 {
        rep.notes.push(format!("{enclosure_failures} boxes had non-finite enclosures and were split"));
    }
    finish(rep)
}

fn finish(mut rep: VerificationReport) -> VerificationReport {
    if rep.status == CertStatus::Violated {
        rep.unresolved_fraction = 0.0;
        rep.notes.push("violation found at a sampled point; search stopped".into());
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_field;
    use crate::geom::Point;

    fn square(h: f64) -> Region {
        Region::square(Point::ORIGIN, h).unwrap()
    }

    fn status(reports: &[VerificationReport], p: Property) -> &VerificationReport {
        reports.iter().find(|r| r.property == p).unwrap()
    }

    #[test]
    fn cubic_is_certified_with_unit_determinant() {
        let reps = verify_hypotheses(&FieldDef::cubic_damped(), &square(5.0), &VerifyConfig::default()).unwrap();
        assert!(all_certified(&reps), "{reps:#?}");
        assert_eq!(status(&reps, Property::DetPositive).min_margin, Some(1.0));
        assert_eq!(status(&reps, Property::TraceNonpositive).min_margin, Some(0.0));
    }

    #[test]
    fn identity_field_violates_trace() {
        let f = parse_field("P = x ; Q = y", &Default::default()).unwrap();
        let reps = verify_hypotheses(&f, &square(1.0), &VerifyConfig::default()).unwrap();
        let tr = status(&reps, Property::TraceNonpositive);
        assert_eq!(tr.status, CertStatus::Violated);
        let w = tr.witness.unwrap();
        assert_eq!(w.trace, 2.0);
        assert!(Property::TraceNonpositive.violation(&w, 1e-12).unwrap() > 0.5e-12);
        assert_eq!(status(&reps, Property::NoRealPositiveEig).status, CertStatus::Violated);
        assert_eq!(status(&reps, Property::DetPositive).status, CertStatus::Certified);
    }

    #[test]
    fn bump_is_certified_on_three_box() {
        let reps = verify_hypotheses(&FieldDef::bump_annulus(), &square(3.0), &VerifyConfig::default()).unwrap();
        assert!(all_certified(&reps), "{reps:#?}");
        assert!(status(&reps, Property::DetPositive).min_margin.unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn bump_certificate_agrees_with_dense_sampling() {
        let f = FieldDef::bump_annulus();
        let n = 400;
        for i in 0..=n {
            for j in 0..=n {
                let p = square(3.0).lerp(i as f64 / n as f64, j as f64 / n as f64);
                let jet = f.jet(p).unwrap();
                assert!(jet.det > 0.0 && jet.trace <= 0.0, "{p}");
            }
        }
    }

    #[test]
    fn determinant_sign_change_is_caught() {
        let f = parse_field("P = x^2 ; Q = y", &Default::default()).unwrap();
        let rep = verify_property(&f, &square(2.0), Property::DetPositive, &VerifyConfig::default());
        assert_eq!(rep.status, CertStatus::Violated);
        assert!(rep.witness.unwrap().det <= 0.0);
    }

    #[test]
    fn degenerate_determinant_is_violated() {
        // P_x Q_y - P_y Q_x = 0 everywhere
        let f = parse_field("P = x + y ; Q = x + y", &Default::default()).unwrap();
        let rep = verify_property(&f, &square(1.0), Property::DetPositive, &VerifyConfig::default());
        assert_eq!(rep.status, CertStatus::Violated);
        assert_eq!(rep.witness.unwrap().det, 0.0);
    }

    #[test]
    fn sampled_ok_when_depth_runs_out() {
        // T = -(y - x)^2 is nonpositive but the natural extension over a box
        // is [-(w)^2, +something], never certified near the diagonal.
        let f = parse_field("P = -x^3/3 + x^2*y - x*y^2 ; Q = 0*x", &Default::default()).unwrap();
        let cfg = VerifyConfig { max_depth: 5, ..Default::default() };
        let rep = verify_property(&f, &square(1.0), Property::TraceNonpositive, &cfg);
        assert_eq!(rep.status, CertStatus::SampledOk);
        assert!(rep.unresolved_fraction > 0.0 && rep.unresolved_fraction < 0.5);
        assert!(!rep.notes.is_empty());
    }

    #[test]
    fn certification_is_monotone_under_restriction() {
        let f = FieldDef::bump_annulus();
        let cfg = VerifyConfig::default();
        for sub in [Region::new(0.2, 1.7, -0.4, 2.9).unwrap(), Region::new(-3.0, -1.0, -3.0, 0.0).unwrap()] {
            let reps = verify_hypotheses(&f, &sub, &cfg).unwrap();
            assert!(all_certified(&reps));
        }
    }

    #[test]
    fn eigen_box_test_rejects_real_positive_root() {
        // T = -1, D = -1: eigenvalues (-1 ± √5)/2, one of them positive
        let f = parse_field("P = -x + y ; Q = x", &Default::default()).unwrap();
        let rep = verify_property(&f, &square(1.0), Property::NoRealPositiveEig, &VerifyConfig::default());
        assert_eq!(rep.status, CertStatus::Violated);
        assert!((rep.witness.unwrap().eig_re.1 - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
    }
}
