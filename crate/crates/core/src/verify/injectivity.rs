//! Empirical search for two distinct points with the same image.

use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::critical::newton_to;
use crate::error::{ensure, Result};
use crate::field::FieldDef;
use crate::geom::{Point, Region};

const CANDIDATES: usize = 64;
const IMAGE_TOL: f64 = 1e-9;
const MIN_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Collision {
    pub p: Point,
    pub q: Point,
    pub image_gap: f64,
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectivityReport {
    pub n_pairs: usize,
    pub seed: u64,
    pub candidates_refined: usize,
    /// Smallest `|F(p) − F(q)|` among the raw samples.
    pub min_sampled_gap: f64,
    pub collision: Option<Collision>,
}

struct Candidate {
    gap: f64,
    p: Point,
    q: Point,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.gap.total_cmp(&other.gap).is_eq()
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.gap.total_cmp(&other.gap)
    }
}

/// Samples `n_pairs` random pairs in `region`, keeps those with the closest
/// images and refines each by solving `F(q') = F(p)` from `q`. A collision
/// has `|F(p) − F(q')| < 1e-9` and `|p − q'| > 1e-6`. Deterministic in `seed`.
pub fn injectivity_falsify(field: &FieldDef, region: &Region, n_pairs: usize, seed: u64) -> Result<InjectivityReport> {
    ensure(n_pairs >= 1, || "n_pairs must be at least 1".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: BinaryHeap<Candidate> = BinaryHeap::with_capacity(CANDIDATES + 1);
    let mut min_gap = f64::INFINITY;
    let draw = |rng: &mut ChaCha8Rng| region.lerp(rng.gen::<f64>(), rng.gen::<f64>());
    for _ in 0..n_pairs {
        let p = draw(&mut rng);
        let q = draw(&mut rng);
        if p.distance(q) <= MIN_SEPARATION {
            continue;
        }
        let (Ok(fp), Ok(fq)) = (field.eval_velocity(p), field.eval_velocity(q)) else { continue };
        let gap = fp.distance(fq);
        min_gap = min_gap.min(gap);
        if best.len() < CANDIDATES || best.peek().is_some_and(|w| gap < w.gap) {
            best.push(Candidate { gap, p, q });
            if best.len() > CANDIDATES {
                best.pop();
            }
        }
    }
    let candidates = best.into_sorted_vec();
    let mut report = InjectivityReport { n_pairs, seed, candidates_refined: 0, min_sampled_gap: min_gap, collision: None };
    for c in &candidates {
        report.candidates_refined += 1;
        let fp = field.eval_velocity(c.p)?;
        let Some((q, _)) = newton_to(field, c.q, fp, 100, IMAGE_TOL) else { continue };
        let image_gap = field.eval_velocity(q)?.distance(fp);
        let separation = q.distance(c.p);
        if image_gap < IMAGE_TOL && separation > MIN_SEPARATION && region.contains(q) {
            report.collision = Some(Collision { p: c.p, q, image_gap, separation });
            break;
        }
    }
    Ok(report)
}
