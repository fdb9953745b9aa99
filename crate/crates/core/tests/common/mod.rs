#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use planar_stability::field::parse_field;
use planar_stability::flow::Polygon;
use planar_stability::{FieldDef, Point};
use rand::Rng;

pub fn planar(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planar")).args(args).arg("--out").arg(out).env_remove("PLANAR_OUT").output().expect("spawn planar")
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Star-shaped polygon with sorted, jittered angles around a random center.
pub fn random_star_polygon(rng: &mut impl Rng, center_box: f64) -> Polygon {
    let c = Point::new(rng.gen_range(-center_box..center_box), rng.gen_range(-center_box..center_box));
    let n = rng.gen_range(6..20);
    let step = std::f64::consts::TAU / n as f64;
    let verts = (0..n)
        .map(|k| {
            let th = step * (k as f64 + rng.gen_range(-0.3..0.3));
            c + Point::from_polar(rng.gen_range(0.2..1.0), th)
        })
        .collect();
    Polygon::new(verts).unwrap()
}

/// `ẋ = y − a x − b x³`, `ẏ = −x − c y − d y³` with non-negative coefficients:
/// `T = −a − 3bx² − c − 3dy² ≤ 0` and `D = (a + 3bx²)(c + 3dy²) + 1 ≥ 1`.
pub fn random_certified_field(rng: &mut impl Rng) -> FieldDef {
    let mut coef = || if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) };
    let (a, b, c, d) = (coef(), coef(), coef(), coef());
    parse_field(&format!("P = y - {a:?}*x - {b:?}*x^3 ; Q = -x - {c:?}*y - {d:?}*y^3"), &Default::default()).unwrap()
}

/// ρ' = −ρ α(ρ) over one revolution of the annulus field (θ̇ = −1), with
/// α(ρ) = exp(−w/(ρ − 1)) written out here, by fixed-step RK4.
pub fn radial_oracle_return(r0: f64, width: f64) -> f64 {
    let alpha = |r: f64| if r <= 1.0 { 0.0 } else { (-width / (r - 1.0)).exp() };
    let f = |r: f64| -r * alpha(r);
    let n = 20_000;
    let h = std::f64::consts::TAU / n as f64;
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
