//! Poincaré return map on a ray, cycle detection and the period-annulus edge.
use planar_stability::poincare::{annulus_boundary, detect_cycles, return_profile, AnnulusConfig, PoincareConfig, Section};
use planar_stability::{FieldDef, Point};

fn main() -> planar_stability::Result<()> {
    let bump = FieldDef::bump_annulus();
    let section = Section::positive_x_axis();
    let cfg = PoincareConfig::default();

    for s in return_profile(&bump, &section, (0.5, 2.5), 9, &cfg)? {
        println!("r = {:.3} -> {:.9}  (displacement {:+.3e})", s.r_in, s.r_out, s.displacement().unwrap_or(f64::NAN));
    }

    let cycles = detect_cycles(&bump, &section, (0.1, 3.0), &cfg)?;
    println!("neutral bands: {:?}", cycles.neutral_bands);
    println!("isolated cycles: {:?}", cycles.isolated);

    let edge = annulus_boundary(&bump, Point::ORIGIN, &AnnulusConfig::default())?;
    println!("period annulus ends at r = {:.6} (band {:?})", edge.radius, edge.band);
    Ok(())
}
