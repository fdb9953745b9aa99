//! The trichotomy on the three built-in systems.
use planar_stability::classify::{classify_critical_point, ClassifyConfig};
use planar_stability::{FieldDef, Point, Region};

fn main() -> planar_stability::Result<()> {
    let region = Region::new(-5.0, 5.0, -5.0, 5.0)?;
    let cfg = ClassifyConfig::default();
    for field in [FieldDef::linear_rotation(), FieldDef::cubic_damped(), FieldDef::bump_annulus()] {
        let c = classify_critical_point(&field, Point::ORIGIN, &region, &cfg)?;
        println!("{:<16} {}", field.name, c.verdict.name());
        if let Some(a) = &c.evidence.attractor {
            println!("  attractor radius {:.6}, boundary period {:.6}", a.radius, a.period);
        }
        if let Some(g) = &c.evidence.gas_probe {
            println!("  {}/{} probe orbits reached radius {} (max time {:?})", g.converged, g.total, g.rho, g.max_entry_time);
        }
        if let Some(h) = &c.evidence.hessian {
            println!("  Hessian of H: {:?}, det {}", h.kind, h.det);
        }
        for d in &c.diagnostics {
            println!("  note: {d}");
        }
    }
    Ok(())
}
