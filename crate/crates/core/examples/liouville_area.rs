//! Area evolution of transported polygons against the integral of the trace.
use planar_stability::flow::{liouville_residual, transport_polygon, LiouvilleConfig, Polygon, TransportConfig};
use planar_stability::{FieldDef, Point, Region};

fn main() -> planar_stability::Result<()> {
    let cfg = LiouvilleConfig::default();
    let square = Polygon::rect(&Region::new(-1.0, 1.0, -1.0, 1.0)?);
    let off_center = Polygon::regular(Point::new(0.8, 0.3), 0.6, 40)?;
    for field in [FieldDef::linear_rotation(), FieldDef::cubic_damped(), FieldDef::bump_annulus()] {
        for (name, poly) in [("square", &square), ("disk", &off_center)] {
            let r = liouville_residual(&field, poly, &cfg)?;
            println!("{:<16} {name:<7} dA/dt = {:>12.8}  ∬T = {:>12.8}  residual {:.1e}", field.name, r.da_dt, r.integral_t, r.residual);
        }
    }

    let cubic = FieldDef::cubic_damped();
    let mut poly = square.clone();
    for step in 1..=4 {
        poly = transport_polygon(&cubic, &poly, 0.5, &TransportConfig::default())?;
        println!("t = {:.1}: area {:.6} with {} vertices", 0.5 * step as f64, poly.area(), poly.len());
    }
    Ok(())
}
