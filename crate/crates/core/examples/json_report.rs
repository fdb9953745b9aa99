//! A classification wrapped in the versioned report envelope.
use planar_stability::classify::{classify_critical_point, ClassifyConfig};
use planar_stability::report::{Envelope, ReportKind};
use planar_stability::{FieldDef, Point, Region};

fn main() -> planar_stability::Result<()> {
    let field = FieldDef::linear_rotation();
    let region = Region::new(-2.0, 2.0, -2.0, 2.0)?;
    let c = classify_critical_point(&field, Point::ORIGIN, &region, &ClassifyConfig::default())?;
    print!("{}", Envelope::new(ReportKind::Classification, &field, &c).to_json()?);
    Ok(())
}
