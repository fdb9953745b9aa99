//! Parsing an expression field and evaluating it with derivatives and over boxes.
use planar_stability::field::{parse_field, Params};
use planar_stability::{Point, Region};

fn main() -> planar_stability::Result<()> {
    let mut params = Params::new();
    params.insert("k".into(), 0.3);
    let field = parse_field("P = y - k*x*exp(-x^2) ; Q = -sin(x) - k*y^3", &params)?;

    let j = field.jet(Point::new(0.4, -1.2))?;
    println!("F = {}", j.value);
    println!("J = {:?}", j.jac);
    println!("T = {:.6}, D = {:.6}, Re λ = {:?}", j.trace, j.det, j.eig_re);

    let enc = field.interval_jet(&Region::new(0.3, 0.5, -1.3, -1.1)?)?;
    println!("over the box: T in {:?}, D in {:?}", enc.trace, enc.det);
    Ok(())
}
