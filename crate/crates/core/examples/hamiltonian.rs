//! Reconstructing H for a trace-free field and checking it along an orbit.
use planar_stability::field::{parse_field, Params};
use planar_stability::flow::IntegratorConfig;
use planar_stability::hamiltonian::{
    conservation_check, hamiltonian_residual, hessian_extremum, reconstruct_hamiltonian, HamiltonianConfig,
};
use planar_stability::{Point, Region};

fn main() -> planar_stability::Result<()> {
    // a nonlinear center: ẋ = y + y³ = -H_y, ẏ = -x - x³ = H_x,
    // so H = -(x²/2 + x⁴/4 + y²/2 + y⁴/4)
    let field = parse_field("P = y + y^3 ; Q = -x - x^3", &Params::new())?;
    let region = Region::new(-1.5, 1.5, -1.5, 1.5)?;
    let grid = reconstruct_hamiltonian(&field, Point::ORIGIN, &region, 257, &HamiltonianConfig::default())?;

    let p = Point::new(1.0, 0.5);
    let exact = -(0.5 + 0.25 + 0.125 + 0.015625);
    println!("H{p} = {:.6} by bilinear interpolation (closed form {exact})", grid.interpolate(p).unwrap());
    println!("max |∇H residual| on 1000 samples: {:.2e}", hamiltonian_residual(&field, &grid, 1000, 0)?);

    let hess = hessian_extremum(&field, Point::ORIGIN)?;
    println!("origin is a {:?} of H (det {})", hess.kind, hess.det);

    let cons = conservation_check(&field, &grid, Point::new(0.8, 0.0), 30.0, &IntegratorConfig::default())?;
    println!("drift of H along an orbit over t = {}: {:.2e}", cons.t_reached, cons.max_drift);

    let cubic = parse_field("P = y ; Q = -x - y^3", &Params::new())?;
    match reconstruct_hamiltonian(&cubic, Point::ORIGIN, &region, 65, &HamiltonianConfig::default()) {
        Ok(_) => println!("unexpected: damped field accepted"),
        Err(e) => println!("damped field refused: {e}"),
    }
    Ok(())
}
