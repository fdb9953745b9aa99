//! Dense-output integration and event location.
use planar_stability::flow::{integrate, integrate_until_event, Event, IntegratorConfig, Section, Sense};
use planar_stability::{FieldDef, Point};

fn main() -> planar_stability::Result<()> {
    let cfg = IntegratorConfig::default();
    let cubic = FieldDef::cubic_damped();

    let traj = integrate(&cubic, Point::new(2.0, 0.0), 50.0, &cfg)?;
    for t in [0.0, 10.0, 25.0, 50.0] {
        let p = traj.state_at(t).unwrap();
        println!("t = {t:>4}: {p}  |x| = {:.4}", p.norm());
    }

    // algebraic decay: entering a small ball takes a long time
    let ball = Event::EnterBall { center: Point::ORIGIN, radius: 0.05 };
    let hit = integrate_until_event(&cubic, Point::new(2.0, 0.0), ball, 1e5, &cfg)?;
    println!("entered |x| < 0.05 at t = {:.2} ({:?}, {} steps)", hit.time, hit.status, hit.steps);

    // outside r = 1 the bump field spirals inward at exactly unit angular speed
    let bump = FieldDef::bump_annulus();
    let ray = Event::RayCrossing { section: Section::positive_x_axis(), sense: Sense::Auto };
    for r in [0.5, 1.5, 2.5] {
        let ret = integrate_until_event(&bump, Point::new(r, 0.0), ray, 100.0, &cfg)?;
        println!("bump from r = {r}: returns to r = {:.6} after t = {:.6}", ret.state.x, ret.time);
    }
    Ok(())
}
