//! Interval certification of D > 0, T <= 0 and the eigenvalue condition,
//! and a random search for non-injectivity.
use planar_stability::field::{parse_field, Params};
use planar_stability::verify::{injectivity_falsify, verify_hypotheses, VerifyConfig};
use planar_stability::{FieldDef, Region};

fn main() -> planar_stability::Result<()> {
    let square = Region::new(-2.0, 2.0, -2.0, 2.0)?;
    let cfg = VerifyConfig::default();
    let source = parse_field("P = x ; Q = y", &Params::new())?;
    for field in [FieldDef::cubic_damped(), FieldDef::bump_annulus(), source] {
        println!("{}", field.name);
        for rep in verify_hypotheses(&field, &square, &cfg)? {
            let witness = rep.witness.map(|w| format!(" witness {} (T = {:.3}, D = {:.3})", w.point, w.trace, w.det)).unwrap_or_default();
            println!("  {:?}: {:?} after {} boxes{witness}", rep.property, rep.status, rep.boxes_processed);
        }
    }

    let fold = parse_field("P = x^2 ; Q = y", &Params::new())?;
    let rep = injectivity_falsify(&fold, &square, 10_000, 1)?;
    match rep.collision {
        Some(c) => println!("P = x^2 is not injective: F{} = F{} to {:.1e}", c.p, c.q, c.image_gap),
        None => println!("no collision found in {} pairs", rep.n_pairs),
    }
    Ok(())
}
