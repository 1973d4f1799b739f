//! The invariant distribution `L(u) = ∫ u' dν` on the Denjoy example is not a
//! multiple of the invariant measure: a bump in `I_0` has `μ(u) = 0` but
//! `L(u) = 1`.

use std::sync::Arc;

use circlab::angles::IrrationalAngle;
use circlab::circlemaps::CircleMap;
use circlab::cohomology::{automorphic_defect, distribution_eval, invariance_check, nu_vs_lambda, InvariantDistribution};
use circlab::denjoy::{cantor_witness, orbit_weights, DenjoyMap};
use circlab::ergodic::TestFunction;

fn main() -> circlab::Result<()> {
    let d = DenjoyMap::build(&IrrationalAngle::golden(30), 64)?;
    let w = orbit_weights(&d)?;
    let g0 = *d.gap(0).unwrap();
    let u = TestFunction::gap_bump(g0, w.normalizer_chain);
    let l = InvariantDistribution::new(w.measure.clone());
    let f = CircleMap::denjoy(Arc::new(d.clone()));

    let witness = cantor_witness(&d, &u)?;
    println!("mu(u) = {}, Birkhoff average {:.2e}", witness.mu, witness.birkhoff_average);
    println!("L(u)  = {:.12}", distribution_eval(&l, &u)?);

    let tests = [TestFunction::cos_mode(1), TestFunction::sin_mode(2), u.clone()];
    println!("invariance defect  {:.3e}", invariance_check(&l, &f, &tests)?);
    println!("automorphic defect {:.3e}", automorphic_defect(&f, &w.measure, 1.0, &tests)?);
    let plateau = TestFunction::gap_plateau(g0, 1.0);
    println!("|nu - lambda| on a plateau over I_0: {:.6}", nu_vs_lambda(&w.measure, &[plateau], 4096));
    Ok(())
}
