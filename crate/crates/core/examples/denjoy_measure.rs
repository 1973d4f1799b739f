//! Builds the Denjoy counterexample and its atomic 1-automorphic measure.

use circlab::angles::IrrationalAngle;
use circlab::denjoy::{orbit_weights, DenjoyMap, GapLaw};

fn main() -> circlab::Result<()> {
    let d = DenjoyMap::build(&IrrationalAngle::golden(30), 64)?;
    println!("x0 = {:.6}, tail mass = {:.6}", d.x0(), GapLaw::tail(64));
    println!("first gaps by position:");
    for g in d.gaps_by_position().take(8) {
        println!("  I_{:<4} [{:.6}, {:.6})", g.n, g.a, g.a + g.len);
    }
    let w = orbit_weights(&d)?;
    println!("S = {} (chain rule), {} (closed form)", w.normalizer_chain, w.normalizer_closed);
    println!("largest relative error of Df^n(x0) vs l_n/l_0: {:.2e}", w.max_relative_discrepancy);
    for a in w.measure.atoms.iter().filter(|a| a.n.abs() <= 3) {
        println!("  n={:>2} x={:.6} w={:.6}", a.n, a.x, a.w);
    }
    Ok(())
}
