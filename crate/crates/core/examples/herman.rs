//! `f^{q_k}` approaches a translation in `C¹`.

use circlab::angles::IrrationalAngle;
use circlab::circlemaps::{tune_parameter, CircleMap, TrigPerturbation};
use circlab::ergodic::herman_check;

fn main() -> circlab::Result<()> {
    let arnold = tune_parameter(0.9, &IrrationalAngle::golden(30), 18)?.map;
    let h = TrigPerturbation::new(vec![(0.03, 0.0), (0.0, 0.01)])?;
    let conj = CircleMap::conjugated_rotation(IrrationalAngle::silver(20), h);
    for (name, f) in [("Arnold eps=0.9", arnold), ("conjugated silver", conj)] {
        println!("{name} (e^V - 1 = {:.3})", f.var_bound().unwrap().exp_m1());
        for r in herman_check(&f, 3..=11, 256)? {
            println!("  k={:>2} q={:>5} c0={:.3e} c1={:.3e}", r.k, r.q, r.c0_dev, r.c1_dev);
        }
    }
    Ok(())
}
