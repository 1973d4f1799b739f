//! Solves `v ∘ f − v = u − μ(u)` on a conjugated rotation and checks the
//! result in `C¹`.

use circlab::angles::IrrationalAngle;
use circlab::circlemaps::{CircleMap, TrigPerturbation};
use circlab::cli::cos_pullback;
use circlab::cohomology::{coboundary_defect_c1, solve_conjugated_coboundary};
use circlab::ergodic::TestFunction;

fn main() -> circlab::Result<()> {
    let h = TrigPerturbation::new(vec![(0.02, 0.03), (-0.01, 0.008), (0.004, -0.003)])?;
    let f = CircleMap::conjugated_rotation(IrrationalAngle::golden(30), h.clone());
    for u in [cos_pullback(h), TestFunction::cos_mode(1), TestFunction::sin_mode(2)] {
        for cutoff in [4, 16, 64] {
            let sol = solve_conjugated_coboundary(&f, &u, cutoff, 256)?;
            let d = coboundary_defect_c1(&f, &sol.v, &u, 22, 512)?;
            println!(
                "{:<13} M={cutoff:<3} mu(u)={:+.6} tail={:.1e} C0={:.1e} C1={:.1e}",
                u.name(),
                sol.mean_removed,
                sol.residual_bound,
                d.c0,
                d.c1
            );
        }
    }
    Ok(())
}
