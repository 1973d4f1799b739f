//! Birkhoff sums at convergent times for a tuned Arnold map: the deviation
//! from `q_k μ(u)` tends to zero, well inside the Denjoy–Koksma envelope.

use circlab::angles::IrrationalAngle;
use circlab::circlemaps::tune_parameter;
use circlab::ergodic::{corollary_experiment, TestFunction};

fn main() -> circlab::Result<()> {
    let f = tune_parameter(0.5, &IrrationalAngle::golden(30), 18)?.map;
    for u in [TestFunction::cos_mode(1), TestFunction::sin_mode(3)] {
        let var = u.var_bound().unwrap();
        println!("u = {} (Var {var})", u.name());
        for r in corollary_experiment(&f, &u, 4..=12, 256)? {
            println!("  k={:>2} q={:>4} sup|S_q u - q mu| = {:.3e}", r.k, r.q, r.sup_deviation);
        }
    }
    Ok(())
}
