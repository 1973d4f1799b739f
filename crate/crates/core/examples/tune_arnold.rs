//! Tunes the Arnold family to the golden rotation number for several couplings.

use circlab::angles::IrrationalAngle;
use circlab::circlemaps::tune_parameter;

fn main() -> circlab::Result<()> {
    let golden = IrrationalAngle::golden(30);
    println!("{:>5} {:>20} {:>6} {:>12}", "eps", "a", "k", "|mid - rho|");
    for eps in [0.0, 0.3, 0.5, 0.7, 0.9] {
        let t = tune_parameter(eps, &golden, 18)?;
        let c = &t.certificate;
        println!("{eps:>5} {:>20.16} {:>6} {:>12.2e}", t.a, c.certified_k, (c.midpoint() - golden.value()).abs());
    }
    Ok(())
}
