//! Continued fractions, convergents and approximation errors of a few angles.

use circlab::angles::{approximation_error, IrrationalAngle};

fn main() -> circlab::Result<()> {
    for name in ["golden", "silver", "0.7071067811865475244"] {
        let angle = IrrationalAngle::parse(name, 12)?;
        println!("{name}: [0; {:?}]", angle.cf());
        println!("{:>3} {:>8} {:>8} {:>12}", "k", "p", "q", "|q rho - p|");
        for c in angle.convergents() {
            println!("{:>3} {:>8} {:>8} {:>12.3e}", c.k, c.p, c.q, approximation_error(&angle, c.k)?);
        }
        println!();
    }
    Ok(())
}
