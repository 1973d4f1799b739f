//! Certified rotation-number intervals by Stern–Brocot descent.

use circlab::angles::IrrationalAngle;
use circlab::circlemaps::{rotation_interval, CircleMap, TrigPerturbation};

fn main() -> circlab::Result<()> {
    let h = TrigPerturbation::new(vec![(0.02, 0.03), (-0.01, 0.008)])?;
    let maps = [
        ("rotation by sqrt2-1", CircleMap::rotation_by(IrrationalAngle::silver(20))),
        ("conjugated golden rotation", CircleMap::conjugated_rotation(IrrationalAngle::golden(20), h)),
        ("Arnold a=0.3 eps=0.8", CircleMap::arnold(0.3, 0.8)?),
        ("Arnold a=0.05 eps=0.9", CircleMap::arnold(0.05, 0.9)?),
    ];
    for (name, f) in maps {
        let r = rotation_interval(&f, 10, 1_000_000)?;
        let kind = if r.exact { "periodic orbit" } else { "interval" };
        println!(
            "{name:<28} {kind:<15} [{}/{}, {}/{}] width {:.2e}",
            r.lower.0,
            r.lower.1,
            r.upper.0,
            r.upper.1,
            r.rho_interval[1] - r.rho_interval[0]
        );
    }
    Ok(())
}
