//! The corrector `ŵ_k`: exact identity, transfer defect against `Df − 1`, and
//! its a priori bound `(e^V − 1)/q_k`.

use circlab::angles::IrrationalAngle;
use circlab::circlemaps::tune_parameter;
use circlab::cohomology::{lemma_defect, lemma_identity_residual, w_hat};

fn main() -> circlab::Result<()> {
    let f = tune_parameter(0.5, &IrrationalAngle::golden(30), 18)?.map;
    println!("{:>3} {:>5} {:>12} {:>12} {:>12} {:>12}", "k", "q", "residual", "defect", "bound", "mean");
    for k in 3..=10 {
        let residual = (0..256).map(|i| lemma_identity_residual(&f, k, i as f64 / 256.0)).try_fold(0.0, |m, r| {
            r.map(|r| f64::max(m, r))
        })?;
        let d = lemma_defect(&f, k, 512)?;
        let w = w_hat(&f, k)?;
        println!(
            "{k:>3} {:>5} {residual:>12.2e} {:>12.3e} {:>12.3e} {:>12.1e}",
            w.q,
            d.sup_defect,
            d.bound.unwrap(),
            w.mean(4096)?
        );
    }
    Ok(())
}
