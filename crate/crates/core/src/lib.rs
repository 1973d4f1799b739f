//! Numerical laboratory for circle diffeomorphisms with irrational rotation
//! number: continued fractions, certified rotation numbers, Birkhoff sums,
//! a `C¹` Denjoy counterexample with its automorphic measure, and the
//! corrector sequences and coboundary defects around invariant distributions.
//!
//! ```
//! use circlab::angles::IrrationalAngle;
//! use circlab::circlemaps::CircleMap;
//! use circlab::cohomology::lemma_defect;
//!
//! let golden = IrrationalAngle::golden(20);
//! let f = CircleMap::rotation_by(golden);
//! assert_eq!(lemma_defect(&f, 6, 64).unwrap().sup_defect, 0.0);
//! ```

pub mod angles;
pub mod circlemaps;
pub mod cli;
pub mod cohomology;
pub mod denjoy;
pub mod ergodic;
pub mod numerics;

mod error;

pub use error::{Error, Result};
