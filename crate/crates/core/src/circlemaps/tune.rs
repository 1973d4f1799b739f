//! Rotation-number certificates and parameter tuning.
//!
//! Everything here rests on the order characterization of the rotation
//! number: for a lift `F` and a rational `p/q`, if `F^q(x) − x − p > 0` at
//! some point then `ρ ≥ p/q`, if it is negative somewhere then `ρ ≤ p/q`,
//! and a sign change forces a periodic orbit, hence `ρ = p/q`.

use std::cmp::Ordering;

use serde::Serialize;

use super::{CircleMap, LiftPoint};
use crate::angles::IrrationalAngle;
use crate::error::{Error, Result};

/// Position of `ρ(f)` relative to a rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Below,
    Equal,
    Above,
}

/// Sign test of `F^q(x) − x − p` over `samples`.
pub fn order_side(f: &CircleMap, p: i64, q: u64, samples: &[f64]) -> Result<Side> {
    let (mut pos, mut neg) = (false, false);
    for &x in samples {
        let start = LiftPoint::new(x);
        let end = f.advance(start, q)?;
        let d = end.displacement(start, p);
        if d > 0.0 {
            pos = true;
        } else if d < 0.0 {
            neg = true;
        } else {
            return Ok(Side::Equal);
        }
        if pos && neg {
            return Ok(Side::Equal);
        }
    }
    Ok(if pos { Side::Above } else { Side::Below })
}

/// Side of the target angle relative to its `k`-th convergent.
fn target_side(target: &IrrationalAngle, k: usize) -> Result<Side> {
    let e = target.signed_error(k)?;
    Ok(if e > 0.0 { Side::Above } else { Side::Below })
}

/// A certified enclosure of a rotation number by convergents of a target angle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationCertificate {
    /// Largest `k` such that the sign tests pass for every `k' ≤ k`.
    pub certified_k: usize,
    pub lower: (u64, u64),
    pub upper: (u64, u64),
    pub rho_interval: [f64; 2],
}

impl RotationCertificate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.rho_interval[0] + self.rho_interval[1])
    }

    pub fn width(&self) -> f64 {
        self.rho_interval[1] - self.rho_interval[0]
    }
}

const CERT_SAMPLES: usize = 16;

/// Checks the sign certificates of `f` against the convergents of `target`.
pub fn certify(f: &CircleMap, target: &IrrationalAngle, max_k: usize) -> Result<RotationCertificate> {
    let samples: Vec<f64> = (0..CERT_SAMPLES).map(|i| i as f64 / CERT_SAMPLES as f64).collect();
    let mut lower = (0u64, 1u64);
    let mut upper = (1u64, 1u64);
    let mut certified_k = 0;
    for k in 1..=max_k.min(target.depth()) {
        let c = target.convergent(k)?;
        let want = target_side(target, k)?;
        if order_side(f, c.p as i64, c.q, &samples)? != want {
            break;
        }
        match want {
            Side::Above => lower = (c.p, c.q),
            _ => upper = (c.p, c.q),
        }
        certified_k = k;
    }
    Ok(RotationCertificate {
        certified_k,
        lower,
        upper,
        rho_interval: [lower.0 as f64 / lower.1 as f64, upper.0 as f64 / upper.1 as f64],
    })
}

/// `ρ(f_a)` compared with the target, using single-point sign tests at
/// convergents up to the target's depth.
fn compare_to_target(f: &CircleMap, target: &IrrationalAngle) -> Result<Ordering> {
    for k in 1..=target.depth() {
        let c = target.convergent(k)?;
        let want = target_side(target, k)?;
        match order_side(f, c.p as i64, c.q, &[0.0])? {
            Side::Equal => {
                // ρ(f) = p/q exactly, and the target sits on `want`'s side of it
                return Ok(if want == Side::Above { Ordering::Less } else { Ordering::Greater });
            }
            s if s != want => return Ok(if s == Side::Above { Ordering::Greater } else { Ordering::Less }),
            _ => {}
        }
    }
    Ok(Ordering::Equal)
}

/// Output of [`tune_parameter`].
#[derive(Debug, Clone)]
pub struct TunedArnold {
    pub map: CircleMap,
    pub a: f64,
    pub eps: f64,
    pub certificate: RotationCertificate,
}

/// Finds `a` such that the Arnold map `x + a + ε/(2π) sin 2πx` has rotation
/// number `target`.
///
/// Bisection in `a` exploits monotonicity of the rotation number and is
/// steered by convergents as deep as the target's expansion goes. The result
/// must pass the sampled sign certificate at every `k ≤ certify_depth`.
pub fn tune_parameter(eps: f64, target: &IrrationalAngle, certify_depth: usize) -> Result<TunedArnold> {
    if certify_depth > target.depth() {
        return Err(Error::DepthExceeded { k: certify_depth, depth: target.depth() });
    }
    let a = if eps == 0.0 {
        target.value()
    } else {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut found = None;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match compare_to_target(&CircleMap::arnold(mid, eps)?, target)? {
                Ordering::Less => lo = mid,
                Ordering::Greater => hi = mid,
                Ordering::Equal => {
                    found = Some(mid);
                    break;
                }
            }
        }
        found.unwrap_or(0.5 * (lo + hi))
    };
    let map = CircleMap::arnold(a, eps)?.with_angle(target.clone());
    let certificate = certify(&map, target, target.depth())?;
    if certificate.certified_k < certify_depth {
        return Err(Error::TuneFailed(format!(
            "certificate holds only to k = {} (needed {certify_depth})",
            certificate.certified_k
        )));
    }
    Ok(TunedArnold { map, a, eps, certificate })
}

/// Rotation-number enclosure found by Stern–Brocot descent, without a target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationInterval {
    /// Number of continued-fraction runs resolved.
    pub certified_k: usize,
    pub lower: (i64, u64),
    pub upper: (i64, u64),
    pub rho_interval: [f64; 2],
    /// True when a periodic orbit pins `ρ` to a rational exactly.
    pub exact: bool,
}

/// Encloses `ρ(f)` between Stern–Brocot neighbours until `depth` partial
/// quotients are resolved or denominators exceed `max_q`.
pub fn rotation_interval(f: &CircleMap, depth: usize, max_q: u64) -> Result<RotationInterval> {
    let samples: Vec<f64> = (0..8).map(|i| i as f64 / 8.0).collect();
    let m = f.eval(0.0)?.floor() as i64;
    let exact = |p: i64, q: u64, k| RotationInterval {
        certified_k: k,
        lower: (p, q),
        upper: (p, q),
        rho_interval: [p as f64 / q as f64; 2],
        exact: true,
    };
    // F(0) − m ∈ [0, 1) fixes the sample at 0, so only these outcomes occur
    let mut lo = (m, 1u64);
    let mut hi = (m + 1, 1u64);
    match order_side(f, m, 1, &samples)? {
        Side::Equal => return Ok(exact(m, 1, 0)),
        Side::Below => hi = (m, 1),
        Side::Above => {}
    }
    if hi.0 == m + 1 {
        match order_side(f, m + 1, 1, &samples)? {
            Side::Equal => return Ok(exact(m + 1, 1, 0)),
            Side::Above => lo = (m + 1, 1),
            Side::Below => {}
        }
    }
    if hi.0 <= lo.0 {
        return Err(Error::InvalidMap("lift displacement inconsistent with a circle homeomorphism".into()));
    }

    let mut runs = 0usize;
    let mut last: Option<Side> = None;
    loop {
        let med = (lo.0 + hi.0, lo.1 + hi.1);
        if med.1 > max_q {
            break;
        }
        let side = order_side(f, med.0, med.1, &samples)?;
        if side == Side::Equal {
            return Ok(exact(med.0, med.1, runs + 1));
        }
        if last != Some(side) {
            if runs == depth {
                break;
            }
            runs += 1;
            last = Some(side);
        }
        match side {
            Side::Above => lo = med,
            _ => hi = med,
        }
    }
    Ok(RotationInterval {
        certified_k: runs,
        lower: lo,
        upper: hi,
        rho_interval: [lo.0 as f64 / lo.1 as f64, hi.0 as f64 / hi.1 as f64],
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_tunes_to_target_exactly() {
        let g = IrrationalAngle::golden(20);
        let t = tune_parameter(0.0, &g, 18).unwrap();
        assert_eq!(t.a, g.value());
    }

    #[test]
    fn rational_rotation_is_exact() {
        let r = rotation_interval(&CircleMap::rotation(0.5), 10, 1000).unwrap();
        assert!(r.exact);
        assert_eq!(r.lower, (1, 2));
    }

    #[test]
    fn golden_rotation_descent() {
        let g = IrrationalAngle::golden(20);
        let r = rotation_interval(&CircleMap::rotation(g.value()), 12, 1_000_000).unwrap();
        assert_eq!(r.certified_k, 12);
        assert!(r.rho_interval[0] <= g.value() && g.value() <= r.rho_interval[1]);
        let qs = [r.lower.1, r.upper.1];
        assert!(qs.contains(&377) && qs.contains(&233), "{qs:?}");
    }

    #[test]
    fn arnold_with_mode_locking() {
        // ε near 1 with a = 0 has the fixed point 0
        let f = CircleMap::arnold(0.0, 0.9).unwrap();
        assert!(rotation_interval(&f, 5, 1000).unwrap().exact);
    }
}
