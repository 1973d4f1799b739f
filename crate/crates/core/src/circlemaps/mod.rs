//! Circle diffeomorphisms represented by their lifts.
//!
//! Orbits are carried as [`LiftPoint`]s, an integer part plus a fractional
//! part in `[0, 1)`, so long orbits keep full double precision in the
//! fractional coordinate regardless of how far the lift has travelled.

mod conjugacy;
mod tune;

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Serialize;

use crate::angles::IrrationalAngle;
use crate::denjoy::DenjoyMap;
use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;

pub use conjugacy::TrigPerturbation;
pub use tune::{certify, order_side, rotation_interval, tune_parameter, RotationCertificate, RotationInterval, Side, TunedArnold};

/// Smoothness class of a map, as far as the crate certifies it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regularity {
    C1,
    C1bv,
    C2,
    Analytic,
}

impl Regularity {
    pub fn at_least_c1bv(self) -> bool {
        !matches!(self, Regularity::C1)
    }
}

#[derive(Debug, Clone)]
pub enum Family {
    /// `x ↦ x + ρ`.
    Rotation { rho: f64 },
    /// `x ↦ x + a + ε/(2π)·sin(2πx)`, `0 ≤ ε < 1`.
    Arnold { a: f64, eps: f64 },
    /// `h ∘ R_ρ ∘ h⁻¹` for a trigonometric perturbation `h` of the identity.
    ConjugatedRotation { rho: f64, h: TrigPerturbation },
    /// Constructed Denjoy counterexample, evaluable on its placed gaps only.
    Denjoy(Arc<DenjoyMap>),
}

/// A point of the real line written as `whole + frac` with `frac ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftPoint {
    pub whole: i64,
    pub frac: f64,
}

impl LiftPoint {
    pub fn new(x: f64) -> Self {
        Self { whole: 0, frac: 0.0 }.offset(x)
    }

    pub fn value(self) -> f64 {
        self.whole as f64 + self.frac
    }

    /// `self + dx`, renormalized.
    pub fn offset(self, dx: f64) -> Self {
        let y = self.frac + dx;
        let w = y.floor();
        let mut frac = y - w;
        let mut whole = self.whole + w as i64;
        if frac >= 1.0 {
            frac -= 1.0;
            whole += 1;
        }
        Self { whole, frac }
    }

    /// `self − other − p` without cancellation in the integer parts.
    pub fn displacement(self, other: LiftPoint, p: i64) -> f64 {
        (self.whole - other.whole - p) as f64 + (self.frac - other.frac)
    }
}

/// Result of [`CircleMap::iterate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iterate {
    pub point: LiftPoint,
    /// `log Df^n(x)`.
    pub log_deriv: f64,
}

impl Iterate {
    pub fn value(&self) -> f64 {
        self.point.value()
    }

    pub fn deriv(&self) -> f64 {
        self.log_deriv.exp()
    }
}

/// A circle diffeomorphism with its derivative oracle.
#[derive(Debug, Clone)]
pub struct CircleMap {
    family: Family,
    regularity: Regularity,
    var_bound: Option<f64>,
    angle: Option<Arc<IrrationalAngle>>,
}

impl CircleMap {
    pub fn rotation(rho: f64) -> Self {
        Self { family: Family::Rotation { rho }, regularity: Regularity::Analytic, var_bound: Some(0.0), angle: None }
    }

    pub fn rotation_by(angle: IrrationalAngle) -> Self {
        Self::rotation(angle.value()).with_angle(angle)
    }

    pub fn arnold(a: f64, eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) || !a.is_finite() {
            return Err(Error::InvalidMap(format!("Arnold map needs 0 <= eps < 1, got eps = {eps}")));
        }
        Ok(Self {
            family: Family::Arnold { a, eps },
            regularity: Regularity::Analytic,
            var_bound: Some(arnold_var_log_deriv(eps)),
            angle: None,
        })
    }

    /// `h ∘ R_ρ ∘ h⁻¹`. The variation bound is `2 sup|h''| / inf h'`.
    pub fn conjugated_rotation(angle: IrrationalAngle, h: TrigPerturbation) -> Self {
        let rho = angle.value();
        let v = 2.0 * h.second_deriv_bound() / h.min_deriv_bound();
        Self {
            family: Family::ConjugatedRotation { rho, h },
            regularity: Regularity::Analytic,
            var_bound: Some(v),
            angle: Some(Arc::new(angle)),
        }
    }

    pub fn denjoy(map: Arc<DenjoyMap>) -> Self {
        let angle = Arc::new(map.angle().clone());
        Self { family: Family::Denjoy(map), regularity: Regularity::C1, var_bound: None, angle: Some(angle) }
    }

    /// Attaches the rotation number the map is known to have.
    pub fn with_angle(mut self, angle: IrrationalAngle) -> Self {
        self.angle = Some(Arc::new(angle));
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    /// Certified bound `V` on the total variation of `log Df`, if any.
    pub fn var_bound(&self) -> Option<f64> {
        self.var_bound
    }

    pub fn angle(&self) -> Option<&IrrationalAngle> {
        self.angle.as_deref()
    }

    pub(crate) fn require_angle(&self) -> Result<&IrrationalAngle> {
        self.angle().ok_or_else(|| Error::InvalidMap("map carries no certified rotation angle".into()))
    }

    pub fn as_denjoy(&self) -> Option<&DenjoyMap> {
        match &self.family {
            Family::Denjoy(d) => Some(d),
            _ => None,
        }
    }

    /// A natural base point: `0`, or the midpoint of `I_0` for Denjoy maps.
    pub fn base_point(&self) -> f64 {
        match &self.family {
            Family::Denjoy(d) => d.x0(),
            _ => 0.0,
        }
    }

    /// Lift on `[0, 1)`.
    fn lift_unit(&self, x: f64) -> Result<f64> {
        match &self.family {
            Family::Rotation { rho } => Ok(x + rho),
            Family::Arnold { a, eps } => Ok(x + a + eps / TAU * (TAU * x).sin()),
            Family::ConjugatedRotation { rho, h } => Ok(h.eval(h.inverse(x)? + rho)),
            Family::Denjoy(d) => d.lift_unit(x),
        }
    }

    fn inverse_unit(&self, y: f64) -> Result<f64> {
        match &self.family {
            Family::Rotation { rho } => Ok(y - rho),
            Family::Arnold { a, eps } => {
                let (a, eps) = (*a, *eps);
                let f = |x: f64| x + a + eps / TAU * (TAU * x).sin();
                let df = |x: f64| 1.0 + eps * (TAU * x).cos();
                invert_monotone(f, df, y, y - a - 1.0, y - a + 1.0)
            }
            Family::ConjugatedRotation { rho, h } => Ok(h.eval(h.inverse(y)? - rho)),
            Family::Denjoy(d) => d.inverse_unit(y),
        }
    }

    /// `F(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let w = x.floor();
        Ok(w + self.lift_unit(x - w)?)
    }

    /// `F⁻¹(y)`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let w = y.floor();
        Ok(w + self.inverse_unit(y - w)?)
    }

    /// `DF(x)`.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        let x = x - x.floor();
        match &self.family {
            Family::Rotation { .. } => Ok(1.0),
            Family::Arnold { eps, .. } => Ok(1.0 + eps * (TAU * x).cos()),
            Family::ConjugatedRotation { rho, h } => {
                let y = h.inverse(x)?;
                Ok(h.deriv(y + rho) / h.deriv(y))
            }
            Family::Denjoy(d) => d.deriv(x),
        }
    }

    /// `(log DF)'(x)` where available in closed form.
    pub fn log_deriv_slope(&self, x: f64) -> Option<f64> {
        match &self.family {
            Family::Rotation { .. } => Some(0.0),
            Family::Arnold { eps, .. } => {
                let s = TAU * x;
                Some(-TAU * eps * s.sin() / (1.0 + eps * s.cos()))
            }
            _ => None,
        }
    }

    pub fn step(&self, p: LiftPoint) -> Result<LiftPoint> {
        let y = self.lift_unit(p.frac)?;
        Ok(LiftPoint { whole: p.whole, frac: 0.0 }.offset(y))
    }

    pub fn step_back(&self, p: LiftPoint) -> Result<LiftPoint> {
        let y = self.inverse_unit(p.frac)?;
        Ok(LiftPoint { whole: p.whole, frac: 0.0 }.offset(y))
    }

    /// `F^n(p)` without derivative bookkeeping.
    pub fn advance(&self, mut p: LiftPoint, n: u64) -> Result<LiftPoint> {
        for _ in 0..n {
            p = self.step(p)?;
        }
        Ok(p)
    }

    /// `(F^n(x), log Df^n(x))` for any integer `n`.
    pub fn iterate(&self, n: i64, x: f64) -> Result<Iterate> {
        self.iterate_from(n, LiftPoint::new(x))
    }

    pub fn iterate_from(&self, n: i64, start: LiftPoint) -> Result<Iterate> {
        let mut p = start;
        let mut log_d = CompensatedSum::new();
        if n >= 0 {
            for _ in 0..n {
                log_d.add(self.deriv(p.frac)?.ln());
                p = self.step(p)?;
            }
        } else {
            for _ in 0..(-n) {
                p = self.step_back(p)?;
                log_d.add(-self.deriv(p.frac)?.ln());
            }
        }
        Ok(Iterate { point: p, log_deriv: log_d.value() })
    }

    /// Forward orbit of `x` with running `log Df^j(x)`.
    pub fn orbit(&self, x: f64) -> Orbit<'_> {
        Orbit { map: self, point: LiftPoint::new(x), log_deriv: CompensatedSum::new(), j: 0, pending: None, done: false }
    }
}

/// One step of [`Orbit`]: the point `f^j(x)` and `log Df^j(x)`.
#[derive(Debug, Clone, Copy)]
pub struct OrbitStep {
    pub j: u64,
    pub point: LiftPoint,
    pub log_deriv: f64,
}

pub struct Orbit<'a> {
    map: &'a CircleMap,
    point: LiftPoint,
    log_deriv: CompensatedSum,
    j: u64,
    pending: Option<Error>,
    done: bool,
}

impl Iterator for Orbit<'_> {
    type Item = Result<OrbitStep>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if let Some(e) = self.pending.take() {
            self.done = true;
            return Some(Err(e));
        }
        let out = OrbitStep { j: self.j, point: self.point, log_deriv: self.log_deriv.value() };
        // a failed step is reported on the following call, so the last
        // resolvable point is still yielded
        match self.map.deriv(self.point.frac).and_then(|d| Ok((d, self.map.step(self.point)?))) {
            Ok((d, next)) => {
                self.log_deriv.add(d.ln());
                self.point = next;
                self.j += 1;
            }
            Err(e) => self.pending = Some(e),
        }
        Some(Ok(out))
    }
}

/// `Var(log DF)` for the Arnold family: `2 log((1+ε)/(1−ε))`.
pub fn arnold_var_log_deriv(eps: f64) -> f64 {
    2.0 * ((1.0 + eps) / (1.0 - eps)).ln()
}

/// Grid estimate `Σ |log DF(x_{i+1}) − log DF(x_i)|` over a uniform periodic grid.
pub fn var_log_deriv(f: &CircleMap, grid: usize) -> Result<f64> {
    let logs = (0..=grid).map(|i| f.deriv(i as f64 / grid as f64).map(f64::ln)).collect::<Result<Vec<_>>>()?;
    let s: CompensatedSum = logs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    Ok(s.value())
}

/// Solves `f(x) = y` for increasing `f` on `[lo, hi]`: bisection to `1e-14`,
/// then two Newton steps kept inside the final bracket.
pub(crate) fn invert_monotone<F, D>(f: F, df: D, y: f64, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(f(lo) <= y && y <= f(hi)) {
        return Err(Error::InverseNotConverged(y));
    }
    let mut iters = 0;
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
        if iters > 200 {
            return Err(Error::InverseNotConverged(y));
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let d = df(x);
        if d.is_nan() || d <= 0.0 {
            break;
        }
        let next = x - (f(x) - y) / d;
        if next >= lo - 1e-14 && next <= hi + 1e-14 {
            x = next;
        }
    }
    if !x.is_finite() {
        return Err(Error::InverseNotConverged(y));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_eval_and_iterate() {
        let f = CircleMap::rotation(0.3);
        assert_eq!(f.eval(0.25).unwrap(), 0.25 + 0.3);
        let it = f.iterate(7, 0.1).unwrap();
        assert!((it.value() - (0.1 + 7.0 * 0.3)).abs() < 1e-14);
        assert_eq!(it.log_deriv, 0.0);
    }

    #[test]
    fn arnold_degenerate_and_origin() {
        let f = CircleMap::arnold(0.37, 0.0).unwrap();
        assert!((f.eval(0.6).unwrap() - 0.97).abs() < 1e-15);
        let g = CircleMap::arnold(0.25, 0.5).unwrap();
        assert_eq!(g.eval(0.0).unwrap(), 0.25);
        assert!(CircleMap::arnold(0.1, 1.0).is_err());
    }

    #[test]
    fn zero_iterate_is_identity() {
        let f = CircleMap::arnold(0.4, 0.7).unwrap();
        let it = f.iterate(0, 0.123).unwrap();
        assert_eq!(it.value(), 0.123);
        assert_eq!(it.log_deriv, 0.0);
    }

    #[test]
    fn inverse_roundtrip() {
        let f = CircleMap::arnold(0.61, 0.9).unwrap();
        for i in 0..50 {
            let x = -2.0 + i as f64 * 0.0917;
            let y = f.eval(x).unwrap();
            assert!((f.inverse(y).unwrap() - x).abs() < 1e-13);
        }
    }

    #[test]
    fn var_log_deriv_arnold_closed_form() {
        let f = CircleMap::arnold(0.2, 0.5).unwrap();
        let v = var_log_deriv(&f, 1024).unwrap();
        assert!((v - 2.0 * 3f64.ln()).abs() < 1e-12);
        assert_eq!(var_log_deriv(&CircleMap::rotation(0.3), 64).unwrap(), 0.0);
    }

    #[test]
    fn lift_point_displacement() {
        let p = LiftPoint::new(5.25);
        let q = LiftPoint::new(0.5);
        assert_eq!(p.whole, 5);
        assert!((p.displacement(q, 4) - 0.75).abs() < 1e-15);
        assert_eq!(LiftPoint::new(-0.25), LiftPoint { whole: -1, frac: 0.75 });
    }
}
