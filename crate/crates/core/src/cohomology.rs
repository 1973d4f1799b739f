//! The corrector sequence `ŵ_k`, transfer defects, the zero-mean correction,
//! primitives, a Fourier coboundary solver, automorphic-measure defects and
//! the invariant 1-distribution `L(u) = ∫ u' dν`.
//!
//! The transfer operator throughout is `T w = (w ∘ f)·Df − w`, the derivative
//! of the coboundary operator `v ↦ v ∘ f − v`.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::circlemaps::{CircleMap, Family, LiftPoint, TrigPerturbation};
use crate::denjoy::AtomicMeasure;
use crate::error::{Error, Result};
use crate::ergodic::TestFunction;
use crate::numerics::{max_abs, try_periodic_mean, CompensatedSum};

/// Default quadrature grid for `λ`-means.
pub const QUADRATURE_GRID: usize = 4096;

/// A continuous periodic function evaluable pointwise.
pub trait Candidate: Send + Sync {
    fn eval(&self, x: f64) -> Result<f64>;

    fn describe(&self) -> String {
        "candidate".into()
    }
}

/// A `C¹` candidate.
pub trait SmoothCandidate: Candidate {
    fn eval_deriv(&self, x: f64) -> Result<f64>;
}

/// Adapter for plain closures.
pub struct FnCandidate<F> {
    name: String,
    f: F,
}

impl<F: Fn(f64) -> f64 + Send + Sync> FnCandidate<F> {
    pub fn new(name: &str, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> Candidate for FnCandidate<F> {
    fn eval(&self, x: f64) -> Result<f64> {
        Ok((self.f)(x))
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// `C¹` closure pair `(v, v')`.
pub struct FnPair<F, D> {
    name: String,
    f: F,
    df: D,
}

impl<F, D> FnPair<F, D>
where
    F: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(name: &str, f: F, df: D) -> Self {
        Self { name: name.into(), f, df }
    }
}

impl<F, D> Candidate for FnPair<F, D>
where
    F: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    fn eval(&self, x: f64) -> Result<f64> {
        Ok((self.f)(x))
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

impl<F, D> SmoothCandidate for FnPair<F, D>
where
    F: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    fn eval_deriv(&self, x: f64) -> Result<f64> {
        Ok((self.df)(x))
    }
}

impl<C: Candidate + ?Sized> Candidate for Arc<C> {
    fn eval(&self, x: f64) -> Result<f64> {
        (**self).eval(x)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

// ---------------------------------------------------------------------------
// corrector sequence

/// `ŵ_k = 1 − (1/q_k) Σ_{j<q_k} Df^j`.
#[derive(Debug, Clone, Copy)]
pub struct CorrectorSequence<'a> {
    f: &'a CircleMap,
    pub k: usize,
    pub q: u64,
}

pub fn w_hat(f: &CircleMap, k: usize) -> Result<CorrectorSequence<'_>> {
    let q = f.require_angle()?.q(k)?;
    Ok(CorrectorSequence { f, k, q })
}

impl CorrectorSequence<'_> {
    /// `ŵ_k(x)` together with `Df^{q_k}(x)`, from one orbit pass.
    pub fn eval_with_return(&self, x: f64) -> Result<(f64, f64)> {
        let mut p = LiftPoint::new(x);
        let mut log_d = CompensatedSum::new();
        let mut sum = CompensatedSum::new();
        for _ in 0..self.q {
            sum.add(log_d.value().exp());
            log_d.add(self.f.deriv(p.frac)?.ln());
            p = self.f.step(p)?;
        }
        Ok((1.0 - sum.value() / self.q as f64, log_d.value().exp()))
    }

    pub fn mean(&self, grid: usize) -> Result<f64> {
        let vals = (0..grid).into_par_iter().map(|i| self.eval(i as f64 / grid as f64)).collect::<Result<Vec<_>>>()?;
        Ok(vals.into_iter().collect::<CompensatedSum>().value() / grid as f64)
    }
}

impl Candidate for CorrectorSequence<'_> {
    fn eval(&self, x: f64) -> Result<f64> {
        let mut p = LiftPoint::new(x);
        let mut log_d = CompensatedSum::new();
        let mut sum = CompensatedSum::new();
        for j in 0..self.q {
            sum.add(log_d.value().exp());
            if j + 1 < self.q {
                log_d.add(self.f.deriv(p.frac)?.ln());
                p = self.f.step(p)?;
            }
        }
        Ok(1.0 - sum.value() / self.q as f64)
    }

    fn describe(&self) -> String {
        format!("w_hat(k={}, q={})", self.k, self.q)
    }
}

/// Pointwise residual of `Df − 1 = (ŵ_k∘f)·Df − ŵ_k + (Df^{q_k} − 1)/q_k`.
pub fn lemma_identity_residual(f: &CircleMap, k: usize, x: f64) -> Result<f64> {
    let w = w_hat(f, k)?;
    let (w_x, dq) = w.eval_with_return(x)?;
    let fx = f.eval(x)?;
    let w_fx = w.eval(fx)?;
    let df = f.deriv(x)?;
    Ok((df - 1.0 - (w_fx * df - w_x) - (dq - 1.0) / w.q as f64).abs())
}

/// Sup-norm defect of a candidate, with its grid metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub sup_defect: f64,
    pub grid: usize,
    pub target: String,
    pub candidate: String,
    /// A priori bound the defect must respect, when one applies.
    pub bound: Option<f64>,
}

/// `sup |T w − u'|` over a uniform grid.
pub fn transfer_defect<C, U>(f: &CircleMap, w: &C, uprime: U, target: &str, grid: usize) -> Result<DefectReport>
where
    C: Candidate + ?Sized,
    U: Fn(f64) -> f64 + Send + Sync,
{
    let vals = (0..grid)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / grid as f64;
            let tw = w.eval(f.eval(x)?)? * f.deriv(x)? - w.eval(x)?;
            Ok(tw - uprime(x))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DefectReport { sup_defect: max_abs(&vals), grid, target: target.into(), candidate: w.describe(), bound: None })
}

/// `sup |T ŵ_k − (Df − 1)|`, which equals `sup |Df^{q_k} − 1|/q_k`, with
/// the bound `(e^V − 1)/q_k` from the Denjoy inequality.
pub fn lemma_defect(f: &CircleMap, k: usize, grid: usize) -> Result<DefectReport> {
    let v = f.var_bound().ok_or(Error::NoVarBound)?;
    let w = w_hat(f, k)?;
    let g = f.clone();
    let mut rep = transfer_defect(f, &w, move |x| g.deriv(x).unwrap_or(f64::NAN) - 1.0, "Df - 1", grid)?;
    rep.bound = Some(v.exp_m1() / w.q as f64);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// zero-mean correction

/// `w − c + c·ŵ_k` with `c = ∫ w dλ`.
///
/// Since `T 1 = Df − 1` and `T ŵ_k → Df − 1`, the added `c·ŵ_k` restores the
/// `c(Df − 1)` removed with the constant, so the transfer defect grows by at
/// most `|c| · sup|T ŵ_k − (Df − 1)|`.
pub struct MeanCorrected<'a, C: ?Sized> {
    base: &'a C,
    pub c: f64,
    corrector: CorrectorSequence<'a>,
}

pub fn mean_correct<'a, C: Candidate + ?Sized>(
    f: &'a CircleMap,
    w: &'a C,
    k: usize,
    grid: usize,
) -> Result<MeanCorrected<'a, C>> {
    let c = try_periodic_mean(grid, |x| w.eval(x))?;
    Ok(MeanCorrected { base: w, c, corrector: w_hat(f, k)? })
}

impl<C: Candidate + ?Sized> Candidate for MeanCorrected<'_, C> {
    fn eval(&self, x: f64) -> Result<f64> {
        let w = self.base.eval(x)?;
        if self.c == 0.0 {
            return Ok(w);
        }
        Ok(w - self.c + self.c * self.corrector.eval(x)?)
    }

    fn describe(&self) -> String {
        format!("mean_correct({}, c={:.3e}, k={})", self.base.describe(), self.c, self.corrector.k)
    }
}

// ---------------------------------------------------------------------------
// Fourier series, primitives and the rotation solver

/// Real trigonometric polynomial `Σ_{|m|≤M} c_m e^{2πimx}` (`c_{−m} = conj c_m`).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    /// Coefficients for `m = −M..=M`.
    coeffs: Vec<Complex64>,
}

impl FourierSeries {
    pub fn zero(cutoff: usize) -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0); 2 * cutoff + 1] }
    }

    /// From coefficients `c_0, c_1, ..., c_M`; negative modes by conjugation.
    pub fn from_nonnegative(c: &[Complex64]) -> Self {
        let m = c.len().saturating_sub(1);
        let mut s = Self::zero(m);
        for (i, &z) in c.iter().enumerate() {
            s.coeffs[m + i] = z;
            s.coeffs[m - i] = z.conj();
        }
        s.coeffs[m] = Complex64::new(c.first().map(|z| z.re).unwrap_or(0.0), 0.0);
        s
    }

    /// Coefficients of the trigonometric interpolant of `n` uniform samples,
    /// truncated to `|m| < n/2`.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let cutoff = (n.saturating_sub(1)) / 2;
        let nonneg: Vec<Complex64> = buf[..=cutoff].iter().map(|z| z / n as f64).collect();
        Self::from_nonnegative(&nonneg)
    }

    pub fn sample<F: Fn(f64) -> f64>(n: usize, f: F) -> Self {
        let s: Vec<f64> = (0..n).map(|i| f(i as f64 / n as f64)).collect();
        Self::from_samples(&s)
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// `c_m`, zero outside the stored range.
    pub fn coeff(&self, m: i64) -> Complex64 {
        let c = self.cutoff() as i64;
        if m.abs() > c {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(m + c) as usize]
        }
    }

    pub fn mean(&self) -> f64 {
        self.coeff(0).re
    }

    pub fn truncated(&self, cutoff: usize) -> Self {
        let nonneg: Vec<Complex64> = (0..=cutoff as i64).map(|m| self.coeff(m)).collect();
        Self::from_nonnegative(&nonneg)
    }

    /// `Σ_{|m| > cutoff} |c_m|`.
    pub fn tail_mass(&self, cutoff: usize) -> f64 {
        (cutoff as i64 + 1..=self.cutoff() as i64).map(|m| 2.0 * self.coeff(m).norm()).sum()
    }

    pub fn value(&self, x: f64) -> f64 {
        let mut s = CompensatedSum::new();
        s.add(self.mean());
        for m in 1..=self.cutoff() as i64 {
            let z = self.coeff(m) * Complex64::from_polar(1.0, TAU * m as f64 * x);
            s.add(2.0 * z.re);
        }
        s.value()
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let mut s = CompensatedSum::new();
        for m in 1..=self.cutoff() as i64 {
            let z = self.coeff(m) * Complex64::new(0.0, TAU * m as f64) * Complex64::from_polar(1.0, TAU * m as f64 * x);
            s.add(2.0 * z.re);
        }
        s.value()
    }
}

impl Candidate for FourierSeries {
    fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.value(x))
    }

    fn describe(&self) -> String {
        format!("fourier(M={})", self.cutoff())
    }
}

impl SmoothCandidate for FourierSeries {
    fn eval_deriv(&self, x: f64) -> Result<f64> {
        Ok(self.deriv(x))
    }
}

/// `v(x) = ∫₀^x w dλ`, computed spectrally from `n` samples of `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    mean: f64,
    periodic: FourierSeries,
    offset: f64,
}

pub fn primitive<C: Candidate + ?Sized>(w: &C, n: usize) -> Result<Primitive> {
    let samples = (0..n).map(|i| w.eval(i as f64 / n as f64)).collect::<Result<Vec<_>>>()?;
    let s = FourierSeries::from_samples(&samples);
    let mean = s.mean();
    if mean.abs() >= 1e-8 {
        return Err(Error::MeanNotZero(mean));
    }
    let cutoff = s.cutoff();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    for (m, c) in coeffs.iter_mut().enumerate().skip(1) {
        *c = s.coeff(m as i64) / Complex64::new(0.0, TAU * m as f64);
    }
    let periodic = FourierSeries::from_nonnegative(&coeffs);
    let offset = periodic.value(0.0);
    Ok(Primitive { mean, periodic, offset })
}

impl Primitive {
    pub fn value(&self, x: f64) -> f64 {
        self.mean * x + self.periodic.value(x) - self.offset
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.mean + self.periodic.deriv(x)
    }
}

impl Candidate for Primitive {
    fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.value(x))
    }

    fn describe(&self) -> String {
        "primitive".into()
    }
}

impl SmoothCandidate for Primitive {
    fn eval_deriv(&self, x: f64) -> Result<f64> {
        Ok(self.deriv(x))
    }
}

/// Output of [`solve_rotation_coboundary`].
#[derive(Debug, Clone, PartialEq)]
pub struct RotationSolution {
    pub w: FourierSeries,
    /// `Σ_{|m| > M} |û(m)|`, a bound on `sup |w∘R_ρ − w − u|`.
    pub residual_bound: f64,
}

/// Solves `w(x + ρ) − w(x) = u(x)` mode by mode for `|m| ≤ cutoff`.
pub fn solve_rotation_coboundary(u_hat: &FourierSeries, rho: f64, cutoff: usize) -> Result<RotationSolution> {
    if u_hat.mean().abs() > 1e-12 {
        return Err(Error::MeanNotZero(u_hat.mean()));
    }
    let keep = cutoff.min(u_hat.cutoff());
    let mut coeffs = vec![Complex64::new(0.0, 0.0); keep + 1];
    for (m, c) in coeffs.iter_mut().enumerate().skip(1) {
        let denom = Complex64::from_polar(1.0, TAU * m as f64 * rho) - 1.0;
        if denom.norm() < 1e-12 {
            return Err(Error::SmallDenominator(m as i64));
        }
        *c = u_hat.coeff(m as i64) / denom;
    }
    Ok(RotationSolution { w: FourierSeries::from_nonnegative(&coeffs), residual_bound: u_hat.tail_mass(cutoff) })
}

/// `v = φ ∘ h⁻¹` for a solution `φ` in rotation coordinates.
#[derive(Debug, Clone)]
pub struct PulledBack {
    pub phi: FourierSeries,
    h: TrigPerturbation,
}

impl Candidate for PulledBack {
    fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.phi.value(self.h.inverse(x)?))
    }

    fn describe(&self) -> String {
        format!("pullback({})", self.phi.describe())
    }
}

impl SmoothCandidate for PulledBack {
    fn eval_deriv(&self, x: f64) -> Result<f64> {
        let y = self.h.inverse(x)?;
        Ok(self.phi.deriv(y) / self.h.deriv(y))
    }
}

/// Output of [`solve_conjugated_coboundary`].
#[derive(Debug, Clone)]
pub struct ConjugatedSolution {
    pub v: PulledBack,
    /// `μ(u)`, removed before solving.
    pub mean_removed: f64,
    pub residual_bound: f64,
}

/// Solves `v ∘ f − v = u − μ(u)` for `f = h ∘ R_ρ ∘ h⁻¹` (or a rotation):
/// `u ∘ h` is expanded from `samples` points, solved over the rotation and
/// pulled back.
pub fn solve_conjugated_coboundary(
    f: &CircleMap,
    u: &TestFunction,
    cutoff: usize,
    samples: usize,
) -> Result<ConjugatedSolution> {
    let (rho, h) = match f.family() {
        Family::ConjugatedRotation { rho, h } => (*rho, h.clone()),
        Family::Rotation { rho } => (*rho, TrigPerturbation::identity()),
        _ => return Err(Error::InvalidMap("coboundary solver needs a (conjugated) rotation".into())),
    };
    let mut u_hat = FourierSeries::sample(samples, |x| u.eval(h.eval(x)));
    let mean = u_hat.mean();
    let zero_mode = u_hat.cutoff();
    u_hat.coeffs[zero_mode] = Complex64::new(0.0, 0.0);
    let sol = solve_rotation_coboundary(&u_hat, rho, cutoff)?;
    Ok(ConjugatedSolution { v: PulledBack { phi: sol.w, h }, mean_removed: mean, residual_bound: sol.residual_bound })
}

/// `C¹` coboundary defect of `v` against `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoboundaryDefect {
    /// `sup |v∘f − v + c − u|`.
    pub c0: f64,
    /// `sup |(v'∘f)·Df − v' − u'|`.
    pub c1: f64,
    /// The `μ`-centering constant `c`.
    pub centering: f64,
}

impl CoboundaryDefect {
    pub fn value(&self) -> f64 {
        self.c0.max(self.c1)
    }
}

/// `C¹` distance from `v ∘ f − v + c` to `u`, with `c = μ(u − (v∘f − v))`
/// estimated by a Birkhoff average of length `q_{k+2}`.
pub fn coboundary_defect_c1<V>(f: &CircleMap, v: &V, u: &TestFunction, k: usize, grid: usize) -> Result<CoboundaryDefect>
where
    V: SmoothCandidate + ?Sized,
{
    if !u.has_deriv() {
        return Err(Error::InvalidArgument("target needs a derivative".into()));
    }
    let q = f.require_angle()?.q(k + 2)?;
    let diff = |x: f64| -> Result<f64> { Ok(u.eval(x) - (v.eval(f.eval(x)?)? - v.eval(x)?)) };
    let mut p = LiftPoint::new(f.base_point());
    let mut s = CompensatedSum::new();
    for _ in 0..q {
        s.add(diff(p.frac)?);
        p = f.step(p)?;
    }
    let c = s.value() / q as f64;
    let rows = (0..grid)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / grid as f64;
            let fx = f.eval(x)?;
            let e0 = v.eval(fx)? - v.eval(x)? + c - u.eval(x);
            let e1 = v.eval_deriv(fx)? * f.deriv(x)? - v.eval_deriv(x)? - u.eval_deriv(x).unwrap_or(f64::NAN);
            Ok((e0, e1))
        })
        .collect::<Result<Vec<_>>>()?;
    let c0: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let c1: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(CoboundaryDefect { c0: max_abs(&c0), c1: max_abs(&c1), centering: c })
}

// ---------------------------------------------------------------------------
// automorphic measures and the invariant distribution

/// Whether `f(x)` can be evaluated at an atom; atoms whose image gap lies
/// beyond the truncation are the boundary of the placed orbit.
fn forward_resolvable(f: &CircleMap, x: f64) -> Result<bool> {
    match f.as_denjoy() {
        Some(d) => Ok(d.locate(x)?.n < d.truncation() as i64),
        None => Ok(true),
    }
}

/// `max_φ |∫ φ dν − ∫ (φ∘f)(Df)^s dν|` over `tests`.
///
/// For a truncated orbit measure the pushed integral runs over atoms whose
/// image is placed; the last atom of the orbit contributes to the first
/// integral only.
pub fn automorphic_defect(f: &CircleMap, nu: &AtomicMeasure, s: f64, tests: &[TestFunction]) -> Result<f64> {
    let mut images = Vec::with_capacity(nu.atoms.len());
    for a in &nu.atoms {
        if forward_resolvable(f, a.x)? {
            images.push(Some((f.eval(a.x)?, f.deriv(a.x)?.powf(s))));
        } else {
            images.push(None);
        }
    }
    let mut worst = 0.0_f64;
    for phi in tests {
        let direct = nu.integrate(|x| phi.eval(x));
        let pushed: CompensatedSum =
            nu.atoms.iter().zip(&images).filter_map(|(a, im)| im.map(|(fx, d)| a.w * phi.eval(fx) * d)).collect();
        worst = worst.max((direct - pushed.value()).abs());
    }
    Ok(worst)
}

/// `L(u) = ∫ u' dν` for an atomic `ν`.
#[derive(Debug, Clone)]
pub struct InvariantDistribution {
    pub nu: AtomicMeasure,
}

impl InvariantDistribution {
    pub fn new(nu: AtomicMeasure) -> Self {
        Self { nu }
    }

    /// `Σ w_n u'(x_n)`.
    pub fn apply<D: Fn(f64) -> f64>(&self, du: D) -> f64 {
        self.nu.integrate(du)
    }
}

pub fn distribution_eval(l: &InvariantDistribution, u: &TestFunction) -> Result<f64> {
    if !u.has_deriv() {
        return Err(Error::InvalidArgument(format!("{} has no derivative", u.name())));
    }
    Ok(l.apply(|x| u.eval_deriv(x).unwrap_or(f64::NAN)))
}

/// `max_u |L(u∘f) − L(u)|`, using `(u∘f)' = (u'∘f)·Df` at the atoms.
pub fn invariance_check(l: &InvariantDistribution, f: &CircleMap, tests: &[TestFunction]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for u in tests {
        let lu = distribution_eval(l, u)?;
        let mut lfu = CompensatedSum::new();
        for a in &l.nu.atoms {
            if forward_resolvable(f, a.x)? {
                let du = u.eval_deriv(f.eval(a.x)?).unwrap_or(f64::NAN);
                lfu.add(a.w * du * f.deriv(a.x)?);
            }
        }
        worst = worst.max((lfu.value() - lu).abs());
    }
    Ok(worst)
}

/// `max_v |∫ v dν − ∫ v dλ|`, Lebesgue side by the periodic trapezoid rule.
pub fn nu_vs_lambda(nu: &AtomicMeasure, tests: &[TestFunction], grid: usize) -> f64 {
    tests
        .iter()
        .map(|v| {
            let lam = crate::numerics::periodic_mean(grid, |x| v.eval(x));
            (nu.integrate(|x| v.eval(x)) - lam).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::IrrationalAngle;

    #[test]
    fn corrector_vanishes_for_rotation() {
        let f = CircleMap::rotation_by(IrrationalAngle::golden(20));
        let w = w_hat(&f, 7).unwrap();
        for i in 0..10 {
            assert!(w.eval(i as f64 / 10.0).unwrap().abs() < 1e-15);
        }
        assert!(lemma_identity_residual(&f, 7, 0.3).unwrap() < 1e-15);
        assert!(lemma_defect(&f, 5, 64).unwrap().sup_defect < 1e-15);
    }

    #[test]
    fn zero_candidate_has_zero_defect() {
        let f = CircleMap::arnold(0.3, 0.5).unwrap();
        let zero = FnCandidate::new("0", |_| 0.0);
        assert_eq!(transfer_defect(&f, &zero, |_| 0.0, "0", 128).unwrap().sup_defect, 0.0);
    }

    #[test]
    fn mean_correct_of_constant_on_rotation() {
        let f = CircleMap::rotation_by(IrrationalAngle::golden(20));
        let one = FnCandidate::new("1", |_| 1.0);
        let out = mean_correct(&f, &one, 5, 256).unwrap();
        assert!((out.c - 1.0).abs() < 1e-15);
        for i in 0..16 {
            assert!(out.eval(i as f64 / 16.0).unwrap().abs() < 1e-15);
        }
        let zm = FnCandidate::new("sin", |x: f64| (TAU * x).sin());
        let same = mean_correct(&f, &zm, 5, 256).unwrap();
        assert!((same.eval(0.3).unwrap() - (TAU * 0.3).sin()).abs() < 1e-12);
    }

    #[test]
    fn primitive_of_sine() {
        let w = FnCandidate::new("sin", |x: f64| (TAU * x).sin());
        let v = primitive(&w, 256).unwrap();
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let exact = (1.0 - (TAU * x).cos()) / TAU;
            assert!((v.value(x) - exact).abs() < 1e-14);
        }
        let zero = primitive(&FnCandidate::new("0", |_| 0.0), 64).unwrap();
        assert_eq!(zero.value(0.37), 0.0);
        assert!(matches!(primitive(&FnCandidate::new("1", |_| 1.0), 64), Err(Error::MeanNotZero(_))));
    }

    #[test]
    fn solver_single_mode() {
        let rho = IrrationalAngle::golden(20).value();
        let u = FourierSeries::sample(64, |x| (TAU * x).cos());
        let sol = solve_rotation_coboundary(&u, rho, 4).unwrap();
        for i in 0..50 {
            let x = i as f64 / 50.0;
            let r = sol.w.value(x + rho) - sol.w.value(x) - (TAU * x).cos();
            assert!(r.abs() < 1e-13);
        }
        let nonzero_modes = (1..=4).filter(|&m| sol.w.coeff(m).norm() > 1e-14).count();
        assert_eq!(nonzero_modes, 1);
    }

    #[test]
    fn solver_truncation_tail() {
        let rho = IrrationalAngle::golden(20).value();
        let ufn = |x: f64| (TAU * x).cos() + 0.1 * (2.0 * TAU * x).cos();
        let u = FourierSeries::sample(64, ufn);
        let defect = |m: usize| {
            let sol = solve_rotation_coboundary(&u, rho, m).unwrap();
            let d = (0..512)
                .map(|i| i as f64 / 512.0)
                .map(|x| (sol.w.value(x + rho) - sol.w.value(x) - ufn(x)).abs())
                .fold(0.0, f64::max);
            (d, sol.residual_bound)
        };
        let (d2, r2) = defect(2);
        assert!(d2 < 1e-12 && r2 < 1e-12);
        let (d1, r1) = defect(1);
        assert!((d1 - 0.1).abs() < 1e-6 && (r1 - 0.1).abs() < 1e-12);
        let zero = solve_rotation_coboundary(&FourierSeries::zero(3), rho, 3).unwrap();
        assert_eq!(zero.w.value(0.4), 0.0);
    }

    #[test]
    fn small_denominator_guard() {
        let u = FourierSeries::sample(16, |x| (TAU * x).cos());
        assert!(matches!(solve_rotation_coboundary(&u, 0.5, 4), Err(Error::SmallDenominator(2))));
    }
}
