//! A C¹ Denjoy counterexample with an atomic 1-automorphic measure.
//!
//! The complement of the exceptional Cantor set is a family of gaps `I_n`,
//! `n ∈ ℤ`, of lengths `ℓ_n = (6/5) / ((|n|+2)(|n|+3))`, placed on the circle
//! in the cyclic order of the rotation orbit `{nρ}`. The map sends `I_n` onto
//! `I_{n+1}` by
//!
//! ```text
//! g_n(x) = a_{n+1} + (x − a_n) + c_n ℓ_n H((x − a_n)/ℓ_n),   c_n = ℓ_{n+1}/ℓ_n − 1,
//! ```
//!
//! where `H` is the primitive of the bump `η(s) = sin²(πs) + sin²(2πs)`.
//! Since `H(1) = 1`, `H(1/2) = 1/2` and `η(1/2) = 1`, gap midpoints go to gap
//! midpoints with derivative exactly `ℓ_{n+1}/ℓ_n`, so along the orbit of the
//! midpoint `x₀` of `I_0` the derivatives telescope to `Df^n(x₀) = ℓ_n/ℓ_0`.
//!
//! Only the gaps with `|n| ≤ M` are placed; the remaining mass `tail(M)` is
//! spread proportionally to `{nρ}`. Points outside the placed gaps are
//! reported as [`Error::DomainRestricted`].

use std::f64::consts::{PI, TAU};

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::angles::IrrationalAngle;
use crate::circlemaps::invert_monotone;
use crate::error::{Error, Result};
use crate::ergodic::TestFunction;
use crate::numerics::CompensatedSum;

/// Maximum of `η` on `[0, 1]`, attained where `cos²(πs) = 3/8`.
pub const BUMP_MAX: f64 = 25.0 / 16.0;

/// `η(s) = sin²(πs) + sin²(2πs)`.
pub fn bump(s: f64) -> f64 {
    (PI * s).sin().powi(2) + (TAU * s).sin().powi(2)
}

/// `H(s) = ∫₀^s η = s − sin(2πs)/(4π) − sin(4πs)/(8π)`.
pub fn bump_primitive(s: f64) -> f64 {
    s - (TAU * s).sin() / (4.0 * PI) - (2.0 * TAU * s).sin() / (8.0 * PI)
}

/// Quadratic gap law `ℓ_n = Z⁻¹ / ((|n|+2)(|n|+3))` with `Z = 5/6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapLaw {
    pub truncation: usize,
}

impl GapLaw {
    /// `Z = Σ_n 1/((|n|+2)(|n|+3)) = 1/6 + 2·(1/3)`.
    pub const NORMALIZER: f64 = 5.0 / 6.0;

    pub fn new(truncation: usize) -> Self {
        Self { truncation }
    }

    pub fn length(n: i64) -> f64 {
        let m = n.unsigned_abs() as f64;
        1.0 / (Self::NORMALIZER * (m + 2.0) * (m + 3.0))
    }

    /// `ℓ_{n+1} / ℓ_n`.
    pub fn ratio(n: i64) -> f64 {
        let (m0, m1) = (n.unsigned_abs() as f64, (n + 1).unsigned_abs() as f64);
        ((m0 + 2.0) * (m0 + 3.0)) / ((m1 + 2.0) * (m1 + 3.0))
    }

    /// `Σ_{|n|>M} ℓ_n = 2 Z⁻¹ / (M+3)`, by telescoping.
    pub fn tail(m: usize) -> f64 {
        2.0 / (Self::NORMALIZER * (m as f64 + 3.0))
    }

    pub fn truncated_tail(&self) -> f64 {
        Self::tail(self.truncation)
    }
}

/// One placed gap `I_n = [a, a + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub n: i64,
    pub a: f64,
    pub len: f64,
}

impl Gap {
    pub fn midpoint(&self) -> f64 {
        self.a + 0.5 * self.len
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x < self.a + self.len
    }

    fn local(&self, x: f64) -> f64 {
        (x - self.a) / self.len
    }
}

/// The constructed Denjoy map, restricted to its placed gaps.
#[derive(Debug, Clone)]
pub struct DenjoyMap {
    rho: IrrationalAngle,
    law: GapLaw,
    /// Indexed by `n + M`.
    gaps: Vec<Gap>,
    /// Gap indices sorted by position on the circle.
    by_position: Vec<usize>,
    /// Lift jump `j_n ∈ {0, 1}` for `g_n`, indexed by `n + M`.
    jumps: Vec<i64>,
}

impl DenjoyMap {
    /// Places the gaps `|n| ≤ M` for the rotation number `rho`.
    pub fn build(rho: &IrrationalAngle, truncation: usize) -> Result<Self> {
        let m = truncation as i64;
        if truncation < 8 {
            return Err(Error::InvalidArgument("Denjoy truncation must be at least 8".into()));
        }
        if !rho.convergents().iter().any(|c| c.q > 2 * truncation as u64) {
            return Err(Error::InvalidArgument(format!(
                "angle needs a convergent with q > {} to order the orbit",
                2 * truncation
            )));
        }
        // exact fractional parts {nρ} = (n·N mod D)/D of the working-precision value
        let num = rho.value_exact().numer().clone();
        let den = rho.value_exact().denom().clone();
        let residues: Vec<BigInt> = (-m..=m).map(|n| (BigInt::from(n) * &num).mod_floor(&den)).collect();
        let mut by_position: Vec<usize> = (0..residues.len()).collect();
        by_position.sort_by(|&i, &j| residues[i].cmp(&residues[j]));

        // two positions closer than the accumulated representation error cannot be ordered
        let slack = BigInt::from(2 * truncation as u64) * &den;
        for w in by_position.windows(2) {
            let gap = &residues[w[1]] - &residues[w[0]];
            if (gap << rho.precision_bits() as usize) <= slack {
                return Err(Error::OrderingUnresolvable(w[0] as i64 - m, w[1] as i64 - m));
            }
        }

        let theta: Vec<f64> = residues
            .iter()
            .map(|r| {
                let q = num_rational::BigRational::new(r.clone(), den.clone());
                num_traits::ToPrimitive::to_f64(&q).unwrap_or(f64::NAN)
            })
            .collect();
        let tail = GapLaw::tail(truncation);
        let mut gaps = vec![Gap { n: 0, a: 0.0, len: 0.0 }; residues.len()];
        let mut placed = CompensatedSum::new();
        for &i in &by_position {
            let n = i as i64 - m;
            gaps[i] = Gap { n, a: placed.value() + tail * theta[i], len: GapLaw::length(n) };
            placed.add(GapLaw::length(n));
        }
        let jumps = (0..residues.len())
            .map(|i| if i + 1 < residues.len() && residues[i + 1] < residues[i] { 1 } else { 0 })
            .collect();
        Ok(Self { rho: rho.clone(), law: GapLaw::new(truncation), gaps, by_position, jumps })
    }

    pub fn angle(&self) -> &IrrationalAngle {
        &self.rho
    }

    pub fn law(&self) -> GapLaw {
        self.law
    }

    pub fn truncation(&self) -> usize {
        self.law.truncation
    }

    /// Gaps ordered by `n = −M..=M`.
    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    /// Gaps ordered by position on the circle.
    pub fn gaps_by_position(&self) -> impl Iterator<Item = &Gap> {
        self.by_position.iter().map(move |&i| &self.gaps[i])
    }

    pub fn gap(&self, n: i64) -> Option<&Gap> {
        let m = self.law.truncation as i64;
        if n.abs() > m {
            None
        } else {
            Some(&self.gaps[(n + m) as usize])
        }
    }

    /// `x₀`, the midpoint of `I_0`.
    pub fn x0(&self) -> f64 {
        self.gaps[self.law.truncation].midpoint()
    }

    /// `c_n = ℓ_{n+1}/ℓ_n − 1`.
    pub fn coupling(n: i64) -> f64 {
        GapLaw::ratio(n) - 1.0
    }

    /// `sup_{I_n} |Dg_n − 1| = |c_n| · max η`.
    pub fn sup_deriv_deviation(n: i64) -> f64 {
        Self::coupling(n).abs() * BUMP_MAX
    }

    /// The placed gap containing `x ∈ [0, 1)`.
    pub fn locate(&self, x: f64) -> Result<&Gap> {
        let pos = self.by_position.partition_point(|&i| self.gaps[i].a <= x);
        if pos == 0 {
            return Err(Error::DomainRestricted(x));
        }
        let g = &self.gaps[self.by_position[pos - 1]];
        if g.contains(x) {
            Ok(g)
        } else {
            Err(Error::DomainRestricted(x))
        }
    }

    /// `g_n` on the gap `I_n`, as a circle point in `I_{n+1}`.
    pub fn gap_map(&self, gap: &Gap, x: f64) -> Result<f64> {
        let next = self.gap(gap.n + 1).ok_or(Error::DomainRestricted(x))?;
        Ok(next.a + (x - gap.a) + Self::coupling(gap.n) * gap.len * bump_primitive(gap.local(x)))
    }

    fn jump(&self, n: i64) -> i64 {
        self.jumps[(n + self.law.truncation as i64) as usize]
    }

    /// Circle map on `[0, 1)`; fails outside the gaps `I_{−M}, ..., I_{M−1}`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let g = self.locate(x)?;
        self.gap_map(g, x)
    }

    /// Lift on `[0, 1)`, consistent with the rotation number.
    pub(crate) fn lift_unit(&self, x: f64) -> Result<f64> {
        let g = self.locate(x)?;
        Ok(self.gap_map(g, x)? + self.jump(g.n) as f64)
    }

    pub(crate) fn inverse_unit(&self, y: f64) -> Result<f64> {
        let target = self.locate(y)?;
        let gap = *self.gap(target.n - 1).ok_or(Error::DomainRestricted(y))?;
        let x = invert_monotone(
            |x| self.gap_map(&gap, x).unwrap_or(f64::NAN),
            |x| 1.0 + Self::coupling(gap.n) * bump(gap.local(x)),
            y,
            gap.a,
            gap.a + gap.len,
        )?;
        Ok(x - self.jump(gap.n) as f64)
    }

    /// `Dg_n(x)` on any placed gap.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        let g = self.locate(x)?;
        Ok(1.0 + Self::coupling(g.n) * bump(g.local(x)))
    }

    /// Serializable gap table.
    pub fn to_record(&self) -> DenjoyRecord {
        DenjoyRecord {
            angle: self.rho.name().to_string(),
            truncation: self.law.truncation,
            gaps: self.gaps.clone(),
        }
    }

    /// Rebuilds from a record and checks the stored table against a fresh build.
    pub fn from_record(record: &DenjoyRecord) -> Result<Self> {
        let rho = IrrationalAngle::parse(&record.angle, crate::angles::DEFAULT_DEPTH)?;
        let map = Self::build(&rho, record.truncation)?;
        let same = map.gaps.len() == record.gaps.len()
            && map.gaps.iter().zip(&record.gaps).all(|(a, b)| a.n == b.n && (a.a - b.a).abs() < 1e-12 && (a.len - b.len).abs() < 1e-15);
        if !same {
            return Err(Error::InvalidMap("gap table does not match the stated angle and truncation".into()));
        }
        Ok(map)
    }
}

/// On-disk form of a [`DenjoyMap`]: records `{n, a, len}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenjoyRecord {
    pub angle: String,
    #[serde(rename = "M")]
    pub truncation: usize,
    pub gaps: Vec<Gap>,
}

/// One atom of an [`AtomicMeasure`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub n: i64,
    pub x: f64,
    pub w: f64,
}

/// A finitely supported measure `Σ w_n δ_{x_n}`, with a bound on the mass it
/// omits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<Atom>,
    /// Normalizer `S` of the underlying infinite sum.
    pub normalizer: f64,
    pub tail_bound: f64,
}

impl AtomicMeasure {
    /// Uniform grid approximation of Lebesgue measure.
    pub fn lebesgue_grid(n: usize) -> Self {
        let atoms = (0..n).map(|i| Atom { n: i as i64, x: i as f64 / n as f64, w: 1.0 / n as f64 }).collect();
        Self { atoms, normalizer: 1.0, tail_bound: 0.0 }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).collect::<CompensatedSum>().value()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, phi: F) -> f64 {
        self.atoms.iter().map(|a| a.w * phi(a.x)).collect::<CompensatedSum>().value()
    }
}

/// Output of [`orbit_weights`]: the measure and both routes to its weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitWeights {
    pub measure: AtomicMeasure,
    /// `S` from chain-rule derivatives along the orbit, plus the closed-form tail.
    pub normalizer_chain: f64,
    /// `S = 1/ℓ_0`.
    pub normalizer_closed: f64,
    /// Largest relative gap between chain-rule `Df^n(x₀)` and `ℓ_n/ℓ_0`.
    pub max_relative_discrepancy: f64,
}

/// `ν = (1/S) Σ_n Df^n(x₀) δ_{f^n(x₀)}` restricted to `|n| ≤ M`.
pub fn orbit_weights(f: &DenjoyMap) -> Result<OrbitWeights> {
    let m = f.truncation() as i64;
    let l0 = GapLaw::length(0);
    let x0 = f.x0();
    let mut chain = vec![(0i64, x0, 0.0f64)];

    let mut x = x0;
    let mut log_d = CompensatedSum::new();
    for n in 1..=m {
        log_d.add(f.deriv(x)?.ln());
        x = f.eval(x)?;
        chain.push((n, x, log_d.value()));
    }
    let mut x = x0;
    let mut log_d = CompensatedSum::new();
    for n in 1..=m {
        let y = f.inverse_unit(x)?;
        x = y - y.floor();
        log_d.add(-f.deriv(x)?.ln());
        chain.push((-n, x, log_d.value()));
    }
    chain.sort_by_key(|c| c.0);

    let mut max_rel = 0.0_f64;
    let mut sum = CompensatedSum::new();
    for &(n, _, ld) in &chain {
        let d = ld.exp();
        let closed = GapLaw::length(n) / l0;
        max_rel = max_rel.max((d - closed).abs() / closed);
        sum.add(d);
    }
    let tail = GapLaw::tail(f.truncation());
    sum.add(tail / l0);
    let s = sum.value();
    let atoms = chain.iter().map(|&(n, x, ld)| Atom { n, x, w: ld.exp() / s }).collect();
    Ok(OrbitWeights {
        measure: AtomicMeasure { atoms, normalizer: s, tail_bound: tail },
        normalizer_chain: s,
        normalizer_closed: 1.0 / l0,
        max_relative_discrepancy: max_rel,
    })
}

/// Result of [`cantor_witness`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CantorWitness {
    /// `μ(u)`; zero because `supp μ` is the Cantor set, disjoint from `I_0`.
    pub mu: f64,
    /// `S_q u(x)/q` at the midpoint of `I_3`, `q = q_8`.
    pub birkhoff_average: f64,
    /// `Var(u)/q`.
    pub envelope: f64,
}

/// `μ(u)` for `u` supported strictly inside `I_0`, with a Birkhoff cross-check.
pub fn cantor_witness(f: &DenjoyMap, u: &TestFunction) -> Result<CantorWitness> {
    let g0 = *f.gap(0).expect("I_0 is always placed");
    let tol = 1e-14 * u.sup_bound().max(1.0);
    for x in [g0.a, g0.a + g0.len] {
        if u.eval(x).abs() > tol {
            return Err(Error::SupportLeak(x));
        }
    }
    let var = u.var_bound().ok_or(Error::NoVarBound)?;
    let q = f.angle().q(8)?;
    let mut x = f.gap(3).ok_or(Error::DomainRestricted(f64::NAN))?.midpoint();
    let mut s = CompensatedSum::new();
    for _ in 0..q {
        s.add(u.eval(x));
        x = f.eval(x)?;
    }
    Ok(CantorWitness { mu: 0.0, birkhoff_average: s.value() / q as f64, envelope: var / q as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_map(m: usize) -> DenjoyMap {
        DenjoyMap::build(&IrrationalAngle::golden(30), m).unwrap()
    }

    #[test]
    fn gap_lengths_sum_to_one() {
        let explicit: f64 = (-5000i64..=5000).map(GapLaw::length).sum();
        assert!((explicit + GapLaw::tail(5000) - 1.0).abs() < 1e-12);
        assert!((GapLaw::length(0) - 0.2).abs() < 1e-16);
    }

    #[test]
    fn tail_closed_form_matches_summation() {
        let brute: f64 = (65..200_000i64).map(|n| 2.0 * GapLaw::length(n)).sum::<f64>();
        // remaining terms beyond 2e5 are ~ 2.4/2e5
        assert!((brute + GapLaw::tail(199_999) - GapLaw::tail(64)).abs() < 1e-12);
        assert!((GapLaw::tail(64) - 2.0 / 67.0 * 6.0 / 5.0).abs() < 1e-16);
    }

    #[test]
    fn endpoints_map_to_endpoints() {
        let f = golden_map(32);
        for n in -32..32 {
            let g = *f.gap(n).unwrap();
            let h = *f.gap(n + 1).unwrap();
            assert!((f.gap_map(&g, g.a).unwrap() - h.a).abs() < 1e-12);
            assert!((f.gap_map(&g, g.a + g.len).unwrap() - (h.a + h.len)).abs() < 1e-12);
        }
    }

    #[test]
    fn midpoint_goes_to_midpoint() {
        let f = golden_map(64);
        let m1 = f.gap(1).unwrap().midpoint();
        assert!((f.eval(f.x0()).unwrap() - m1).abs() < 1e-15);
        assert!((f.eval(f.gap(0).unwrap().a).unwrap() - f.gap(1).unwrap().a).abs() < 1e-15);
    }

    #[test]
    fn last_gap_is_domain_restricted() {
        let f = golden_map(16);
        let x = f.gap(16).unwrap().midpoint();
        assert_eq!(f.eval(x), Err(Error::DomainRestricted(x)));
    }

    #[test]
    fn gaps_are_disjoint() {
        let f = golden_map(64);
        let sorted: Vec<&Gap> = f.gaps_by_position().collect();
        for w in sorted.windows(2) {
            assert!(w[0].a + w[0].len < w[1].a);
        }
        let last = sorted.last().unwrap();
        assert!(last.a + last.len <= 1.0);
    }

    #[test]
    fn largest_derivative_deviation_is_next_to_the_centre() {
        // brute-force scan of Dg_n over each gap
        let f = golden_map(64);
        let mut best = (0i64, 0.0f64);
        for g in f.gaps() {
            if g.n == 64 {
                continue;
            }
            let dev = (0..=400)
                .map(|i| g.a + g.len * i as f64 / 400.0 * 0.999_999)
                .map(|x| (f.deriv(x).unwrap() - 1.0).abs())
                .fold(0.0, f64::max);
            if dev > best.1 {
                best = (g.n, dev);
            }
        }
        assert_eq!(best.0, -1);
        assert!((best.1 - DenjoyMap::sup_deriv_deviation(-1)).abs() < 1e-4);
    }

    #[test]
    fn requires_enough_truncation() {
        assert!(DenjoyMap::build(&IrrationalAngle::golden(30), 4).is_err());
        assert!(DenjoyMap::build(&IrrationalAngle::golden(5), 64).is_err());
    }

    #[test]
    fn record_roundtrip() {
        let f = golden_map(20);
        let rec = f.to_record();
        let json = serde_json::to_string(&rec).unwrap();
        let back: DenjoyRecord = serde_json::from_str(&json).unwrap();
        let g = DenjoyMap::from_record(&back).unwrap();
        assert_eq!(g.gaps(), f.gaps());
    }
}
