//! Continued-fraction machinery for rotation numbers.
//!
//! Every experiment in the crate is indexed by the denominators `q_k` of the
//! convergents of an irrational angle. Indexing follows the usual convention
//! `ρ = [0; a_1, a_2, ...]`, `p_0/q_0 = 0/1`, `p_k/q_k = [0; a_1, ..., a_k]`,
//! so the golden mean has `q_1, q_2, ... = 1, 2, 3, 5, 8, ...`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Default maximum convergent index.
pub const DEFAULT_DEPTH: usize = 30;

/// Default working precision in bits for closed-form angles.
pub const DEFAULT_PRECISION_BITS: u32 = 256;

/// How the partial quotients of an angle are known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    /// Purely periodic expansion `[0; period, period, ...]`, known to any depth.
    QuadraticPeriodic { period: Vec<u64> },
    /// Quotients obtained numerically from a finite-precision value.
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub k: usize,
    pub p: u64,
    pub q: u64,
}

impl Convergent {
    pub fn to_f64(self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// An irrational rotation number with its partial quotients and convergents.
#[derive(Debug, Clone)]
pub struct IrrationalAngle {
    name: String,
    value: BigRational,
    value_f64: f64,
    cf: Vec<u64>,
    convergents: Vec<Convergent>,
    precision_bits: u32,
    exactness: Exactness,
}

impl IrrationalAngle {
    /// Angle with purely periodic expansion `[0; period, period, ...]`.
    ///
    /// The high-precision value is the convergent whose denominator exceeds
    /// `2^(precision/2)`, so it agrees with the true quadratic irrational to
    /// about `precision` bits.
    pub fn periodic(name: &str, period: &[u64], depth: usize, precision_bits: u32) -> Result<Self> {
        if period.is_empty() || period.contains(&0) {
            return Err(Error::InvalidArgument("period quotients must be positive".into()));
        }
        if depth == 0 {
            return Err(Error::InvalidArgument("depth must be positive".into()));
        }
        let cf: Vec<u64> = period.iter().copied().cycle().take(depth).collect();
        let convergents = convergents(&cf)?;
        let q_top = convergents.last().map(|c| c.q).unwrap_or(1) as f64;
        let needed = (2.0 * q_top.log2()).ceil() as u32 + 64;
        let precision_bits = precision_bits.max(needed);

        // Fold the periodic expansion in big integers until q^2 > 2^precision.
        let target = BigInt::one() << precision_bits as usize;
        let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
        let (mut p, mut q) = (BigInt::zero(), BigInt::one());
        for &a in period.iter().cycle() {
            let a = BigInt::from(a);
            let p_next = &a * &p + &p_prev;
            let q_next = &a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            if &q * &q > target {
                break;
            }
        }
        let value = BigRational::new(p, q);
        let value_f64 = value.to_f64().unwrap_or(f64::NAN);
        Ok(Self {
            name: name.to_string(),
            value,
            value_f64,
            cf,
            convergents,
            precision_bits,
            exactness: Exactness::QuadraticPeriodic { period: period.to_vec() },
        })
    }

    /// The golden mean `(√5 − 1)/2 = [0; 1, 1, 1, ...]`.
    pub fn golden(depth: usize) -> Self {
        Self::periodic("golden", &[1], depth, DEFAULT_PRECISION_BITS).expect("golden mean expansion")
    }

    /// `√2 − 1 = [0; 2, 2, 2, ...]`.
    pub fn silver(depth: usize) -> Self {
        Self::periodic("silver", &[2], depth, DEFAULT_PRECISION_BITS).expect("silver mean expansion")
    }

    /// Angle given by a decimal literal in `(0, 1)`, treated as exact.
    ///
    /// The working precision is the number of bits carried by the literal, and
    /// the expansion fails with [`Error::RationalDetected`] when it runs out
    /// before `depth` quotients.
    pub fn from_decimal(text: &str, depth: usize) -> Result<Self> {
        let value = parse_decimal(text)?;
        let digits = text.trim().split('.').nth(1).map(str::len).unwrap_or(0).max(1);
        let precision_bits = (digits as f64 * std::f64::consts::LOG2_10).floor() as u32;
        let cf = cf_expand(&value, depth, precision_bits)?;
        let convergents = convergents(&cf)?;
        let value_f64 = value.to_f64().unwrap_or(f64::NAN);
        Ok(Self {
            name: text.trim().to_string(),
            value,
            value_f64,
            cf,
            convergents,
            precision_bits,
            exactness: Exactness::Numeric,
        })
    }

    /// Parses `golden`, `silver` (alias `sqrt2-1`) or a decimal literal.
    pub fn parse(text: &str, depth: usize) -> Result<Self> {
        match text.trim() {
            "golden" => Ok(Self::golden(depth)),
            "silver" | "sqrt2-1" => Ok(Self::silver(depth)),
            other => Self::from_decimal(other, depth),
        }
    }

    /// [`parse`](Self::parse) with a working precision for the named angles;
    /// decimal literals keep their own.
    pub fn parse_with_precision(text: &str, depth: usize, precision_bits: u32) -> Result<Self> {
        match text.trim() {
            "golden" => Self::periodic("golden", &[1], depth, precision_bits),
            "silver" | "sqrt2-1" => Self::periodic("silver", &[2], depth, precision_bits),
            other => Self::from_decimal(other, depth),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self) -> f64 {
        self.value_f64
    }

    pub fn value_exact(&self) -> &BigRational {
        &self.value
    }

    /// Partial quotients `a_1, ..., a_depth`.
    pub fn cf(&self) -> &[u64] {
        &self.cf
    }

    pub fn depth(&self) -> usize {
        self.cf.len()
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn exactness(&self) -> &Exactness {
        &self.exactness
    }

    /// Convergents for `k = 1..=depth`.
    pub fn convergents(&self) -> &[Convergent] {
        &self.convergents
    }

    /// Convergent `p_k/q_k`; `k = 0` gives `0/1`.
    pub fn convergent(&self, k: usize) -> Result<Convergent> {
        if k == 0 {
            return Ok(Convergent { k: 0, p: 0, q: 1 });
        }
        self.convergents
            .get(k - 1)
            .copied()
            .ok_or(Error::DepthExceeded { k, depth: self.depth() })
    }

    pub fn q(&self, k: usize) -> Result<u64> {
        self.convergent(k).map(|c| c.q)
    }

    /// Signed `q_k ρ − p_k` in high precision, rounded to `f64`.
    pub fn signed_error(&self, k: usize) -> Result<f64> {
        let c = self.convergent(k)?;
        let e = &self.value * BigRational::from_integer(c.q.into()) - BigRational::from_integer(c.p.into());
        Ok(e.to_f64().unwrap_or(f64::NAN))
    }
}

/// `|q_k ρ − p_k|`, evaluated at the angle's working precision.
pub fn approximation_error(rho: &IrrationalAngle, k: usize) -> Result<f64> {
    rho.signed_error(k).map(f64::abs)
}

/// Standard continued-fraction expansion of `x ∈ (0, 1)`.
///
/// The expansion runs the Euclidean algorithm on the exact rational `x`. It
/// stops with [`Error::RationalDetected`] as soon as a fractional remainder
/// drops below `2^(-precision_bits/2)` before `depth` quotients are produced.
pub fn cf_expand(x: &BigRational, depth: usize, precision_bits: u32) -> Result<Vec<u64>> {
    if !(x.is_positive() && x < &BigRational::one()) {
        return Err(Error::InvalidArgument("cf_expand needs 0 < x < 1".into()));
    }
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    // remainder r/num < 2^(-h)  <=>  r << h < num
    let half = (precision_bits / 2) as usize;
    let mut quotients = Vec::with_capacity(depth);
    while quotients.len() < depth {
        let (a, rem) = den.div_rem(&num);
        let a = a.to_u64().ok_or(Error::ConvergentOverflow { k: quotients.len() + 1 })?;
        quotients.push(a);
        if quotients.len() == depth {
            break;
        }
        if (&rem << half) < num {
            return Err(Error::RationalDetected { quotients });
        }
        den = num;
        num = rem;
    }
    Ok(quotients)
}

/// Convergents of `[0; a_1, ..., a_n]` by the three-term recurrence.
pub fn convergents(cf: &[u64]) -> Result<Vec<Convergent>> {
    let (mut p_prev, mut q_prev) = (1u64, 0u64);
    let (mut p, mut q) = (0u64, 1u64);
    let mut out = Vec::with_capacity(cf.len());
    for (i, &a) in cf.iter().enumerate() {
        let k = i + 1;
        let overflow = || Error::ConvergentOverflow { k };
        let p_next = a.checked_mul(p).and_then(|v| v.checked_add(p_prev)).ok_or_else(overflow)?;
        let q_next = a.checked_mul(q).and_then(|v| v.checked_add(q_prev)).ok_or_else(overflow)?;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
        out.push(Convergent { k, p, q });
    }
    Ok(out)
}

/// Folds `[0; a_1, ..., a_n]` back into an exact rational, bottom-up.
pub fn fold(cf: &[u64]) -> BigRational {
    let mut acc = BigRational::zero();
    for &a in cf.iter().rev() {
        acc = (BigRational::from_integer(a.into()) + acc).recip();
    }
    acc
}

fn parse_decimal(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::InvalidArgument(format!("not a decimal in (0,1): {t:?}"));
    let (int_part, frac_part) = t.split_once('.').unwrap_or((t, ""));
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10u8), frac_part.len());
    let v = BigRational::new(numer, denom);
    if !(v.is_positive() && v < BigRational::one()) {
        return Err(bad());
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Integer recurrence oracle, independent of [`convergents`].
    fn brute_convergent(cf: &[u64]) -> (u64, u64) {
        // evaluate [0; a_1..a_k] as a fraction by bottom-up folding with integers
        let (mut num, mut den) = (0u64, 1u64);
        for &a in cf.iter().rev() {
            // 1 / (a + num/den) = den / (a*den + num)
            let new_den = a * den + num;
            num = den;
            den = new_den;
        }
        (num, den)
    }

    #[test]
    fn golden_expansion_is_all_ones() {
        let g = IrrationalAngle::golden(12);
        assert_eq!(cf_expand(g.value_exact(), 10, g.precision_bits()).unwrap(), vec![1; 10]);
    }

    #[test]
    fn silver_expansion_is_all_twos() {
        let s = IrrationalAngle::silver(12);
        assert_eq!(cf_expand(s.value_exact(), 6, s.precision_bits()).unwrap(), vec![2; 6]);
    }

    #[test]
    fn one_half_is_detected_as_rational() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(cf_expand(&half, 5, 64), Err(Error::RationalDetected { quotients: vec![2] }));
    }

    #[test]
    fn fibonacci_denominators() {
        let c = convergents(&[1; 6]).unwrap();
        let q: Vec<u64> = c.iter().map(|c| c.q).collect();
        assert_eq!(q, vec![1, 2, 3, 5, 8, 13]);
    }

    #[test]
    fn two_two_two() {
        let c = convergents(&[2, 2, 2]).unwrap();
        let pq: Vec<(u64, u64)> = c.iter().map(|c| (c.p, c.q)).collect();
        let oracle: Vec<(u64, u64)> = (1..=3).map(|k| brute_convergent(&[2, 2, 2][..k])).collect();
        assert_eq!(pq, oracle);
        assert_eq!(pq, vec![(1, 2), (2, 5), (5, 12)]);
    }

    #[test]
    fn single_quotient() {
        assert_eq!(convergents(&[7]).unwrap(), vec![Convergent { k: 1, p: 1, q: 7 }]);
    }

    #[test]
    fn golden_error_at_one_half() {
        // p_2/q_2 = 1/2; |2ρ − 1| = √5 − 2
        let g = IrrationalAngle::golden(10);
        assert_eq!(g.convergent(2).unwrap(), Convergent { k: 2, p: 1, q: 2 });
        let e = approximation_error(&g, 2).unwrap();
        assert!((e - (5f64.sqrt() - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn golden_error_ratio_from_table() {
        // brute force: errors from the convergent table at high precision
        let g = IrrationalAngle::golden(30);
        let errs: Vec<f64> = (0..=25).map(|k| approximation_error(&g, k).unwrap()).collect();
        let ratio = errs[25] / errs[24];
        assert!((ratio - g.value()).abs() < 1e-9, "ratio {ratio}");
    }

    #[test]
    fn depth_exceeded() {
        let g = IrrationalAngle::golden(5);
        assert_eq!(approximation_error(&g, 6), Err(Error::DepthExceeded { k: 6, depth: 5 }));
    }

    #[test]
    fn decimal_angles() {
        let a = IrrationalAngle::from_decimal("0.3", 5);
        assert!(matches!(a, Err(Error::RationalDetected { .. })));
        let b = IrrationalAngle::parse("0.41421356237309504880168872", 8).unwrap();
        assert_eq!(b.cf(), &[2; 8]);
        assert!(IrrationalAngle::from_decimal("1.5", 3).is_err());
        assert!(IrrationalAngle::from_decimal("abc", 3).is_err());
    }

    #[test]
    fn fold_reproduces_value() {
        let g = IrrationalAngle::golden(30);
        let folded = fold(g.cf()).to_f64().unwrap();
        let q = g.q(30).unwrap() as f64;
        assert!((folded - g.value()).abs() < 1.0 / (q * q));
    }
}
