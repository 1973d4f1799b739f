use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::invert_monotone;
use crate::error::{Error, Result};

/// `h(x) = x + Σ_m α_m cos(2πmx) + β_m sin(2πmx)`, `m = 1, 2, ...`.
///
/// Construction certifies `sup|h' − 1| ≤ Σ 2πm(|α_m| + |β_m|) < 1`, so `h` is
/// the lift of a circle diffeomorphism. The inverse is tabulated on a uniform
/// grid at construction and refined pointwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct TrigPerturbation {
    modes: Vec<(f64, f64)>,
    inverse_table: Vec<f64>,
}

const INVERSE_GRID: usize = 1024;

impl TrigPerturbation {
    pub fn new(modes: Vec<(f64, f64)>) -> Result<Self> {
        if modes.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidMap("non-finite perturbation coefficient".into()));
        }
        let mut h = Self { modes, inverse_table: Vec::new() };
        let slack = h.deriv_deviation_bound();
        if slack >= 1.0 {
            return Err(Error::InvalidMap(format!("perturbation not certified monotone: sup|h'-1| <= {slack}")));
        }
        let base = invert_monotone(|x| h.eval(x), |x| h.deriv(x), 0.0, -1.0, 1.0)?;
        let mut table = Vec::with_capacity(INVERSE_GRID + 1);
        for i in 0..INVERSE_GRID {
            let y = i as f64 / INVERSE_GRID as f64;
            table.push(invert_monotone(|x| h.eval(x), |x| h.deriv(x), y, y - 1.0, y + 1.0)?);
        }
        table.push(base + 1.0);
        h.inverse_table = table;
        Ok(h)
    }

    pub fn identity() -> Self {
        Self::new(Vec::new()).expect("identity is monotone")
    }

    /// `(α_m, β_m)` for `m = 1..`.
    pub fn modes(&self) -> &[(f64, f64)] {
        &self.modes
    }

    pub fn eval(&self, x: f64) -> f64 {
        x + self
            .modes
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let t = TAU * (i + 1) as f64 * x;
                a * t.cos() + b * t.sin()
            })
            .sum::<f64>()
    }

    pub fn deriv(&self, x: f64) -> f64 {
        1.0 + self
            .modes
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let w = TAU * (i + 1) as f64;
                let t = w * x;
                w * (b * t.cos() - a * t.sin())
            })
            .sum::<f64>()
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        -self
            .modes
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let w = TAU * (i + 1) as f64;
                let t = w * x;
                w * w * (a * t.cos() + b * t.sin())
            })
            .sum::<f64>()
    }

    /// `Σ 2πm(|α_m| + |β_m|)`.
    pub fn deriv_deviation_bound(&self) -> f64 {
        self.modes.iter().enumerate().map(|(i, (a, b))| TAU * (i + 1) as f64 * (a.abs() + b.abs())).sum()
    }

    pub fn min_deriv_bound(&self) -> f64 {
        1.0 - self.deriv_deviation_bound()
    }

    /// `Σ (2πm)²(|α_m| + |β_m|)`.
    pub fn second_deriv_bound(&self) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .map(|(i, (a, b))| (TAU * (i + 1) as f64).powi(2) * (a.abs() + b.abs()))
            .sum()
    }

    /// `h⁻¹(y)` for any real `y`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let w = y.floor();
        let y0 = y - w;
        let pos = y0 * INVERSE_GRID as f64;
        let i = (pos as usize).min(INVERSE_GRID - 1);
        let (lo, hi) = (self.inverse_table[i] - 1e-12, self.inverse_table[i + 1] + 1e-12);
        Ok(w + invert_monotone(|x| self.eval(x), |x| self.deriv(x), y0, lo, hi)?)
    }
}

impl TryFrom<Vec<(f64, f64)>> for TrigPerturbation {
    type Error = Error;

    fn try_from(modes: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(modes)
    }
}

impl From<TrigPerturbation> for Vec<(f64, f64)> {
    fn from(h: TrigPerturbation) -> Self {
        h.modes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TrigPerturbation {
        TrigPerturbation::new(vec![(0.02, 0.03), (-0.01, 0.008), (0.004, -0.003)]).unwrap()
    }

    #[test]
    fn inverse_matches_forward() {
        let h = sample();
        for i in 0..200 {
            let y = -1.3 + i as f64 * 0.0173;
            let x = h.inverse(y).unwrap();
            assert!((h.eval(x) - y).abs() < 1e-14, "y = {y}");
        }
        for i in 0..=INVERSE_GRID {
            let y = i as f64 / INVERSE_GRID as f64;
            let x = h.inverse(y).unwrap();
            assert!((h.eval(x) - y).abs() < 1e-14, "y = {y}");
        }
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(TrigPerturbation::new(vec![(0.0, 0.2)]).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = sample();
        let e = 1e-6;
        for i in 0..20 {
            let x = i as f64 / 20.0;
            let fd = (h.eval(x + e) - h.eval(x - e)) / (2.0 * e);
            assert!((fd - h.deriv(x)).abs() < 1e-8);
            let fd2 = (h.deriv(x + e) - h.deriv(x - e)) / (2.0 * e);
            assert!((fd2 - h.second_deriv(x)).abs() < 1e-6);
        }
    }
}
