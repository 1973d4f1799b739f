//! Small numerical helpers shared by the dynamical modules.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Uniform periodic grid `i / n`, `i = 0..n`.
pub fn periodic_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

/// Composite trapezoid rule on a uniform periodic grid of `n` points over one period.
pub fn periodic_mean<F>(n: usize, f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let s: CompensatedSum = (0..n).map(|i| f(i as f64 / n as f64)).collect();
    s.value() / n as f64
}

/// Fallible variant of [`periodic_mean`].
pub fn try_periodic_mean<F, E>(n: usize, f: F) -> Result<f64, E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    let mut s = CompensatedSum::new();
    for i in 0..n {
        s.add(f(i as f64 / n as f64)?);
    }
    Ok(s.value() / n as f64)
}

/// Maximum of a slice, ignoring nothing: NaN propagates.
pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v.abs()) })
}
