//! Birkhoff sums at convergent denominators and the experiments built on them.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::circlemaps::{CircleMap, LiftPoint};
use crate::denjoy::Gap;
use crate::error::{Error, Result};
use crate::numerics::{max_abs, CompensatedSum};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    Constant,
    FourierMode,
    GapBump,
    LogDeriv,
    Custom,
}

/// A periodic observable with its derivative and a bound on its variation.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    kind: TestKind,
    value: RealFn,
    deriv: Option<RealFn>,
    var_bound: Option<f64>,
    sup_bound: f64,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("var_bound", &self.var_bound)
            .finish()
    }
}

fn wrap(x: f64) -> f64 {
    x - x.floor()
}

impl TestFunction {
    pub fn custom<U, D>(name: &str, u: U, du: Option<D>, var_bound: Option<f64>, sup_bound: f64) -> Self
    where
        U: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            kind: TestKind::Custom,
            value: Arc::new(u),
            deriv: du.map(|d| Arc::new(d) as RealFn),
            var_bound,
            sup_bound,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            name: format!("const({c})"),
            kind: TestKind::Constant,
            value: Arc::new(move |_| c),
            deriv: Some(Arc::new(|_| 0.0)),
            var_bound: Some(0.0),
            sup_bound: c.abs(),
        }
    }

    /// `cos(2πmx)`.
    pub fn cos_mode(m: u32) -> Self {
        let w = TAU * m as f64;
        Self {
            name: format!("cos{m}"),
            kind: TestKind::FourierMode,
            value: Arc::new(move |x| (w * x).cos()),
            deriv: Some(Arc::new(move |x| -w * (w * x).sin())),
            var_bound: Some(4.0 * m as f64),
            sup_bound: 1.0,
        }
    }

    /// `sin(2πmx)`.
    pub fn sin_mode(m: u32) -> Self {
        let w = TAU * m as f64;
        Self {
            name: format!("sin{m}"),
            kind: TestKind::FourierMode,
            value: Arc::new(move |x| (w * x).sin()),
            deriv: Some(Arc::new(move |x| w * (w * x).cos())),
            var_bound: Some(4.0 * m as f64),
            sup_bound: 1.0,
        }
    }

    /// Bump `height · sin²(π s)` on a gap, `s` the local coordinate; zero elsewhere.
    pub fn gap_plateau(gap: Gap, height: f64) -> Self {
        let (a, len) = (gap.a, gap.len);
        Self {
            name: format!("plateau(I_{})", gap.n),
            kind: TestKind::GapBump,
            value: Arc::new(move |x| {
                let s = (wrap(x) - a) / len;
                if (0.0..=1.0).contains(&s) {
                    height * (PI * s).sin().powi(2)
                } else {
                    0.0
                }
            }),
            deriv: Some(Arc::new(move |x| {
                let s = (wrap(x) - a) / len;
                if (0.0..=1.0).contains(&s) {
                    height * PI * (TAU * s).sin() / len
                } else {
                    0.0
                }
            })),
            var_bound: Some(2.0 * height.abs()),
            sup_bound: height.abs(),
        }
    }

    /// `C¹` bump supported in a gap whose derivative at the gap midpoint is
    /// `slope`: `u = slope · len · ψ(s)` with `ψ(s) = −sin²(πs) sin(2πs)/(2π)`,
    /// `ψ'(1/2) = 1`.
    pub fn gap_bump(gap: Gap, slope: f64) -> Self {
        let (a, len) = (gap.a, gap.len);
        let psi = |s: f64| -(PI * s).sin().powi(2) * (TAU * s).sin() / TAU;
        let dpsi = |s: f64| {
            let (sp, cp) = (PI * s).sin_cos();
            -(sp * cp * (TAU * s).sin() + sp * sp * (TAU * s).cos())
        };
        // Var(ψ) = Σ |ψ| at its interior extrema; dψ vanishes at s = 1/3, 2/3
        let var_psi = 4.0 * psi(1.0 / 3.0).abs();
        let sup_psi = psi(1.0 / 3.0).abs();
        Self {
            name: format!("bump(I_{}, slope {slope})", gap.n),
            kind: TestKind::GapBump,
            value: Arc::new(move |x| {
                let s = (wrap(x) - a) / len;
                if (0.0..=1.0).contains(&s) {
                    slope * len * psi(s)
                } else {
                    0.0
                }
            }),
            deriv: Some(Arc::new(move |x| {
                let s = (wrap(x) - a) / len;
                if (0.0..=1.0).contains(&s) {
                    slope * dpsi(s)
                } else {
                    0.0
                }
            })),
            var_bound: Some(slope.abs() * len * var_psi),
            sup_bound: slope.abs() * len * sup_psi,
        }
    }

    /// `log Df` for maps with a closed-form `(log Df)'`.
    pub fn log_deriv(f: &CircleMap) -> Result<Self> {
        f.log_deriv_slope(0.0).ok_or_else(|| Error::InvalidMap("map has no closed-form log-derivative slope".into()))?;
        let g = f.clone();
        let h = f.clone();
        let sup = (0..4096).map(|i| f.deriv(i as f64 / 4096.0).map(|d| d.ln().abs())).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: "logDf".into(),
            kind: TestKind::LogDeriv,
            value: Arc::new(move |x| g.deriv(x).map(f64::ln).unwrap_or(f64::NAN)),
            deriv: Some(Arc::new(move |x| h.log_deriv_slope(wrap(x)).unwrap_or(f64::NAN))),
            var_bound: f.var_bound(),
            sup_bound: sup.into_iter().fold(0.0, f64::max),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> TestKind {
        self.kind
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn eval_deriv(&self, x: f64) -> Option<f64> {
        self.deriv.as_ref().map(|d| d(x))
    }

    pub fn has_deriv(&self) -> bool {
        self.deriv.is_some()
    }

    pub fn var_bound(&self) -> Option<f64> {
        self.var_bound
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// `u'` as a test function (no derivative of its own).
    pub fn derivative(&self) -> Option<TestFunction> {
        let d = self.deriv.clone()?;
        Some(Self {
            name: format!("d({})", self.name),
            kind: TestKind::Custom,
            value: d,
            deriv: None,
            var_bound: None,
            sup_bound: f64::NAN,
        })
    }
}

/// `Σ_{j<n} u(f^j x)` with compensated accumulation.
pub fn birkhoff_sum(f: &CircleMap, u: &TestFunction, n: u64, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("Birkhoff sum needs n >= 1".into()));
    }
    let mut p = LiftPoint::new(x);
    let mut s = CompensatedSum::new();
    for j in 0..n {
        s.add(u.eval(p.frac));
        if j + 1 < n {
            p = f.step(p)?;
        }
    }
    Ok(s.value())
}

/// `μ(u)` with its Denjoy–Koksma error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub value: f64,
    pub error_bound: f64,
}

/// `S_{q_k} u(x₀)/q_k` with error bound `Var(u)/q_k`.
pub fn mu_mean(f: &CircleMap, u: &TestFunction, k: usize) -> Result<MeanEstimate> {
    let var = u.var_bound().ok_or(Error::NoVarBound)?;
    let q = f.require_angle()?.q(k)?;
    let s = birkhoff_sum(f, u, q, f.base_point())?;
    Ok(MeanEstimate { value: s / q as f64, error_bound: var / q as f64 })
}

/// Row of [`corollary_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BirkhoffReport {
    pub k: usize,
    pub q: u64,
    pub sup_deviation: f64,
    pub grid_size: usize,
    pub mu_estimate: MeanEstimate,
}

impl BirkhoffReport {
    /// Classical envelope `Var(u) + q·(μ error)`.
    pub fn envelope(&self, var: f64) -> f64 {
        var + self.q as f64 * self.mu_estimate.error_bound
    }
}

/// `sup_x |S_{q_k}u(x) − q_k μ(u)|` over a uniform grid for each `k`.
///
/// `μ(u)` is estimated once, at depth `max(k) + 2`. Grid sups are lower bounds
/// of the true sups.
pub fn corollary_experiment(
    f: &CircleMap,
    u: &TestFunction,
    ks: impl IntoIterator<Item = usize>,
    grid: usize,
) -> Result<Vec<BirkhoffReport>> {
    let ks: Vec<usize> = ks.into_iter().collect();
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let angle = f.require_angle()?;
    let mu = mu_mean(f, u, (kmax + 2).min(angle.depth()))?;
    ks.iter()
        .map(|&k| {
            let q = angle.q(k)?;
            let devs = (0..grid)
                .into_par_iter()
                .map(|i| birkhoff_sum(f, u, q, i as f64 / grid as f64).map(|s| s - q as f64 * mu.value))
                .collect::<Result<Vec<_>>>()?;
            Ok(BirkhoffReport { k, q, sup_deviation: max_abs(&devs), grid_size: grid, mu_estimate: mu })
        })
        .collect()
}

/// Row of [`herman_check`]: `C⁰` and `C¹` distance of `f^{q_k}` to the
/// identity (shifted by `p_k`) over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HermanRow {
    pub k: usize,
    pub q: u64,
    pub c0_dev: f64,
    pub c1_dev: f64,
    /// `sup |log Df^{q_k}|`, for the Denjoy inequality.
    pub max_abs_log_deriv: f64,
}

pub fn herman_check(f: &CircleMap, ks: impl IntoIterator<Item = usize>, grid: usize) -> Result<Vec<HermanRow>> {
    let angle = f.require_angle()?;
    ks.into_iter()
        .map(|k| {
            let c = angle.convergent(k)?;
            let rows = (0..grid)
                .into_par_iter()
                .map(|i| {
                    let x = LiftPoint::new(i as f64 / grid as f64);
                    let it = f.iterate_from(c.q as i64, x)?;
                    Ok((it.point.displacement(x, c.p as i64), it.deriv() - 1.0, it.log_deriv))
                })
                .collect::<Result<Vec<_>>>()?;
            let c0: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let c1: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let ld: Vec<f64> = rows.iter().map(|r| r.2).collect();
            Ok(HermanRow { k, q: c.q, c0_dev: max_abs(&c0), c1_dev: max_abs(&c1), max_abs_log_deriv: max_abs(&ld) })
        })
        .collect()
}

/// `max / last` acceptance rule for decay experiments.
pub fn decays(values: &[f64], ratio: f64) -> bool {
    match (values.last(), values.iter().copied().reduce(f64::max)) {
        (Some(&last), Some(max)) => last < ratio * max,
        _ => false,
    }
}
