//! Experiment runner behind the `circlab` binary.
//!
//! Every subcommand resolves to an [`ExperimentConfig`], runs in memory and
//! writes its artifact in one piece, so an invalid configuration leaves no
//! files behind. Exit codes: 0 success, 1 tolerance check failed (artifact
//! still written), 2 invalid configuration, 3 I/O failure, 4 the experiment
//! itself raised an error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::angles::{approximation_error, IrrationalAngle, DEFAULT_DEPTH, DEFAULT_PRECISION_BITS};
use crate::circlemaps::{rotation_interval, tune_parameter, CircleMap, Family, TrigPerturbation};
use crate::cohomology::{
    automorphic_defect, coboundary_defect_c1, distribution_eval, invariance_check, lemma_defect,
    lemma_identity_residual, nu_vs_lambda, solve_conjugated_coboundary, InvariantDistribution, QUADRATURE_GRID,
};
use crate::denjoy::{orbit_weights, DenjoyMap, DenjoyRecord};
use crate::ergodic::{corollary_experiment, decays, herman_check, TestFunction};
use crate::error::Error;

/// Failures that stop a run before an artifact exists.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("experiment error: {0}")]
    Experiment(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigInvalid(_) => 2,
            CliError::Io(_) => 3,
            CliError::Experiment(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::InvalidMap(_)
            | Error::RationalDetected { .. }
            | Error::DepthExceeded { .. }
            | Error::ConvergentOverflow { .. } => CliError::ConfigInvalid(e.to_string()),
            other => CliError::Experiment(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

// ---------------------------------------------------------------------------
// configuration

/// An angle given by name (`golden`, `silver`, `sqrt2-1`) or decimal value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Name(String),
    Value(f64),
}

impl AngleSpec {
    pub fn resolve(&self, depth: usize, precision_bits: u32) -> CliResult<IrrationalAngle> {
        let text = match self {
            AngleSpec::Name(s) => s.clone(),
            AngleSpec::Value(v) => v.to_string(),
        };
        Ok(IrrationalAngle::parse_with_precision(&text, depth, precision_bits)?)
    }
}

fn default_depth() -> usize {
    DEFAULT_DEPTH
}

/// Map specification, tagged by `family`.
///
/// An Arnold spec without `a` but with `angle` is tuned so that its rotation
/// number is that angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapSpec {
    Rotation {
        rho: AngleSpec,
        #[serde(default = "default_depth")]
        depth: usize,
    },
    Arnold {
        eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angle: Option<AngleSpec>,
        #[serde(default = "default_depth")]
        depth: usize,
        #[serde(default = "default_certify_depth")]
        certify_depth: usize,
    },
    Conjugated {
        rho: AngleSpec,
        h: Vec<(f64, f64)>,
        #[serde(default = "default_depth")]
        depth: usize,
    },
    Denjoy {
        angle: AngleSpec,
        #[serde(rename = "M")]
        m: usize,
        #[serde(default = "default_depth")]
        depth: usize,
    },
}

fn default_certify_depth() -> usize {
    18
}

/// Inclusive range of convergent indices, written `4..10`, `4..=10` or `7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KRange {
    pub lo: usize,
    pub hi: usize,
}

impl KRange {
    pub fn iter(self) -> impl Iterator<Item = usize> {
        self.lo..=self.hi
    }
}

impl std::str::FromStr for KRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad k range {s:?}");
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
            None => (s.trim(), s.trim()),
        };
        let lo: usize = lo.parse().map_err(|_| bad())?;
        let hi: usize = hi.parse().map_err(|_| bad())?;
        if lo == 0 || hi < lo {
            return Err(bad());
        }
        Ok(Self { lo, hi })
    }
}

impl std::fmt::Display for KRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl Serialize for KRange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn default_u() -> String {
    "cos".into()
}

fn default_kmin() -> usize {
    4
}

fn default_kmax() -> usize {
    12
}

fn default_tests() -> Vec<String> {
    vec!["gap".into(), "fourier".into()]
}

/// One experiment, tagged by `name`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CommandConfig {
    Cf {
        angle: AngleSpec,
        #[serde(default = "default_cf_depth")]
        depth: usize,
    },
    Rotnum {
        map: MapSpec,
        #[serde(default = "default_rotnum_depth")]
        depth: usize,
        #[serde(default = "default_max_q")]
        max_q: u64,
    },
    Tune {
        eps: f64,
        angle: AngleSpec,
        #[serde(default = "default_certify_depth")]
        depth: usize,
    },
    Lemma {
        map: MapSpec,
        k: KRange,
    },
    Corollary {
        map: MapSpec,
        #[serde(default = "default_u")]
        u: String,
        #[serde(default = "default_kmin")]
        kmin: usize,
        #[serde(default = "default_kmax")]
        kmax: usize,
    },
    Herman {
        map: MapSpec,
        #[serde(default = "default_kmin")]
        kmin: usize,
        #[serde(default = "default_kmax")]
        kmax: usize,
    },
    DenjoyBuild {
        angle: AngleSpec,
        #[serde(rename = "M")]
        m: usize,
        #[serde(default = "default_depth")]
        depth: usize,
    },
    DenjoyNu {
        map: MapSpec,
    },
    Distribution {
        map: MapSpec,
        #[serde(default = "default_tests")]
        tests: Vec<String>,
    },
    Solve {
        map: MapSpec,
        #[serde(default = "default_u")]
        u: String,
        #[serde(default = "default_cutoff")]
        cutoff: usize,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "default_center_k")]
        k: usize,
    },
}

fn default_cf_depth() -> usize {
    20
}

fn default_rotnum_depth() -> usize {
    12
}

fn default_max_q() -> u64 {
    10_000_000
}

fn default_cutoff() -> usize {
    64
}

fn default_samples() -> usize {
    256
}

fn default_center_k() -> usize {
    22
}

fn default_precision() -> u32 {
    DEFAULT_PRECISION_BITS
}

fn default_tol_scale() -> f64 {
    1.0
}

/// A fully specified run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandConfig,
    /// Grid size for sup-norms; each command has its own default.
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default = "default_precision")]
    pub precision_bits: u32,
    /// Multiplies every acceptance tolerance.
    #[serde(default = "default_tol_scale")]
    pub tol_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(command: CommandConfig) -> Self {
        Self { command, grid: None, precision_bits: DEFAULT_PRECISION_BITS, tol_scale: 1.0, out: None }
    }

    /// Parses and validates a JSON configuration.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        if !(self.tol_scale.is_finite() && self.tol_scale > 0.0) {
            return Err(CliError::ConfigInvalid("tol-scale must be positive".into()));
        }
        if self.grid == Some(0) {
            return Err(CliError::ConfigInvalid("grid must be positive".into()));
        }
        Ok(())
    }

    fn grid_or(&self, default: usize) -> usize {
        self.grid.unwrap_or(default)
    }

    /// The configuration with command defaults filled in, as echoed in outputs.
    pub fn resolved(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let grid = match &self.command {
            CommandConfig::Lemma { .. } | CommandConfig::Solve { .. } => Some(1024),
            CommandConfig::Corollary { .. } | CommandConfig::Herman { .. } => Some(512),
            CommandConfig::Distribution { .. } => Some(QUADRATURE_GRID),
            _ => None,
        };
        v["grid"] = json!(self.grid.or(grid));
        v
    }
}

// ---------------------------------------------------------------------------
// map resolution

/// Reads `--map`: inline JSON when it starts with `{`, otherwise a file path.
/// Files may hold a map spec or a serialized Denjoy gap table.
pub fn read_map_arg(arg: &str) -> CliResult<MapSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::Io(format!("{arg}: {e}")))?
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::ConfigInvalid(format!("{arg}: {e}")))?;
    if value.get("family").is_some() {
        return serde_json::from_value(value).map_err(|e| CliError::ConfigInvalid(format!("{arg}: {e}")));
    }
    let record: DenjoyRecord =
        serde_json::from_value(value).map_err(|e| CliError::ConfigInvalid(format!("{arg}: {e}")))?;
    DenjoyMap::from_record(&record)?;
    Ok(MapSpec::Denjoy { angle: AngleSpec::Name(record.angle), m: record.truncation, depth: DEFAULT_DEPTH })
}

/// A constructed map with the tuning data that produced it, if any.
pub struct ResolvedMap {
    pub map: CircleMap,
    pub tuned: Option<crate::circlemaps::TunedArnold>,
}

pub fn build_map(spec: &MapSpec, precision_bits: u32) -> CliResult<ResolvedMap> {
    let plain = |map| Ok(ResolvedMap { map, tuned: None });
    match spec {
        MapSpec::Rotation { rho, depth } => plain(CircleMap::rotation_by(rho.resolve(*depth, precision_bits)?)),
        MapSpec::Arnold { eps, a, angle, depth, certify_depth } => {
            let angle = angle.as_ref().map(|s| s.resolve(*depth, precision_bits)).transpose()?;
            match (a, angle) {
                (Some(a), angle) => {
                    let map = CircleMap::arnold(*a, *eps)?;
                    plain(match angle {
                        Some(t) => map.with_angle(t),
                        None => map,
                    })
                }
                (None, Some(t)) => {
                    CircleMap::arnold(0.0, *eps)?;
                    let tuned = tune_parameter(*eps, &t, *certify_depth)?;
                    Ok(ResolvedMap { map: tuned.map.clone(), tuned: Some(tuned) })
                }
                (None, None) => Err(CliError::ConfigInvalid("arnold map needs `a` or a target `angle`".into())),
            }
        }
        MapSpec::Conjugated { rho, h, depth } => {
            let h = TrigPerturbation::new(h.clone())?;
            plain(CircleMap::conjugated_rotation(rho.resolve(*depth, precision_bits)?, h))
        }
        MapSpec::Denjoy { angle, m, depth } => {
            let d = DenjoyMap::build(&angle.resolve(*depth, precision_bits)?, *m)?;
            plain(CircleMap::denjoy(Arc::new(d)))
        }
    }
}

/// Test functions by name: `cos`, `sin`, `cosN`, `sinN`, `logdf`, and
/// `cos-pullback` (`cos 2π h⁻¹(x)` on a conjugated rotation).
pub fn test_function(name: &str, f: &CircleMap) -> CliResult<TestFunction> {
    let mode = |prefix: &str| -> Option<u32> {
        let rest = name.strip_prefix(prefix)?;
        if rest.is_empty() {
            Some(1)
        } else {
            rest.parse().ok().filter(|&m| m > 0)
        }
    };
    if name == "logdf" {
        return Ok(TestFunction::log_deriv(f)?);
    }
    if name == "cos-pullback" {
        let h = match f.family() {
            Family::ConjugatedRotation { h, .. } => h.clone(),
            _ => return Err(CliError::ConfigInvalid("cos-pullback needs a conjugated rotation".into())),
        };
        return Ok(cos_pullback(h));
    }
    if let Some(m) = mode("cos") {
        return Ok(TestFunction::cos_mode(m));
    }
    if let Some(m) = mode("sin") {
        return Ok(TestFunction::sin_mode(m));
    }
    Err(CliError::ConfigInvalid(format!("unknown test function {name:?}")))
}

/// `u(x) = cos(2π h⁻¹(x))`, whose pullback `u ∘ h` is a single Fourier mode.
pub fn cos_pullback(h: TrigPerturbation) -> TestFunction {
    use std::f64::consts::TAU;
    let g = h.clone();
    let var = 4.0;
    TestFunction::custom(
        "cos-pullback",
        move |x| h.inverse(x).map(|y| (TAU * y).cos()).unwrap_or(f64::NAN),
        Some(move |x: f64| match g.inverse(x) {
            Ok(y) => -TAU * (TAU * y).sin() / g.deriv(y),
            Err(_) => f64::NAN,
        }),
        Some(var),
        1.0,
    )
}

// ---------------------------------------------------------------------------
// running

/// Finished artifact of a run.
#[derive(Debug, Clone)]
pub struct Report {
    pub body: String,
    /// Tolerance checks.
    pub checks: Vec<(String, bool)>,
    /// Echoed on stderr when the artifact format has no room for it.
    pub stderr_config: Option<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }
}

fn csv(config: &Value, header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = format!("# config: {config}\n{header}\n");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

fn json_body(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn denjoy_of(map: &CircleMap) -> CliResult<&DenjoyMap> {
    map.as_denjoy().ok_or_else(|| CliError::ConfigInvalid("command needs a denjoy map".into()))
}

/// Runs one experiment entirely in memory.
pub fn run(config: &ExperimentConfig) -> CliResult<Report> {
    config.validate()?;
    let resolved = config.resolved();
    let bits = config.precision_bits;
    let tol = config.tol_scale;
    let mut checks = Vec::new();
    let mut stderr_config = None;

    let body = match &config.command {
        CommandConfig::Cf { angle, depth } => {
            let a = angle.resolve(*depth, bits)?;
            let rows = a
                .convergents()
                .iter()
                .map(|c| {
                    Ok(json!({"k": c.k, "a": a.cf()[c.k - 1], "p": c.p, "q": c.q, "err": approximation_error(&a, c.k)?}))
                })
                .collect::<CliResult<Vec<_>>>()?;
            stderr_config = Some(resolved.to_string());
            json_body(&Value::Array(rows))
        }
        CommandConfig::Rotnum { map, depth, max_q } => {
            let m = build_map(map, bits)?;
            let r = rotation_interval(&m.map, *depth, *max_q)?;
            let (a, eps) = match m.map.family() {
                Family::Arnold { a, eps } => (json!(a), json!(eps)),
                _ => (Value::Null, Value::Null),
            };
            json_body(&json!({
                "config": resolved,
                "a": a,
                "eps": eps,
                "certified_k": r.certified_k,
                "rho_interval": r.rho_interval,
                "lower": r.lower,
                "upper": r.upper,
                "exact": r.exact,
            }))
        }
        CommandConfig::Tune { eps, angle, depth } => {
            let target = angle.resolve(DEFAULT_DEPTH.max(*depth), bits)?;
            let t = tune_parameter(*eps, &target, *depth)?;
            let err = (t.certificate.midpoint() - target.value()).abs();
            checks.push(("midpoint within 1e-10 of target".into(), err < 1e-10 * tol));
            json_body(&json!({
                "config": resolved,
                "a": t.a,
                "eps": t.eps,
                "certified_k": t.certificate.certified_k,
                "rho_interval": t.certificate.rho_interval,
                "lower": t.certificate.lower,
                "upper": t.certificate.upper,
                "midpoint_error": err,
            }))
        }
        CommandConfig::Lemma { map, k } => {
            let m = build_map(map, bits)?;
            let f = &m.map;
            let grid = config.grid_or(1024);
            let mut rows = Vec::new();
            for k in k.iter() {
                let res = (0..grid)
                    .into_par_iter()
                    .map(|i| lemma_identity_residual(f, k, i as f64 / grid as f64))
                    .collect::<crate::Result<Vec<_>>>()?;
                let residual = crate::numerics::max_abs(&res);
                let d = lemma_defect(f, k, grid)?;
                let bound = d.bound.unwrap_or(f64::INFINITY);
                let q = f.require_angle()?.q(k)?;
                checks.push((format!("k={k} identity residual"), residual < 1e-9 * tol));
                checks.push((format!("k={k} defect <= bound"), d.sup_defect <= bound * tol + 1e-9));
                rows.push(format!("{k},{q},{residual},{},{bound}", d.sup_defect));
            }
            csv(&resolved, "k,q,identity_residual_max,defect,bound", rows)
        }
        CommandConfig::Corollary { map, u, kmin, kmax } => {
            let m = build_map(map, bits)?;
            let u = test_function(u, &m.map)?;
            let reps = corollary_experiment(&m.map, &u, *kmin..=*kmax, config.grid_or(512))?;
            let devs: Vec<f64> = reps.iter().map(|r| r.sup_deviation).collect();
            checks.push(("sup deviation decays (last < 0.2 max)".into(), decays(&devs, 0.2 * tol)));
            if let Some(var) = u.var_bound() {
                let ok = reps.iter().all(|r| r.sup_deviation <= r.envelope(var) * tol);
                checks.push(("Denjoy-Koksma envelope".into(), ok));
            }
            csv(&resolved, "k,q,sup_deviation", reps.iter().map(|r| format!("{},{},{}", r.k, r.q, r.sup_deviation)))
        }
        CommandConfig::Herman { map, kmin, kmax } => {
            let m = build_map(map, bits)?;
            let rows = herman_check(&m.map, *kmin..=*kmax, config.grid_or(512))?;
            if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
                checks.push(("c1 deviation decreases".into(), last.c1_dev == 0.0 || last.c1_dev < first.c1_dev * tol));
            }
            if let Some(v) = m.map.var_bound() {
                let ok = rows.iter().all(|r| r.c1_dev <= v.exp_m1() * tol + 1e-12);
                checks.push(("Denjoy inequality".into(), ok));
            }
            csv(
                &resolved,
                "k,q,c0_dev,c1_dev",
                rows.iter().map(|r| format!("{},{},{},{}", r.k, r.q, r.c0_dev, r.c1_dev)),
            )
        }
        CommandConfig::DenjoyBuild { angle, m, depth } => {
            let d = DenjoyMap::build(&angle.resolve(*depth, bits)?, *m)?;
            stderr_config = Some(resolved.to_string());
            json_body(&serde_json::to_value(d.to_record()).expect("record serializes"))
        }
        CommandConfig::DenjoyNu { map } => {
            let m = build_map(map, bits)?;
            let w = orbit_weights(denjoy_of(&m.map)?)?;
            checks.push(("S chain rule = 1/l0".into(), (w.normalizer_chain - w.normalizer_closed).abs() < 1e-10 * tol));
            json_body(&json!({
                "config": resolved,
                "S": w.normalizer_chain,
                "S_closed": w.normalizer_closed,
                "tail": w.measure.tail_bound,
                "points": w.measure.atoms,
            }))
        }
        CommandConfig::Distribution { map, tests } => {
            let m = build_map(map, bits)?;
            let d = denjoy_of(&m.map)?;
            let w = orbit_weights(d)?;
            let family = distribution_tests(d, w.normalizer_chain, tests)?;
            let nu = w.measure;
            let boundary = nu
                .atoms
                .iter()
                .filter(|a| a.n.unsigned_abs() as usize == d.truncation())
                .map(|a| a.w)
                .fold(0.0, f64::max);
            let slack = nu.tail_bound + boundary;
            let l = InvariantDistribution::new(nu.clone());
            let mut l_values = BTreeMap::new();
            for u in &family {
                l_values.insert(u.name().to_string(), distribution_eval(&l, u)?);
            }
            let inv = invariance_check(&l, &m.map, &family)?;
            let auto = automorphic_defect(&m.map, &nu, 1.0, &family)?;
            let gap = nu_vs_lambda(&nu, &family, config.grid_or(QUADRATURE_GRID));
            let sup_u = family.iter().map(|u| u.sup_bound()).fold(0.0, f64::max);
            let sup_du = family.iter().map(|u| sup_deriv_at(u, &nu)).fold(0.0, f64::max);
            let inv_bound = 2.0 * sup_du * slack;
            let auto_bound = 2.0 * sup_u * slack;
            checks.push(("invariance defect within tail bound".into(), inv <= inv_bound * tol + 1e-12));
            checks.push(("automorphic defect within tail bound".into(), auto <= auto_bound * tol + 1e-12));
            json_body(&json!({
                "config": resolved,
                "S": w.normalizer_chain,
                "L_values": l_values,
                "invariance_defect": inv,
                "invariance_bound": inv_bound,
                "automorphic_defect": auto,
                "automorphic_bound": auto_bound,
                "nu_vs_lambda": gap,
            }))
        }
        CommandConfig::Solve { map, u, cutoff, samples, k } => {
            let m = build_map(map, bits)?;
            let u = test_function(u, &m.map)?;
            let sol = solve_conjugated_coboundary(&m.map, &u, *cutoff, *samples)?;
            let d = coboundary_defect_c1(&m.map, &sol.v, &u, *k, config.grid_or(1024))?;
            checks.push(("C1 coboundary defect < 1e-6".into(), d.value() < 1e-6 * tol));
            json_body(&json!({
                "config": resolved,
                "coboundary_defect": d.value(),
                "c0": d.c0,
                "c1": d.c1,
                "centering": d.centering,
                "mean_removed": sol.mean_removed,
                "residual_bound": sol.residual_bound,
            }))
        }
    };
    Ok(Report { body, checks, stderr_config })
}

/// `max |u'|` over a fine grid and the atoms of `nu`.
fn sup_deriv_at(u: &TestFunction, nu: &crate::denjoy::AtomicMeasure) -> f64 {
    let grid = (0..QUADRATURE_GRID).map(|i| i as f64 / QUADRATURE_GRID as f64);
    grid.chain(nu.atoms.iter().map(|a| a.x))
        .filter_map(|x| u.eval_deriv(x))
        .map(f64::abs)
        .fold(0.0, f64::max)
}

/// `gap`: bumps in `I_0` (slope `S`, so `L = 1`), `I_1`, `I_{-1}`, `I_5`, and
/// a plateau on `I_0`. `fourier`: `cos m`, `sin m` for `m = 1, 2, 3`.
fn distribution_tests(d: &DenjoyMap, s: f64, names: &[String]) -> CliResult<Vec<TestFunction>> {
    let mut out = Vec::new();
    for name in names {
        match name.as_str() {
            "gap" => {
                let gap = |n: i64| d.gap(n).copied().ok_or(CliError::Experiment(Error::DomainRestricted(f64::NAN)));
                out.push(TestFunction::gap_bump(gap(0)?, s));
                for n in [1, -1, 5] {
                    out.push(TestFunction::gap_bump(gap(n)?, 1.0));
                }
                out.push(TestFunction::gap_plateau(gap(0)?, 1.0));
            }
            "fourier" => {
                for m in 1..=3 {
                    out.push(TestFunction::cos_mode(m));
                    out.push(TestFunction::sin_mode(m));
                }
            }
            other => return Err(CliError::ConfigInvalid(format!("unknown test family {other:?}"))),
        }
    }
    Ok(out)
}

/// Runs and writes the artifact to `config.out` (or stdout).
pub fn execute(config: &ExperimentConfig) -> CliResult<Report> {
    let report = run(config)?;
    match &config.out {
        Some(path) => write_atomic(path, &report.body)?,
        None => print!("{}", report.body),
    }
    Ok(report)
}

fn write_atomic(path: &Path, body: &str) -> CliResult<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, body).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// argument parsing

#[derive(Debug, Parser)]
#[command(name = "circlab", version, about = "Experiments on circle diffeomorphisms and invariant distributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Grid size for sup-norms and quadratures.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Working precision for named angles.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision_bits: u32,
    /// Multiplies every acceptance tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Continued fraction and convergents of an angle.
    Cf {
        #[arg(long)]
        angle: String,
        #[arg(long, default_value_t = 20)]
        depth: usize,
    },
    /// Certified rotation-number interval.
    Rotnum {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 10_000_000)]
        max_q: u64,
    },
    /// Tune the Arnold parameter `a` to a target rotation number.
    Tune {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "golden")]
        angle: String,
        #[arg(long, default_value_t = 18)]
        depth: usize,
    },
    /// Corrector identity residual and transfer defect per convergent.
    Lemma {
        #[arg(long)]
        map: String,
        #[arg(long, default_value = "4..10")]
        k: KRange,
    },
    /// Birkhoff-sum deviations at convergent times.
    Corollary {
        #[arg(long)]
        map: String,
        #[arg(long, default_value = "cos")]
        u: String,
        #[arg(long, default_value_t = 4)]
        kmin: usize,
        #[arg(long, default_value_t = 12)]
        kmax: usize,
    },
    /// Distance of `f^{q_k}` to a translation in C0 and C1.
    Herman {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 4)]
        kmin: usize,
        #[arg(long, default_value_t = 12)]
        kmax: usize,
    },
    /// Denjoy counterexample construction.
    #[command(subcommand)]
    Denjoy(DenjoyCmd),
    /// Invariant distribution built from the automorphic measure.
    Distribution {
        #[arg(long)]
        map: String,
        #[arg(long, value_delimiter = ',', default_value = "gap,fourier")]
        tests: Vec<String>,
        /// Rebuild the Denjoy map at this truncation.
        #[arg(long = "M")]
        m: Option<usize>,
    },
    /// Solve the cohomological equation on a (conjugated) rotation.
    Solve {
        #[arg(long)]
        map: String,
        #[arg(long, default_value = "cos")]
        u: String,
        #[arg(long, default_value_t = 64)]
        cutoff: usize,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        /// Convergent index for the mu-centering (average over q_{k+2}).
        #[arg(long, default_value_t = 22)]
        k: usize,
    },
    /// Run a JSON experiment configuration.
    Run { config: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum DenjoyCmd {
    /// Build the gap table.
    Build {
        #[arg(long, default_value = "golden")]
        angle: String,
        #[arg(long = "M", default_value_t = 64)]
        m: usize,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// Atomic 1-automorphic measure of a built map.
    Nu {
        #[arg(long)]
        map: String,
    },
}

fn angle_arg(s: &str) -> AngleSpec {
    AngleSpec::Name(s.to_string())
}

impl Cli {
    /// Resolves arguments and any referenced files into a configuration.
    pub fn into_config(self) -> CliResult<ExperimentConfig> {
        let command = match self.command {
            Cmd::Run { config } => {
                let text = fs::read_to_string(&config).map_err(|e| CliError::Io(format!("{}: {e}", config.display())))?;
                let mut cfg = ExperimentConfig::from_json(&text)?;
                if self.out.is_some() {
                    cfg.out = self.out;
                }
                return Ok(cfg);
            }
            Cmd::Cf { angle, depth } => CommandConfig::Cf { angle: angle_arg(&angle), depth },
            Cmd::Rotnum { map, depth, max_q } => CommandConfig::Rotnum { map: read_map_arg(&map)?, depth, max_q },
            Cmd::Tune { eps, angle, depth } => CommandConfig::Tune { eps, angle: angle_arg(&angle), depth },
            Cmd::Lemma { map, k } => CommandConfig::Lemma { map: read_map_arg(&map)?, k },
            Cmd::Corollary { map, u, kmin, kmax } => CommandConfig::Corollary { map: read_map_arg(&map)?, u, kmin, kmax },
            Cmd::Herman { map, kmin, kmax } => CommandConfig::Herman { map: read_map_arg(&map)?, kmin, kmax },
            Cmd::Denjoy(DenjoyCmd::Build { angle, m, depth }) => {
                CommandConfig::DenjoyBuild { angle: angle_arg(&angle), m, depth }
            }
            Cmd::Denjoy(DenjoyCmd::Nu { map }) => CommandConfig::DenjoyNu { map: read_map_arg(&map)? },
            Cmd::Distribution { map, tests, m } => {
                let mut map = read_map_arg(&map)?;
                if let (Some(new_m), MapSpec::Denjoy { m: old, .. }) = (m, &mut map) {
                    *old = new_m;
                }
                CommandConfig::Distribution { map, tests }
            }
            Cmd::Solve { map, u, cutoff, samples, k } => {
                CommandConfig::Solve { map: read_map_arg(&map)?, u, cutoff, samples, k }
            }
        };
        let cfg = ExperimentConfig {
            command,
            grid: self.grid,
            precision_bits: self.precision_bits,
            tol_scale: self.tol_scale,
            out: self.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Entry point shared by the binary and tests.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = cli.into_config().and_then(|cfg| execute(&cfg));
    match outcome {
        Ok(report) => {
            if let Some(c) = &report.stderr_config {
                eprintln!("config: {c}");
            }
            let mut failed = false;
            for (name, ok) in &report.checks {
                if !ok {
                    eprintln!("tolerance check failed: {name}");
                    failed = true;
                }
            }
            ExitCode::from(if failed { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_range_forms() {
        assert_eq!("4..10".parse::<KRange>().unwrap(), KRange { lo: 4, hi: 10 });
        assert_eq!("4..=10".parse::<KRange>().unwrap(), KRange { lo: 4, hi: 10 });
        assert_eq!("7".parse::<KRange>().unwrap(), KRange { lo: 7, hi: 7 });
        assert!("10..4".parse::<KRange>().is_err());
        assert!("0..3".parse::<KRange>().is_err());
    }

    #[test]
    fn map_specs_parse() {
        let m = read_map_arg(r#"{"family":"arnold","eps":0.5,"angle":"golden"}"#).unwrap();
        assert!(matches!(m, MapSpec::Arnold { a: None, certify_depth: 18, .. }));
        let m = read_map_arg(r#"{"family":"rotation","rho":0.5}"#).unwrap();
        assert!(matches!(m, MapSpec::Rotation { rho: AngleSpec::Value(_), .. }));
        assert!(read_map_arg(r#"{"family":"rotation","rho":"golden","bogus":1}"#).is_err());
        assert!(matches!(read_map_arg("{not json"), Err(CliError::ConfigInvalid(_))));
        assert!(matches!(read_map_arg("/nonexistent/map.json"), Err(CliError::Io(_))));
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let ok = r#"{"command":{"name":"cf","angle":"golden"}}"#;
        assert!(ExperimentConfig::from_json(ok).is_ok());
        let bad = r#"{"command":{"name":"cf","angle":"golden","extra":1}}"#;
        assert!(matches!(ExperimentConfig::from_json(bad), Err(CliError::ConfigInvalid(_))));
        let bad = r#"{"command":{"name":"cf","angle":"golden"},"colour":"red"}"#;
        assert!(matches!(ExperimentConfig::from_json(bad), Err(CliError::ConfigInvalid(_))));
    }

    #[test]
    fn cf_report_has_fibonacci_denominators() {
        let cfg = ExperimentConfig::new(CommandConfig::Cf { angle: angle_arg("golden"), depth: 10 });
        let r = run(&cfg).unwrap();
        let rows: Vec<Value> = serde_json::from_str(&r.body).unwrap();
        let qs: Vec<u64> = rows.iter().map(|r| r["q"].as_u64().unwrap()).collect();
        assert_eq!(qs, [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
    }

    #[test]
    fn rational_angle_is_a_config_error() {
        let cfg = ExperimentConfig::new(CommandConfig::Cf { angle: angle_arg("0.5"), depth: 10 });
        assert!(matches!(run(&cfg), Err(CliError::ConfigInvalid(_))));
    }
}
