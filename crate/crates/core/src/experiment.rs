//! Experiment plans: named spaces, invariant requests and assertions, run
//! into a deterministic table.
//!
//! A plan is JSON:
//!
//! ```json
//! {
//!   "name": "demo",
//!   "seed": 7,
//!   "spaces": [{"name": "I", "generator": {"kind": "interval_grid", "m": 64}}],
//!   "invariants": [{"id": "vI", "space": "I", "invariant": "variance", "mode": "heuristic"}],
//!   "assertions": [{"lhs": "vI", "op": "close", "rhs": 0.0833, "tol": 0.002}]
//! }
//! ```
//!
//! Rows keep plan order whatever the number of worker threads.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boxmetric::{box_exact_small, box_upper, BOX_EXACT_LIMIT};
use crate::error::{Error, Result};
use crate::functional::{
    gaussian_domination_scale, log_sobolev_check, poincare_c22, poincare_pq_lower, Density1D, Gaussian,
    GridSpace1D, Uniform,
};
use crate::generators::{gaussian_cloud, sphere_cloud, GeneratorSpec, PointCloud};
use crate::observables::{
    obs_diam, obs_diam_gaussian_formula, p_deviation, separation, variance, Mode, EXACT_LIMIT,
    POINT_SEARCH_LIMIT,
};
use crate::order::dominates;
use crate::space::FinitePmSpace;
use crate::{fmt_real, Certificate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceSource {
    Generator { generator: GeneratorSpec },
    File { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSpace {
    pub name: String,
    #[serde(flatten)]
    pub source: SpaceSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKindSpec {
    Interval,
    Gaussian,
}

/// A 1-D weighted grid: `[0, scale]` or the Gaussian of deviation `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: GridKindSpec,
    pub intervals: usize,
    #[serde(default = "one")]
    pub scale: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<GridSpace1D> {
        match self.kind {
            GridKindSpec::Interval => GridSpace1D::interval(self.intervals, self.scale),
            GridKindSpec::Gaussian => GridSpace1D::gaussian(self.intervals, self.scale),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "density", rename_all = "lowercase")]
pub enum DensitySpec {
    Uniform { a: f64, b: f64 },
    Gaussian { sigma: f64 },
}

fn one() -> f64 {
    1.0
}

fn heuristic() -> Mode {
    Mode::Heuristic
}

/// One invariant evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "invariant", rename_all = "snake_case")]
pub enum Invariant {
    Diam,
    Variance {
        #[serde(default = "heuristic")]
        mode: Mode,
    },
    PDeviation {
        #[serde(with = "crate::real")]
        p: f64,
        #[serde(default = "heuristic")]
        mode: Mode,
    },
    ObsDiam {
        kappa: f64,
        #[serde(default = "heuristic")]
        mode: Mode,
    },
    /// Mean projection partial diameter of a sampled Gaussian or sphere,
    /// computed without a distance matrix.
    ProjectionObsDiam { kappa: f64 },
    Separation { kappa: Vec<f64> },
    GaussianObsDiamFormula { sigma: f64, kappa: f64 },
    PoincareC22 { grid: GridSpec },
    PoincarePqLower { grid: GridSpec, p: f64, q: f64, trials: usize },
    LogSobolevViolation { grid: GridSpec, constant: f64, trials: usize },
    LogSobolevLower { grid: GridSpec, trials: usize },
    GaussianDominationScale { target: DensitySpec },
}

impl Invariant {
    fn name(&self) -> &'static str {
        match self {
            Invariant::Diam => "diam",
            Invariant::Variance { .. } => "variance",
            Invariant::PDeviation { .. } => "p_deviation",
            Invariant::ObsDiam { .. } => "obs_diam",
            Invariant::ProjectionObsDiam { .. } => "projection_obs_diam",
            Invariant::Separation { .. } => "separation",
            Invariant::GaussianObsDiamFormula { .. } => "gaussian_obs_diam_formula",
            Invariant::PoincareC22 { .. } => "poincare_c22",
            Invariant::PoincarePqLower { .. } => "poincare_pq_lower",
            Invariant::LogSobolevViolation { .. } => "log_sobolev_violation",
            Invariant::LogSobolevLower { .. } => "log_sobolev_lower",
            Invariant::GaussianDominationScale { .. } => "gaussian_domination_scale",
        }
    }

    fn parameter(&self) -> String {
        let grid = |g: &GridSpec| {
            let k = match g.kind {
                GridKindSpec::Interval => "interval",
                GridKindSpec::Gaussian => "gaussian",
            };
            format!("{k}:{}:{}", g.intervals, fmt_real(g.scale))
        };
        match self {
            Invariant::Diam => String::new(),
            Invariant::Variance { mode } => mode_str(*mode).into(),
            Invariant::PDeviation { p, mode } => format!("p={} {}", fmt_real(*p), mode_str(*mode)),
            Invariant::ObsDiam { kappa, mode } => format!("kappa={kappa} {}", mode_str(*mode)),
            Invariant::ProjectionObsDiam { kappa } => format!("kappa={kappa}"),
            Invariant::Separation { kappa } => {
                format!("kappa={}", kappa.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";"))
            }
            Invariant::GaussianObsDiamFormula { sigma, kappa } => format!("sigma={sigma} kappa={kappa}"),
            Invariant::PoincareC22 { grid: g } => grid(g),
            Invariant::PoincarePqLower { grid: g, p, q, trials } => format!("{} p={p} q={q} trials={trials}", grid(g)),
            Invariant::LogSobolevViolation { grid: g, constant, trials } => {
                format!("{} C={constant} trials={trials}", grid(g))
            }
            Invariant::LogSobolevLower { grid: g, trials } => format!("{} trials={trials}", grid(g)),
            Invariant::GaussianDominationScale { target } => match target {
                DensitySpec::Uniform { a, b } => format!("uniform[{a};{b}]"),
                DensitySpec::Gaussian { sigma } => format!("gaussian sigma={sigma}"),
            },
        }
    }

    fn needs_space(&self) -> bool {
        matches!(
            self,
            Invariant::Diam
                | Invariant::Variance { .. }
                | Invariant::PDeviation { .. }
                | Invariant::ObsDiam { .. }
                | Invariant::ProjectionObsDiam { .. }
                | Invariant::Separation { .. }
        )
    }
}

fn mode_str(m: Mode) -> &'static str {
    match m {
        Mode::Exact => "exact",
        Mode::Heuristic => "heuristic",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    #[serde(flatten)]
    pub invariant: Invariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Operand {
    Value(#[serde(with = "crate::real")] f64),
    Ref(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    /// `|lhs - rhs| <= tol`
    Close,
    /// `|lhs - rhs| <= tol * |rhs|`
    RelClose,
    /// `lhs <= rhs + tol`
    Le,
    /// `lhs >= rhs - tol`
    Ge,
    /// `|lhs - rhs| > tol`
    Differ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub lhs: Operand,
    pub op: Op,
    pub rhs: Operand,
    /// Missing tolerances count as zero unless filled by
    /// [`ExperimentPlan::with_default_tol`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub name: String,
    pub seed: u64,
    #[serde(default)]
    pub spaces: Vec<NamedSpace>,
    #[serde(default)]
    pub invariants: Vec<InvariantRequest>,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentPlan {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Gives `tol` to every assertion that does not set its own.
    pub fn with_default_tol(mut self, tol: f64) -> Self {
        for a in &mut self.assertions {
            a.tol.get_or_insert(tol);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub space: String,
    pub invariant: String,
    pub parameter: String,
    #[serde(serialize_with = "ser_real")]
    pub value: f64,
    pub certificate: Certificate,
}

fn ser_real<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::real::serialize(x, s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssertionOutcome {
    pub description: String,
    #[serde(serialize_with = "ser_real")]
    pub lhs: f64,
    #[serde(serialize_with = "ser_real")]
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub assertions: Vec<AssertionOutcome>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    /// First failing assertion, if any.
    pub fn first_failure(&self) -> Option<&AssertionOutcome> {
        self.assertions.iter().find(|a| !a.pass)
    }

    /// `space,invariant,parameter,value,certificate`, one row per evaluation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("space,invariant,parameter,value,certificate\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_field(&r.space),
                r.invariant,
                csv_field(&r.parameter),
                fmt_real(r.value),
                r.certificate
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A built space: a distance matrix, or a point cloud for large samples.
enum Built {
    Space(FinitePmSpace, bool),
    Cloud(PointCloud),
}

fn build(source: &SpaceSource, base: Option<&Path>, need_space: bool) -> Result<Built> {
    match source {
        SpaceSource::File { file } => {
            let path = match base {
                Some(b) if file.is_relative() => b.join(file),
                _ => file.clone(),
            };
            Ok(Built::Space(FinitePmSpace::read(path)?, false))
        }
        SpaceSource::Generator { generator } => match generator {
            GeneratorSpec::GaussianSample { n_points, dim, sigma, seed } if !need_space => {
                Ok(Built::Cloud(gaussian_cloud(*n_points, *dim, *sigma, *seed)?))
            }
            GeneratorSpec::SphereSample { n_dim, radius, n_points, seed } if !need_space => {
                Ok(Built::Cloud(sphere_cloud(*n_dim, *radius, *n_points, *seed)?))
            }
            g => Ok(Built::Space(g.generate()?, g.is_sampled())),
        },
    }
}

fn exactness(mode: Mode, sampled: bool) -> Certificate {
    match (mode, sampled) {
        (_, true) => Certificate::Estimate,
        (Mode::Exact, false) => Certificate::Exact,
        (Mode::Heuristic, false) => Certificate::Bound,
    }
}

fn evaluate(req: &InvariantRequest, built: Option<&Built>) -> Result<(f64, Certificate)> {
    let space = || match built {
        Some(Built::Space(x, s)) => Ok((x, *s)),
        Some(Built::Cloud(_)) => Err(Error::arg(format!("invariant {} needs a distance matrix", req.invariant.name()))),
        None => Err(Error::arg(format!("invariant {} needs a space", req.invariant.name()))),
    };
    let sampled_or = |s: bool, c: Certificate| if s { Certificate::Estimate } else { c };
    Ok(match &req.invariant {
        Invariant::Diam => {
            let (x, s) = space()?;
            (x.diam(), sampled_or(s, Certificate::Exact))
        }
        Invariant::Variance { mode } => {
            let (x, s) = space()?;
            (variance(x, *mode)?, exactness(*mode, s))
        }
        Invariant::PDeviation { p, mode } => {
            let (x, s) = space()?;
            (p_deviation(x, *p, *mode)?, exactness(*mode, s))
        }
        Invariant::ObsDiam { kappa, mode } => {
            let (x, s) = space()?;
            (obs_diam(x, *kappa, *mode)?, exactness(*mode, s))
        }
        Invariant::ProjectionObsDiam { kappa } => match built {
            Some(Built::Cloud(c)) => (c.projection_obs_diam(*kappa), Certificate::Estimate),
            _ => return Err(Error::arg("projection_obs_diam needs a gaussian_sample or sphere_sample space")),
        },
        Invariant::Separation { kappa } => {
            let (x, s) = space()?;
            (separation(x, &kappa.clone().into())?, sampled_or(s, Certificate::Exact))
        }
        Invariant::GaussianObsDiamFormula { sigma, kappa } => {
            (obs_diam_gaussian_formula(*sigma, *kappa)?, Certificate::Exact)
        }
        Invariant::PoincareC22 { grid } => (poincare_c22(&grid.build()?)?, Certificate::Estimate),
        Invariant::PoincarePqLower { grid, p, q, trials } => {
            (poincare_pq_lower(&grid.build()?, *p, *q, *trials)?, Certificate::Bound)
        }
        Invariant::LogSobolevViolation { grid, constant, trials } => {
            (log_sobolev_check(&grid.build()?, *constant, *trials)?.max_violation, Certificate::Estimate)
        }
        Invariant::LogSobolevLower { grid, trials } => {
            (log_sobolev_check(&grid.build()?, 1.0, *trials)?.lower_bound, Certificate::Bound)
        }
        Invariant::GaussianDominationScale { target } => {
            let d: Box<dyn Density1D> = match *target {
                DensitySpec::Uniform { a, b } => Box::new(Uniform { a, b }),
                DensitySpec::Gaussian { sigma } => Box::new(Gaussian { sigma }),
            };
            (gaussian_domination_scale(d.as_ref())?, Certificate::Estimate)
        }
    })
}

/// Runs a plan with one worker thread.
pub fn run_experiment(plan: &ExperimentPlan, base: Option<&Path>) -> Result<ExperimentReport> {
    run_experiment_with(plan, base, 1)
}

/// Runs a plan; rows are computed on up to `threads` workers but reported in
/// plan order. Relative file paths resolve against `base`.
pub fn run_experiment_with(plan: &ExperimentPlan, base: Option<&Path>, threads: usize) -> Result<ExperimentReport> {
    let mut names: HashMap<&str, usize> = HashMap::new();
    for (k, s) in plan.spaces.iter().enumerate() {
        if names.insert(s.name.as_str(), k).is_some() {
            return Err(Error::arg(format!("duplicate space name {:?}", s.name)));
        }
    }
    let mut need_space = vec![false; plan.spaces.len()];
    let mut used = vec![false; plan.spaces.len()];
    for req in &plan.invariants {
        match (&req.space, req.invariant.needs_space()) {
            (Some(name), true) => {
                let k = *names.get(name.as_str()).ok_or_else(|| Error::arg(format!("unknown space {name:?}")))?;
                used[k] = true;
                if !matches!(req.invariant, Invariant::ProjectionObsDiam { .. }) {
                    need_space[k] = true;
                }
            }
            (None, true) => return Err(Error::arg(format!("invariant {} needs a space", req.invariant.name()))),
            (Some(_), false) => {
                return Err(Error::arg(format!("invariant {} takes no space", req.invariant.name())))
            }
            (None, false) => {}
        }
    }
    let built: Vec<Option<Built>> = plan
        .spaces
        .iter()
        .enumerate()
        .map(|(k, s)| if used[k] { build(&s.source, base, need_space[k]).map(Some) } else { Ok(None) })
        .collect::<Result<_>>()?;

    let threads = threads.max(1);
    let n = plan.invariants.len();
    let mut results: Vec<Option<Result<(f64, Certificate)>>> = (0..n).map(|_| None).collect();
    let eval = |i: usize| {
        let req = &plan.invariants[i];
        let b = req.space.as_ref().and_then(|s| built[names[s.as_str()]].as_ref());
        evaluate(req, b)
    };
    if threads == 1 || n <= 1 {
        for (i, slot) in results.iter_mut().enumerate() {
            *slot = Some(eval(i));
        }
    } else {
        let chunk = n.div_ceil(threads);
        std::thread::scope(|scope| {
            for (c, slots) in results.chunks_mut(chunk).enumerate() {
                let eval = &eval;
                scope.spawn(move || {
                    for (k, slot) in slots.iter_mut().enumerate() {
                        *slot = Some(eval(c * chunk + k));
                    }
                });
            }
        });
    }
    let mut rows = Vec::with_capacity(n);
    let mut by_id: HashMap<String, f64> = HashMap::new();
    for (req, res) in plan.invariants.iter().zip(results) {
        let (value, certificate) = res.expect("every row is evaluated")?;
        if let Some(id) = &req.id {
            by_id.insert(id.clone(), value);
        }
        rows.push(Row {
            id: req.id.clone(),
            space: req.space.clone().unwrap_or_else(|| "-".into()),
            invariant: req.invariant.name().into(),
            parameter: req.invariant.parameter(),
            value,
            certificate,
        });
    }
    let resolve = |o: &Operand| -> Result<f64> {
        match o {
            Operand::Value(v) => Ok(*v),
            Operand::Ref(id) => by_id.get(id).copied().ok_or_else(|| Error::arg(format!("unknown row id {id:?}"))),
        }
    };
    let show = |o: &Operand| match o {
        Operand::Value(v) => fmt_real(*v),
        Operand::Ref(id) => id.clone(),
    };
    let mut assertions = Vec::with_capacity(plan.assertions.len());
    for a in &plan.assertions {
        let (l, r) = (resolve(&a.lhs)?, resolve(&a.rhs)?);
        let tol = a.tol.unwrap_or(0.0);
        let pass = match a.op {
            Op::Close => (l - r).abs() <= tol,
            Op::RelClose => (l - r).abs() <= tol * r.abs(),
            Op::Le => l <= r + tol,
            Op::Ge => l >= r - tol,
            Op::Differ => (l - r).abs() > tol,
        };
        let op = match a.op {
            Op::Close => "close",
            Op::RelClose => "rel_close",
            Op::Le => "le",
            Op::Ge => "ge",
            Op::Differ => "differ",
        };
        assertions.push(AssertionOutcome {
            description: format!("{} {op} {} (tol {tol})", show(&a.lhs), show(&a.rhs)),
            lhs: l,
            rhs: r,
            pass,
        });
    }
    Ok(ExperimentReport { name: plan.name.clone(), seed: plan.seed, rows, assertions })
}

/// Names of the plans shipped with the library.
pub const BUNDLED_PLANS: [&str; 2] = ["gaussian_obsdiam", "cube_vs_gaussian"];

/// A plan shipped with the library, seeded with `seed`.
///
/// `gaussian_obsdiam` compares projection estimates on 5000 Gaussian samples
/// in dimensions 1 and 5 with `2 Psi^{-1}((1 - kappa) / 2)` for kappa in
/// {0.1, 0.3, 0.5} (2% relative). `cube_vs_gaussian` reports the Gaussian
/// domination scale of the unit interval, `1/sqrt(2 pi)`, next to the
/// (2,2)-Poincare constants of the interval and the Gaussian, and asserts
/// that the two interval constants differ by more than 0.08.
pub fn bundled_plan(name: &str, seed: u64) -> Option<ExperimentPlan> {
    match name {
        "gaussian_obsdiam" => {
            let mut spaces = Vec::new();
            let mut invariants = Vec::new();
            let mut assertions = Vec::new();
            for dim in [1usize, 5] {
                spaces.push(NamedSpace {
                    name: format!("gamma{dim}"),
                    source: SpaceSource::Generator {
                        generator: GeneratorSpec::GaussianSample { n_points: 5000, dim, sigma: 1.0, seed },
                    },
                });
            }
            for kappa in [0.1, 0.3, 0.5] {
                let f = format!("formula_{kappa}");
                invariants.push(InvariantRequest {
                    id: Some(f.clone()),
                    space: None,
                    invariant: Invariant::GaussianObsDiamFormula { sigma: 1.0, kappa },
                });
                for dim in [1usize, 5] {
                    let id = format!("proj{dim}_{kappa}");
                    invariants.push(InvariantRequest {
                        id: Some(id.clone()),
                        space: Some(format!("gamma{dim}")),
                        invariant: Invariant::ProjectionObsDiam { kappa },
                    });
                    assertions.push(Assertion {
                        lhs: Operand::Ref(id),
                        op: Op::RelClose,
                        rhs: Operand::Ref(f.clone()),
                        tol: Some(0.02),
                    });
                }
            }
            Some(ExperimentPlan {
                name: name.into(),
                seed,
                spaces,
                invariants,
                assertions,
                output: OutputPaths::default(),
            })
        }
        "cube_vs_gaussian" => {
            let req = |id: &str, invariant| InvariantRequest { id: Some(id.into()), space: None, invariant };
            let grid = |kind| GridSpec { kind, intervals: 512, scale: 1.0 };
            Some(ExperimentPlan {
                name: name.into(),
                seed,
                spaces: Vec::new(),
                invariants: vec![
                    req("scale_interval", Invariant::GaussianDominationScale { target: DensitySpec::Uniform { a: 0.0, b: 1.0 } }),
                    req("c22_interval", Invariant::PoincareC22 { grid: grid(GridKindSpec::Interval) }),
                    req("c22_gaussian", Invariant::PoincareC22 { grid: grid(GridKindSpec::Gaussian) }),
                ],
                assertions: vec![
                    Assertion {
                        lhs: Operand::Ref("scale_interval".into()),
                        op: Op::Close,
                        rhs: Operand::Value(1.0 / (2.0 * std::f64::consts::PI).sqrt()),
                        tol: Some(1e-4),
                    },
                    Assertion {
                        lhs: Operand::Ref("c22_interval".into()),
                        op: Op::Close,
                        rhs: Operand::Value(1.0 / std::f64::consts::PI),
                        tol: Some(1e-3),
                    },
                    Assertion {
                        lhs: Operand::Ref("c22_gaussian".into()),
                        op: Op::Close,
                        rhs: Operand::Value(1.0),
                        tol: Some(1e-3),
                    },
                    Assertion {
                        lhs: Operand::Ref("scale_interval".into()),
                        op: Op::Differ,
                        rhs: Operand::Ref("c22_interval".into()),
                        tol: Some(0.08),
                    },
                ],
                output: OutputPaths::default(),
            })
        }
        _ => None,
    }
}

/// Side-by-side comparison of two spaces.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    #[serde(serialize_with = "ser_real")]
    pub box_lower: f64,
    #[serde(serialize_with = "ser_real")]
    pub box_upper: f64,
    pub box_certificate: Certificate,
    /// `None` when the search exceeds its size limits.
    pub a_dominates_b: Option<bool>,
    pub b_dominates_a: Option<bool>,
    pub invariants: Vec<ComparedInvariant>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparedInvariant {
    pub name: String,
    #[serde(serialize_with = "ser_real")]
    pub a: f64,
    #[serde(serialize_with = "ser_real")]
    pub b: f64,
    pub certificate: Certificate,
}

fn limited<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::SizeLimit { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Box bounds (exact when `|A| |B| <= 12`), domination both ways and a table
/// of invariants.
pub fn compare(a: &FinitePmSpace, b: &FinitePmSpace) -> Result<Comparison> {
    let bx = if a.len() * b.len() <= BOX_EXACT_LIMIT { box_exact_small(a, b)? } else { box_upper(a, b) };
    let a_dominates_b = limited(dominates(a, b))?.map(|d| d.holds());
    let b_dominates_a = limited(dominates(b, a))?.map(|d| d.holds());
    let mode = if a.len().max(b.len()) <= EXACT_LIMIT { Mode::Exact } else { Mode::Heuristic };
    let cert = exactness(mode, false);
    let mut invariants = vec![
        ComparedInvariant { name: "diam".into(), a: a.diam(), b: b.diam(), certificate: Certificate::Exact },
        ComparedInvariant {
            name: "variance".into(),
            a: variance(a, mode)?,
            b: variance(b, mode)?,
            certificate: cert,
        },
        ComparedInvariant {
            name: "obs_diam(0.1)".into(),
            a: obs_diam(a, 0.1, mode)?,
            b: obs_diam(b, 0.1, mode)?,
            certificate: cert,
        },
    ];
    if a.len().max(b.len()) <= POINT_SEARCH_LIMIT {
        let k = vec![0.25, 0.25].into();
        invariants.push(ComparedInvariant {
            name: "separation(0.25,0.25)".into(),
            a: separation(a, &k)?,
            b: separation(b, &k)?,
            certificate: Certificate::Exact,
        });
    }
    Ok(Comparison {
        box_lower: bx.lower,
        box_upper: bx.upper,
        box_certificate: bx.certificate,
        a_dominates_b,
        b_dominates_a,
        invariants,
    })
}

impl Comparison {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("comparisons always serialize")
    }
}
