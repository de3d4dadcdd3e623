//! `mmslab`: command-line front end for mmslab-core.
//!
//! Exit codes: 0 ok, 1 assertion failure, 2 input error, 3 size limit.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mmslab_core::atoms::{
    atom_product, detect_dissipation, is_contraction, member_x_alpha, AtomVector,
};
use mmslab_core::boxmetric::{box_exact_small, box_upper};
use mmslab_core::experiment::{bundled_plan, compare, run_experiment_with, ExperimentPlan, BUNDLED_PLANS};
use mmslab_core::functional::{log_sobolev_check, poincare_c22, GridSpace1D};
use mmslab_core::generators::{dissipation_family, GeneratorSpec};
use mmslab_core::observables::{obs_diam, p_deviation, separation, variance, Mode};
use mmslab_core::order::dominates;
use mmslab_core::{fmt_real, json_real, real, Certificate, Error, FinitePmSpace};

#[derive(Parser)]
#[command(name = "mmslab", version, about = "Invariants of finite metric measure spaces")]
struct Cli {
    /// Seed for sampled generators and bundled plans.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Default tolerance for plan assertions that do not set one.
    #[arg(long, global = true, default_value_t = 0.0)]
    tol: f64,
    /// Worker threads for `run`.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a space: `gen <kind> key=value ... -o file.json`.
    Gen {
        kind: String,
        /// Generator parameters; lists are comma separated.
        params: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate one invariant of a space file.
    Invariant(InvariantArgs),
    /// Box-distance bounds between two spaces.
    Box {
        a: PathBuf,
        b: PathBuf,
        /// Exact solver (small spaces only).
        #[arg(long)]
        exact: bool,
    },
    /// Search for a 1-Lipschitz map from X onto Y.
    Dominates { x: PathBuf, y: PathBuf },
    /// Atom-vector operations.
    #[command(subcommand)]
    Atoms(AtomsCommand),
    /// Poincare / log-Sobolev convergence tables for 1-D grids.
    Spectral(SpectralArgs),
    /// Side-by-side comparison of two spaces.
    Compare { a: PathBuf, b: PathBuf },
    /// Run an experiment plan (a file, or a bundled plan by name).
    Run {
        plan: Option<PathBuf>,
        #[arg(long, conflicts_with = "plan")]
        bundled: Option<String>,
    },
}

#[derive(Args)]
struct InvariantArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    kind: InvariantKind,
    /// Mass parameter; a comma separated sequence for `sep`.
    #[arg(long)]
    kappa: Option<String>,
    /// Exponent for `pvar` (accepts `inf`).
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    exact: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InvariantKind {
    Diam,
    Obsdiam,
    Sep,
    Var,
    Pvar,
}

#[derive(Subcommand)]
enum AtomsCommand {
    /// Sorted product of two atom vectors.
    Product { alpha: String, beta: String },
    /// Whether beta is a contraction of alpha, with the grouping.
    Contract { alpha: String, beta: String },
    /// Whether a space belongs to X_alpha (or X_alpha^delta).
    Member {
        file: PathBuf,
        alpha: String,
        #[arg(long, default_value = "inf")]
        delta: String,
    },
    /// Dissipation test on given spaces, or on the generated family n = 1..steps.
    Dissipate {
        alpha: String,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 6)]
        steps: u32,
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct SpectralArgs {
    #[arg(long, value_enum)]
    space: GridKindArg,
    /// Largest number of grid intervals; the table doubles up from 64.
    #[arg(long, default_value_t = 512)]
    size: usize,
    #[arg(long, value_enum, default_value_t = ConstantArg::C22)]
    constant: ConstantArg,
    /// Log-Sobolev constant to test; defaults to the grid's C22.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GridKindArg {
    Interval,
    Gaussian,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstantArg {
    C22,
    Ls,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Input(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Assertion(_) => 1,
            CliError::Core(Error::SizeLimit { .. }) => 3,
            CliError::Core(_) | CliError::Input(_) => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mmslab: {e}");
            ExitCode::from(e.code())
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(out: &str) {
    if out.is_empty() {
        return;
    }
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    if !out.ends_with('\n') {
        let _ = stdout.write_all(b"\n");
    }
}

fn dispatch(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Gen { kind, params, output } => gen(cli, kind, params, output.as_deref()),
        Command::Invariant(args) => invariant(cli, args),
        Command::Box { a, b, exact } => box_cmd(cli, a, b, *exact),
        Command::Dominates { x, y } => dominates_cmd(x, y),
        Command::Atoms(cmd) => atoms(cmd),
        Command::Spectral(args) => spectral(cli, args),
        Command::Compare { a, b } => compare_cmd(cli, a, b),
        Command::Run { plan, bundled } => run(cli, plan.as_deref(), bundled.as_deref()),
    }
}

fn read_space(path: &Path) -> CliResult<FinitePmSpace> {
    FinitePmSpace::read(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values always serialize")
}

/// Renders `key,value` records as CSV or a flat JSON object.
fn record(format: Format, fields: &[(&str, String, Value)]) -> String {
    match format {
        Format::Json => {
            let obj: serde_json::Map<String, Value> =
                fields.iter().map(|(k, _, v)| (k.to_string(), v.clone())).collect();
            pretty(&Value::Object(obj))
        }
        Format::Csv => {
            let head: Vec<&str> = fields.iter().map(|f| f.0).collect();
            let row: Vec<&str> = fields.iter().map(|f| f.1.as_str()).collect();
            format!("{}\n{}\n", head.join(","), row.join(","))
        }
    }
}

fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| real::parse(t).ok_or_else(|| input(format!("not a number: {t:?}"))))
        .collect()
}

/// An atom vector given inline (`0.5,0.25`), as JSON, or as a JSON file.
fn parse_atoms(s: &str) -> CliResult<AtomVector> {
    let text = if Path::new(s).is_file() {
        std::fs::read_to_string(s).map_err(|e| input(format!("{s}: {e}")))?
    } else {
        s.to_string()
    };
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(&text).map_err(|e| input(format!("atom vector: {e}")));
    }
    Ok(AtomVector::new(&parse_list(&text)?)?)
}

fn gen_value(key: &str, raw: &str) -> CliResult<Value> {
    if key == "alpha" {
        return Ok(serde_json::to_value(parse_atoms(raw)?).expect("atoms serialize"));
    }
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return Ok(v);
    }
    match real::parse(raw) {
        Some(x) if x.is_infinite() => Ok(Value::String(fmt_real(x))),
        _ => Ok(Value::String(raw.to_string())),
    }
}

fn gen(cli: &Cli, kind: &str, params: &[String], output: Option<&Path>) -> CliResult<String> {
    let mut obj = serde_json::Map::new();
    obj.insert("kind".into(), Value::String(kind.to_string()));
    for p in params {
        let (k, v) = p.split_once('=').ok_or_else(|| input(format!("expected key=value, got {p:?}")))?;
        obj.insert(k.to_string(), gen_value(k, v)?);
    }
    if !obj.contains_key("seed") {
        if let Some(seed) = cli.seed {
            obj.insert("seed".into(), json!(seed));
        }
    }
    let spec: GeneratorSpec =
        serde_json::from_value(Value::Object(obj)).map_err(|e| input(format!("generator {kind}: {e}")))?;
    let space = spec.generate()?;
    match output {
        Some(path) => {
            space.write(path)?;
            Ok(String::new())
        }
        None => Ok(space.to_json()),
    }
}

fn invariant(cli: &Cli, args: &InvariantArgs) -> CliResult<String> {
    let x = read_space(&args.file)?;
    let mode = if args.exact { Mode::Exact } else { Mode::Heuristic };
    let cert = if args.exact { Certificate::Exact } else { Certificate::Bound };
    let kappa = || -> CliResult<Vec<f64>> {
        parse_list(args.kappa.as_deref().ok_or_else(|| input("--kappa is required"))?)
    };
    let (name, parameter, value, cert) = match args.kind {
        InvariantKind::Diam => ("diam", String::new(), x.diam(), Certificate::Exact),
        InvariantKind::Var => ("variance", String::new(), variance(&x, mode)?, cert),
        InvariantKind::Pvar => {
            let p = args.p.as_deref().ok_or_else(|| input("--p is required"))?;
            let p = real::parse(p).ok_or_else(|| input(format!("not a number: {p:?}")))?;
            ("p_deviation", format!("p={}", fmt_real(p)), p_deviation(&x, p, mode)?, cert)
        }
        InvariantKind::Obsdiam => {
            let k = kappa()?;
            let [k] = k[..] else { return Err(input("--kappa takes one value for obsdiam")) };
            ("obs_diam", format!("kappa={k}"), obs_diam(&x, k, mode)?, cert)
        }
        InvariantKind::Sep => {
            let k = kappa()?;
            let param = k.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";");
            ("separation", format!("kappa={param}"), separation(&x, &k.into())?, Certificate::Exact)
        }
    };
    Ok(record(
        cli.format,
        &[
            ("invariant", name.into(), json!(name)),
            ("parameter", parameter.clone(), json!(parameter)),
            ("value", fmt_real(value), json_real(value)),
            ("certificate", cert.to_string(), json!(cert)),
        ],
    ))
}

fn box_cmd(cli: &Cli, a: &Path, b: &Path, exact: bool) -> CliResult<String> {
    let (x, y) = (read_space(a)?, read_space(b)?);
    let est = if exact { box_exact_small(&x, &y)? } else { box_upper(&x, &y) };
    Ok(record(
        cli.format,
        &[
            ("lower", fmt_real(est.lower), json_real(est.lower)),
            ("upper", fmt_real(est.upper), json_real(est.upper)),
            ("certificate", est.certificate.to_string(), json!(est.certificate)),
        ],
    ))
}

fn dominates_cmd(x: &Path, y: &Path) -> CliResult<String> {
    let (sx, sy) = (read_space(x)?, read_space(y)?);
    let d = dominates(&sx, &sy)?;
    Ok(match &d.witness {
        Some(w) => pretty(&json!({ "map": w.map, "pushforward": w.pushforward, "nodes": d.nodes })),
        None => pretty(&json!({ "result": "refused", "nodes": d.nodes })),
    })
}

fn atoms(cmd: &AtomsCommand) -> CliResult<String> {
    match cmd {
        AtomsCommand::Product { alpha, beta } => {
            let p = atom_product(&parse_atoms(alpha)?, &parse_atoms(beta)?);
            Ok(pretty(&serde_json::to_value(p).expect("atoms serialize")))
        }
        AtomsCommand::Contract { alpha, beta } => {
            let r = is_contraction(&parse_atoms(alpha)?, &parse_atoms(beta)?)?;
            Ok(pretty(&json!({ "contraction": r.is_some(), "groups": r })))
        }
        AtomsCommand::Member { file, alpha, delta } => {
            let x = read_space(file)?;
            let delta = real::parse(delta).ok_or_else(|| input(format!("not a number: {delta:?}")))?;
            let r = member_x_alpha(&x, &parse_atoms(alpha)?, delta)?;
            Ok(pretty(&json!({ "member": r.is_some(), "assignment": r.map(|a| a.map) })))
        }
        AtomsCommand::Dissipate { alpha, delta, steps, files } => {
            let alpha = parse_atoms(alpha)?;
            let seq = if files.is_empty() {
                (1..=*steps).map(|n| dissipation_family(&alpha, *delta, n)).collect::<Result<Vec<_>, _>>()?
            } else {
                files.iter().map(|f| read_space(f)).collect::<CliResult<Vec<_>>>()?
            };
            let e = detect_dissipation(&seq, &alpha, *delta)?;
            Ok(pretty(&serde_json::to_value(e).expect("evidence serializes")))
        }
    }
}

fn spectral(cli: &Cli, args: &SpectralArgs) -> CliResult<String> {
    let mut sizes = Vec::new();
    let mut m = 64;
    while m < args.size {
        sizes.push(m);
        m *= 2;
    }
    sizes.push(args.size);
    let build = |m| match args.space {
        GridKindArg::Interval => GridSpace1D::interval(m, 1.0),
        GridKindArg::Gaussian => GridSpace1D::gaussian(m, 1.0),
    };
    let mut rows: Vec<Vec<(&str, f64)>> = Vec::new();
    for m in sizes {
        let grid = build(m)?;
        let c22 = poincare_c22(&grid)?;
        let mut row = vec![("intervals", m as f64), ("c22", c22)];
        if args.constant == ConstantArg::Ls {
            let c = args.c.unwrap_or(c22);
            let r = log_sobolev_check(&grid, c, args.trials)?;
            row.extend([
                ("constant", c),
                ("max_violation", r.max_violation),
                ("lower_bound", r.lower_bound),
            ]);
        }
        rows.push(row);
    }
    Ok(match cli.format {
        Format::Csv => {
            let mut out = rows[0].iter().map(|c| c.0).collect::<Vec<_>>().join(",");
            out.push('\n');
            for r in &rows {
                out.push_str(&r.iter().map(|c| fmt_real(c.1)).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => pretty(&Value::Array(
            rows.iter()
                .map(|r| Value::Object(r.iter().map(|(k, v)| (k.to_string(), json_real(*v))).collect()))
                .collect(),
        )),
    })
}

fn compare_cmd(cli: &Cli, a: &Path, b: &Path) -> CliResult<String> {
    let c = compare(&read_space(a)?, &read_space(b)?)?;
    Ok(match cli.format {
        Format::Json => pretty(&c.to_json()),
        Format::Csv => {
            let mut out = String::from("invariant,a,b,certificate\n");
            let dom = |d: Option<bool>| d.map_or("unknown".to_string(), |v| v.to_string());
            out.push_str(&format!("box_lower,{},,{}\n", fmt_real(c.box_lower), c.box_certificate));
            out.push_str(&format!("box_upper,{},,{}\n", fmt_real(c.box_upper), c.box_certificate));
            out.push_str(&format!("dominates,{},{},exact\n", dom(c.a_dominates_b), dom(c.b_dominates_a)));
            for i in &c.invariants {
                out.push_str(&format!("\"{}\",{},{},{}\n", i.name, fmt_real(i.a), fmt_real(i.b), i.certificate));
            }
            out
        }
    })
}

fn run(cli: &Cli, plan: Option<&Path>, bundled: Option<&str>) -> CliResult<String> {
    let (plan, base) = match (plan, bundled) {
        (Some(p), _) => (ExperimentPlan::read(p)?, p.parent().map(Path::to_path_buf)),
        (None, Some(name)) => {
            let seed = cli.seed.ok_or_else(|| input("bundled plans need --seed"))?;
            let plan = bundled_plan(name, seed)
                .ok_or_else(|| input(format!("unknown bundled plan {name:?}; known: {}", BUNDLED_PLANS.join(", "))))?;
            (plan, None)
        }
        (None, None) => return Err(input("give a plan file or --bundled <name>")),
    };
    let plan = plan.with_default_tol(cli.tol);
    let report = run_experiment_with(&plan, base.as_deref(), cli.threads)?;
    let resolve = |p: &Path| match &base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    };
    let write = |p: &Path, text: &str| std::fs::write(resolve(p), text).map_err(|e| CliError::Core(e.into()));
    if let Some(p) = &plan.output.csv {
        write(p, &report.to_csv())?;
    }
    if let Some(p) = &plan.output.json {
        write(p, &report.to_json())?;
    }
    let out = match cli.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    if let Some(f) = report.first_failure() {
        emit(&out);
        return Err(CliError::Assertion(format!("{} (lhs {}, rhs {})", f.description, fmt_real(f.lhs), fmt_real(f.rhs))));
    }
    Ok(out)
}
