//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a `verify` section failed, 2 malformed input or
//! a violated invariant, 3 a numerical gate refused the input.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grassmann::AlgebraConfig;
use crate::group::{embed_isometry, semidirect_multiply, GroupElement, NilElement};
use crate::isometry::{isometry_residual, is_isometry, lie_basis, lie_membership, BasePart, GammaForm};
use crate::json::{
    gamma_from_json, gamma_to_json, matrix_from_json, matrix_to_json, real_matrix_from_json, real_matrix_to_json,
    supernumber_to_json,
};
use crate::metric::{body_reduce, canonical_form, CanonicalizationResult, ReducibilityRecord, SuperMetric};
use crate::scalar::{CoefficientMode, Scalar};
use crate::verify::{self, SuiteSizes, VerifyConfig};
use num_rational::BigRational;

#[derive(Debug, Parser)]
#[command(name = "superspin", version, about = "Super metric canonical forms, isometry algebras and covering groups")]
pub struct Cli {
    /// JSON job file with defaults for every flag and an optional "input" payload.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// JSON input payload (overrides "input" in the job file).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub mode: Option<CoefficientMode>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Enforce the soul-ratio and series convergence gates.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Number of Grassmann generators L.
    #[arg(long, global = true)]
    pub generators: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Canonical form P^ST G P = diag(eta, J) of a super metric.
    Canonicalize,
    /// Test N^ST Gamma N = Gamma, and optionally Lie algebra membership.
    IsometryCheck,
    /// Bases of g0, g1 and the Banach basis of h.
    LieBasis,
    /// Product of two elements of the semi-direct product group.
    GroupOp,
    /// Run the seeded property suites.
    Verify {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
    },
}

/// Resolved settings after merging the job file and flags.
#[derive(Debug, Clone)]
struct Job {
    mode: CoefficientMode,
    generators: Option<usize>,
    seed: u64,
    strict: bool,
    input: Value,
    file: Value,
}

fn read_json(path: &PathBuf) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn resolve(cli: &Cli) -> Result<Job> {
    let file = match &cli.config {
        Some(p) => read_json(p)?,
        None => json!({}),
    };
    let algebra = file.get("algebra").cloned().unwrap_or(json!({}));
    let mode = match (cli.mode, algebra.get("mode").and_then(Value::as_str)) {
        (Some(m), _) => m,
        (None, Some(s)) => s.parse()?,
        (None, None) => CoefficientMode::Float64,
    };
    let generators = cli
        .generators
        .or_else(|| algebra.get("generators").and_then(Value::as_u64).map(|g| g as usize));
    let seed = cli.seed.or_else(|| file.get("seed").and_then(Value::as_u64)).unwrap_or(0);
    let strict = cli.strict || file.get("strict").and_then(Value::as_bool).unwrap_or(false);
    let input = match &cli.input {
        Some(p) => read_json(p)?,
        None => file.get("input").cloned().unwrap_or(Value::Null),
    };
    Ok(Job { mode, generators, seed, strict, input, file })
}

fn require<'a>(input: &'a Value, key: &str) -> Result<&'a Value> {
    input.get(key).ok_or_else(|| Error::Parse(format!("input: missing field {key:?}")))
}

fn canonical_json<S: Scalar>(r: &CanonicalizationResult<S>, metric: &SuperMetric<S>) -> Result<Value> {
    Ok(json!({
        "P": matrix_to_json(&r.p),
        "Gamma": matrix_to_json(&r.gamma),
        "eta": r.d.iter().map(supernumber_to_json).collect::<Vec<_>>(),
        "reducibility": r.reducibility.iter().map(ReducibilityRecord::from).collect::<Vec<_>>(),
        "body_reducible": r.body_reducible(),
        "body_reduced": r.body_reduced,
        "residual": r.max_residual(metric)?.to_json(),
    }))
}

fn canonicalize<S: Scalar>(job: &Job, config: AlgebraConfig) -> Result<Value> {
    let g = matrix_from_json::<S>(require(&job.input, "metric")?, config, "input.metric")?;
    let metric = SuperMetric::validate(&g)?;
    let r = canonical_form(&metric)?;
    let mut out = canonical_json(&r, &metric)?;
    match body_reduce(&r, job.strict) {
        Ok(reduced) => {
            out["reduced"] = canonical_json(&reduced, &metric)?;
        }
        Err(e) if job.strict => return Err(e),
        Err(e) => {
            out["reduction_skipped"] = json!(e.to_string());
        }
    }
    Ok(out)
}

fn isometry_check<S: Scalar>(job: &Job, config: AlgebraConfig) -> Result<Value> {
    let gamma = gamma_from_json::<S>(require(&job.input, "gamma")?, config, "input.gamma")?;
    let mut out = json!({ "gamma": gamma_to_json(&gamma) });
    if let Some(m) = job.input.get("matrix") {
        let n = matrix_from_json::<S>(m, config, "input.matrix")?;
        out["isometry"] = json!(is_isometry(&n, &gamma)?);
        out["residual"] = isometry_residual(&n, &gamma)?.to_json();
    }
    if let Some(l) = job.input.get("lie_element") {
        let ell = matrix_from_json::<S>(l, config, "input.lie_element")?;
        out["membership"] = serde_json::to_value(lie_membership(&ell, &gamma)?).expect("report serializes");
    }
    if out.get("isometry").is_none() && out.get("membership").is_none() {
        return Err(Error::Parse("input: expected \"matrix\" or \"lie_element\"".into()));
    }
    Ok(out)
}

fn lie_basis_cmd<S: Scalar>(job: &Job, config: AlgebraConfig) -> Result<Value> {
    let gamma = gamma_from_json::<S>(require(&job.input, "gamma")?, config, "input.gamma")?;
    let generators = job.input.get("generators").and_then(Value::as_u64).map(|g| g as usize).unwrap_or(config.generators());
    let basis = lie_basis(&gamma, generators)?;
    let hj: Vec<Value> = basis
        .hj
        .iter()
        .map(|e| {
            json!({
                "index": e.index.labels(),
                "part": match e.part { BasePart::G0 => "g0", BasePart::G1 => "g1" },
                "base": e.base,
            })
        })
        .collect();
    Ok(json!({
        "gamma": gamma_to_json(&gamma),
        "generators": generators,
        "dim_g0": basis.g0.len(),
        "dim_g1": basis.g1.len(),
        "g0": basis.g0.iter().map(|x| real_matrix_to_json(&x.body_matrix())).collect::<Vec<_>>(),
        "g1": basis.g1.iter().map(|x| real_matrix_to_json(&x.body_matrix())).collect::<Vec<_>>(),
        "hj_count": hj.len(),
        "hj": hj,
    }))
}

fn group_element<S: Scalar>(v: &Value, gamma: &GammaForm<S>, path: &str) -> Result<GroupElement<S>> {
    let config = gamma.config();
    let n = match v.get("n_part") {
        Some(n) => NilElement::new(matrix_from_json(n, config, &format!("{path}.n_part"))?, gamma)?,
        None => NilElement::zero(gamma),
    };
    if let Some(g) = v.get("g_body") {
        return GroupElement::new(real_matrix_from_json(g, &format!("{path}.g_body"))?, n, gamma);
    }
    if let Some(x0) = v.get("x0") {
        let x0 = real_matrix_from_json::<S>(x0, &format!("{path}.x0"))?;
        return match S::MODE {
            CoefficientMode::Float64 => GroupElement::from_algebra(&x0, n, gamma),
            CoefficientMode::Rational => GroupElement::from_cayley(&x0, n, gamma),
        };
    }
    GroupElement::new(crate::scalar::RealMatrix::identity(gamma.shape().dim()), n, gamma)
}

fn group_json<S: Scalar>(h: &GroupElement<S>) -> Value {
    json!({ "g_body": real_matrix_to_json(h.g_body()), "n_part": matrix_to_json(h.n_part().matrix()) })
}

fn group_op<S: Scalar>(job: &Job, config: AlgebraConfig) -> Result<Value> {
    let gamma = gamma_from_json::<S>(require(&job.input, "gamma")?, config, "input.gamma")?;
    let h1 = group_element(require(&job.input, "h1")?, &gamma, "input.h1")?;
    let h2 = group_element(require(&job.input, "h2")?, &gamma, "input.h2")?;
    let product = semidirect_multiply(&h1, &h2, &gamma)?;
    let embedded = embed_isometry(&product, &gamma)?;
    let factors = embed_isometry(&h1, &gamma)?.matmul(&embed_isometry(&h2, &gamma)?)?;
    let hom = embedded
        .sub(&factors)?
        .entries()
        .iter()
        .map(|e| e.norm())
        .fold(S::zero(), |a, b| if b > a { b } else { a });
    Ok(json!({
        "product": group_json(&product),
        "embedded": matrix_to_json(&embedded),
        "residuals": {
            "isometry": isometry_residual(&embedded, &gamma)?.to_json(),
            "homomorphism": hom.to_json(),
        },
    }))
}

fn verify_cmd<S: Scalar>(job: &Job, m: Option<usize>, n: Option<usize>) -> Result<(Value, bool)> {
    let dims = |key: &str, flag: Option<usize>, default: usize| {
        flag.or_else(|| job.file.get(key).and_then(Value::as_u64).map(|v| v as usize)).unwrap_or(default)
    };
    let defaults = VerifyConfig::default();
    let cfg = VerifyConfig {
        seed: job.seed,
        generators: job.generators.unwrap_or(defaults.generators),
        m: dims("m", m, defaults.m),
        n: dims("n", n, defaults.n),
        strict: job.strict,
    };
    if cfg.n % 2 == 1 {
        return Err(Error::OddDimensionOdd(cfg.n));
    }
    let report = verify::run::<S>(cfg, SuiteSizes::default())?;
    let passed = report.passed();
    Ok((serde_json::to_value(report).expect("report serializes"), passed))
}

fn dispatch<S: Scalar>(command: &Command, job: &Job) -> Result<(Value, bool)> {
    let config = AlgebraConfig::for_scalar::<S>(job.generators.unwrap_or(AlgebraConfig::DEFAULT_GENERATORS))?;
    match command {
        Command::Canonicalize => canonicalize::<S>(job, config).map(|v| (v, true)),
        Command::IsometryCheck => isometry_check::<S>(job, config).map(|v| (v, true)),
        Command::LieBasis => lie_basis_cmd::<S>(job, config).map(|v| (v, true)),
        Command::GroupOp => group_op::<S>(job, config).map(|v| (v, true)),
        Command::Verify { m, n } => verify_cmd::<S>(job, *m, *n),
    }
}

fn emit(cli: &Cli, value: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    match &cli.out {
        Some(path) => fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        2
    } else {
        3
    }
}

/// Parses `args`, runs the job, writes the report, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = resolve(&cli).and_then(|job| match job.mode {
        CoefficientMode::Float64 => dispatch::<f64>(&cli.command, &job),
        CoefficientMode::Rational => dispatch::<BigRational>(&cli.command, &job),
    });
    match result {
        Ok((value, passed)) => {
            if let Err(e) = emit(&cli, &value) {
                eprintln!("error: cannot write report: {e}");
                return 2;
            }
            if passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let code = exit_code(&e);
            let kind = if code == 2 { "validation" } else { "numerical" };
            eprintln!("error: {e}");
            let _ = emit(&cli, &json!({ "status": "error", "kind": kind, "message": e.to_string() }));
            code
        }
    }
}
