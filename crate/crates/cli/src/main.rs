//! `gasym`: decomposition, discrimination, duality experiments, sweeps and the
//! invariant suite, reported as JSON or CSV.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or validation error,
//! 3 duality inequality violated.

mod expr;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use gasym_core::decompose::{component_norms, isotypic_projectors, projector_residuals, IsotypicDecomposition};
use gasym_core::discrimination::{
    build_covariant_povm, optimal_pure_state, orbit, robustness_from_ps, solve_min_error,
    success_probability_pure,
};
use gasym_core::duality::{
    build_tagged_state, default_unit_components, duality_report, random_tag_sweep, write_sweep_csv,
    SweepOptions, TagEnsemble,
};
use gasym_core::groups::GroupWithIrreps;
use gasym_core::numerics::{CMatrix, CVector, C64};
use gasym_core::random::sample_rng;
use gasym_core::verify::{run_verification, Tolerances, VerifyOptions};
use gasym_core::Error;

use expr::{parse_group_spec, parse_rep_expr, RepExpr};

const SCHEMA: u32 = 1;
const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INEQUALITY: u8 = 3;

#[derive(Parser)]
#[command(name = "gasym", version, about = "Group asymmetry, channel discrimination and tag duality")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Isotypic decomposition with projector residuals.
    Decompose(Common),
    /// Discriminate the group orbit of a pure state.
    Discriminate {
        #[command(flatten)]
        common: Common,
        /// `optimal`, `uniform`, or comma-separated amplitudes (`re` or `re:im`).
        #[arg(long, default_value = "optimal")]
        state: String,
    },
    /// Duality report for one tag ensemble.
    Duality {
        #[command(flatten)]
        common: Common,
        /// `orthogonal`, `identical`, `random`, or `;`-separated vectors of amplitudes.
        #[arg(long, default_value = "orthogonal")]
        tags: String,
    },
    /// Duality reports for random tag ensembles, one CSV row each.
    Sweep(Common),
    /// Run the invariant suite.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Random trials per check.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Negative control: perturb one isotypic projector by this amount.
        #[arg(long)]
        perturb: Option<f64>,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// `cyclic:n`, `dihedral:n` (odd n) or `file:path`.
    #[arg(long)]
    group: Option<String>,
    /// Representation expression such as `g1+g2+g3` or `g3*g3`; defaults to all irreps.
    #[arg(long)]
    rep: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Ancilla dimension for identical and random tags; defaults to the number of subspaces.
    #[arg(long)]
    amb_dim: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Tolerance override `KEY=VAL`; repeatable.
    #[arg(long = "tolerance", value_name = "KEY=VAL")]
    tolerances: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

/// Everything needed to reproduce a report.
#[derive(Serialize)]
struct RunConfig {
    command: &'static str,
    group: String,
    rep: String,
    seed: u64,
    samples: usize,
    amb_dim: Option<usize>,
    threads: usize,
    tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tags: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    perturb: Option<f64>,
}

#[derive(Serialize)]
struct Report<C, R> {
    schema: u32,
    config: C,
    result: R,
}

enum Failure {
    Input(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) | Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

struct Context {
    group: Arc<GroupWithIrreps>,
    group_spec: String,
    rep_spec: String,
    dec: IsotypicDecomposition,
    tolerances: Tolerances,
    threads: usize,
}

fn resolve(common: &Common) -> Result<Context, Failure> {
    let group_spec = common.group.clone().unwrap_or_else(|| "dihedral:3".into());
    let group = Arc::new(parse_group_spec(&group_spec)?);
    let expr = match &common.rep {
        Some(src) => parse_rep_expr(src)?,
        None => RepExpr::all_irreps(&group),
    };
    let rep_spec = common.rep.clone().unwrap_or_else(|| {
        expr.0.iter().map(|t| format!("g{}", t[0])).collect::<Vec<_>>().join("+")
    });
    let dec = isotypic_projectors(&expr.evaluate(&group)?)?;
    let mut tolerances = Tolerances::default();
    for kv in &common.tolerances {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("tolerance override '{kv}' must be KEY=VAL")))?;
        let value: f64 = v.trim().parse().map_err(|_| Failure::Input(format!("'{v}' is not a number")))?;
        tolerances.set(k.trim(), value)?;
    }
    Ok(Context { group, group_spec, rep_spec, dec, tolerances, threads: threads_from_env()? })
}

fn threads_from_env() -> Result<usize, Failure> {
    match std::env::var("GASYM_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("GASYM_THREADS must be a non-negative integer, got '{v}'"))),
        _ => Ok(0),
    }
}

fn config(cmd: &'static str, common: &Common, ctx: &Context) -> RunConfig {
    RunConfig {
        command: cmd,
        group: ctx.group_spec.clone(),
        rep: ctx.rep_spec.clone(),
        seed: common.seed,
        samples: common.samples,
        amb_dim: common.amb_dim,
        threads: ctx.threads,
        tolerances: ctx.tolerances.clone(),
        state: None,
        tags: None,
        trials: None,
        perturb: None,
    }
}

fn output(common: &Common) -> Result<Box<dyn Write>, Failure> {
    Ok(match &common.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            Failure::Io(format!("{}: {e}", path.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json(common: &Common, cfg: &RunConfig, result: Value) -> Result<(), Failure> {
    if common.format == Some(Format::Csv) {
        return Err(Failure::Input(format!("{} produces JSON only; csv is available for sweep", cfg.command)));
    }
    let doc = Report { schema: SCHEMA, config: cfg, result };
    let mut out = output(common)?;
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Decompose(common) => cmd_decompose(&common),
        Command::Discriminate { common, state } => cmd_discriminate(&common, &state),
        Command::Duality { common, tags } => cmd_duality(&common, &tags),
        Command::Sweep(common) => cmd_sweep(&common),
        Command::Verify { common, trials, perturb } => cmd_verify(&common, trials, perturb),
    }
}

fn cmd_decompose(common: &Common) -> Result<u8, Failure> {
    let ctx = resolve(common)?;
    let dec = &ctx.dec;
    let components: Vec<Value> = dec
        .components()
        .iter()
        .map(|c| {
            json!({
                "label": c.label,
                "irrep_dim": c.irrep_dim,
                "multiplicity": c.multiplicity,
                "subspace_dim": c.subspace_dim(),
            })
        })
        .collect();
    let residuals = projector_residuals(dec);
    let tol = ctx.tolerances.get("structural");
    let result = json!({
        "group_order": ctx.group.order(),
        "rep_dim": dec.rep().dim(),
        "multiplicities": dec.multiplicities().iter().map(|&(_, m)| m).collect::<Vec<_>>(),
        "labels": dec.multiplicities().iter().map(|&(l, _)| l).collect::<Vec<_>>(),
        "multiplicity_free": dec.is_multiplicity_free(),
        "components": components,
        "residuals": residuals,
        "residuals_ok": residuals.max() <= tol,
    });
    emit_json(common, &config("decompose", common, &ctx), result)?;
    if residuals.max() > tol {
        eprintln!("error: projector residual {:e} exceeds tolerance {tol:e}", residuals.max());
        return Ok(EXIT_INPUT);
    }
    Ok(0)
}

fn parse_amplitude(s: &str) -> Result<C64, Failure> {
    let bad = || Failure::Input(format!("'{s}' is not an amplitude (use re or re:im)"));
    let s = s.trim();
    let (re, im) = match s.split_once(':') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => (s.parse().map_err(|_| bad())?, 0.0),
    };
    Ok(C64::new(re, im))
}

fn parse_vector(s: &str) -> Result<CVector, Failure> {
    Ok(CVector::new(s.split(',').map(parse_amplitude).collect::<Result<_, _>>()?))
}

fn cmd_discriminate(common: &Common, state: &str) -> Result<u8, Failure> {
    let ctx = resolve(common)?;
    let dec = &ctx.dec;
    let dim = dec.rep().dim();
    let order = ctx.group.order();
    let optimal = optimal_pure_state(dec)?;
    let (phi, input_norm) = match state.trim() {
        "optimal" => (optimal.state.clone(), 1.0),
        "uniform" => (CVector::new(vec![C64::new(1.0, 0.0); dim]).normalized().expect("non-empty"), 1.0),
        explicit => {
            let v = parse_vector(explicit)?;
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.dim() }.into());
            }
            let norm = v.norm();
            (v.normalized().ok_or_else(|| Failure::Input("state is the zero vector".into()))?, norm)
        }
    };
    let closed = success_probability_pure(dec, &phi)?;
    let solver = solve_min_error(&orbit(dec.rep(), &CMatrix::projector(&phi)), &vec![1.0 / order as f64; order])?;
    let certified = solver.converged && solver.certificate_floor >= -ctx.tolerances.get("certificate");
    let phases = vec![0.0; dec.components().len()];
    let povm = build_covariant_povm(dec, &phi, &phases)?;
    let result = json!({
        "group_order": order,
        "rep_dim": dim,
        "state": phi,
        "input_norm": input_norm,
        "component_norms": component_norms(dec, &phi)?,
        "ps_closed_form": closed,
        "ps_solver": solver.success_probability,
        "solver_iterations": solver.iterations,
        "solver_converged": solver.converged,
        "solver_method": solver.method,
        "certificate_floor": solver.certificate_floor,
        "certified": certified,
        "robustness_of_asymmetry": robustness_from_ps(closed.min(1.0), order)?,
        "optimal_weights": optimal.weights,
        "ps_max": optimal.p_max,
        "povm_seed": povm.seed(),
        "povm_seed_success": povm.orbit_success(&CMatrix::projector(&phi)),
        "povm_completeness_error": povm.completeness_error(),
    });
    let mut cfg = config("discriminate", common, &ctx);
    cfg.state = Some(state.to_string());
    emit_json(common, &cfg, result)?;
    Ok(0)
}

fn parse_tags(spec: &str, n: usize, amb_dim: usize, seed: u64) -> Result<TagEnsemble, Failure> {
    Ok(match spec.trim() {
        "orthogonal" => TagEnsemble::orthogonal(n),
        "identical" => TagEnsemble::identical(n, amb_dim),
        "random" => TagEnsemble::random(&mut sample_rng(seed, 0), n, amb_dim),
        explicit => {
            let vectors = explicit.split(';').map(parse_vector).collect::<Result<Vec<_>, _>>()?;
            TagEnsemble::from_unnormalized(vectors)?
        }
    })
}

fn cmd_duality(common: &Common, tags: &str) -> Result<u8, Failure> {
    let ctx = resolve(common)?;
    let n = ctx.dec.components().len();
    let amb_dim = common.amb_dim.unwrap_or(n);
    if amb_dim == 0 {
        return Err(Failure::Input("ancilla dimension must be at least 1".into()));
    }
    let ensemble = parse_tags(tags, n, amb_dim, common.seed)?;
    let ts = build_tagged_state(&ctx.dec, default_unit_components(&ctx.dec), ensemble)?;
    let report = duality_report(&ts)?;
    let violated = report.slack < -ctx.tolerances.get("structural");
    let mut cfg = config("duality", common, &ctx);
    cfg.tags = Some(tags.to_string());
    cfg.amb_dim = Some(ts.tags().amb_dim());
    let mut result = to_value(&report);
    result["gram"] = to_value(ts.tags().gram());
    emit_json(common, &cfg, result)?;
    if violated {
        eprintln!("error: duality inequality violated (slack {:e})", report.slack);
        return Ok(EXIT_INEQUALITY);
    }
    Ok(0)
}

fn cmd_sweep(common: &Common) -> Result<u8, Failure> {
    let ctx = resolve(common)?;
    let n = ctx.dec.components().len();
    let opts = SweepOptions {
        samples: common.samples,
        seed: common.seed,
        amb_dim: common.amb_dim.unwrap_or(n),
        threads: ctx.threads,
    };
    let records = random_tag_sweep(&ctx.dec, &opts, None)?;
    let mut out = output(common)?;
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => write_sweep_csv(&mut out, &records)?,
        Format::Json => {
            let mut cfg = config("sweep", common, &ctx);
            cfg.amb_dim = Some(opts.amb_dim);
            let doc = Report { schema: SCHEMA, config: &cfg, result: &records };
            serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Failure::Io(e.to_string()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    drop(out);

    let min_slack = records.iter().map(|r| r.report.slack).fold(f64::INFINITY, f64::min);
    let certified = records.iter().filter(|r| r.report.certified).count();
    eprintln!("min_slack={min_slack:e} certified={certified}/{}", records.len());
    if min_slack < -ctx.tolerances.get("structural") {
        eprintln!("error: duality inequality violated");
        return Ok(EXIT_INEQUALITY);
    }
    Ok(0)
}

fn cmd_verify(common: &Common, trials: usize, perturb: Option<f64>) -> Result<u8, Failure> {
    let ctx = resolve(common)?;
    let opts = VerifyOptions {
        seed: common.seed,
        trials,
        tolerances: ctx.tolerances.clone(),
        perturb,
        extra_group: common.group.as_ref().map(|_| ctx.group.clone()),
    };
    let report = run_verification(&opts);
    let mut cfg = config("verify", common, &ctx);
    cfg.trials = Some(trials);
    cfg.perturb = perturb;
    emit_json(common, &cfg, to_value(&report))?;
    match report.first_failure() {
        Some(c) => {
            eprintln!("FAIL {}: residual {:e} > tolerance {:e}", c.name, c.residual, c.tolerance);
            Ok(EXIT_VERIFY)
        }
        None => Ok(0),
    }
}
