//! `hyperobs`: observability analyses of polynomial systems on directed,
//! weighted hypergraphs, driven by JSON system files.
//!
//! Exit codes: `0` analysis completed, `1` analysis failed or ended
//! Inconclusive (or a design was not found, or the local oracle disagreed),
//! `2` usage or input error.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use hyperobs::design::{design_outputs, output_tensors, DesignConfig};
use hyperobs::global::{build_chain, verdict_at, GlobalConfig, SearchConfig, Status};
use hyperobs::groebner::Budget;
use hyperobs::io::{parse_rational, parse_system, tensor_repr, DesignRepr, ParsedSystem, SystemFile, WeightRepr};
use hyperobs::local::{analyze_local, LocalConfig};
use hyperobs::poly::{Rational, VarSpace};
use hyperobs::simulate::{max_output_gap, simulate_outputs};
use hyperobs::structural::{structural_observability_test, AutomorphismConfig, StructuralHypergraph};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Analysis(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Analysis(_) => 1,
        }
    }
}

fn analysis<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Analysis(e.to_string())
}

#[derive(Parser)]
#[command(name = "hyperobs", version, about = "Observability of polynomial dynamics on hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ideal chain and global verdict at one or more initial states.
    Global(GlobalArgs),
    /// Observational diameter and automorphism test on the support pattern.
    Structural(StructuralArgs),
    /// Generic and pointwise rank of the observability matrix.
    Local(LocalArgs),
    /// Synthesize outputs certifying observability at the target state.
    Design(DesignArgs),
    /// Integrate the system and report sampled outputs.
    Simulate(SimulateArgs),
    /// Print the ideal chain level by level.
    Chain(ChainArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Common {
    /// System file (JSON).
    file: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Seed for every randomized step; recorded in the report.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of S-pair reductions per Gröbner computation.
    #[arg(long)]
    budget: Option<usize>,
    /// Add wall-clock timings to the report (makes it nondeterministic).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ChainOpts {
    /// Highest chain level built (default `max(n·q, 6)`).
    #[arg(long)]
    r_cap: Option<usize>,
    /// Declare stabilization only after two consecutive equal levels.
    #[arg(long = "two-step-stabilization")]
    two_step: bool,
}

#[derive(Args)]
struct GlobalArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    chain: ChainOpts,
    /// Initial state, comma separated rationals (repeatable; defaults to the
    /// file's `sigma`).
    #[arg(long, allow_hyphen_values = true)]
    sigma: Vec<String>,
    /// Worker threads for multiple initial states.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Skip the simulation of indistinguishability witnesses.
    #[arg(long)]
    no_simulate: bool,
}

#[derive(Args)]
struct StructuralArgs {
    #[command(flatten)]
    common: Common,
    /// Allow automorphisms that exchange outputs.
    #[arg(long)]
    permute_outputs: bool,
    /// Largest node count for the automorphism search.
    #[arg(long, default_value_t = 10)]
    max_nodes: usize,
}

#[derive(Args)]
struct LocalArgs {
    #[command(flatten)]
    common: Common,
    /// Random evaluation points for the generic rank (at least 3).
    #[arg(long, default_value_t = 3)]
    points: usize,
    /// Evaluate the rank at this state as well.
    #[arg(long, allow_hyphen_values = true)]
    at: Option<String>,
    /// Lie levels beyond `n`.
    #[arg(long, default_value_t = 0)]
    extra_levels: usize,
    /// Skip the comparison against the direct Jacobian.
    #[arg(long)]
    no_oracle: bool,
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    chain: ChainOpts,
    /// Target state; further values are checked against the design.
    #[arg(long, allow_hyphen_values = true)]
    sigma: Vec<String>,
    /// Highest monomial degree of candidate outputs (default 2, or the file's `design`).
    #[arg(long)]
    d_max: Option<usize>,
    /// Total sensors, existing outputs included.
    #[arg(long)]
    p: Option<usize>,
    /// Highest vanishing order tried for relaxed outputs (default 2).
    #[arg(long)]
    r_relax: Option<usize>,
    /// Write the designed system file here.
    #[arg(long)]
    write: Option<PathBuf>,
    /// Worker threads for checking the further `--sigma` values.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Initial state (defaults to the file's `sigma`).
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Second initial state; reports the maximal output gap.
    #[arg(long, allow_hyphen_values = true)]
    compare: Option<String>,
    /// Constant input values, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    input: Option<String>,
    /// Integration horizon.
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Fixed RK4 step size.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Number of evenly spaced samples reported.
    #[arg(long, default_value_t = 11)]
    samples: usize,
}

#[derive(Args)]
struct ChainArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    chain: ChainOpts,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (common, result) = match &cli.command {
        Command::Global(a) => (&a.common, run_global(a)),
        Command::Structural(a) => (&a.common, run_structural(a)),
        Command::Local(a) => (&a.common, run_local(a)),
        Command::Design(a) => (&a.common, run_design(a)),
        Command::Simulate(a) => (&a.common, run_simulate(a)),
        Command::Chain(a) => (&a.common, run_chain(a)),
    };
    match result {
        Ok((report, code)) => {
            let text = match common.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("reports serialize") + "\n",
                Format::Text => report::render_text(&report),
            };
            print!("{text}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

type Outcome = Result<(Value, u8), CliError>;

fn load(path: &Path) -> Result<ParsedSystem, CliError> {
    parse_system(path).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_point(s: &str, n: usize, what: &str) -> Result<Vec<Rational>, CliError> {
    let v: Vec<Rational> = s
        .split(',')
        .map(|t| parse_rational(&WeightRepr::Text(t.trim().to_string())))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("{what}: {e}")))?;
    if v.len() != n {
        return Err(CliError::Usage(format!("{what}: expected {n} values, got {}", v.len())));
    }
    Ok(v)
}

fn sigmas(given: &[String], parsed: &ParsedSystem) -> Result<Vec<Vec<Rational>>, CliError> {
    let n = parsed.system.n();
    if given.is_empty() {
        return parsed
            .sigma
            .clone()
            .map(|s| vec![s])
            .ok_or_else(|| CliError::Usage("no initial state: pass --sigma or set \"sigma\" in the file".into()));
    }
    given.iter().map(|s| parse_point(s, n, "--sigma")).collect()
}

fn budget(common: &Common) -> Budget {
    let mut b = Budget::default();
    if let Some(p) = common.budget {
        b.max_pairs = p;
    }
    b
}

fn global_config(common: &Common, chain: &ChainOpts, simulate: bool) -> GlobalConfig {
    GlobalConfig {
        r_cap: chain.r_cap,
        two_step: chain.two_step,
        budget: budget(common),
        search: SearchConfig { seed: common.seed, ..SearchConfig::default() },
        simulate_witness: simulate,
        ..GlobalConfig::default()
    }
}

fn config_json(common: &Common, cfg: &GlobalConfig) -> Value {
    json!({
        "seed": common.seed,
        "r_cap": cfg.r_cap,
        "two_step_stabilization": cfg.two_step,
        "max_pairs": cfg.budget.max_pairs,
        "max_basis": cfg.budget.max_basis,
        "max_term_ops": cfg.budget.max_term_ops,
        "max_coefficient_bits": cfg.budget.max_coefficient_bits,
    })
}

fn finish(mut m: Map<String, Value>, common: &Common, start: Instant) -> Value {
    if common.timing {
        m.insert("timing".into(), json!({"total_ms": start.elapsed().as_secs_f64() * 1e3}));
    }
    Value::Object(m)
}

/// Order-preserving map over `items` with up to `jobs` scoped threads.
fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                let f = &f;
                s.spawn(move || {
                    items.iter().enumerate().skip(w).step_by(jobs).map(|(i, x)| (i, f(x))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every slot filled")).collect()
}

fn run_global(a: &GlobalArgs) -> Outcome {
    let start = Instant::now();
    let parsed = load(&a.common.file)?;
    let sys = &parsed.system;
    let points = sigmas(&a.sigma, &parsed)?;
    let cfg = global_config(&a.common, &a.chain, !a.no_simulate);
    let chain = build_chain(sys, &cfg).map_err(analysis)?;
    let xi = VarSpace::xi(sys.n());
    let results = par_map(&points, a.jobs, |sigma| {
        let (j, _, v) = verdict_at(sys, &chain, sigma, &cfg).map_err(analysis)?;
        let mut r = report::verdict(&v);
        r["sigma"] = report::point(sigma);
        r["j_sigma_basis"] = report::ideal_basis(&j, &xi);
        Ok::<_, CliError>((r, v.status))
    });
    let mut out = Vec::new();
    let mut code = 0;
    for r in results {
        let (r, status) = r?;
        if status == Status::Inconclusive {
            code = 1;
        }
        out.push(r);
    }
    let mut m = report::header("global", &a.common.file.display().to_string(), sys);
    m.insert("config".into(), config_json(&a.common, &cfg));
    m.insert("chain".into(), report::chain(&chain, false));
    m.insert("results".into(), Value::Array(out));
    Ok((finish(m, &a.common, start), code))
}

fn run_chain(a: &ChainArgs) -> Outcome {
    let start = Instant::now();
    let parsed = load(&a.common.file)?;
    let cfg = global_config(&a.common, &a.chain, false);
    let chain = build_chain(&parsed.system, &cfg).map_err(analysis)?;
    let mut m = report::header("chain", &a.common.file.display().to_string(), &parsed.system);
    m.insert("config".into(), config_json(&a.common, &cfg));
    m.insert("chain".into(), report::chain(&chain, true));
    Ok((finish(m, &a.common, start), 0))
}

fn run_structural(a: &StructuralArgs) -> Outcome {
    let start = Instant::now();
    let parsed = load(&a.common.file)?;
    let h = StructuralHypergraph::from_system(&parsed.system);
    let cfg = AutomorphismConfig { max_nodes: a.max_nodes, permute_outputs: a.permute_outputs };
    let res = structural_observability_test(&h, &cfg);
    let mut m = report::header("structural", &a.common.file.display().to_string(), &parsed.system);
    m.insert("structural".into(), report::structural(&res));
    Ok((finish(m, &a.common, start), 0))
}

fn run_local(a: &LocalArgs) -> Outcome {
    let start = Instant::now();
    let parsed = load(&a.common.file)?;
    let sys = &parsed.system;
    let at = a.at.as_deref().map(|s| parse_point(s, sys.n(), "--at")).transpose()?;
    let cfg = LocalConfig {
        seed: a.common.seed,
        points: a.points,
        extra_levels: a.extra_levels,
        at,
        check_oracle: !a.no_oracle,
    };
    let res = analyze_local(sys, &cfg);
    let code = if res.oracle_agrees == Some(false) { 1 } else { 0 };
    let mut m = report::header("local", &a.common.file.display().to_string(), sys);
    m.insert("local".into(), report::local(&res, sys.labels()));
    Ok((finish(m, &a.common, start), code))
}

fn run_design(a: &DesignArgs) -> Outcome {
    let start = Instant::now();
    let parsed = load(&a.common.file)?;
    let sys = &parsed.system;
    let points = sigmas(&a.sigma, &parsed)?;
    let file_cfg = parsed.design.clone().unwrap_or_default();
    let defaults = DesignConfig::default();
    let cfg = DesignConfig {
        d_max: a.d_max.or(file_cfg.d_max.map(|d| d as usize)).unwrap_or(defaults.d_max),
        p: a.p.or(file_cfg.p).unwrap_or(defaults.p),
        r_relax: a.r_relax.or(file_cfg.r_relax).unwrap_or(defaults.r_relax),
        ..defaults
    };
    let gcfg = global_config(&a.common, &a.chain, true);
    let res = design_outputs(sys, &points[0], &cfg, &gcfg).map_err(analysis)?;
    let space = VarSpace::new(sys.labels().to_vec());
    let tensors: Vec<Value> = res
        .outputs
        .iter()
        .map(|p| {
            let ts = output_tensors(p, sys.n()).map_err(analysis)?;
            Ok(Value::Array(ts.iter().map(|t| serde_json::to_value(tensor_repr(t)).expect("tensors serialize")).collect()))
        })
        .collect::<Result<_, CliError>>()?;
    let trace: Vec<Value> = res
        .trace
        .iter()
        .map(|s| {
            json!({
                "degree": s.degree,
                "order": s.order,
                "kernel_dim": s.kernel_dim,
                "tested": s.tested.iter().map(|(o, st)| json!({"outputs": o, "status": st.as_str()})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let sweep: Vec<Value> = if res.success && points.len() > 1 {
        let chain = build_chain(&res.system, &gcfg).map_err(analysis)?;
        par_map(&points[1..], a.jobs, |sigma| {
            verdict_at(&res.system, &chain, sigma, &gcfg).map(|(_, _, v)| {
                let mut r = report::verdict(&v);
                r["sigma"] = report::point(sigma);
                r
            })
        })
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(analysis)?
    } else {
        Vec::new()
    };
    if let (Some(path), true) = (&a.write, res.success) {
        let repr = DesignRepr { d_max: Some(cfg.d_max as u32), p: Some(cfg.p), r_relax: Some(cfg.r_relax) };
        let file = SystemFile::from_system(&res.system, Some(&points[0]), Some(repr));
        std::fs::write(path, file.to_json() + "\n").map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    let mut m = report::header("design", &a.common.file.display().to_string(), sys);
    m.insert(
        "design".into(),
        json!({
            "success": res.success,
            "sigma": report::point(&points[0]),
            "config": {"d_max": cfg.d_max, "p": cfg.p, "r_relax": cfg.r_relax, "seed": a.common.seed},
            "outputs": report::polys(&res.outputs, &space),
            "orders": res.orders,
            "tensors": tensors,
            "verdict": res.verdict.as_ref().map(report::verdict),
            "trace": trace,
            "sweep": sweep,
            "written": a.write.as_ref().filter(|_| res.success).map(|p| p.display().to_string()),
        }),
    );
    Ok((finish(m, &a.common, start), if res.success { 0 } else { 1 }))
}

fn run_simulate(a: &SimulateArgs) -> Outcome {
    let start = Instant::now();
    let parsed = load(&a.common.file)?;
    let sys = &parsed.system;
    let n = sys.n();
    let x0 = match &a.x0 {
        Some(s) => parse_point(s, n, "--x0")?,
        None => parsed.sigma.clone().ok_or_else(|| CliError::Usage("no initial state: pass --x0".into()))?,
    };
    let u: Vec<f64> = match &a.input {
        Some(s) => parse_point(s, sys.num_inputs(), "--input")?.iter().map(hyperobs::global::rat_to_f64).collect(),
        None => vec![0.0; sys.num_inputs()],
    };
    let input = move |_t: f64| u.clone();
    let to_f = |p: &[Rational]| -> Vec<f64> { p.iter().map(hyperobs::global::rat_to_f64).collect() };
    let tr = simulate_outputs(sys, &to_f(&x0), &input, a.horizon, a.step).map_err(analysis)?;
    let k = tr.times.len();
    let samples = a.samples.max(2).min(k);
    let idx: Vec<usize> = (0..samples).map(|s| if samples == 1 { 0 } else { s * (k - 1) / (samples - 1) }).collect();
    let mut sim = json!({
        "x0": report::point(&x0),
        "horizon": a.horizon,
        "step": a.step,
        "samples": idx.iter().map(|&i| json!({"t": tr.times[i], "y": tr.outputs[i]})).collect::<Vec<_>>(),
        "final_state": tr.final_state,
    });
    if let Some(c) = &a.compare {
        let x1 = parse_point(c, n, "--compare")?;
        let other = simulate_outputs(sys, &to_f(&x1), &input, a.horizon, a.step).map_err(analysis)?;
        sim["compare"] = json!({"x0": report::point(&x1), "max_output_gap": max_output_gap(&tr, &other)});
    }
    let mut m = report::header("simulate", &a.common.file.display().to_string(), sys);
    m.insert("simulation".into(), sim);
    Ok((finish(m, &a.common, start), 0))
}
