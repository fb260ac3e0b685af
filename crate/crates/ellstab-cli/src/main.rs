//! `ellstab`: batch front end that runs one computation or check and writes
//! its result as JSON.
//!
//! Exit codes: 0 when every check is within tolerance, 1 when a check fails,
//! 2 for usage or configuration errors, 3 when the computation stays singular
//! after re-sampling the parameter point.

mod commands;
mod config;
mod json;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::commands::Outcome;
use crate::config::{ExponentArg, FramingArg, Label, RouteArg, RuleArg, RunConfig, VariantArg};

/// Environment variable that sets the worker count when `--workers` is absent.
const WORKERS_ENV: &str = "ELLSTAB_WORKERS";

/// Extra attempts with a re-sampled point after a singular evaluation.
const RETRIES: u64 = 3;

#[derive(Parser, Debug)]
#[command(name = "ellstab", version, about = "Elliptic stable envelopes, R-matrices and vertex functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// List the torus fixed points of the space (v, w).
    FixedPoints,
    /// Evaluate envelopes at random Chern roots.
    Stab,
    /// Restriction matrix of envelopes to fixed points.
    Restrict,
    /// Compare envelopes of two-framing points with their shuffle products.
    ShuffleCheck,
    /// Transition matrix on one weight block of two Fock factors.
    Rmatrix,
    /// Dynamical Yang-Baxter residual for three Fock factors.
    Ybe,
    /// Fock-representation coefficients of a colored partition.
    Fock,
    /// Truncated vertex-function series with their checks.
    Vertex,
    /// Solve the Bethe equations by Newton's method.
    Bethe,
    /// Exchange-scalar and conjugate-modulus identities.
    Scalars,
    /// Run the acceptance criteria and emit a pass/fail table.
    Acceptance,
}

#[derive(Args, Debug)]
struct Opts {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Size of the worker pool (default: the ELLSTAB_WORKERS variable, then all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Leave timing values out so that repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timings: bool,
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Dimension vector, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    v: Option<Vec<usize>>,
    /// Framing vector, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    w: Option<Vec<usize>>,
    /// Fixed point as JSON, e.g. '[[0,[2,1]],[1,[1]]]'.
    #[arg(long, global = true, value_parser = parse_label)]
    lambda: Option<Label>,
    /// Second fixed point as JSON.
    #[arg(long, global = true, value_parser = parse_label)]
    mu: Option<Label>,
    /// Box counts of the two factors of a shuffle product.
    #[arg(long, global = true, value_delimiter = ',')]
    boxes: Option<Vec<usize>>,
    /// Colors of the framings or tensor factors.
    #[arg(long, global = true, value_delimiter = ',')]
    colors: Option<Vec<usize>>,
    /// Maximal total degree of the vertex series.
    #[arg(long = "D", global = true)]
    max_degree: Option<usize>,
    /// Number of factors kept in infinite products.
    #[arg(long = "M", global = true)]
    trunc: Option<usize>,
    /// Tolerance applied to every check of the command.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Number of random samples.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long, global = true, value_enum)]
    rule: Option<RuleArg>,
    #[arg(long, global = true, value_enum)]
    route: Option<RouteArg>,
    /// Kähler exponent of the vertex series.
    #[arg(long, global = true, value_enum)]
    exponent: Option<ExponentArg>,
    /// Framing weights in the degree-dependent factors of the vertex series.
    #[arg(long, global = true, value_enum)]
    framing_shift: Option<FramingArg>,
    /// Acceptance criteria to run, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    only: Option<Vec<u8>>,
}

fn parse_label(s: &str) -> Result<Label, String> {
    serde_json::from_str(s).map_err(|e| format!("expected [[color,[rows...]],...]: {e}"))
}

impl Opts {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            n: self.n,
            seed: self.seed,
            v: self.v.clone(),
            w: self.w.clone(),
            lambda: self.lambda.clone(),
            mu: self.mu.clone(),
            boxes: self.boxes.clone(),
            colors: self.colors.clone(),
            max_degree: self.max_degree,
            trunc: self.trunc,
            tol: self.tol,
            samples: self.samples,
            variant: self.variant,
            rule: self.rule,
            route: self.route,
            exponent: self.exponent,
            framing_shift: self.framing_shift,
            only: self.only.clone(),
            ..RunConfig::default()
        };
        let cfg = file.merge(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    fn workers(&self) -> anyhow::Result<Option<usize>> {
        let n = match (self.workers, std::env::var(WORKERS_ENV)) {
            (Some(n), _) => n,
            (None, Ok(s)) => s.trim().parse().with_context(|| format!("{WORKERS_ENV}={s} is not a count"))?,
            (None, Err(_)) => return Ok(None),
        };
        if n == 0 {
            bail!("the worker count must be positive");
        }
        Ok(Some(n))
    }
}

fn dispatch(cmd: Command, cfg: &RunConfig, seed: u64) -> anyhow::Result<Outcome> {
    match cmd {
        Command::FixedPoints => commands::fixed_points_cmd(cfg),
        Command::Stab => commands::stab(cfg, seed),
        Command::Restrict => commands::restrict(cfg, seed),
        Command::ShuffleCheck => commands::shuffle(cfg, seed),
        Command::Rmatrix => commands::rmatrix(cfg, seed),
        Command::Ybe => commands::ybe(cfg, seed),
        Command::Fock => commands::fock(cfg, seed),
        Command::Vertex => commands::vertex(cfg, seed),
        Command::Bethe => commands::bethe(cfg, seed),
        Command::Scalars => commands::scalars(cfg, seed),
        Command::Acceptance => commands::acceptance_cmd(cfg, seed),
    }
}

/// Whether the error is numerical rather than a problem with the input.
fn is_numeric(e: &anyhow::Error) -> bool {
    use ellstab::Error as E;
    e.chain().filter_map(|c| c.downcast_ref::<E>()).any(|e| matches!(e, E::Singular(_) | E::Domain(_) | E::Chamber(_)))
}

/// Runs the command, re-sampling the point after numeric failures unless
/// parameters were given explicitly.
fn run_with_retries(cmd: Command, cfg: &RunConfig) -> anyhow::Result<(Outcome, u64)> {
    let seed = cfg.seed();
    let attempts = if cfg.params.is_empty() { RETRIES + 1 } else { 1 };
    let mut last = None;
    for attempt in 0..attempts {
        let sample_seed = seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9));
        match dispatch(cmd, cfg, sample_seed) {
            Ok(out) => return Ok((out, attempt + 1)),
            Err(e) if is_numeric(&e) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt ran"))
}

fn document(cmd: Command, cfg: &RunConfig, out: &Outcome, attempts: u64, seconds: Option<f64>) -> Value {
    let mut checks = Map::new();
    for c in &out.checks {
        checks.insert(c.name.clone(), json!({ "value": c.value, "tol": c.tol, "passed": c.passed() }));
    }
    let reported: Map<String, Value> = out.reported.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let mut timings = Map::new();
    if let Some(total) = seconds {
        timings.insert("total_seconds".into(), json!(total));
        for (k, v) in &out.timings {
            timings.insert(k.clone(), json!(v));
        }
    }
    json!({
        "command": format!("{cmd:?}"),
        "seed": cfg.seed(),
        "attempts": attempts,
        "param_point": out.param_point_json(),
        "result": out.result,
        "residuals": { "checks": checks, "reported": reported },
        "timings": timings,
        "passed": out.passed(),
    })
}

fn run(cli: &Cli) -> anyhow::Result<(Value, bool)> {
    let start = Instant::now();
    let cfg = cli.opts.config()?;
    let (out, attempts) = run_with_retries(cli.command, &cfg)?;
    let seconds = (!cli.opts.no_timings).then(|| start.elapsed().as_secs_f64());
    let doc = document(cli.command, &cfg, &out, attempts, seconds);
    Ok((doc, out.passed()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match cli.opts.workers() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    }
    let (doc, passed) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(if is_numeric(&e) { 3 } else { 2 });
        }
    };
    let text = match serde_json::to_string_pretty(&doc) {
        Ok(t) => t + "\n",
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.opts.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    ExitCode::from(if passed { 0 } else { 1 })
}
