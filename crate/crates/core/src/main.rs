use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sumradii::adversary::{run_hst_adversary, run_plane_adversary, AdversaryOpt, AdversaryTranscript};
use sumradii::experiment::{opt_value, run_batch, write_csv, BatchRow, ExperimentConfig, OptMode};
use sumradii::fractional::{phased_frac, run_frac, FracMode};
use sumradii::offline::{exact_opt_pow2, optimum};
use sumradii::online::{run_online, AlgorithmKind};
use sumradii::reductions::{hst_to_permit, permit_to_cluster, PermitInstance};
use sumradii::verify::{parse_subject, verify};
use sumradii::{generate, Error, Instance};

#[derive(Parser)]
#[command(name = "radii", version, about = "Online sum-of-radii clustering workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance
    Gen(GenArgs),
    /// Run an online algorithm on an instance
    Run(RunArgs),
    /// Solve an instance exactly
    Opt(OptArgs),
    /// Play the lower-bound adversary against a deterministic algorithm
    Adversary(AdversaryArgs),
    /// Convert between permit and tree instances
    Reduce(ReduceArgs),
    /// Run a batch experiment and write CSV
    Batch(BatchArgs),
    /// Check every applicable invariant of an instance or transcript
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Hst,
    PlaneUniform,
    LineUniform,
    Finite,
    Permit,
    PermitReduced,
    Adversarial,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptModeArg {
    Exact,
    Pow2,
    Structural,
}

impl From<OptModeArg> for OptMode {
    fn from(m: OptModeArg) -> OptMode {
        match m {
            OptModeArg::Exact => OptMode::Exact,
            OptModeArg::Pow2 => OptMode::Pow2,
            OptModeArg::Structural => OptMode::Structural,
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    generator: Generator,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// children per node, from the leaves up (hst)
    #[arg(long, value_delimiter = ',', default_value = "3,3")]
    fanouts: Vec<usize>,
    /// number of demands
    #[arg(long, short = 'n', default_value_t = 8)]
    demands: usize,
    /// number of metric points (defaults to the demand count)
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    side: f64,
    #[arg(long, default_value_t = 1.0)]
    f: f64,
    /// permit types
    #[arg(long = "K", default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 14)]
    max_driving: usize,
    /// adversary transcript to replay (adversarial)
    #[arg(long)]
    transcript: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RunArgs {
    /// instance JSON
    instance: PathBuf,
    #[arg(long, short = 'a')]
    algorithm: String,
    /// treat the demand count as unknown
    #[arg(long)]
    unknown_n: bool,
    /// exact rational arithmetic for frac
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct OptArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = OptModeArg::Exact)]
    opt_mode: OptModeArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long, short = 'a', default_value = "pd")]
    algorithm: String,
    #[arg(long, default_value_t = 2.5)]
    alpha: f64,
    #[arg(long = "K", default_value_t = 2)]
    k: usize,
    /// play on the planar embedding instead of the tree
    #[arg(long)]
    plane: bool,
    /// exact or structural; automatic when omitted
    #[arg(long, value_enum)]
    opt_mode: Option<OptModeArg>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReduceArgs {
    /// permit instance JSON, or an HST instance with --from-hst
    input: PathBuf,
    #[arg(long)]
    from_hst: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BatchArgs {
    /// experiment config JSON
    config: PathBuf,
    /// overrides the config's trial count
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum)]
    opt_mode: Option<OptModeArg>,
    /// overrides the config's seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut s = io::stdout().lock();
            s.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(c: &Common, v: &T) -> anyhow::Result<()> {
    if c.format != Format::Json {
        bail!(Error::Parameter("this command writes JSON only".into()));
    }
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    emit(c.out.as_deref(), &text)
}

/// Summary lines go to stderr when the main output is on stdout.
fn summary(c: &Common, line: &str) {
    if c.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn cmd_gen(a: GenArgs) -> anyhow::Result<()> {
    let seed = a.common.seed;
    let points = a.points.unwrap_or(a.demands);
    match a.generator {
        Generator::Hst => emit_json(&a.common, &generate::hst(a.alpha, &a.fanouts, a.demands, a.f, seed)?),
        Generator::PlaneUniform => {
            emit_json(&a.common, &generate::plane_uniform(points, a.demands, a.side, a.f, seed)?)
        }
        Generator::LineUniform => emit_json(&a.common, &generate::line_uniform(points, a.demands, a.side, a.f, seed)?),
        Generator::Finite => emit_json(&a.common, &generate::finite(points, a.demands, 10, a.f, seed)?),
        Generator::Permit => emit_json(&a.common, &generate::permit(a.k, a.max_driving, seed)?),
        Generator::PermitReduced => {
            let p = generate::permit(a.k, a.max_driving, seed)?;
            emit_json(&a.common, &permit_to_cluster(&p)?.instance)
        }
        Generator::Adversarial => {
            let path = a
                .transcript
                .ok_or_else(|| Error::Parameter("adversarial needs --transcript".into()))?;
            let t: AdversaryTranscript = read_json(&path)?;
            emit_json(&a.common, &t.instance)
        }
    }
}

fn cmd_run(a: RunArgs) -> anyhow::Result<()> {
    let inst: Instance = read_json(&a.instance)?;
    inst.check()?;
    let seed = a.common.seed;
    let mode = if a.exact { FracMode::Exact } else { FracMode::Float };
    match a.algorithm.as_str() {
        "frac" | "frac-phased" => {
            let phased = a.algorithm == "frac-phased";
            if a.unknown_n && !phased {
                bail!(Error::Parameter("frac needs a known demand count; use frac-phased".into()));
            }
            let mut t = if phased {
                phased_frac(&inst.metric, inst.f, &inst.demands, mode)?
            } else {
                run_frac(&inst.metric, inst.f, &inst.demands, mode)?
            };
            let line = format!("{}: cost {} operations {}", t.algorithm, t.cost, t.operations);
            t.instance = Some(inst);
            emit_json(&a.common, &t)?;
            summary(&a.common, &line);
        }
        name => {
            let kind = AlgorithmKind::parse(name)
                .ok_or_else(|| Error::Parameter(format!("unknown algorithm {name}")))?;
            let n = (!a.unknown_n).then_some(inst.n());
            let mut alg = kind.build(&inst.metric, inst.f, n, seed);
            let t_seed = (kind == AlgorithmKind::Simple).then_some(seed);
            let t = run_online(alg.as_mut(), &inst, t_seed)?;
            let mut line = format!("{}: cost {}", t.algorithm, t.cost);
            if let Some(d) = t.dual_sum {
                line += &format!(" dual sum {d}");
            }
            emit_json(&a.common, &t)?;
            summary(&a.common, &line);
        }
    }
    Ok(())
}

fn cmd_opt(a: OptArgs) -> anyhow::Result<()> {
    let inst: Instance = read_json(&a.instance)?;
    inst.check()?;
    let v = match a.opt_mode {
        OptModeArg::Exact => optimum(&inst)?.solution.to_json(inst.f),
        OptModeArg::Pow2 => exact_opt_pow2(&inst)?.solution.to_json(inst.f),
        OptModeArg::Structural => serde_json::json!({ "cost": opt_value(&inst, OptMode::Structural)? }),
    };
    emit_json(&a.common, &v)
}

fn cmd_adversary(a: AdversaryArgs) -> anyhow::Result<()> {
    let kind = AlgorithmKind::parse(&a.algorithm)
        .ok_or_else(|| Error::Parameter(format!("unknown algorithm {}", a.algorithm)))?;
    let mode = match a.opt_mode {
        None => AdversaryOpt::Auto,
        Some(OptModeArg::Exact) => AdversaryOpt::Exact,
        Some(OptModeArg::Structural) => AdversaryOpt::Structural,
        Some(OptModeArg::Pow2) => bail!(Error::Parameter("the adversary supports exact or structural".into())),
    };
    if kind == AlgorithmKind::Simple {
        bail!(Error::Parameter("the adversary needs a deterministic algorithm".into()));
    }
    let t = if a.plane {
        run_plane_adversary(&kind, a.alpha, a.k, mode)?
    } else {
        run_hst_adversary(&kind, a.alpha, a.k, mode)?
    };
    let c = t.certificate;
    emit_json(&a.common, &t)?;
    summary(
        &a.common,
        &format!(
            "{} {} K={}: cost {} opt {} ratio {} floor {} {}",
            t.setting,
            t.algorithm,
            t.k,
            t.alg_cost,
            t.opt_cost,
            c.measured_ratio,
            c.floor,
            if c.holds { "ok" } else { "VIOLATED" }
        ),
    );
    Ok(())
}

fn cmd_reduce(a: ReduceArgs) -> anyhow::Result<()> {
    if a.from_hst {
        let inst: Instance = read_json(&a.input)?;
        emit_json(&a.common, &hst_to_permit(&inst)?)
    } else {
        let p: PermitInstance = read_json(&a.input)?;
        emit_json(&a.common, &permit_to_cluster(&p)?.instance)
    }
}

#[derive(Serialize)]
struct JsonRow<'a> {
    instance_id: &'a str,
    n: usize,
    algorithm: &'a str,
    seed: &'a str,
    alg_cost: f64,
    opt_cost: f64,
    ratio: f64,
    bound: Option<f64>,
    bound_ok: Option<bool>,
}

fn cmd_batch(a: BatchArgs) -> anyhow::Result<()> {
    let mut cfg: ExperimentConfig = read_json(&a.config)?;
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(m) = a.opt_mode {
        cfg.opt_mode = m.into();
    }
    let rows = run_batch(&cfg.build_instances()?, &cfg.parsed_algorithms()?, cfg.trials, cfg.seed, cfg.opt_mode)?;
    match a.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&mut buf, &rows)?;
            emit(a.out.as_deref(), std::str::from_utf8(&buf)?)
        }
        Format::Json => {
            let json: Vec<JsonRow> = rows.iter().map(json_row).collect();
            let mut text = serde_json::to_string_pretty(&json)?;
            text.push('\n');
            emit(a.out.as_deref(), &text)
        }
    }
}

fn json_row(r: &BatchRow) -> JsonRow<'_> {
    JsonRow {
        instance_id: &r.instance_id,
        n: r.n,
        algorithm: &r.algorithm,
        seed: &r.seed,
        alg_cost: r.alg_cost,
        opt_cost: r.opt_cost,
        ratio: r.ratio,
        bound: r.bound,
        bound_ok: r.bound_ok,
    }
}

fn cmd_verify(a: VerifyArgs) -> anyhow::Result<ExitCode> {
    let v: serde_json::Value = read_json(&a.input)?;
    let report = verify(&parse_subject(v)?)?;
    let mut text = String::new();
    for c in &report.checks {
        text += &format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    text += &format!("{}: {}\n", report.subject, if report.passed() { "all checks passed" } else { "FAILED" });
    emit(a.out.as_deref(), &text)?;
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn exit_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Invariant(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a).map(|_| ExitCode::SUCCESS),
        Cmd::Run(a) => cmd_run(a).map(|_| ExitCode::SUCCESS),
        Cmd::Opt(a) => cmd_opt(a).map(|_| ExitCode::SUCCESS),
        Cmd::Adversary(a) => cmd_adversary(a).map(|_| ExitCode::SUCCESS),
        Cmd::Reduce(a) => cmd_reduce(a).map(|_| ExitCode::SUCCESS),
        Cmd::Batch(a) => cmd_batch(a).map(|_| ExitCode::SUCCESS),
        Cmd::Verify(a) => cmd_verify(a),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_for(&e))
        }
    }
}
