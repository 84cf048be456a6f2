use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qubo_landscape::advisor::{recommend_sigma, Recommendation};
use qubo_landscape::bench::{report_dir, run_plan, write_outputs, ExperimentPlan};
use qubo_landscape::generators::{Family, GeneratorSpec};
use qubo_landscape::landscape::{gradient_variance_with, landscape_scan, Normalization, DEFAULT_SAMPLES};
use qubo_landscape::reformulate::{
    reformulate, CheckMode, ReformulateOptions, ReformulationTrace, SemanticCheck, StrategyId, StrategyParams,
    DEFAULT_MAX_ITER, DEFAULT_PENALTY_SCALE,
};
use qubo_landscape::solvers::{solve_brute_force, solve_sa, solve_sgd, solve_sqa, SaConfig, SgdConfig, SqaConfig};
use qubo_landscape::{Error, QuboInstance, Result};

#[derive(Parser)]
#[command(name = "qubo-landscape", version, about = "Build, measure, solve and reformulate QUBO instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it as JSON.
    Generate(GenerateArgs),
    /// Measure the gradient variance of an instance.
    Analyze(AnalyzeArgs),
    /// Run a solver on an instance.
    Solve(SolveArgs),
    /// Raise the gradient variance without changing the optima.
    Reformulate(ReformulateArgs),
    /// Recommend a solver class from the gradient variance.
    Advise(AdviseArgs),
    /// Run or summarize experiment plans.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_family, required_unless_present = "spec")]
    family: Option<Family>,
    /// Variables (elements for set cover).
    #[arg(long, required_unless_present = "spec")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Full recipe as JSON; overrides the other options.
    #[arg(long, conflicts_with_all = ["family", "n"])]
    spec: Option<String>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    /// Edge probability, or membership probability for set cover.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long)]
    sets: Option<usize>,
    #[arg(long)]
    lo: Option<u64>,
    #[arg(long)]
    hi: Option<u64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Norm::PerVariable)]
    normalization: Norm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Norm {
    PerVariable,
    Raw,
}

impl From<Norm> for Normalization {
    fn from(n: Norm) -> Self {
        match n {
            Norm::PerVariable => Normalization::PerVariable,
            Norm::Raw => Normalization::Raw,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    instance: PathBuf,
    #[command(flatten)]
    sampling: SampleArgs,
    /// Also enumerate the full landscape (at most 20 variables).
    #[arg(long)]
    scan: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    BruteForce,
    Sa,
    Sgd,
    Sqa,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    solver: SolverArg,
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Solver configuration as a JSON file; missing fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReformulateArgs {
    instance: PathBuf,
    #[arg(long)]
    target: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Comma-separated subset of substitution, penalty_scaling, auxiliary, relaxation.
    #[arg(long, value_delimiter = ',', value_parser = parse_strategy)]
    strategies: Option<Vec<StrategyId>>,
    #[arg(long, default_value_t = DEFAULT_PENALTY_SCALE)]
    penalty_scale: f64,
    #[arg(long, value_enum, default_value_t = CheckArg::Auto)]
    check: CheckArg,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the reformulated instance.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Where to write the trace as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Args)]
struct AdviseArgs {
    /// Instance to measure; alternatively pass --sigma and --n.
    #[arg(required_unless_present = "sigma")]
    instance: Option<PathBuf>,
    #[arg(long, requires = "n", conflicts_with = "instance")]
    sigma: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    sampling: SampleArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Execute a plan file and write results.
    Run {
        plan: PathBuf,
        /// Output directory; defaults to the plan's output_dir, then ./bench-out.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Summarize a results directory and regenerate its plot files.
    Report { dir: PathBuf },
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_strategy(s: &str) -> std::result::Result<StrategyId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn generate(a: GenerateArgs) -> Result<()> {
    let spec: GeneratorSpec = match &a.spec {
        Some(text) => serde_json::from_str(text)?,
        None => {
            let family = a.family.expect("required by the parser");
            let mut v = serde_json::json!({ "family": family.as_str(), "n": a.n, "seed": a.seed });
            let opt = [
                ("mu", a.mu.map(serde_json::Value::from)),
                ("sigma2", a.sigma2.map(Into::into)),
                ("p", a.p.map(Into::into)),
                ("gamma", a.gamma.map(Into::into)),
                ("penalty", a.penalty.map(Into::into)),
                ("sets", a.sets.map(Into::into)),
                ("lo", a.lo.map(Into::into)),
                ("hi", a.hi.map(Into::into)),
            ];
            for (k, val) in opt {
                if let Some(val) = val {
                    v[k] = val;
                }
            }
            serde_json::from_value(v)?
        }
    };
    let inst = spec.build()?.with_label(spec.instance_id());
    match a.out {
        Some(path) => {
            inst.save(&path)?;
            eprintln!("wrote {} ({} variables) to {}", inst.label(), inst.n(), path.display());
        }
        None => println!("{}", inst.to_json()?),
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let inst = QuboInstance::load(&a.instance)?;
    let s = &a.sampling;
    let report = gradient_variance_with(&inst, s.samples, s.seed, s.normalization.into())?;
    let scan = if a.scan { Some(landscape_scan(&inst)?) } else { None };
    #[derive(Serialize)]
    struct Out<'a> {
        n: usize,
        label: &'a str,
        sigma2: f64,
        #[serde(flatten)]
        report: qubo_landscape::landscape::LandscapeReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        scan: Option<ScanOut>,
    }
    #[derive(Serialize)]
    struct ScanOut {
        global_min: f64,
        minimizers: Vec<u64>,
        local_minima: usize,
    }
    print_json(&Out {
        n: inst.n(),
        label: inst.label(),
        sigma2: report.sigma2(),
        report,
        scan: scan.map(|s| ScanOut { global_min: s.global_min, minimizers: s.minimizers, local_minima: s.local_minima }),
    })
}

fn read_config<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        Some(p) => Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?),
        None => Ok(T::default()),
    }
}

fn solve(a: SolveArgs) -> Result<()> {
    let inst = QuboInstance::load(&a.instance)?;
    let outcome = match a.solver {
        SolverArg::BruteForce => solve_brute_force(&inst)?,
        SolverArg::Sa => {
            let mut c: SaConfig = read_config(&a.config)?;
            c.trajectories = a.trajectories.unwrap_or(c.trajectories);
            c.seed = a.seed.unwrap_or(c.seed);
            solve_sa(&inst, &c)?
        }
        SolverArg::Sgd => {
            let mut c: SgdConfig = read_config(&a.config)?;
            c.trajectories = a.trajectories.unwrap_or(c.trajectories);
            c.seed = a.seed.unwrap_or(c.seed);
            solve_sgd(&inst, &c)?
        }
        SolverArg::Sqa => {
            let mut c: SqaConfig = read_config(&a.config)?;
            c.trajectories = a.trajectories.unwrap_or(c.trajectories);
            c.seed = a.seed.unwrap_or(c.seed);
            solve_sqa(&inst, &c)?
        }
    };
    print_json(&outcome)
}

fn fmt_sigma(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |s| format!("{s:.6}"))
}

fn print_trace(trace: &ReformulationTrace) {
    println!("{:>4}  {:<16} {:>12} {:>12}  {:<8} {:<10} note", "iter", "strategy", "sigma_before", "sigma_after", "accepted", "check");
    for s in &trace.steps {
        let check = s.check.as_ref().map_or("-", |c| c.mode.as_str());
        println!(
            "{:>4}  {:<16} {:>12} {:>12}  {:<8} {:<10} {}",
            s.iteration,
            s.strategy.as_str(),
            fmt_sigma(Some(s.sigma_before)),
            fmt_sigma(s.sigma_after),
            if s.accepted { "yes" } else { "no" },
            check,
            s.note.as_deref().unwrap_or("")
        );
    }
    println!(
        "sigma {:.6} -> {:.6} after {} iteration(s), {}; variables {} -> {}",
        trace.initial_sigma, trace.final_sigma, trace.iterations, trace.termination.as_str(), trace.initial_n, trace.final_n
    );
    if trace.final_n > trace.initial_n {
        println!("note: auxiliary variables grew the instance by {}", trace.final_n - trace.initial_n);
    }
}

fn reformulate_cmd(a: ReformulateArgs) -> Result<()> {
    let inst = QuboInstance::load(&a.instance)?;
    let options = ReformulateOptions {
        target_sigma: a.target,
        max_iter: a.max_iter,
        strategies: a.strategies.unwrap_or_else(|| StrategyId::ALL.to_vec()),
        params: StrategyParams { penalty_scale: a.penalty_scale, ..StrategyParams::default() },
        num_samples: a.samples,
        seed: a.seed,
        check: SemanticCheck {
            mode: match a.check {
                CheckArg::Auto => CheckMode::Auto,
                CheckArg::Exhaustive => CheckMode::Exhaustive,
                CheckArg::Sampled => CheckMode::Sampled,
            },
            seed: a.seed,
            ..SemanticCheck::default()
        },
        ..ReformulateOptions::default()
    };
    let (out, trace) = reformulate(&inst, &options)?;
    print_trace(&trace);
    if let Some(path) = &a.out {
        out.save(path)?;
    }
    if let Some(path) = &a.trace {
        std::fs::write(path, trace.to_json()?)?;
    }
    Ok(())
}

fn advise(a: AdviseArgs) -> Result<()> {
    let (sigma, n) = match (&a.instance, a.sigma) {
        (Some(path), _) => {
            let inst = QuboInstance::load(path)?;
            let s = &a.sampling;
            (gradient_variance_with(&inst, s.samples, s.seed, s.normalization.into())?.sigma_grad, inst.n())
        }
        (None, Some(sigma)) => (sigma, a.n.unwrap_or(0)),
        (None, None) => return Err(Error::InvalidArgument("pass an instance or --sigma".into())),
    };
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::InvalidArgument(format!("sigma must be non-negative, got {sigma}")));
    }
    let rec: Recommendation = recommend_sigma(sigma, n);
    if a.json {
        return print_json(&rec);
    }
    println!("gradient std : {:.6}", rec.sigma_measured);
    println!("variables    : {n}");
    println!("verdict      : {}", serde_json::to_value(rec.verdict)?.as_str().unwrap_or_default());
    println!("threshold    : {}", rec.threshold_used);
    println!("rationale    : {}", rec.rationale);
    Ok(())
}

fn bench(cmd: BenchCommand) -> Result<()> {
    match cmd {
        BenchCommand::Run { plan, out } => {
            let p = ExperimentPlan::load(&plan)?;
            let dir = out.or_else(|| p.output_dir.clone()).unwrap_or_else(|| PathBuf::from("bench-out"));
            let report = run_plan(&p)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let summary = write_outputs(&report, &dir)?;
            println!(
                "{} rows, {} skipped, {} errors -> {}",
                summary.rows,
                summary.skipped.len(),
                summary.errors.len(),
                dir.display()
            );
            for n in &summary.notes {
                println!("note: {n}");
            }
            Ok(())
        }
        BenchCommand::Report { dir } => report(&dir),
    }
}

fn report(dir: &Path) -> Result<()> {
    let (rows, out) = report_dir(dir)?;
    println!("{:<18} {:<12} {:>5} {:>14} {:>10} {:>12}", "family", "solver", "rows", "mean_residual", "success", "wall_s");
    for r in &rows {
        println!(
            "{:<18} {:<12} {:>5} {:>14.6} {:>10.3} {:>12.4}",
            r.family.as_str(),
            r.solver.as_str(),
            r.rows,
            r.mean_residual,
            r.mean_success,
            r.mean_wall_time_s
        );
    }
    println!("files: {}", out.files.join(", "));
    for n in &out.notes {
        println!("note: {n}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Analyze(a) => analyze(a),
        Command::Solve(a) => solve(a),
        Command::Reformulate(a) => reformulate_cmd(a),
        Command::Advise(a) => advise(a),
        Command::Bench { command } => bench(command),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
