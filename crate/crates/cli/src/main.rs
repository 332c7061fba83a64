use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use spline_mnar::eval::{generate_scenario, replication_study, Method, ScenarioSpec, StudyConfig};
use spline_mnar::io::{run_fit, summarize_fit_dir, write_metrics, write_replications, write_simulated, RunConfig};

/// Worker-thread count for replication runs.
const THREADS_ENV: &str = "SPLINE_MNAR_THREADS";

#[derive(Parser)]
#[command(name = "spline-mnar", version, about = "Bayesian regression with nonignorable missing responses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a CSV file.
    Fit(FitArgs),
    /// Write one simulated scenario dataset.
    Simulate(SimulateArgs),
    /// Run the replication study and write metrics.csv.
    Replicate(ReplicateArgs),
    /// Recompute summaries and DIC from a fit output directory.
    Summarize(SummarizeArgs),
}

/// Sampler and model flags shared by `fit` and `replicate`.
#[derive(Args, Default)]
struct ModelFlags {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    burn: Option<usize>,
    #[arg(long)]
    keep: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long = "step-size")]
    step_size: Option<f64>,
    /// Response model: lr, sr or nr.
    #[arg(long)]
    model: Option<String>,
    /// Outcome model: linear or lmm.
    #[arg(long)]
    outcome: Option<String>,
    #[arg(long)]
    knots: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    rbf: Option<usize>,
    /// Knot expansion: off, a or ab.
    #[arg(long = "adaptive-knots")]
    adaptive_knots: Option<String>,
}

impl ModelFlags {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k, v));
            }
        };
        push("seed", self.seed.map(|v| v.to_string()));
        push("burn", self.burn.map(|v| v.to_string()));
        push("keep", self.keep.map(|v| v.to_string()));
        push("thin", self.thin.map(|v| v.to_string()));
        push("step_size", self.step_size.map(|v| v.to_string()));
        push("model", self.model.clone());
        push("outcome", self.outcome.clone());
        push("knots", self.knots.map(|v| v.to_string()));
        push("degree", self.degree.map(|v| v.to_string()));
        push("rbf", self.rbf.map(|v| v.to_string()));
        push("adaptive_knots", self.adaptive_knots.clone());
        out
    }
}

#[derive(Args)]
struct FitArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra `key=value` settings applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write every draw of the missing responses to imputed.csv.
    #[arg(long)]
    store_imputed: bool,
    #[command(flatten)]
    flags: ModelFlags,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: u8,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "simulated.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ReplicateArgs {
    /// Comma-separated scenario ids.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    scenario: Vec<u8>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "500")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    /// Comma-separated subset of OR,CC,LR,SR,NR.
    #[arg(long, value_delimiter = ',', default_value = "OR,CC,LR,SR,NR")]
    methods: Vec<String>,
    /// Output directory for metrics.csv and replications.csv.
    #[arg(long, default_value = "replicate_output")]
    out: PathBuf,
    #[command(flatten)]
    flags: ModelFlags,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Output directory of a previous `fit`.
    #[arg(long)]
    dir: PathBuf,
    /// Comma-separated parameter names (all when omitted).
    #[arg(long, value_delimiter = ',')]
    params: Vec<String>,
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().with_context(|| format!("{THREADS_ENV} must be a positive integer"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn fit(args: FitArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    for (k, v) in args.flags.overrides() {
        cfg.set(k, &v)?;
    }
    for kv in &args.set {
        let (k, v) = kv.split_once('=').with_context(|| format!("expected KEY=VALUE, got '{kv}'"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(d) = args.data {
        cfg.data = Some(d);
    }
    if let Some(o) = args.out {
        cfg.output = o;
    }
    if args.store_imputed {
        cfg.mcmc.store_imputed = true;
    }
    let report = run_fit(&cfg)?;
    println!(
        "n = {}, missing = {}, draws = {}, MALA acceptance = {:.3}, DIC = {:.2}, output = {}",
        report.n,
        report.n_missing,
        report.draws.n_draws(),
        report.draws.mala_acceptance,
        report.dic,
        cfg.output.display()
    );
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let sim = generate_scenario(ScenarioSpec::new(args.scenario, args.n, args.seed)?)?;
    write_simulated(&args.out, &sim)?;
    println!(
        "scenario {}, n = {}, missing = {}, written to {}",
        args.scenario,
        args.n,
        sim.dataset.n_missing(),
        args.out.display()
    );
    Ok(())
}

fn replicate(args: ReplicateArgs) -> Result<()> {
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse::<Method>())
        .collect::<spline_mnar::Result<Vec<_>>>()?;
    let mut cfg = RunConfig::default();
    for (k, v) in args.flags.overrides() {
        cfg.set(k, &v)?;
    }
    if args.flags.outcome.as_deref().is_some_and(|o| o != "linear") {
        bail!("the replication study uses the linear outcome model");
    }
    let mut study = StudyConfig {
        scenarios: args.scenario,
        sample_sizes: args.n,
        reps: args.reps,
        methods,
        mcmc: cfg.mcmc.clone(),
        master_seed: args.flags.seed.unwrap_or(2024),
        ..Default::default()
    };
    for spec in [&mut study.semiparametric, &mut study.nonparametric] {
        spec.degree = cfg.response.degree;
        spec.n_knots = cfg.response.n_knots;
        spec.knot_strategy = cfg.response.knot_strategy;
        if args.flags.rbf.is_some() {
            spec.n_rbf = cfg.response.n_rbf;
        }
    }
    let result = replication_study(&study)?;
    std::fs::create_dir_all(&args.out)?;
    write_metrics(&args.out.join("metrics.csv"), &result.rows)?;
    write_replications(&args.out.join("replications.csv"), &result.estimates)?;
    println!("{:<4} {:>3} {:>6} {:>9} {:>9} {:>7}", "", "S", "n", "RMSE", "bias", "failed");
    for r in &result.rows {
        println!(
            "{:<4} {:>3} {:>6} {:>9.2} {:>9.2} {:>7}",
            r.method.label(),
            r.scenario,
            r.n,
            r.mu_rmse,
            r.mu_bias,
            r.failed
        );
    }
    Ok(())
}

fn summarize(args: SummarizeArgs) -> Result<()> {
    let s = summarize_fit_dir(&args.dir, &args.params)?;
    println!("{:<16} {:>12} {:>12} {:>12} {:>12} {:>12}", "parameter", "mean", "sd", "q2.5", "q50", "q97.5");
    for r in &s.rows {
        println!(
            "{:<16} {:>12.5} {:>12.5} {:>12.5} {:>12.5} {:>12.5}",
            r.name, r.mean, r.sd, r.q025, r.q50, r.q975
        );
    }
    println!("draws = {}, DIC = {:.2}", s.n_draws, s.dic);
    Ok(())
}

fn run() -> Result<()> {
    configure_threads()?;
    match Cli::parse().command {
        Command::Fit(a) => fit(a),
        Command::Simulate(a) => simulate(a),
        Command::Replicate(a) => replicate(a),
        Command::Summarize(a) => summarize(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
