//! Command-line front end: solve single instances, generate benchmark
//! instances, run the property verifier, and drive experiment batches.

use anyhow::{anyhow, Context};
use benders_core::bench::{
    self, verify::VerifyOptions, ExperimentConfig, InstanceSource, CSV_HEADER,
};
use benders_core::master::{bd_solve, BdStatus};
use benders_core::model::StrategyKind;
use benders_core::separation::SepMode;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "benders", version, about = "Benders decomposition with selectable cut strategies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with one strategy.
    Solve(SolveArgs),
    /// Generate a benchmark instance file (plus a .meta.json sidecar).
    Generate(GenerateArgs),
    /// Run the property verification suites.
    Verify(VerifyArgs),
    /// Run an experiment batch described by a TOML config.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (interchange format, or OR-Library with .cap extension).
    #[arg(long, conflicts_with = "cst")]
    instance: Option<PathBuf>,
    /// Generated instance spec `n,k,r,seed`.
    #[arg(long)]
    cst: Option<String>,
    /// cb | mis | rl1 | mwp | cw | l1 | l2 | l4 | linf
    #[arg(long, default_value = "cb")]
    strategy: String,
    /// direct | gpa
    #[arg(long, default_value = "direct")]
    mode: String,
    /// Switch to classical cuts below this relative gap (e.g. 0.05).
    #[arg(long)]
    switch_gap: Option<f64>,
    /// Separation tolerance in scaled coordinates.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Append the run as a CSV row (with header when the file is new).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generated instance spec `n,k,r,seed`.
    #[arg(long)]
    cst: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance sizes as `n,k` pairs.
    #[arg(long, num_args = 0.., default_values_t = ["6,8".to_string(), "8,12".to_string(), "10,15".to_string()])]
    sizes: Vec<String>,
    #[arg(long, num_args = 0.., default_values_t = [5.0, 10.0])]
    ratios: Vec<f64>,
    #[arg(long, num_args = 0.., default_values_t = [1u64, 2])]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long, default_value_t = 200)]
    knapsack_trials: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successful exits; anything else is
            // a usage error
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}

fn parse_strategy(s: &str) -> anyhow::Result<StrategyKind> {
    StrategyKind::parse(s).ok_or_else(|| {
        anyhow!("unknown strategy `{}` (expected cb|mis|rl1|mwp|cw|l1|l2|l4|linf)", s)
    })
}

fn parse_mode(s: &str) -> anyhow::Result<SepMode> {
    SepMode::parse(s).ok_or_else(|| anyhow!("unknown mode `{}` (expected direct|gpa)", s))
}

fn instance_source(
    instance: &Option<PathBuf>,
    cst: &Option<String>,
) -> anyhow::Result<InstanceSource> {
    match (instance, cst) {
        (Some(path), None) => Ok(InstanceSource::File(path.clone())),
        (None, Some(spec)) => Ok(InstanceSource::parse_cst_spec(spec)?),
        _ => Err(anyhow!("exactly one of --instance or --cst is required")),
    }
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<ExitCode> {
    let strategy = parse_strategy(&args.strategy)?;
    let mode = parse_mode(&args.mode)?;
    let source = instance_source(&args.instance, &args.cst)?;
    let loaded = bench::load_instance(&source)?;
    for w in &loaded.warnings {
        eprintln!("warning: {}", w);
    }
    let mut config = loaded.default_config();
    config.strategy = strategy;
    config.mode = mode;
    config.switch_gap = args.switch_gap;
    config.sep_tol = args.tol;
    config.max_iters = args.max_iters;
    let factory = loaded.oracle_factory();
    let report = bd_solve(loaded.inst.clone(), &config, factory.as_ref())
        .with_context(|| format!("solving {}", loaded.id))?;
    for w in &report.warnings {
        eprintln!("warning: {}", w);
    }
    println!("instance:         {}", loaded.id);
    println!("strategy:         {} ({})", strategy, mode.name());
    println!("status:           {:?}", report.status);
    println!("objective:        {}", report.objective);
    println!("iterations:       {}", report.iterations);
    println!(
        "cuts:             {} optimality, {} feasibility",
        report.optimality_cuts, report.feasibility_cuts
    );
    if let Some(t) = report.switched_at {
        println!("switched to cb:   iteration {}", t);
    }
    println!("wall time:        {:.1} ms", report.wall_time.as_secs_f64() * 1e3);
    if let Some(y) = &report.incumbent {
        let open: Vec<String> = y
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v > 0.5)
            .map(|(j, _)| j.to_string())
            .collect();
        println!("open facilities:  [{}]", open.join(", "));
    }
    if let Some(out) = &args.out {
        let cfg = ExperimentConfig {
            switch_gap: args.switch_gap,
            sep_tol: args.tol,
            max_iters: args.max_iters,
            ..Default::default()
        };
        let row = bench::run_one(&loaded, strategy, mode, &cfg);
        let new = !out.exists();
        let mut text = String::new();
        if new {
            text.push_str(CSV_HEADER);
            text.push('\n');
        }
        text.push_str(&row.to_csv());
        text.push('\n');
        use std::io::Write;
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(out)?;
        f.write_all(text.as_bytes())?;
    }
    match report.status {
        BdStatus::Optimal => Ok(ExitCode::SUCCESS),
        _ => Ok(ExitCode::from(2)),
    }
}

fn cmd_generate(args: GenerateArgs) -> anyhow::Result<ExitCode> {
    let source = InstanceSource::parse_cst_spec(&args.cst)?;
    match source {
        InstanceSource::Cst { n, k, r, seed } => {
            bench::write_cst_instance(n, k, r, seed, &args.out)?;
            println!("wrote {} (+ sidecar)", args.out.display());
            Ok(ExitCode::SUCCESS)
        }
        _ => Err(anyhow!("generate requires --cst")),
    }
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let mut sizes = Vec::new();
    for s in &args.sizes {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 2 {
            return Err(anyhow!("bad size `{}` (expected n,k)", s));
        }
        sizes.push((parts[0].trim().parse()?, parts[1].trim().parse()?));
    }
    let opts = VerifyOptions {
        sizes,
        ratios: args.ratios,
        seeds: args.seeds,
        points_target: args.points,
        knapsack_trials: args.knapsack_trials,
    };
    let reports = bench::verify::verify_properties(&opts);
    let mut all_ok = true;
    for r in &reports {
        println!("[{}] {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.details);
        all_ok &= r.passed;
    }
    if all_ok {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

#[derive(Deserialize)]
struct BenchFile {
    #[serde(default)]
    out: Option<PathBuf>,
    strategies: Vec<String>,
    #[serde(default = "default_modes")]
    modes: Vec<String>,
    #[serde(default)]
    switch_gap: Option<f64>,
    #[serde(default = "default_sep_tol")]
    sep_tol: f64,
    #[serde(default = "default_gpa_tol")]
    gpa_tol: f64,
    #[serde(default = "default_gpa_iters")]
    gpa_max_iter: usize,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default = "default_workers")]
    workers: usize,
    #[serde(default)]
    aggregate: bool,
    #[serde(default, rename = "instance")]
    instances: Vec<BenchInstance>,
}

fn default_modes() -> Vec<String> {
    vec!["direct".into()]
}
fn default_sep_tol() -> f64 {
    1e-6
}
fn default_gpa_tol() -> f64 {
    1e-6
}
fn default_gpa_iters() -> usize {
    10
}
fn default_max_iters() -> usize {
    10_000
}
fn default_workers() -> usize {
    1
}

#[derive(Deserialize)]
struct BenchInstance {
    #[serde(default)]
    file: Option<PathBuf>,
    #[serde(default)]
    cst: Option<String>,
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let file: BenchFile = toml::from_str(&text).context("parsing bench config")?;
    let mut cfg = ExperimentConfig {
        switch_gap: file.switch_gap,
        sep_tol: file.sep_tol,
        gpa_tol: file.gpa_tol,
        gpa_max_iter: file.gpa_max_iter,
        max_iters: file.max_iters,
        workers: file.workers,
        aggregate_seed_groups: file.aggregate,
        out: file.out,
        ..Default::default()
    };
    cfg.strategies = file
        .strategies
        .iter()
        .map(|s| parse_strategy(s))
        .collect::<anyhow::Result<_>>()?;
    cfg.modes = file.modes.iter().map(|m| parse_mode(m)).collect::<anyhow::Result<_>>()?;
    cfg.instances = file
        .instances
        .iter()
        .map(|i| instance_source(&i.file, &i.cst))
        .collect::<anyhow::Result<_>>()?;
    let rows = bench::run_experiments(&cfg)?;
    println!("{}", CSV_HEADER);
    for row in &rows {
        println!("{}", row.to_csv());
    }
    let failed = rows.iter().any(|r| !r.error.is_empty());
    if failed {
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
