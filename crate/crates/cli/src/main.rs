//! `voltune` — simulate benchmark models, run jump-robust integrated
//! volatility estimators on tick data, reproduce the Monte Carlo tables,
//! and validate against ground-truth oracles.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use voltune::error::Error;
use voltune::estimators::feasible_ci;
use voltune::fixedpoint::kn_default;
use voltune::grid::{build_grid, JumpComponent};
use voltune::harness::{
    self, default_estimators, evaluate_estimator, horizon_to_n, ingest_csv, BenchmarkConfig,
    IngestSpec, PriceKind, ValidationConfig, SECONDS_PER_YEAR,
};
use voltune::simulate::{simulate_model, SimConfig, TwoRegimeParams};

#[derive(Parser)]
#[command(
    name = "voltune",
    version,
    about = "Jump-robust integrated-volatility estimation with fixed-point threshold tuning"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate one path of a benchmark model to CSV + ground-truth JSON.
    Simulate(SimulateArgs),
    /// Run one estimator on a tick-data CSV.
    Estimate(EstimateArgs),
    /// Run the Monte Carlo benchmark from a JSON config.
    Benchmark(BenchmarkArgs),
    /// Sandwich/oracle checks on simulated paths.
    Validate(ValidateArgs),
    /// Two-regime experiment: medians of sqrt(n)·(TRV − C_T) across n.
    DivergenceDemo(DivergenceArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Benchmark model id 1..=5.
    #[arg(long)]
    model: u32,
    /// Horizon: 1d, 1w, 1m, a fraction like 5/252, or a value in years.
    #[arg(long, default_value = "1w")]
    horizon: String,
    /// Override the observation count (default: 78 per trading day).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix: writes <prefix>.csv and <prefix>.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Input CSV with time,price or time,logprice columns.
    #[arg(long)]
    input: PathBuf,
    /// Estimator id: 1, 2, 3, 4, 5a, 5b, 6a, 6b.
    #[arg(long, default_value = "6b")]
    method: String,
    /// Confidence level for the feasible interval.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Force interpretation of the value column.
    #[arg(long, value_parser = ["price", "logprice"])]
    price_kind: Option<String>,
    /// Spacing tolerance as a fraction of the median step.
    #[arg(long, default_value_t = 0.05)]
    tolerance: f64,
    /// Trading seconds per year used to convert time stamps.
    #[arg(long, default_value_t = SECONDS_PER_YEAR)]
    seconds_per_year: f64,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// bench.json configuration file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (flag wins over VOLTUNE_WORKERS, which wins over the
    /// config file).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 1)]
    model: u32,
    #[arg(long, default_value = "1w")]
    horizon: String,
    #[arg(long, default_value_t = 200)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Oracle jump-size cutoff (default 0.5·sqrt(h·log(1/h))).
    #[arg(long)]
    y: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct DivergenceArgs {
    /// Comma-separated grid sizes, e.g. 512,2048,8192.
    #[arg(long, default_value = "512,2048,8192")]
    n: String,
    #[arg(long, default_value_t = 300)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.25)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 0.8)]
    theta: f64,
    #[arg(long, default_value_t = 2.0)]
    c0: f64,
}

fn parse_horizon(text: &str) -> Result<f64, Error> {
    match text {
        "1d" => return Ok(1.0 / 252.0),
        "1w" => return Ok(5.0 / 252.0),
        "1m" => return Ok(1.0 / 12.0),
        _ => {}
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| bad_horizon(text))?;
        let den: f64 = den.trim().parse().map_err(|_| bad_horizon(text))?;
        if den > 0.0 && num > 0.0 {
            return Ok(num / den);
        }
        return Err(bad_horizon(text));
    }
    match text.parse::<f64>() {
        Ok(t) if t > 0.0 => Ok(t),
        _ => Err(bad_horizon(text)),
    }
}

fn bad_horizon(text: &str) -> Error {
    Error::invalid(format!(
        "bad horizon {text:?}: use 1d, 1w, 1m, a fraction like 5/252, or a positive number"
    ))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let horizon = parse_horizon(&args.horizon)?;
    let n = args.n.unwrap_or_else(|| horizon_to_n(horizon));
    let grid = build_grid(n, horizon)?;
    let cfg = SimConfig::with_seed(args.seed);
    let bundle = simulate_model(args.model, grid, &cfg)?;

    let h_seconds = grid.step() * SECONDS_PER_YEAR;
    let levels = bundle.increments.levels(bundle.x0);
    let csv_path = args.out.with_extension("csv");
    fs::write(&csv_path, harness::render_levels_csv(&levels, h_seconds))?;

    let record_json = |component: JumpComponent| {
        let rec = bundle.jump_record(component);
        serde_json::json!({
            "count": rec.map_or(0, |r| r.len()),
            "times": rec.map_or_else(Vec::new, |r| r.times().to_vec()),
            "sizes": rec.map_or_else(Vec::new, |r| r.sizes().to_vec()),
        })
    };
    let sidecar = serde_json::json!({
        "model": args.model,
        "n": n,
        "horizon_years": horizon,
        "step_seconds": h_seconds,
        "seed": args.seed,
        "x0": bundle.x0,
        "c_true": bundle.c_true,
        "rv": voltune::estimators::rv(&bundle.increments),
        "jumps": {
            "infinite_activity": record_json(JumpComponent::InfiniteActivity),
            "finite_activity": record_json(JumpComponent::FiniteActivity),
        },
    });
    let json_path = args.out.with_extension("json");
    fs::write(&json_path, serde_json::to_string_pretty(&sidecar).expect("serializable"))?;

    println!("wrote {} and {}", csv_path.display(), json_path.display());
    println!(
        "model {} path: n = {n}, T = {horizon:.6} yr, c_true = {:.6e}",
        args.model,
        bundle.c_true.unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Error> {
    let spec = IngestSpec {
        price_kind: args.price_kind.as_deref().map(|k| match k {
            "logprice" => PriceKind::LogPrice,
            _ => PriceKind::Price,
        }),
        tolerance: args.tolerance,
        seconds_per_year: args.seconds_per_year,
        ..Default::default()
    };
    let incs = ingest_csv(&args.input, &spec)?;
    let grid = incs.grid();

    let est = default_estimators()
        .into_iter()
        .find(|e| e.id == args.method)
        .ok_or_else(|| Error::invalid(format!("unknown method {:?} (1..6b)", args.method)))?;
    let out = evaluate_estimator(&est, &incs)?;
    let (lo, hi) = feasible_ci(out.estimate, out.quarticity, args.level)?;

    println!(
        "n = {}, h = {:.6e} yr ({:.1} s)",
        grid.n(),
        grid.step(),
        grid.step() * args.seconds_per_year
    );
    println!("method ({}): estimate = {:.8e}", est.id, out.estimate);
    println!("annualized volatility = {:.4}", (out.estimate / grid.horizon()).max(0.0).sqrt());
    println!("{:.0}% CI = [{:.8e}, {:.8e}]", 100.0 * args.level, lo, hi);
    if let Some(j) = out.j_n {
        println!(
            "stabilization: j_n = {j} ({} iteration(s) until stabilization)",
            out.iterations.unwrap_or(0)
        );
    }
    if let Some(b) = out.uniform_threshold {
        println!("final threshold = {b:.6e}");
    }
    if let Some(e) = est.spot_exponent {
        let (k, clamped) = kn_default(grid.step(), e, Some(grid.n()))?;
        println!("spot window k = {k}{}", if clamped { " (clamped to n)" } else { "" });
    }
    Ok(())
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<(), Error> {
    let text = fs::read_to_string(&args.config)?;
    let mut cfg = BenchmarkConfig::from_json(&text)?;
    if let Some(p) = args.paths {
        cfg.paths = p;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Ok(env_workers) = std::env::var("VOLTUNE_WORKERS") {
        cfg.workers = env_workers
            .parse()
            .map_err(|_| Error::Config(format!("bad VOLTUNE_WORKERS value {env_workers:?}")))?;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(dir) = args.output_dir {
        cfg.output_dir = dir.to_string_lossy().into_owned();
    }
    cfg.validate()?;

    let cells = harness::run_benchmark_to_dir(&cfg)?;
    println!(
        "benchmark: {} cell(s), {} path(s) each, output in {}",
        cells.len(),
        cfg.paths,
        cfg.output_dir
    );
    for cell in &cells {
        println!(
            "\nmodel {}, T = {} (n = {}):",
            cell.model,
            harness::horizon_label(cell.horizon),
            cell.n
        );
        print!("{}", harness::tables::render_table(cell, harness::TableFormat::Csv));
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Error> {
    let cfg = ValidationConfig {
        model: args.model,
        horizon: parse_horizon(&args.horizon)?,
        paths: args.paths,
        seed: args.seed,
        y: args.y,
        workers: args.workers,
    };
    let s = harness::run_validation(&cfg)?;
    let pct = |k: usize| 100.0 * k as f64 / s.paths as f64;
    println!("validation over {} path(s), model {}:", s.paths, args.model);
    println!(
        "  lower bound  C~ <= C^        : {}/{} ({:.1}%)",
        s.lower_ok,
        s.paths,
        pct(s.lower_ok)
    );
    println!(
        "  upper bound  C^ <= oracle + R: {}/{} ({:.1}%)",
        s.upper_ok,
        s.paths,
        pct(s.upper_ok)
    );
    println!(
        "  equality     C~ == oracle    : {}/{} ({:.1}%)",
        s.equality_ok,
        s.paths,
        pct(s.equality_ok)
    );
    println!(
        "  local equality on final value: {}/{} ({:.1}%)",
        s.local_equality_ok,
        s.paths,
        pct(s.local_equality_ok)
    );
    if !s.sandwich_holds_everywhere() {
        return Err(Error::Internal(
            "path-wise sandwich violated; this indicates an implementation bug".into(),
        ));
    }
    Ok(())
}

fn cmd_divergence(args: DivergenceArgs) -> Result<(), Error> {
    let ns: Vec<usize> = args
        .n
        .split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| Error::invalid(format!("bad n list {:?}", args.n)))
        })
        .collect::<Result<_, _>>()?;
    let params = TwoRegimeParams::new(args.a, args.b, args.theta, args.c0)?;
    let points = harness::divergence_demo(&params, &ns, args.paths, args.seed)?;
    println!(
        "two-regime process: a = {}, b = {}, break at {} T, c0 = {} (delta = {:.3})",
        args.a,
        args.b,
        args.theta,
        args.c0,
        params.delta()
    );
    println!("{:>8}  median sqrt(n)·(TRV − C_T)", "n");
    for p in &points {
        println!("{:>8}  {:>16.6}", p.n, p.median_scaled_error);
    }
    let decreasing =
        points.windows(2).all(|w| w[1].median_scaled_error < w[0].median_scaled_error);
    let negative = points.iter().all(|p| p.median_scaled_error < 0.0);
    println!("medians negative: {negative}; strictly decreasing in n: {decreasing}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Estimate(a) => cmd_estimate(a),
        Cmd::Benchmark(a) => cmd_benchmark(a),
        Cmd::Validate(a) => cmd_validate(a),
        Cmd::DivergenceDemo(a) => cmd_divergence(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here; those exit 0, usage errors exit 1
            let code = if e.use_stderr() { 1u8 } else { 0u8 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
