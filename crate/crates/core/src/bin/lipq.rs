use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use lipq::harness::output::{with_file, write_json, write_runs_csv};
use lipq::harness::{
    compare_histogram, default_floor, planted_two_jump_sampler, run_lip_experiment, verify_bernstein,
    verify_rate_j1, AtomWindow, OutputFormat, RateConfig, Settings, Summary,
};
use lipq::heavytail::{tail_constant, TailScale};
use lipq::measures::{tabulate, write_measures_csv};
use lipq::{Error, Result};

/// Long intense periods of heavy-tailed finite-buffer queues.
#[derive(Parser, Debug)]
#[command(name = "lipq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the Monte Carlo experiment; writes runs and summary.json.
    Simulate(Common),
    /// Tabulate the limit measures and the combined estimate on a grid.
    Measures(Common),
    /// Experiment plus histogram comparison, measures and planted second-level sample.
    Compare(Common),
    /// Empirical one-jump rate and Bernstein checks.
    VerifyRates(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    mean: Option<f64>,
    /// Service rate `c`.
    #[arg(long)]
    rate: Option<f64>,
    /// Buffer size `K`.
    #[arg(long)]
    buffer: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Arrivals per replication; also the horizon `M`.
    #[arg(long)]
    arrivals: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bin_width: Option<f64>,
    /// `a,b,c` or `lo:hi:n`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// step or drift.
    #[arg(long)]
    embedding: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    audit_threshold: Option<f64>,
    /// Planted two-jump samples for `compare`.
    #[arg(long)]
    samples: Option<usize>,
    /// Walks for `verify-rates`.
    #[arg(long)]
    walks: Option<usize>,
    /// Steps per walk for `verify-rates`.
    #[arg(long)]
    steps: Option<usize>,
    /// Exponent of `lambda = n^rho` for `verify-rates`.
    #[arg(long)]
    rho: Option<f64>,
    /// Levels `x` for `verify-rates`.
    #[arg(long)]
    levels: Option<String>,
}

impl Common {
    fn settings(self) -> Result<Settings> {
        let file = match &self.config {
            Some(p) => Settings::read(p)?,
            None => Settings::default(),
        };
        let flags = Settings {
            alpha: self.alpha,
            mean: self.mean,
            rate: self.rate,
            buffer: self.buffer,
            theta: self.theta,
            arrivals: self.arrivals,
            reps: self.reps,
            seed: self.seed,
            bin_width: self.bin_width,
            grid: self.grid,
            out: self.out,
            format: self.format,
            embedding: self.embedding,
            threads: self.threads,
            audit_threshold: self.audit_threshold,
            samples: self.samples,
            walks: self.walks,
            steps: self.steps,
            rho: self.rho,
            levels: self.levels,
        };
        Ok(file.overlay(flags))
    }
}

fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

fn simulate(s: &Settings, with_comparison: bool) -> Result<serde_json::Value> {
    let cfg = s.experiment()?;
    let params = cfg.params;
    let format = s.format()?;
    let out = s.out_dir();
    let c = tail_constant(&params.arrival_dist()?, TailScale::Asymptotic)?;
    let window = AtomWindow::default_for(&params);
    let grid = s.grid(&params)?;
    let data = run_lip_experiment(&cfg)?;

    let runs = out.join(format!("runs.{}", extension(format)));
    with_file(&runs, |w| match format {
        OutputFormat::Csv => write_runs_csv(&data.records, w),
        OutputFormat::Json => write_json(&data.records, w),
    })?;
    let summary = Summary::new(&data, c, window, &grid)?;
    with_file(&out.join("summary.json"), |w| write_json(&summary, w))?;
    let mut report = json!({
        "n_reps": summary.n_reps,
        "n_positive": summary.n_positive,
        "p_positive": summary.p_positive,
        "predicted_p_positive": summary.predicted_p_positive,
        "files": [runs, out.join("summary.json")],
    });
    if with_comparison {
        let cmp = compare_histogram(&data, &params, c, window)?;
        let hist = out.join(format!("hist.{}", extension(format)));
        with_file(&hist, |w| match format {
            OutputFormat::Csv => cmp.write_csv(w),
            OutputFormat::Json => write_json(&cmp, w),
        })?;
        let measures = out.join(format!("measures.{}", extension(format)));
        write_measures(&measures, format, &params, c, &grid)?;
        let samples = s.samples.unwrap_or(200_000);
        let planted = planted_two_jump_sampler(&params, samples, cfg.master_seed, default_floor(&params))?;
        let planted_path = out.join("planted.json");
        let tail: Vec<_> = grid
            .iter()
            .filter(|&&l| l > params.kappa())
            .map(|&l| json!({ "l": l, "mu2_estimate": planted.tail_estimate(l) }))
            .collect();
        with_file(&planted_path, |w| {
            write_json(
                &json!({
                    "samples": planted.len(),
                    "floor": planted.floor,
                    "weight": planted.weight,
                    "tail": tail,
                }),
                w,
            )
        })?;
        report["files"]
            .as_array_mut()
            .expect("files is an array")
            .extend([json!(hist), json!(measures), json!(planted_path)]);
    }
    Ok(report)
}

fn write_measures(
    path: &std::path::Path,
    format: OutputFormat,
    params: &lipq::measures::ModelParams,
    c: f64,
    grid: &[f64],
) -> Result<()> {
    let rows = tabulate(params, c, grid)?;
    with_file(path, |w| match format {
        OutputFormat::Csv => write_measures_csv(&rows, w),
        OutputFormat::Json => write_json(&rows, w),
    })
}

fn measures(s: &Settings) -> Result<serde_json::Value> {
    let params = s.params()?;
    let format = s.format()?;
    let c = tail_constant(&params.arrival_dist()?, TailScale::Asymptotic)?;
    let path = s.out_dir().join(format!("measures.{}", extension(format)));
    write_measures(&path, format, &params, c, &s.grid(&params)?)?;
    Ok(json!({ "kappa": params.kappa(), "tail_constant": c, "files": [path] }))
}

fn verify_rates(s: &Settings) -> Result<serde_json::Value> {
    let params = s.params()?;
    let seed = s.seed.unwrap_or(1);
    let cfg = RateConfig::with_exponent(
        s.steps.unwrap_or(10_000),
        s.rho.unwrap_or(0.9),
        params.arrival_dist()?,
        s.walks.unwrap_or(100_000),
        seed,
    );
    let rates = verify_rate_j1(&cfg, &s.levels()?)?;
    let mut bernstein = Vec::new();
    for n in [100usize, 1000] {
        let sd = (n as f64 / 3.0).sqrt();
        let levels: Vec<f64> = (1..=5).map(|k| k as f64 * sd).collect();
        bernstein.extend(verify_bernstein(n, &levels, 100_000, seed)?);
    }
    let record = json!({ "config": cfg, "rate_j1": rates, "bernstein": bernstein });
    let path = s.out_dir().join("rates.json");
    with_file(&path, |w| write_json(&record, w))?;
    Ok(json!({ "rate_j1": rates, "files": [path] }))
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    match cli.command {
        Command::Simulate(c) => simulate(&c.settings()?, false),
        Command::Compare(c) => simulate(&c.settings()?, true),
        Command::Measures(c) => measures(&c.settings()?),
        Command::VerifyRates(c) => verify_rates(&c.settings()?),
    }
}

fn error_record(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_record("usage", e.to_string().trim()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let e: Error = e;
            eprintln!("{}", error_record(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
