use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ccorder::datagen::{generate_keyed, ScenarioConfig, StreamKey};
use ccorder::harness::io::{read_complex_matrix, write_complex_matrix};
use ccorder::harness::presets::{preset, PRESET_NAMES};
use ccorder::harness::{
    emit_csv, emit_histogram_csv, run_experiment_with_threads, run_statistic_histogram,
    ExperimentSpec,
};
use ccorder::{baseline, detect, DataMatrixPair, DetectorConfig, Error, Method, Result};

#[derive(Parser)]
#[command(name = "ccorder", version, about = "Joint PCA-rank and correlated-signal order selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the number of correlated signals between two data matrices.
    Detect(DetectArgs),
    /// Run a Monte Carlo experiment and write the P_D table as CSV.
    Simulate(SimulateArgs),
    /// Sample the Bartlett-Lawley statistic C(r_x, r_y, s) over fresh datasets.
    Hist(HistArgs),
    /// Write one generated dataset as two complex CSV matrices.
    Generate(GenerateArgs),
    /// List presets, or print one as a JSON experiment spec.
    Preset { name: Option<String> },
}

#[derive(Args)]
struct DetectArgs {
    /// CSV matrix of channel x (rows = components, columns = samples).
    #[arg(long)]
    x: PathBuf,
    /// CSV matrix of channel y.
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value = "maxmin-ht", value_parser = parse_method)]
    method: Method,
    #[arg(long)]
    pfa: Option<f64>,
    #[arg(long)]
    rmax: Option<usize>,
    /// Print the full decision, including per-pair diagnostics, as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    preset: Option<String>,
    /// JSON experiment spec (`"schema": 1`), or a bare scenario where allowed.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    /// Overrides the spec's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct HistArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    rx: usize,
    #[arg(long)]
    ry: usize,
    #[arg(long)]
    s: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// False-alarm probability of the reported threshold.
    #[arg(long, default_value_t = 0.01)]
    pfa: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    source: Source,
    /// Sweep point index.
    #[arg(long, default_value_t = 0)]
    point: usize,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_spec(source: &Source) -> Result<ExperimentSpec> {
    match (&source.preset, &source.config) {
        (Some(name), _) => preset(name),
        (None, Some(path)) => ExperimentSpec::load(path),
        (None, None) => unreachable!("clap enforces one source"),
    }
}

/// Scenarios may come from a full spec or from a bare scenario document.
fn load_scenarios(source: &Source) -> Result<Vec<ScenarioConfig>> {
    let Some(path) = &source.config else {
        return Ok(load_spec(source)?.points()?.into_iter().map(|(_, s)| s).collect());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let parse_err = |message: String| Error::Parse {
        path: path.clone(),
        message,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
    if value.get("schema").is_some() {
        let spec = ExperimentSpec::from_json(&text).map_err(|e| parse_err(e.to_string()))?;
        return Ok(spec.points()?.into_iter().map(|(_, s)| s).collect());
    }
    let scenario: ScenarioConfig =
        serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))?;
    scenario.validate()?;
    Ok(vec![scenario])
}

fn read_pair(x: &Path, y: &Path) -> Result<DataMatrixPair> {
    DataMatrixPair::new(read_complex_matrix(x)?, read_complex_matrix(y)?)
}

fn run_detect(args: DetectArgs) -> Result<()> {
    let pair = read_pair(&args.x, &args.y)?;
    let mut cfg = DetectorConfig::new(args.method);
    if let Some(p) = args.pfa {
        cfg = cfg.with_p_fa(p);
    }
    if let Some(r) = args.rmax {
        cfg = cfg.with_r_max(r);
    }
    cfg.validate()?;
    if args.method.is_max_min() {
        let decision = detect(&pair, &cfg)?;
        if args.json {
            println!("{}", serde_json::to_string_pretty(&decision).expect("decision serializes"));
        } else {
            println!(
                "d_hat={} r_x={} r_y={}",
                decision.d_hat, decision.r_x_star, decision.r_y_star
            );
        }
    } else {
        let sel = baseline(&pair, &cfg)?;
        if args.json {
            let doc = serde_json::json!({
                "method": args.method,
                "d_hat": sel.d_hat,
                "r_x_star": sel.r_x,
                "r_y_star": sel.r_y,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        } else {
            println!("d_hat={} r_x={} r_y={}", sel.d_hat, sel.r_x, sel.r_y);
        }
    }
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let mut spec = load_spec(&args.source)?;
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    spec.validate()?;
    let threads = args.threads.unwrap_or(0);
    let report = run_experiment_with_threads(&spec, threads)?;
    emit_csv(&report, &args.out)?;
    for point in &report.points {
        for s in &point.detectors {
            if s.err_trials > 0 {
                eprintln!(
                    "warning: {} at {:?}: {} of {} trials failed",
                    s.label, point.sweep_value, s.err_trials, s.trials
                );
            }
        }
    }
    eprintln!("wrote {} rows to {}", report.rows().len(), args.out.display());
    Ok(())
}

fn run_hist(args: HistArgs) -> Result<()> {
    let scenarios = load_scenarios(&args.source)?;
    let scenario = scenarios
        .first()
        .ok_or_else(|| Error::Config("spec has no sweep points".into()))?;
    let report = run_statistic_histogram(
        scenario, args.rx, args.ry, args.s, args.trials, args.seed, args.pfa,
    )?;
    emit_histogram_csv(&report, &args.out)?;
    println!(
        "C({},{},{}): {} samples, {} excluded, chi2 dof {}, T(p_fa={}) = {}",
        args.rx,
        args.ry,
        args.s,
        report.samples.len(),
        report.excluded,
        report.dof,
        report.p_fa,
        report.threshold
    );
    Ok(())
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let scenarios = load_scenarios(&args.source)?;
    let scenario = scenarios.get(args.point).ok_or_else(|| {
        Error::Config(format!("point {} out of range (0..{})", args.point, scenarios.len()))
    })?;
    let data = generate_keyed(scenario, StreamKey::new(args.seed, args.point as u64, args.trial), None)?;
    write_complex_matrix(&args.x, data.pair.x())?;
    write_complex_matrix(&args.y, data.pair.y())?;
    eprintln!(
        "n={} m={} M={} d={}",
        data.pair.n(),
        data.pair.m(),
        data.pair.samples(),
        data.truth.d
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect(args) => run_detect(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Hist(args) => run_hist(args),
        Command::Generate(args) => run_generate(args),
        Command::Preset { name: None } => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(())
        }
        Command::Preset { name: Some(name) } => {
            println!("{}", preset(&name)?.to_json());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
