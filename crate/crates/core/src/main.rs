//! Command-line interface to the exposure-control laboratory.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use camlab::camsim::{
    read_scenario_pack, sample_scenario, write_scenario_pack, Difficulty, EvalScenario,
};
use camlab::dataset_env::{describe_grid, generate_synthetic_grid, GridSpec};
use camlab::harness::{
    bench_latency, compare, BuiltinAeController, Controller, DrlController, LabConfig,
    NelderMeadController, RandomController, DEFAULT_EPSILON,
};
use camlab::imaging::Image;
use camlab::nn::{load_mlp, save_mlp, Mlp};
use camlab::sac::{train, write_training_log, TrainSetup};
use camlab::{LabError, Result};

#[derive(Parser)]
#[command(
    name = "camlab",
    version,
    about = "Synthetic darkroom laboratory for learned and classical exposure control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the exposure agent; writes checkpoint, logs, and the resolved config.
    Train(TrainArgs),
    /// Score a trained checkpoint over a scenario pack.
    Eval(EvalArgs),
    /// Run several controllers over one scenario pack and summarize.
    Compare(CompareArgs),
    /// Render a synthetic exposure/gain frame grid into a directory.
    GenGrid(GenGridArgs),
    /// Sample a frozen scenario pack for evaluation.
    GenScenarios(GenScenariosArgs),
    /// Measure per-frame control latency of a checkpoint.
    Bench(BenchArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Flat TOML config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for actor.ckpt, training_log.csv, eval_log.csv, config.toml.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Scenario pack produced by gen-scenarios.
    #[arg(long)]
    scenarios: PathBuf,
    /// Convergence threshold on mean frame difference.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Comma-separated subset of drl,builtin,nm,random.
    #[arg(long)]
    controllers: String,
    /// Actor checkpoint; required when the list includes drl.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    scenarios: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Objective-probe budget for the nm controller.
    #[arg(long, default_value_t = 200)]
    nm_budget: usize,
    /// Seed for the random controller.
    #[arg(long, default_value_t = 0)]
    random_seed: u64,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GridSource {
    /// JSON grid recipe (see GridSpec fields).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Built-in recipe: outdoor (short exposures) or indoor (long exposures).
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct GenGridArgs {
    #[command(flatten)]
    source: GridSource,
    /// Frame width for preset recipes.
    #[arg(long, default_value_t = 64)]
    width: usize,
    /// Frame height for preset recipes.
    #[arg(long, default_value_t = 64)]
    height: usize,
    /// Output directory for the PGM cells and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenScenariosArgs {
    /// Scenarios drawn per difficulty level.
    #[arg(long, default_value_t = 10)]
    per_difficulty: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    /// Source frame size fed to the resize stage, as HxW.
    #[arg(long, default_value = "128x128")]
    source: String,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => run_train(args),
        Command::Eval(args) => run_eval(args),
        Command::Compare(args) => run_compare(args),
        Command::GenGrid(args) => run_gen_grid(args),
        Command::GenScenarios(args) => run_gen_scenarios(args),
        Command::Bench(args) => run_bench(args),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<LabConfig> {
    match path {
        Some(p) => LabConfig::load(p),
        None => Ok(LabConfig::default()),
    }
}

fn run_train(args: TrainArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    let setup: TrainSetup = config.to_setup()?;
    fs::create_dir_all(&args.out)?;
    config.save(args.out.join("config.toml"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut last_report = 0u64;
    let mut progress = |row: &camlab::sac::EpisodeLogRow| {
        if row.step >= last_report + 1000 {
            last_report = row.step;
            eprintln!(
                "step {:>7}  episode {:>6}  return {:>9.3}  alpha {:.4}",
                row.step, row.episode, row.episode_return, row.alpha
            );
        }
    };
    let output = train(&setup, &mut rng, Some(&mut progress))?;
    save_mlp(&output.actor, args.out.join("actor.ckpt"))?;
    let log = File::create(args.out.join("training_log.csv"))?;
    write_training_log(&output.episodes, BufWriter::new(log))?;
    let mut evals = BufWriter::new(File::create(args.out.join("eval_log.csv"))?);
    writeln!(evals, "step,mean_return,converged_fraction")?;
    for row in &output.evals {
        writeln!(evals, "{},{:.6},{:.6}", row.step, row.mean_return, row.converged_fraction)?;
    }
    println!(
        "trained {} episodes over {} steps; artifacts in {}",
        output.episodes.len(),
        setup.sac.total_steps,
        args.out.display()
    );
    Ok(())
}

fn read_pack(path: &Path) -> Result<Vec<EvalScenario>> {
    let file = File::open(path)
        .map_err(|e| LabError::Format(format!("scenario pack {}: {e}", path.display())))?;
    let scenarios = read_scenario_pack(BufReader::new(file))?;
    if scenarios.is_empty() {
        return Err(LabError::Format(format!(
            "scenario pack {} holds no scenarios",
            path.display()
        )));
    }
    Ok(scenarios)
}

fn load_actor(path: &Path) -> Result<Mlp<f32>> {
    load_mlp::<f32, _>(path)
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    let actor = load_actor(&args.checkpoint)?;
    let scenarios = read_pack(&args.scenarios)?;
    let mut controllers: Vec<Box<dyn Controller>> =
        vec![Box::new(DrlController::new(actor)?)];
    let out = File::create(&args.out)?;
    let reports = compare(
        &mut controllers,
        &scenarios,
        &config.env_config()?,
        args.epsilon,
        BufWriter::new(out),
    )?;
    let converged = reports.iter().filter(|r| r.frames_to_converge.is_some()).count();
    println!(
        "evaluated {} episodes, {} converged; report at {}",
        reports.len(),
        converged,
        args.out.display()
    );
    Ok(())
}

fn run_compare(args: CompareArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    let mut controllers: Vec<Box<dyn Controller>> = Vec::new();
    for name in args.controllers.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name {
            "drl" => {
                let path = args.checkpoint.as_ref().ok_or_else(|| {
                    LabError::Argument("controller drl needs --checkpoint".into())
                })?;
                controllers.push(Box::new(DrlController::new(load_actor(path)?)?));
            }
            "builtin" => controllers.push(Box::new(BuiltinAeController)),
            "nm" => controllers.push(Box::new(NelderMeadController::full_range(
                config.reward_config()?,
                args.nm_budget,
            ))),
            "random" => controllers.push(Box::new(RandomController::new(args.random_seed))),
            other => {
                return Err(LabError::Argument(format!(
                    "unknown controller {other:?}; expected drl, builtin, nm, or random"
                )))
            }
        }
    }
    if controllers.is_empty() {
        return Err(LabError::Argument("--controllers lists no controller".into()));
    }
    let scenarios = read_pack(&args.scenarios)?;
    let out = File::create(&args.out)?;
    let reports = compare(
        &mut controllers,
        &scenarios,
        &config.env_config()?,
        args.epsilon,
        BufWriter::new(out),
    )?;
    println!("wrote {} episode rows to {}", reports.len(), args.out.display());
    Ok(())
}

fn run_gen_grid(args: GenGridArgs) -> Result<()> {
    let spec: GridSpec = match (&args.source.spec, &args.source.preset) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| LabError::Format(format!("grid spec {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| LabError::Format(format!("grid spec {}: {e}", path.display())))?
        }
        (None, Some(preset)) => match preset.as_str() {
            "outdoor" => GridSpec::outdoor_like(args.width, args.height),
            "indoor" => GridSpec::indoor_like(args.width, args.height),
            other => {
                return Err(LabError::Argument(format!(
                    "unknown preset {other:?}; expected outdoor or indoor"
                )))
            }
        },
        _ => unreachable!("clap enforces exactly one source"),
    };
    fs::create_dir_all(&args.out)?;
    let manifest = generate_synthetic_grid(&spec, &args.out)?;
    println!("{} in {}", describe_grid(&manifest), args.out.display());
    Ok(())
}

fn run_gen_scenarios(args: GenScenariosArgs) -> Result<()> {
    if args.per_difficulty == 0 {
        return Err(LabError::Argument("--per-difficulty must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut scenarios = Vec::new();
    for difficulty in [Difficulty::Easy, Difficulty::Normal, Difficulty::Hard] {
        for _ in 0..args.per_difficulty {
            scenarios.push(EvalScenario {
                scenario: sample_scenario(difficulty, &mut rng),
                seed: rng.gen(),
                difficulty,
            });
        }
    }
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let out = File::create(&args.out)?;
    write_scenario_pack(&scenarios, BufWriter::new(out))?;
    println!("wrote {} scenarios to {}", scenarios.len(), args.out.display());
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let (h, w) = args
        .source
        .split_once('x')
        .and_then(|(h, w)| Some((h.parse::<usize>().ok()?, w.parse::<usize>().ok()?)))
        .ok_or_else(|| {
            LabError::Argument(format!("--source {:?} is not HxW", args.source))
        })?;
    let actor = load_actor(&args.checkpoint)?;
    let frame = Image::from_fn(h, w, |r, c| ((r * 31 + c * 17) % 97) as f64 / 96.0)?;
    let report = bench_latency(&actor, &frame, args.iters)?;
    println!("iterations: {}", report.iterations);
    println!(
        "resize {}x{} -> 128x128: min {:.4} ms, median {:.4} ms, p99 {:.4} ms",
        h, w, report.resize.min_ms, report.resize.median_ms, report.resize.p99_ms
    );
    println!(
        "state + policy forward:  min {:.4} ms, median {:.4} ms, p99 {:.4} ms",
        report.policy.min_ms, report.policy.median_ms, report.policy.p99_ms
    );
    Ok(())
}
