//! `hextile` — diamond-tiled hexagonal array synthesis from the shell.
//!
//! Subcommands: `count`, `enumerate`, `edm`, `cdm`, `eval`, `scan`.
//! Exit codes: 0 success, 2 usage error, 3 exhaustive-search budget refusal,
//! 4 input-data error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hextile::config::RunConfig;
use hextile::enumerate::{cardinality, Enumeration};
use hextile::formats;
use hextile::pattern::{GridRange, ScanSpec, ScanTarget};
use hextile::synth::{estimate_edm, run_cdm, run_edm, EdmCheckpoint, EdmOptions, EvalContext};
use hextile::HexAperture;

const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_DATA: u8 = 4;

/// Thread-count override honored before any parallel work starts.
const THREADS_ENV: &str = "HEXTILE_THREADS";

#[derive(Parser)]
#[command(
    name = "hextile",
    about = "Diamond-tiled hexagonal phased array synthesis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact number of complete tilings for the given side lengths.
    Count(CountArgs),
    /// Stream every tiling word of an aperture, with optional checkpointing.
    Enumerate(EnumerateArgs),
    /// Exhaustive synthesis: evaluate every tiling and report the optimum.
    Edm(EdmArgs),
    /// Genetic synthesis for apertures too large to enumerate.
    Cdm(CdmArgs),
    /// Evaluate one tiling file: coefficients, pattern, cost and metrics.
    Eval(EvalArgs),
    /// Sidelobe/directivity map over a scan cone for one tiling file.
    Scan(ScanArgs),
}

#[derive(Args)]
struct CountArgs {
    /// One side length (regular hexagon) or three.
    sides: Vec<u32>,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Triangles per hexagon side.
    #[arg(long)]
    rings: u32,
    /// Stop after this many tilings.
    #[arg(long)]
    limit: Option<u64>,
    /// Write a resumable checkpoint here.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Checkpoint every N tilings.
    #[arg(long, default_value_t = 10000)]
    checkpoint_every: u64,
    /// Resume from a checkpoint file.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Args)]
struct EdmArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Re-run even when the time estimate exceeds the budget.
    #[arg(long)]
    force: bool,
    /// Wall-time budget for the full sweep, in seconds.
    #[arg(long, default_value_t = 3600.0)]
    budget_secs: f64,
    /// Write a resumable checkpoint here.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Checkpoint every N evaluations.
    #[arg(long, default_value_t = 5000)]
    checkpoint_every: u64,
    /// Resume from a checkpoint file.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Args)]
struct CdmArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Run this many seeds (seed, seed+1, ...) and report the distribution.
    #[arg(long, default_value_t = 1)]
    repeat: u64,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Tiling file to evaluate.
    #[arg(long)]
    tiling: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Tiling file to scan.
    #[arg(long)]
    tiling: PathBuf,
    /// Pointing direction elevation, degrees.
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    theta0: f64,
    /// Pointing direction azimuth, degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phi0: f64,
    #[arg(long, default_value_t = -30.0, allow_negative_numbers = true)]
    theta_min: f64,
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    theta_max: f64,
    #[arg(long, default_value_t = 5.0)]
    theta_step: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phi_min: f64,
    #[arg(long, default_value_t = 360.0, allow_negative_numbers = true)]
    phi_max: f64,
    #[arg(long, default_value_t = 5.0)]
    phi_step: f64,
    /// Scan the fully-populated reference instead of the tiled array.
    #[arg(long)]
    fully_populated: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn budget(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_BUDGET,
            message: message.into(),
        }
    }
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::data(e.to_string())
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var(THREADS_ENV) {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer");
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Count(args) => cmd_count(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Edm(args) => cmd_edm(args),
        Command::Cdm(args) => cmd_cdm(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Scan(args) => cmd_scan(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_count(args: CountArgs) -> Result<(), Failure> {
    let (a, b, c) = match args.sides.as_slice() {
        [n] => (*n, *n, *n),
        [a, b, c] => (*a, *b, *c),
        _ => {
            return Err(Failure::usage(
                "count expects one side length or three (usage: hextile count A [B C])",
            ))
        }
    };
    let t = cardinality(a, b, c).map_err(|e| Failure::usage(e.to_string()))?;
    println!("{t}");
    Ok(())
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<(), Failure> {
    let ap = HexAperture::new(args.rings, 0.5).map_err(|e| Failure::usage(e.to_string()))?;
    let mut cursor = match &args.resume {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let (word, t) = formats::read_checkpoint(&text)?;
            Enumeration::resume(&ap, word, t)?
        }
        None => Enumeration::new(&ap),
    };
    let mut emitted = 0u64;
    let mut since = 0u64;
    loop {
        if args.limit.is_some_and(|l| emitted >= l) {
            break;
        }
        let Some((t, word, _tiling)) = cursor.next() else {
            break;
        };
        println!("{t} {word}");
        emitted += 1;
        since += 1;
        if let Some(path) = &args.checkpoint {
            if since >= args.checkpoint_every {
                since = 0;
                if let Some(next) = cursor.peek_word() {
                    std::fs::write(path, formats::write_checkpoint(next, cursor.next_index()))?;
                }
            }
        }
    }
    // Final checkpoint so an interrupted consumer can pick up cleanly.
    if let (Some(path), Some(next)) = (&args.checkpoint, cursor.peek_word()) {
        std::fs::write(path, formats::write_checkpoint(next, cursor.next_index()))?;
    }
    Ok(())
}

fn load_setup(path: &Path) -> Result<(RunConfig, HexAperture), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let config = RunConfig::from_toml_str(&text)?;
    let ap = config.build_aperture()?;
    Ok((config, ap))
}

fn out_dir(config: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = PathBuf::from(&config.output.directory);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Every exported file carries the configuration hash; CSV emitters get it
/// as a leading comment line.
fn stamped(hash: &str, body: String) -> String {
    format!("# config_hash={hash}\n{body}")
}

fn cmd_edm(args: EdmArgs) -> Result<(), Failure> {
    let (config, ap) = load_setup(&args.config)?;
    let ctx = EvalContext::from_config(&config, &ap)?;
    let hash = config.hash();

    let estimate = estimate_edm(&ctx, 100);
    eprintln!(
        "exhaustive sweep: T = {} tilings, ~{:.3} ms each, estimated {:.1} s total",
        estimate.tilings,
        estimate.seconds_per_tiling * 1e3,
        estimate.total_seconds
    );
    if estimate.total_seconds > args.budget_secs && !args.force {
        return Err(Failure::budget(format!(
            "estimated {:.0} s exceeds the budget of {:.0} s; pass --force to run anyway",
            estimate.total_seconds, args.budget_secs
        )));
    }

    let resume = match &args.resume {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let state: EdmCheckpoint = serde_json::from_str(&text)?;
            Some(state)
        }
        None => None,
    };
    let outcome = run_edm(
        &ctx,
        &EdmOptions {
            checkpoint_path: args.checkpoint.clone(),
            checkpoint_every: args.checkpoint.is_some().then_some(args.checkpoint_every),
            resume,
            config_hash: hash.clone(),
        },
    )?;

    let dir = out_dir(&config)?;
    let codec = hextile::tiling::WordCodec::new(&ap);
    let best = codec.decode(&outcome.best_word)?;
    let record = ctx.record(&best, "edm", Some(config.seed), &hash)?;
    std::fs::write(dir.join("edm_best.json"), record.to_json())?;
    std::fs::write(
        dir.join("edm_curve.csv"),
        stamped(&hash, formats::write_curve_csv(&outcome.sorted_chis_desc())),
    )?;
    std::fs::write(dir.join("edm_best_tiling.txt"), formats::write_tiling(&ap, &best))?;

    println!(
        "evaluated {} tilings: best chi = {:e} at t = {} ({} co-optimal), worst chi = {:e} at t = {}",
        outcome.evaluations,
        outcome.best_chi,
        outcome.best_t,
        outcome.co_count,
        outcome.worst_chi,
        outcome.worst_t
    );
    for w in &outcome.co_optima {
        println!("co-optimum: {w}");
    }
    println!("wrote {}", dir.join("edm_best.json").display());
    println!("wrote {}", dir.join("edm_curve.csv").display());
    println!("wrote {}", dir.join("edm_best_tiling.txt").display());
    Ok(())
}

fn cmd_cdm(args: CdmArgs) -> Result<(), Failure> {
    let (config, ap) = load_setup(&args.config)?;
    let ctx = EvalContext::from_config(&config, &ap)?;
    let hash = config.hash();
    let dir = out_dir(&config)?;
    let base_seed = args.seed.unwrap_or(config.seed);

    let mut finals = Vec::new();
    let mut best: Option<(f64, u64)> = None;
    for r in 0..args.repeat.max(1) {
        let seed = base_seed + r;
        let ga = config.ga_config(Some(seed));
        let (record, trace) = run_cdm(&ctx, &ga, &hash)?;
        let chi = record.chi;
        let trace_name = if args.repeat > 1 {
            format!("cdm_trace_seed{seed}.csv")
        } else {
            "cdm_trace.csv".to_string()
        };
        std::fs::write(
            dir.join(&trace_name),
            stamped(&hash, formats::write_trace_csv(&trace)),
        )?;
        println!(
            "seed {seed}: chi = {chi:e} after {} iterations ({}), {} evaluations, {:.2} s",
            trace.best.len() - 1,
            trace.termination,
            trace.evaluations,
            trace.wall.as_secs_f64()
        );
        if best.is_none() || chi < best.unwrap().0 {
            best = Some((chi, seed));
            std::fs::write(dir.join("cdm_best.json"), record.to_json())?;
            let tiling = record.tiling(&ap)?;
            std::fs::write(dir.join("cdm_best_tiling.txt"), formats::write_tiling(&ap, &tiling))?;
        }
        finals.push(chi);
    }
    if args.repeat > 1 {
        finals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = finals.iter().sum::<f64>() / finals.len() as f64;
        println!(
            "final chi over {} seeds: min = {:e}, median = {:e}, mean = {mean:e}, max = {:e}",
            finals.len(),
            finals[0],
            finals[finals.len() / 2],
            finals[finals.len() - 1]
        );
    }
    let (chi, seed) = best.expect("at least one run");
    println!("best seed {seed} with chi = {chi:e}");
    println!("wrote {}", dir.join("cdm_best.json").display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let (config, ap) = load_setup(&args.config)?;
    let ctx = EvalContext::from_config(&config, &ap)?;
    let text = std::fs::read_to_string(&args.tiling)
        .map_err(|e| Failure::data(format!("{}: {e}", args.tiling.display())))?;
    let (tiling, _word) = formats::read_tiling(&text, &ap)?;
    let record = ctx.record(&tiling, "eval", None, &config.hash())?;
    let pattern = ctx.pattern(&tiling)?;

    let dir = out_dir(&config)?;
    let hash = config.hash();
    std::fs::write(dir.join("eval_record.json"), record.to_json())?;
    std::fs::write(
        dir.join("pattern.csv"),
        stamped(&hash, formats::write_pattern_csv(&pattern)),
    )?;
    std::fs::write(
        dir.join("cuts.csv"),
        stamped(&hash, formats::write_cuts_csv(&pattern)),
    )?;
    println!(
        "chi = {:e}, sll = {:.2} dB, d = {:.2} dBi, hpbw = {:.2} x {:.2} deg",
        record.chi,
        record.metrics.sll_db,
        record.metrics.d_dbi,
        record.metrics.hpbw_az_deg,
        record.metrics.hpbw_el_deg
    );
    println!("wrote {}", dir.join("eval_record.json").display());
    println!("wrote {}", dir.join("pattern.csv").display());
    println!("wrote {}", dir.join("cuts.csv").display());
    Ok(())
}

fn cmd_scan(args: ScanArgs) -> Result<(), Failure> {
    let (config, ap) = load_setup(&args.config)?;
    let text = std::fs::read_to_string(&args.tiling)
        .map_err(|e| Failure::data(format!("{}: {e}", args.tiling.display())))?;
    let (tiling, _word) = formats::read_tiling(&text, &ap)?;
    let reference = config.reference(&ap)?;
    let mask = config.power_mask();
    let spec = ScanSpec {
        theta0_deg: args.theta0,
        phi0_deg: args.phi0,
        theta_gamma: GridRange {
            start: args.theta_min,
            end: args.theta_max,
            step: args.theta_step,
        },
        phi_gamma: GridRange {
            start: args.phi_min,
            end: args.phi_max,
            step: args.phi_step,
        },
    };
    let target = if args.fully_populated {
        ScanTarget::FullyPopulated
    } else {
        ScanTarget::Tiled(&tiling)
    };
    let samples = hextile::pattern::scan_map(
        &ap,
        target,
        &reference,
        &mask,
        config.grid.resolution,
        &spec,
    )?;

    let dir = out_dir(&config)?;
    std::fs::write(
        dir.join("scan.csv"),
        stamped(&config.hash(), formats::write_scan_csv(&samples)),
    )?;
    println!("scanned {} directions", samples.len());
    println!("wrote {}", dir.join("scan.csv").display());
    Ok(())
}
