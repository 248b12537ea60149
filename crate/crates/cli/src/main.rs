//! `vista`: run exploration episodes and batches, export maps, validate
//! scenario files.
//!
//! Exit codes:
//! - 0: success (`run`: the target was reached)
//! - 1: runtime or I/O error
//! - 2: `run` finished without reaching the target
//! - 3: setup error (unreadable or invalid config, scene or snapshot)
//! - 64: usage error (bad flags or values)

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use vista_core::map::export::{write_pgm, write_ply, MapSnapshot, PgmEncoding};
use vista_core::map::Channel;
use vista_sim::batch::{run_batch, write_report, RESULTS_FILE};
use vista_sim::{run_episode_with_map, ScenarioConfig, SimError, StrategyKind};

const EXIT_FAILURE: u8 = 2;
const EXIT_SETUP: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "vista", version, about = "Semantic exploration episodes in simulated scenes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and print its result as JSON.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// vista, semantic or geometric (long names are accepted too).
        #[arg(long)]
        strategy: Option<StrategyKind>,
        /// Name of the scene object to search for.
        #[arg(long)]
        query: Option<String>,
        /// Also write the final map as a JSON snapshot.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Run every scene x strategy x seed cell and write results.csv plus logs.
    Batch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export a map snapshot as a PLY point cloud or a rendered PGM image.
    Export {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        kind: ExportKind,
        #[arg(long)]
        out: PathBuf,
        /// Rendered channel for PGM output.
        #[arg(long, default_value = "depth")]
        channel: PgmChannel,
    },
    /// Check a scenario file and the scenes it references.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportKind {
    Ply,
    Pgm,
}

#[derive(Clone, Copy, ValueEnum)]
enum PgmChannel {
    Depth,
    Semantic,
    Gain,
}

/// Error carrying the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn setup(e: impl std::fmt::Display) -> Self {
        Self { code: EXIT_SETUP, message: e.to_string() }
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        Self { code: 1, message: e.to_string() }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Setup(_) | SimError::Json(_) => Self::setup(e),
            SimError::Core(vista_core::VistaError::InvalidInput(_)) => Self::setup(e),
            _ => Self::runtime(e),
        }
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    let cfg = ScenarioConfig::load(path)?;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(
    config: &Path,
    seed: Option<u64>,
    strategy: Option<StrategyKind>,
    query: Option<String>,
    snapshot: Option<&Path>,
) -> Result<u8, Failure> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(s) = strategy {
        cfg.strategy = s;
    }
    if query.is_some() {
        cfg.query = query;
    }
    let scene = cfg.build_scene(&cfg.scene, cfg.seed)?;
    let (result, map) = run_episode_with_map(&scene, &cfg.scene, cfg.strategy, &cfg, cfg.seed)?;
    if let Some(path) = snapshot {
        let file = BufWriter::new(File::create(path).map_err(Failure::runtime)?);
        serde_json::to_writer(file, &map).map_err(Failure::runtime)?;
    }
    io::stdout().write_all(result.to_json().as_bytes()).map_err(Failure::runtime)?;
    Ok(if result.success { 0 } else { EXIT_FAILURE })
}

fn cmd_batch(config: &Path, out: &Path) -> Result<u8, Failure> {
    let cfg = load_config(config)?;
    let report = run_batch(&cfg)?;
    write_report(&report, out)?;
    info!("wrote {}", out.join(RESULTS_FILE).display());
    Ok(0)
}

fn cmd_export(input: &Path, kind: ExportKind, out: &Path, channel: PgmChannel) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(input).map_err(|e| Failure::setup(format!("{}: {e}", input.display())))?;
    let snap: MapSnapshot<f64> =
        serde_json::from_str(&text).map_err(|e| Failure::setup(format!("{}: {e}", input.display())))?;
    let mut file = BufWriter::new(File::create(out).map_err(Failure::runtime)?);
    match kind {
        ExportKind::Ply => {
            let n = write_ply(&snap.grid, &mut file).map_err(Failure::runtime)?;
            info!("wrote {n} vertices");
        }
        ExportKind::Pgm => {
            let (channel, encoding) = match channel {
                PgmChannel::Depth => (Channel::Depth, PgmEncoding::DepthMillimeters),
                PgmChannel::Semantic => (Channel::Semantic, PgmEncoding::Unit8),
                PgmChannel::Gain => (Channel::Gain, PgmEncoding::Unit8),
            };
            let img = snap
                .grid
                .render(&snap.pose, &snap.intrinsics, channel)
                .map_err(Failure::runtime)?
                .into_scalar()
                .ok_or_else(|| Failure::runtime("channel did not render a scalar image"))?;
            write_pgm(&img, encoding, &mut file).map_err(Failure::runtime)?;
        }
    }
    file.flush().map_err(Failure::runtime)?;
    Ok(0)
}

fn cmd_validate(config: &Path) -> Result<u8, Failure> {
    let cfg = load_config(config)?;
    for strategy in cfg.batch_strategies() {
        cfg.plan_config(strategy)?;
    }
    for scene in cfg.batch_scenes() {
        for &seed in &cfg.batch_seeds() {
            let built = cfg.build_scene(&scene, seed)?;
            built.check_start(cfg.flight_z)?;
        }
    }
    println!("ok");
    Ok(0)
}

fn main() -> ExitCode {
    let level = std::env::var("VISTA_LOG_LEVEL").unwrap_or_else(|_| "warn".into());
    env_logger::Builder::new().parse_filters(&level).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Run { config, seed, strategy, query, snapshot } => {
            cmd_run(&config, seed, strategy, query, snapshot.as_deref())
        }
        Command::Batch { config, out } => cmd_batch(&config, &out),
        Command::Export { input, kind, out, channel } => cmd_export(&input, kind, &out, channel),
        Command::Validate { config } => cmd_validate(&config),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
