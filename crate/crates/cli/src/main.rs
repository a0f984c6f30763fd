use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rampsafe::conflict::{read_conflicts_csv, write_conflicts_csv};
use rampsafe::denoise::{denoise_track, DEFAULT_LEVELS};
use rampsafe::error::{ConfigError, DataError, ReportError, ScenarioError};
use rampsafe::oracle::{compare_with_oracle, random_pair, OracleComparison};
use rampsafe::report::{build_report, ReportBundle, ReportOptions};
use rampsafe::synth::{generate_scenario, paper_like_scenario, ScenarioSpec};
use rampsafe::trajectory::{ingest_dataset, write_site, write_tracks};
use rampsafe::{detect_conflicts, ConflictConfig, Dataset, PairState, TypePair};

#[derive(Parser)]
#[command(name = "rampsafe", version, about = "Two-dimensional TTC conflict analysis for freeway merging sections")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic merging-section dataset.
    Generate(GenerateArgs),
    /// Wavelet-denoise a tracks CSV.
    Denoise(DenoiseArgs),
    /// Detect conflicts and write conflicts.csv plus the report bundle.
    Analyze(AnalyzeArgs),
    /// Render a report from a dataset and an existing conflicts CSV.
    Report(ReportArgs),
    /// Compare analytic TTC with the stepping oracle on random pairs.
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON scenario spec; the built-in merging scenario is used otherwise.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DenoiseArgs {
    #[arg(long)]
    tracks: PathBuf,
    #[arg(long)]
    site: PathBuf,
    /// Output tracks CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,
}

#[derive(Args, Default)]
struct ReportFlags {
    #[arg(long)]
    cell_size: Option<f64>,
    #[arg(long)]
    bin_width: Option<f64>,
    /// Restrict the conflict position map to one type pair, e.g. car-truck.
    #[arg(long)]
    filter_type_pair: Option<TypePair>,
    /// Also write SVG heatmaps.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    tracks: Option<PathBuf>,
    #[arg(long)]
    site: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ttc_threshold: Option<f64>,
    #[arg(long)]
    pruning_radius: Option<f64>,
    #[arg(long)]
    merge_gap: Option<f64>,
    #[arg(long)]
    min_duration: Option<u32>,
    #[arg(long)]
    lane_change_window: Option<f64>,
    /// Denoise trajectories before detection.
    #[arg(long)]
    denoise: bool,
    #[arg(long)]
    levels: Option<usize>,
    #[command(flatten)]
    report: ReportFlags,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    tracks: PathBuf,
    #[arg(long)]
    site: PathBuf,
    #[arg(long)]
    conflicts: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3.0)]
    ttc_threshold: f64,
    #[command(flatten)]
    report: ReportFlags,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 10.0)]
    horizon: f64,
    /// JSON array of extra pair states to check.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

/// Settings of an `analyze` run as read from `--config`.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    tracks: Option<PathBuf>,
    site: Option<PathBuf>,
    out: Option<PathBuf>,
    conflict: ConflictConfig,
    denoise: bool,
    levels: Option<usize>,
    report: ReportConfig,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ReportConfig {
    cell_size: Option<f64>,
    bin_width: Option<f64>,
    filter_type_pair: Option<TypePair>,
    svg: bool,
}

enum CliError {
    Validation(String),
    Io(String),
    Disagreement(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Disagreement(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) | CliError::Disagreement(m) => m,
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        let io = match &e {
            DataError::Io { .. } => true,
            DataError::Csv(c) => matches!(c.kind(), csv::ErrorKind::Io(_)),
            DataError::SiteJson(j) => j.is_io(),
            _ => false,
        };
        if io {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io { .. } => CliError::Io(e.to_string()),
            ReportError::Json(_) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Data(d) => d.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), DataError>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let spec: ScenarioSpec = match &args.spec {
        Some(path) => read_json(path)?,
        None => paper_like_scenario(args.seed),
    };
    let scenario = generate_scenario(&spec)?;
    let ds = &scenario.dataset;
    let mut bundle = ReportBundle { files: Vec::new() };
    bundle.push("tracks.csv", csv_bytes(|b| write_tracks(ds.tracks(), b))?);
    bundle.push("site.json", csv_bytes(|b| write_site(&ds.site, b))?);
    let truth = serde_json::to_vec_pretty(&scenario.injected).map_err(|e| CliError::Validation(e.to_string()))?;
    bundle.push("injections.json", truth);
    bundle.write_to(&args.out)?;
    eprintln!(
        "generated {} vehicles with {} injected conflicts into {}",
        ds.len(),
        scenario.injected.len(),
        args.out.display()
    );
    Ok(())
}

fn denoise_dataset(ds: &Dataset, levels: usize) -> Result<Dataset, CliError> {
    if levels == 0 {
        return Err(CliError::Validation("levels must be at least 1".into()));
    }
    let tracks: Vec<_> = ds.tracks().collect();
    let cleaned: Vec<_> = tracks
        .par_iter()
        .map(|t| denoise_track(t, levels, &ds.site).track)
        .collect();
    Ok(Dataset::new(ds.site.clone(), cleaned)?)
}

fn cmd_denoise(args: DenoiseArgs) -> Result<(), CliError> {
    let ds = ingest_dataset(&args.tracks, &args.site)?;
    let cleaned = denoise_dataset(&ds, args.levels)?;
    let bytes = csv_bytes(|b| write_tracks(cleaned.tracks(), b))?;
    write_file(&args.out, &bytes)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Err(e) = std::fs::write(path, bytes) {
        let _ = std::fs::remove_file(path);
        return Err(io_error(path, e));
    }
    Ok(())
}

fn report_options(base: &ReportConfig, flags: &ReportFlags, ttc_threshold: f64) -> Result<ReportOptions, CliError> {
    let d = ReportOptions::default();
    let options = ReportOptions {
        cell_size: flags.cell_size.or(base.cell_size).unwrap_or(d.cell_size),
        bin_width: flags.bin_width.or(base.bin_width).unwrap_or(d.bin_width),
        filter_type_pair: flags.filter_type_pair.or(base.filter_type_pair),
        svg: flags.svg || base.svg,
        ttc_threshold,
    };
    for (name, v) in [("cell_size", options.cell_size), ("bin_width", options.bin_width)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Validation(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(options)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let mut cfg: RunConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => RunConfig::default(),
    };
    let c = &mut cfg.conflict;
    c.ttc_threshold = args.ttc_threshold.unwrap_or(c.ttc_threshold);
    c.pruning_radius = args.pruning_radius.unwrap_or(c.pruning_radius);
    c.merge_gap = args.merge_gap.unwrap_or(c.merge_gap);
    c.min_duration = args.min_duration.unwrap_or(c.min_duration);
    c.lane_change_window = args.lane_change_window.unwrap_or(c.lane_change_window);
    c.validate()?;
    let missing = |what: &str| CliError::Validation(format!("--{what} is required (flag or config file)"));
    let tracks = args.tracks.or(cfg.tracks.take()).ok_or_else(|| missing("tracks"))?;
    let site = args.site.or(cfg.site.take()).ok_or_else(|| missing("site"))?;
    let out = args.out.or(cfg.out.take()).ok_or_else(|| missing("out"))?;
    let options = report_options(&cfg.report, &args.report, cfg.conflict.ttc_threshold)?;

    let mut ds = ingest_dataset(&tracks, &site)?;
    if args.denoise || cfg.denoise {
        ds = denoise_dataset(&ds, args.levels.or(cfg.levels).unwrap_or(DEFAULT_LEVELS))?;
    }
    let events = detect_conflicts(&ds, &cfg.conflict);
    tracing::info!(vehicles = ds.len(), events = events.len(), "detection finished");
    let mut bundle = build_report(&ds, &events, &options)?;
    bundle
        .files
        .insert(0, ("conflicts.csv".into(), csv_bytes(|b| write_conflicts_csv(&events, b))?));
    bundle.write_to(&out)?;
    eprintln!("{} conflicts written to {}", events.len(), out.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let options = report_options(&ReportConfig::default(), &args.report, args.ttc_threshold)?;
    let ds = ingest_dataset(&args.tracks, &args.site)?;
    let file = std::fs::File::open(&args.conflicts).map_err(|e| io_error(&args.conflicts, e))?;
    let events = read_conflicts_csv(file)?;
    build_report(&ds, &events, &options)?.write_to(&args.out)?;
    Ok(())
}

fn cmd_oracle_check(args: OracleArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Validation("--n must be at least 1".into()));
    }
    if !(args.dt > 0.0 && args.horizon > 0.0) {
        return Err(CliError::Validation("--dt and --horizon must be positive".into()));
    }
    let corpus: Vec<PairState> = match &args.corpus {
        Some(path) => read_json(path)?,
        None => Vec::new(),
    };
    // each pair has its own seed so failures can be replayed one at a time
    let random: Vec<(String, OracleComparison)> = (0..args.n as u64)
        .into_par_iter()
        .map(|i| {
            let seed = args.seed.wrapping_add(i);
            let pair = random_pair(&mut ChaCha8Rng::seed_from_u64(seed));
            (format!("seed {seed}"), compare_with_oracle(&pair, args.dt, args.horizon))
        })
        .collect();
    let fixed: Vec<(String, OracleComparison)> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, p)| (format!("corpus #{i}"), compare_with_oracle(p, args.dt, args.horizon)))
        .collect();
    let all: Vec<&(String, OracleComparison)> = random.iter().chain(&fixed).collect();
    let collisions = all.iter().filter(|(_, c)| c.analytic.is_some() || c.oracle.is_some()).count();
    let worst = all
        .iter()
        .filter(|(_, c)| c.discrepancy.is_finite())
        .max_by(|a, b| a.1.discrepancy.total_cmp(&b.1.discrepancy));
    println!(
        "checked {} pairs ({} with a collision), worst discrepancy {:.6} s{}",
        all.len(),
        collisions,
        worst.map_or(0.0, |w| w.1.discrepancy),
        worst.map_or(String::new(), |w| format!(" ({})", w.0)),
    );
    let bad: Vec<String> = all
        .iter()
        .filter(|(_, c)| !c.agree)
        .map(|(name, c)| format!("{name}: analytic {:?}, oracle {:?}", c.analytic, c.oracle))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Disagreement(format!("{} disagreements:\n{}", bad.len(), bad.join("\n"))))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Denoise(a) => cmd_denoise(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Report(a) => cmd_report(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
