//! `streo` command-line driver.
//!
//! Every subcommand reads an experiment config, writes its data files into
//! `--out` and records timestamp, version, config hash and arguments in
//! `metadata.json` next to them. Failures print one JSON line on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use streo::benchmarks::{arm_heatmap, SourceArchive};
use streo::ea::{RunRecord, TransferMode};
use streo::experiment::{
    bench_scaling, materialize_archive, run_matrix, run_sweep, with_workers, SWEEP_HEADER, TIMING_HEADER,
};
use streo::io::csv::write_table;
use streo::io::{parse_seed_list, save_archive, write_run_csv, write_summary_csv, write_weights_csv, ExperimentConfig};
use streo::RngHandle;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] streo::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "streo", version, about = "Transfer evolutionary optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build or load the configured source archive and save it as archive.json.
    GenArchive(Common),
    /// Run every algorithm on every seed; writes run, weight and summary CSVs.
    Run(Common),
    /// Vary one sTrEO hyper-parameter at a time; writes sweep.csv.
    Sweep(Common),
    /// Score arm sources over a length by max-angle grid; writes heatmap.csv.
    Heatmap(Common),
    /// Time transfer steps on growing archive prefixes; writes timing and trace CSVs.
    BenchScaling(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated seeds replacing the config's list.
    #[arg(long)]
    seeds: Option<String>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Single algorithm replacing the config's list (cga, streo, amtea, mab-amtea).
    #[arg(long)]
    algorithm: Option<TransferMode>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GenArchive(_) => "gen-archive",
            Command::Run(_) => "run",
            Command::Sweep(_) => "sweep",
            Command::Heatmap(_) => "heatmap",
            Command::BenchScaling(_) => "bench-scaling",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::GenArchive(c)
            | Command::Run(c)
            | Command::Sweep(c)
            | Command::Heatmap(c)
            | Command::BenchScaling(c) => c,
        }
    }
}

/// Config with command-line overrides applied, plus where relative paths resolve.
struct Setup {
    cfg: ExperimentConfig,
    base_dir: PathBuf,
    out: PathBuf,
}

fn setup(common: &Common) -> Result<Setup> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seeds) = &common.seeds {
        cfg.seeds = parse_seed_list(seeds)?;
    }
    if let Some(a) = common.algorithm {
        cfg.algorithms = vec![a];
    }
    cfg.validate()?;
    let base_dir = common
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    fs::create_dir_all(&common.out).map_err(|source| CliError::Io {
        path: common.out.clone(),
        source,
    })?;
    Ok(Setup {
        cfg,
        base_dir,
        out: common.out.clone(),
    })
}

fn archive(s: &Setup, purpose: &str) -> Result<SourceArchive> {
    let source = s
        .cfg
        .archive
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("{purpose} needs an archive in the config")))?;
    Ok(materialize_archive(source, &s.cfg.target, &s.cfg.ea, &s.base_dir)?)
}

fn gen_archive(s: &Setup) -> Result<Vec<PathBuf>> {
    let a = archive(s, "gen-archive")?;
    let path = s.out.join("archive.json");
    save_archive(&a, &path)?;
    log::info!("saved {} sources to {}", a.len(), path.display());
    Ok(vec![path])
}

fn run(s: &Setup) -> Result<Vec<PathBuf>> {
    let needs_sources = s.cfg.algorithms.iter().any(|a| *a != TransferMode::None);
    let a = if needs_sources { Some(archive(s, "transfer")?) } else { None };
    let (models, related) = a
        .as_ref()
        .map_or((&[][..], Vec::new()), |a| (a.models(), a.related_flags()));
    let task = s.cfg.target.build()?;
    let records = run_matrix(task.as_ref(), models, &s.cfg.ea, &s.cfg.algorithms, &s.cfg.seeds)?;
    let mut written = Vec::new();
    for mode in &s.cfg.algorithms {
        let name = mode.algorithm_name();
        let subset: Vec<RunRecord> = records.iter().filter(|r| r.algorithm == name).cloned().collect();
        let path = s.out.join(format!("runs_{name}.csv"));
        write_run_csv(&subset, &path)?;
        written.push(path);
        if *mode != TransferMode::None {
            let path = s.out.join(format!("weights_{name}.csv"));
            write_weights_csv(&subset, &related, &path)?;
            written.push(path);
        }
    }
    let path = s.out.join("summary.csv");
    write_summary_csv(&records, &path)?;
    written.push(path);
    Ok(written)
}

fn sweep(s: &Setup) -> Result<Vec<PathBuf>> {
    let a = archive(s, "sweep")?;
    let task = s.cfg.target.build()?;
    let rows = run_sweep(task.as_ref(), a.models(), &s.cfg.ea, &s.cfg.sweep, &s.cfg.seeds)?;
    let path = s.out.join("sweep.csv");
    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.fields()).collect();
    write_table(&path, &SWEEP_HEADER, &rows)?;
    Ok(vec![path])
}

fn heatmap(s: &Setup) -> Result<Vec<PathBuf>> {
    let grid = s.cfg.heatmap.clone().unwrap_or_default();
    let map = arm_heatmap(&grid, &s.cfg.ea, &RngHandle::new(s.cfg.seeds[0]))?;
    let mut header = vec!["length".to_string()];
    header.extend(map.max_angles.iter().map(|a| a.to_string()));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = map
        .lengths
        .iter()
        .zip(&map.cells)
        .map(|(l, row)| std::iter::once(l.to_string()).chain(row.iter().map(f64::to_string)).collect())
        .collect();
    let path = s.out.join("heatmap.csv");
    write_table(&path, &header, &rows)?;
    Ok(vec![path])
}

fn bench(s: &Setup) -> Result<Vec<PathBuf>> {
    let scaling = s
        .cfg
        .scaling
        .as_ref()
        .ok_or_else(|| CliError::Usage("bench-scaling needs a scaling section in the config".into()))?;
    let a = archive(s, "bench-scaling")?;
    let task = s.cfg.target.build()?;
    let result = bench_scaling(task.as_ref(), &a, &s.cfg.ea, scaling, &s.cfg.seeds)?;
    let path = s.out.join("timing.csv");
    let rows: Vec<Vec<String>> = result.timings.iter().map(|t| t.fields()).collect();
    write_table(&path, &TIMING_HEADER, &rows)?;
    let mut written = vec![path];
    for (total, records) in &result.traces {
        let path = s.out.join(format!("trace_{total}.csv"));
        write_run_csv(records, &path)?;
        written.push(path);
    }
    Ok(written)
}

fn write_metadata(cmd: &Command, s: &Setup, files: &[PathBuf]) -> Result<()> {
    let names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    let doc = json!({
        "command": cmd.name(),
        "timestamp": chrono::Utc::now().to_rfc3339(),
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": s.cfg.hash()?,
        "effective_config": s.cfg,
        "args": std::env::args().collect::<Vec<_>>(),
        "files": names,
    });
    let path = s.out.join("metadata.json");
    let text = serde_json::to_string_pretty(&doc).map_err(streo::Error::from)?;
    fs::write(&path, text + "\n").map_err(|source| CliError::Io { path, source })
}

fn execute(cmd: &Command) -> Result<()> {
    let common = cmd.common();
    let s = setup(common)?;
    let files = with_workers(common.workers, || match cmd {
        Command::GenArchive(_) => gen_archive(&s),
        Command::Run(_) => run(&s),
        Command::Sweep(_) => sweep(&s),
        Command::Heatmap(_) => heatmap(&s),
        Command::BenchScaling(_) => bench(&s),
    })??;
    write_metadata(cmd, &s, &files)
}

fn fail(kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": message, "kind": kind }));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().lines().next().unwrap_or("invalid arguments")),
    };
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}
