use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use neardup::bench::AccuracyGrid;
use neardup::commands::{self, BenchSweep, SynthArgs};
use neardup::io::BadLine;
use neardup::{Error, Result, RunConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "neardup", version, about = "MinHash/LSH near-duplicate detection with bounded clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Default)]
struct Common {
    /// key = value settings applied before any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// JSON lines corpus, one {"id", "text"} object per line
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Band store directory
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// in_memory, design1 or design2
    #[arg(long, global = true)]
    storage: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[arg(long, global = true)]
    edge_threshold: Option<f64>,
    #[arg(long, global = true)]
    tree_threshold: Option<f64>,
    #[arg(long, global = true)]
    bands: Option<usize>,
    #[arg(long, global = true)]
    rows: Option<usize>,
    #[arg(long, global = true)]
    parts: Option<usize>,
    #[arg(long, global = true)]
    shingle_width: Option<usize>,
    /// Bytes, with optional k/m/g suffix
    #[arg(long, global = true)]
    memory_budget: Option<String>,
    /// Worker threads; 0 uses every core
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    baseline_limit: Option<usize>,
    /// Run the all-pairs baseline above the size guard
    #[arg(long, global = true)]
    force: bool,
    /// Also list single-document clusters
    #[arg(long, global = true)]
    include_singletons: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compute band vectors and write the band store
    Index,
    /// Banded candidate pairs, verified against the threshold
    Candidates {
        /// Write raw candidates with empty scores
        #[arg(long)]
        unverified: bool,
    },
    /// Bounded clustering over the band store
    Cluster,
    /// Exact all-pairs comparison
    Baseline,
    /// Accuracy or edge-threshold sweeps
    Bench {
        #[arg(long, value_enum, default_value_t = Sweep::Accuracy)]
        sweep: Sweep,
        #[arg(long, value_delimiter = ',', default_values_t = [10, 25, 50])]
        grid_bands: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4])]
        grid_rows: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.3, 0.4])]
        grid_thresholds: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        edges: Option<Vec<f64>>,
    },
    /// Synthetic corpus with planted near duplicates
    Synth {
        /// Base notes to generate when --corpus is not given
        #[arg(long, default_value_t = 521)]
        bases: usize,
        #[arg(long, default_value_t = 10)]
        selected: usize,
        #[arg(long, default_value_t = 1)]
        copies: usize,
        /// Draw bases with replacement
        #[arg(long)]
        replacement: bool,
        #[arg(long, default_value_t = 0.1)]
        fraction_min: f64,
        #[arg(long, default_value_t = 0.1)]
        fraction_max: f64,
    },
    /// Largest corpus each storage strategy fits in the memory budget
    Capacity,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    Accuracy,
    Edges,
}

fn build_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &c.config {
        cfg.apply_file(path)?;
    }
    let mut set = |k: &str, v: Option<String>| v.map_or(Ok(()), |v| cfg.set(k, &v));
    let s = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    set("corpus", s(&c.corpus))?;
    set("store", s(&c.store))?;
    set("out", s(&c.out))?;
    set("storage", c.storage.clone())?;
    set("seed", c.seed.map(|v| v.to_string()))?;
    set("threshold", c.threshold.map(|v| v.to_string()))?;
    set("edge_threshold", c.edge_threshold.map(|v| v.to_string()))?;
    set("tree_threshold", c.tree_threshold.map(|v| v.to_string()))?;
    set("bands", c.bands.map(|v| v.to_string()))?;
    set("rows", c.rows.map(|v| v.to_string()))?;
    set("parts", c.parts.map(|v| v.to_string()))?;
    set("shingle_width", c.shingle_width.map(|v| v.to_string()))?;
    set("memory_budget", c.memory_budget.clone())?;
    set("workers", c.workers.map(|v| v.to_string()))?;
    set("baseline_limit", c.baseline_limit.map(|v| v.to_string()))?;
    if c.force {
        cfg.force = true;
    }
    if c.include_singletons {
        cfg.include_singletons = true;
    }
    Ok(cfg)
}

fn warn_bad_lines(cfg: &RunConfig, bad: &[BadLine]) {
    let path = cfg.corpus.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
    for b in bad {
        eprintln!("warning: {path}:{}: skipped: {}", b.line, b.message);
    }
}

fn print<T: Serialize>(summary: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(summary).map_err(|e| Error::Data(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = build_config(&cli.common)?;
    match cli.command {
        Command::Index => {
            let s = commands::cmd_index(&cfg)?;
            warn_bad_lines(&cfg, &s.bad_lines);
            print(&s)
        }
        Command::Candidates { unverified } => {
            let s = commands::cmd_candidates(&cfg, !unverified)?;
            warn_bad_lines(&cfg, &s.bad_lines);
            print(&s)
        }
        Command::Cluster => print(&commands::cmd_cluster(&cfg)?),
        Command::Baseline => print(&commands::cmd_baseline(&cfg)?),
        Command::Bench { sweep, grid_bands, grid_rows, grid_thresholds, edges } => {
            let sweep = match sweep {
                Sweep::Accuracy => {
                    BenchSweep::Accuracy(AccuracyGrid { bands: grid_bands, rows: grid_rows, thresholds: grid_thresholds })
                }
                Sweep::Edges => BenchSweep::Edges(edges.unwrap_or_else(commands::default_edge_grid)),
            };
            print(&commands::cmd_bench(&cfg, &sweep)?)
        }
        Command::Synth { bases, selected, copies, replacement, fraction_min, fraction_max } => {
            let args = SynthArgs { generate: bases, selected, copies, replacement, fraction: (fraction_min, fraction_max) };
            print(&commands::cmd_synth(&cfg, &args)?)
        }
        Command::Capacity => print(&commands::cmd_capacity(&cfg, cli.common.out.is_some())?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
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
