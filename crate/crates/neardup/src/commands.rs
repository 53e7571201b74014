//! Subcommand implementations. Each reads its inputs per [`RunConfig`],
//! writes fixed-name files under `cfg.out`, and returns a summary.

use std::path::PathBuf;

use neardup_core::candidates::{baseline_all_pairs, verify_pairs, ShingleCorpus, ShingleLookup};
use neardup_core::metrics::{capacity, CapacityEstimate, Strategy};
use neardup_core::synth::{annotate_manifest, build_corpus, generate_bases, BaseShape, SynthSpec};
use neardup_core::{Document, LshParams};
use serde::Serialize;

use crate::band_store::{write_store, BandSource, BandStore, InMemoryBands, WriteStats};
use crate::bench::{accuracy_sweep, edge_sweep, AccuracyGrid};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::{self, BadLine, CsvRow};
use crate::pipeline::{candidates_from_source, cluster_from_source, index_documents, shingle_corpus, with_workers};

pub const PAIRS_FILE: &str = "pairs.tsv";
pub const CLUSTERS_FILE: &str = "clusters.tsv";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_JSON: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const CORPUS_FILE: &str = "corpus.jsonl";

fn load_corpus(cfg: &RunConfig) -> Result<(Vec<Document>, Vec<BadLine>)> {
    let c = io::read_corpus(cfg.corpus_path()?)?;
    Ok((c.documents, c.bad_lines))
}

fn out_file(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexSummary {
    pub documents: usize,
    #[serde(skip)]
    pub bad_lines: Vec<BadLine>,
    pub skipped_lines: usize,
    pub storage: Strategy,
    pub store: Option<PathBuf>,
    pub bands: usize,
    pub parts: usize,
    #[serde(flatten)]
    pub writes: WriteStats,
}

pub fn cmd_index(cfg: &RunConfig) -> Result<IndexSummary> {
    cfg.validate()?;
    let (docs, bad_lines) = load_corpus(cfg)?;
    with_workers(cfg.workers, || {
        let ix = index_documents(&docs, &cfg.params, cfg.master_seed)?;
        let (store, writes) = match cfg.storage {
            Strategy::InMemory => (None, WriteStats::default()),
            design => {
                let dir = cfg.store_path()?;
                let w = write_store(dir, design, cfg.params, cfg.master_seed, cfg.parts, cfg.sort_budget(), &ix.vectors)?;
                (Some(dir.to_path_buf()), w)
            }
        };
        Ok(IndexSummary {
            documents: docs.len(),
            skipped_lines: bad_lines.len(),
            bad_lines,
            storage: cfg.storage,
            store,
            bands: cfg.params.bands,
            parts: if cfg.storage == Strategy::Design2 { cfg.parts } else { 0 },
            writes,
        })
    })?
}

/// Band matrix plus the shingles needed to verify its candidates.
pub struct Loaded {
    pub source: Box<dyn BandSource>,
    pub corpus: ShingleCorpus,
    pub params: LshParams,
    pub bad_lines: Vec<BadLine>,
}

/// In-memory storage indexes the corpus now; persisted storage opens the
/// store and takes its LSH parameters from it.
pub fn load_source(cfg: &RunConfig) -> Result<Loaded> {
    let (docs, bad_lines) = load_corpus(cfg)?;
    match cfg.storage {
        Strategy::InMemory => {
            let ix = index_documents(&docs, &cfg.params, cfg.master_seed)?;
            let source = Box::new(InMemoryBands::new(&ix.vectors, cfg.params.bands)?);
            Ok(Loaded { source, corpus: ix.corpus, params: cfg.params, bad_lines })
        }
        design => {
            let store = BandStore::open(cfg.store_path()?)?;
            if store.meta().design != design {
                return Err(Error::Config(format!(
                    "store {} holds {:?}, but storage is {:?}",
                    store.dir().display(),
                    store.meta().design,
                    design
                )));
            }
            let params = store.params(cfg.params.threshold)?;
            let corpus = shingle_corpus(&docs, params.shingle_width);
            if let Some(missing) = store.doc_ids().iter().find(|&&d| corpus.shingles(d).is_none()) {
                return Err(Error::Data(format!("store document {missing} is not in the corpus")));
            }
            if corpus.len() != store.doc_ids().len() {
                return Err(Error::Data(format!(
                    "corpus has {} documents, store has {}",
                    corpus.len(),
                    store.doc_ids().len()
                )));
            }
            Ok(Loaded { source: Box::new(store), corpus, params, bad_lines })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidatesSummary {
    pub documents: usize,
    pub candidates: usize,
    pub written: usize,
    pub threshold: f64,
    pub verified: bool,
    #[serde(skip)]
    pub bad_lines: Vec<BadLine>,
}

/// Writes verified pairs, or every raw candidate with an empty score when
/// `verify` is false.
pub fn cmd_candidates(cfg: &RunConfig, verify: bool) -> Result<CandidatesSummary> {
    cfg.validate()?;
    with_workers(cfg.workers, || {
        let loaded = load_source(cfg)?;
        let candidates = candidates_from_source(loaded.source.as_ref())?;
        let path = out_file(cfg, PAIRS_FILE);
        let written = if verify {
            let scored = verify_pairs(candidates.iter(), &loaded.corpus, loaded.params.threshold)?;
            io::write_pairs(&path, scored.iter().map(|(p, &s)| (p, Some(s))))?;
            scored.len()
        } else {
            io::write_pairs(&path, candidates.iter().map(|p| (p, None)))?;
            candidates.len()
        };
        Ok(CandidatesSummary {
            documents: loaded.corpus.len(),
            candidates: candidates.len(),
            written,
            threshold: loaded.params.threshold,
            verified: verify,
            bad_lines: loaded.bad_lines,
        })
    })?
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub documents: usize,
    pub tree_threshold: f64,
    pub edge_threshold: f64,
    pub candidate_pairs: u64,
    pub evaluated: u64,
    pub skipped: u64,
    pub skipped_same_root: u64,
    pub reused: u64,
    pub recorded: u64,
    pub unions: u64,
    pub refused: u64,
    pub clusters: usize,
}

impl CsvRow for ClusterSummary {
    fn header() -> &'static [&'static str] {
        &[
            "documents",
            "tree_threshold",
            "edge_threshold",
            "candidate_pairs",
            "evaluated",
            "skipped",
            "skipped_same_root",
            "reused",
            "recorded",
            "unions",
            "refused",
            "clusters",
        ]
    }

    fn fields(&self) -> Vec<String> {
        [
            self.documents.to_string(),
            self.tree_threshold.to_string(),
            self.edge_threshold.to_string(),
            self.candidate_pairs.to_string(),
            self.evaluated.to_string(),
            self.skipped.to_string(),
            self.skipped_same_root.to_string(),
            self.reused.to_string(),
            self.recorded.to_string(),
            self.unions.to_string(),
            self.refused.to_string(),
            self.clusters.to_string(),
        ]
        .into()
    }
}

/// Writes `clusters.tsv`, the recorded pairs above the edge threshold to
/// `pairs.tsv`, and the evaluation counts to `report.csv` / `report.json`.
pub fn cmd_cluster(cfg: &RunConfig) -> Result<ClusterSummary> {
    cfg.validate()?;
    let prefetch = cfg.workers.max(1);
    with_workers(cfg.workers, || {
        let loaded = load_source(cfg)?;
        let run = cluster_from_source(loaded.source.as_ref(), &loaded.corpus, cfg.cluster, prefetch)?;
        let clusters = run.clusters(cfg.include_singletons);
        io::write_clusters(&out_file(cfg, CLUSTERS_FILE), &clusters)?;
        io::write_pairs(&out_file(cfg, PAIRS_FILE), run.recorded_pairs().iter().map(|(p, &s)| (p, Some(s))))?;
        let t = run.totals();
        let summary = ClusterSummary {
            documents: loaded.corpus.len(),
            tree_threshold: cfg.cluster.tree_threshold,
            edge_threshold: cfg.cluster.edge_threshold,
            candidate_pairs: run.candidate_pairs() as u64,
            evaluated: t.evaluated,
            skipped: t.skipped(),
            skipped_same_root: t.skipped_same_root,
            reused: t.reused,
            recorded: t.recorded,
            unions: t.unions,
            refused: t.refused,
            clusters: run.clusters(false).len(),
        };
        io::write_csv(&out_file(cfg, REPORT_CSV), &[summary])?;
        io::write_json(&out_file(cfg, REPORT_JSON), &summary)?;
        Ok(summary)
    })?
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineSummary {
    pub documents: usize,
    pub pairs_compared: u64,
    pub written: usize,
    pub threshold: f64,
}

/// Exact all-pairs comparison; refuses corpora above `baseline_limit`
/// documents unless forced.
pub fn cmd_baseline(cfg: &RunConfig) -> Result<BaselineSummary> {
    cfg.validate()?;
    let (docs, _) = load_corpus(cfg)?;
    if docs.len() > cfg.baseline_limit && !cfg.force {
        return Err(Error::Data(format!(
            "baseline compares all pairs; {} documents exceeds the limit of {} (use --force)",
            docs.len(),
            cfg.baseline_limit
        )));
    }
    with_workers(cfg.workers, || {
        let corpus = shingle_corpus(&docs, cfg.params.shingle_width);
        let scored = baseline_all_pairs(corpus.as_slice(), cfg.params.threshold);
        io::write_pairs(&out_file(cfg, PAIRS_FILE), scored.iter().map(|(p, &s)| (p, Some(s))))?;
        let n = docs.len() as u64;
        Ok(BaselineSummary {
            documents: docs.len(),
            pairs_compared: n * n.saturating_sub(1) / 2,
            written: scored.len(),
            threshold: cfg.params.threshold,
        })
    })?
}

#[derive(Debug, Clone, PartialEq)]
pub enum BenchSweep {
    Accuracy(AccuracyGrid),
    Edges(Vec<f64>),
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub sweep: &'static str,
    pub rows: usize,
    pub report: PathBuf,
}

pub fn default_edge_grid() -> Vec<f64> {
    (0..8).map(|i| (60 + 5 * i) as f64 / 100.0).collect()
}

pub fn cmd_bench(cfg: &RunConfig, sweep: &BenchSweep) -> Result<BenchSummary> {
    cfg.validate()?;
    let csv = out_file(cfg, REPORT_CSV);
    with_workers(cfg.workers, || match sweep {
        BenchSweep::Accuracy(grid) => {
            let (docs, _) = load_corpus(cfg)?;
            if docs.len() > cfg.baseline_limit && !cfg.force {
                return Err(Error::Data(format!(
                    "accuracy sweep needs the all-pairs baseline; {} documents exceeds the limit of {} (use --force)",
                    docs.len(),
                    cfg.baseline_limit
                )));
            }
            let corpus = shingle_corpus(&docs, cfg.params.shingle_width);
            let rows = accuracy_sweep(&corpus, grid, cfg.master_seed)?;
            io::write_csv(&csv, &rows)?;
            io::write_json(&out_file(cfg, REPORT_JSON), &rows)?;
            Ok(BenchSummary { sweep: "accuracy", rows: rows.len(), report: csv.clone() })
        }
        BenchSweep::Edges(edges) => {
            let loaded = load_source(cfg)?;
            let rows =
                edge_sweep(loaded.source.as_ref(), &loaded.corpus, cfg.cluster.tree_threshold, edges, cfg.workers.max(1))?;
            io::write_csv(&csv, &rows)?;
            io::write_json(&out_file(cfg, REPORT_JSON), &rows)?;
            Ok(BenchSummary { sweep: "edges", rows: rows.len(), report: csv.clone() })
        }
    })?
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthArgs {
    /// Generate this many base notes when no corpus is given.
    pub generate: usize,
    pub selected: usize,
    pub copies: usize,
    pub replacement: bool,
    pub fraction: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthSummary {
    pub base_documents: usize,
    pub documents: usize,
    pub duplicates: usize,
    pub corpus: PathBuf,
    pub manifest: PathBuf,
}

/// Plants perturbed copies of sampled base notes, taken from `--corpus`
/// when set and generated otherwise. Writes `corpus.jsonl` (bases followed
/// by copies) and `manifest.jsonl` with each copy's exact similarity.
pub fn cmd_synth(cfg: &RunConfig, args: &SynthArgs) -> Result<SynthSummary> {
    cfg.validate()?;
    let bases = match &cfg.corpus {
        Some(path) => io::read_corpus_strict(path)?,
        None => generate_bases(args.generate, &BaseShape::default(), cfg.master_seed),
    };
    let spec = SynthSpec {
        base_docs: bases,
        selected: args.selected,
        copies: args.copies,
        replacement: args.replacement,
        fraction: args.fraction,
        rng_seed: cfg.master_seed,
    };
    let mut synth = build_corpus(&spec)?;
    let corpus = shingle_corpus(&synth.documents, cfg.params.shingle_width);
    annotate_manifest(&mut synth.manifest, &corpus)?;
    let corpus_path = out_file(cfg, CORPUS_FILE);
    let manifest_path = out_file(cfg, MANIFEST_FILE);
    io::write_corpus(&corpus_path, &synth.documents)?;
    io::write_manifest(&manifest_path, &synth.manifest)?;
    Ok(SynthSummary {
        base_documents: spec.base_docs.len(),
        documents: synth.documents.len(),
        duplicates: synth.manifest.len(),
        corpus: corpus_path,
        manifest: manifest_path,
    })
}

impl CsvRow for CapacityEstimate {
    fn header() -> &'static [&'static str] {
        &["strategy", "memory_budget", "max_documents"]
    }

    fn fields(&self) -> Vec<String> {
        let name = match self.strategy {
            Strategy::InMemory => "in_memory",
            Strategy::Design1 => "design1",
            Strategy::Design2 => "design2",
        };
        vec![name.to_string(), self.memory_budget.to_string(), self.max_documents.to_string()]
    }
}

/// Capacity of every strategy at the configured bands, parts and budget.
/// Writes `report.csv` when `write` is set.
pub fn cmd_capacity(cfg: &RunConfig, write: bool) -> Result<Vec<CapacityEstimate>> {
    cfg.validate()?;
    let rows: Vec<CapacityEstimate> = [Strategy::InMemory, Strategy::Design1, Strategy::Design2]
        .into_iter()
        .map(|s| capacity(s, &cfg.params, cfg.parts, cfg.memory_budget))
        .collect();
    if write {
        io::write_csv(&out_file(cfg, REPORT_CSV), &rows)?;
    }
    Ok(rows)
}
