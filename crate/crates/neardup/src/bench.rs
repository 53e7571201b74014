//! Parameter sweeps: candidate accuracy over (b, r, t) and clustering
//! savings and quality over edge thresholds.

use std::collections::BTreeMap;

use neardup_core::candidates::{baseline_all_pairs, candidates_banded, verify_pairs, ScoredPairs, ShingleCorpus};
use neardup_core::cluster::modularity;
use neardup_core::metrics::{accuracy, categorize_pairs, AccuracyReport, PairCategoryReport};
use neardup_core::hash::derive_seed;
use neardup_core::minhash::band_vector;
use neardup_core::synth::{build_corpus, generate_bases, BaseShape, SynthCorpus, SynthSpec};
use neardup_core::{BandVector, ClusterConfig, HashFamily, LshParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::band_store::BandSource;
use crate::error::Result;
use crate::io::CsvRow;
use crate::pipeline::{candidates_from_source, cluster_from_source, signatures};

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyGrid {
    pub bands: Vec<usize>,
    pub rows: Vec<usize>,
    pub thresholds: Vec<f64>,
}

impl Default for AccuracyGrid {
    fn default() -> Self {
        AccuracyGrid { bands: vec![10, 25, 50], rows: vec![1, 2, 4], thresholds: vec![0.2, 0.3, 0.4] }
    }
}

/// One report per grid cell, ordered by rows, then bands, then threshold.
/// Signatures are computed once at the largest `b * r`; smaller settings
/// use a prefix, which is what a smaller hash family would produce.
pub fn accuracy_sweep(corpus: &ShingleCorpus, grid: &AccuracyGrid, master_seed: u64) -> Result<Vec<AccuracyReport>> {
    let widest = grid.bands.iter().flat_map(|b| grid.rows.iter().map(move |r| b * r)).max().unwrap_or(0);
    if widest == 0 || grid.thresholds.is_empty() {
        return Ok(Vec::new());
    }
    let floor = grid.thresholds.iter().copied().fold(f64::INFINITY, f64::min);
    let oracle = baseline_all_pairs(corpus.as_slice(), floor);
    let oracles: Vec<ScoredPairs> = grid
        .thresholds
        .iter()
        .map(|&t| oracle.iter().filter(|(_, &s)| s > t).map(|(&p, &s)| (p, s)).collect())
        .collect();
    let family = HashFamily::new(widest, master_seed)?;
    let full = signatures(corpus, &family);
    let mut out = Vec::new();
    for &r in &grid.rows {
        for &b in &grid.bands {
            let params = LshParams::new(b, r, 8, floor)?;
            let vectors: Vec<BandVector> =
                full.iter().map(|s| band_vector(&s.prefix(b * r), &params)).collect::<Result<_, _>>()?;
            let cands = candidates_banded(&vectors, &params)?;
            for (&t, o) in grid.thresholds.iter().zip(&oracles) {
                out.push(accuracy(&cands, o, t, b, r));
            }
        }
    }
    Ok(out)
}

impl CsvRow for AccuracyReport {
    fn header() -> &'static [&'static str] {
        &["threshold", "bands", "rows", "candidates", "true_pairs", "false_positives", "false_negatives"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.threshold.to_string(),
            self.bands.to_string(),
            self.rows.to_string(),
            self.candidates.to_string(),
            self.true_pairs.to_string(),
            self.false_positives.to_string(),
            self.false_negatives.to_string(),
        ]
    }
}

/// One edge-threshold setting of the clustering sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeSweepRow {
    pub edge_threshold: f64,
    pub tree_threshold: f64,
    /// Exact evaluations a run without the forest would make: every distinct candidate pair.
    pub candidate_pairs: u64,
    pub evaluated: u64,
    /// `candidate_pairs - evaluated`.
    pub excluded: u64,
    pub skipped_same_root: u64,
    pub reused: u64,
    pub recorded: u64,
    pub unions: u64,
    pub refused: u64,
    /// Clusters with at least two documents.
    pub clusters: u64,
    pub modularity: f64,
    pub categories: PairCategoryReport,
}

impl EdgeSweepRow {
    pub fn skip_rate(&self) -> f64 {
        if self.candidate_pairs == 0 {
            0.0
        } else {
            self.excluded as f64 / self.candidate_pairs as f64
        }
    }
}

impl CsvRow for EdgeSweepRow {
    fn header() -> &'static [&'static str] {
        &[
            "edge_threshold",
            "tree_threshold",
            "pairs_without_dsu",
            "pairs_with_dsu",
            "pairs_excluded",
            "skipped_same_root",
            "reused",
            "recorded",
            "unions",
            "refused",
            "clusters",
            "modularity",
            "same_set_high",
            "diff_set_high",
            "same_set_mid",
            "same_set_low",
            "diff_set_other",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let c = &self.categories;
        [
            self.edge_threshold.to_string(),
            self.tree_threshold.to_string(),
            self.candidate_pairs.to_string(),
            self.evaluated.to_string(),
            self.excluded.to_string(),
            self.skipped_same_root.to_string(),
            self.reused.to_string(),
            self.recorded.to_string(),
            self.unions.to_string(),
            self.refused.to_string(),
            self.clusters.to_string(),
            format!("{:.6}", self.modularity),
            c.same_set_high.to_string(),
            c.diff_set_high.to_string(),
            c.same_set_mid.to_string(),
            c.same_set_low.to_string(),
            c.diff_set_other.to_string(),
        ]
        .into()
    }
}

/// Clusters once per edge threshold. Categories and modularity are taken
/// over every candidate pair scored exactly, the graph a forest-free run
/// would produce.
pub fn edge_sweep<S: BandSource + ?Sized>(
    source: &S,
    corpus: &ShingleCorpus,
    tree_threshold: f64,
    edges: &[f64],
    prefetch: usize,
) -> Result<Vec<EdgeSweepRow>> {
    let candidates = candidates_from_source(source)?;
    let scored = verify_pairs(candidates.iter(), corpus, f64::NEG_INFINITY)?;
    let graph: Vec<_> = scored.iter().filter(|(_, &w)| w > 0.0).map(|(p, &w)| (p.lo, p.hi, w)).collect();
    let mut out = Vec::with_capacity(edges.len());
    for &edge in edges {
        let cfg = ClusterConfig::new(tree_threshold, edge)?;
        let run = cluster_from_source(source, corpus, cfg, prefetch)?;
        let totals = run.totals();
        let assignment = run.assignment();
        let candidate_pairs = run.candidate_pairs() as u64;
        let categories = categorize_pairs(&scored, &assignment, &cfg, candidate_pairs - totals.evaluated);
        let modularity = if graph.is_empty() { 0.0 } else { modularity(&assignment, &graph)? };
        out.push(EdgeSweepRow {
            edge_threshold: edge,
            tree_threshold,
            candidate_pairs,
            evaluated: totals.evaluated,
            excluded: candidate_pairs - totals.evaluated,
            skipped_same_root: totals.skipped_same_root,
            reused: totals.reused,
            recorded: totals.recorded,
            unions: totals.unions,
            refused: totals.refused,
            clusters: run.clusters(false).len() as u64,
            modularity,
            categories,
        });
    }
    Ok(out)
}

/// Fraction of bootstrap resamples whose mean of `values` is `>= 0`.
pub fn bootstrap_nonnegative(values: &[f64], resamples: usize, seed: u64) -> f64 {
    if values.is_empty() || resamples == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = values.len();
    let hits = (0..resamples)
        .filter(|_| {
            let sum: f64 = (0..n).map(|_| values[rng.gen_range(0..n)]).sum();
            sum >= 0.0
        })
        .count();
    hits as f64 / resamples as f64
}

/// Per-setting mean of a per-seed quantity, keyed by `(bands, rows, threshold)`.
pub fn grid_means(runs: &[Vec<AccuracyReport>], value: impl Fn(&AccuracyReport) -> f64) -> BTreeMap<(usize, usize, u64), f64> {
    let mut sums: BTreeMap<(usize, usize, u64), (f64, usize)> = BTreeMap::new();
    for r in runs.iter().flatten() {
        let e = sums.entry((r.bands, r.rows, r.threshold.to_bits())).or_default();
        e.0 += value(r);
        e.1 += 1;
    }
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

pub const BASE_NOTES: usize = 521;

fn preset(seed: u64, selected: usize, replacement: bool, fraction: (f64, f64)) -> Result<SynthCorpus> {
    let spec = SynthSpec {
        base_docs: generate_bases(BASE_NOTES, &BaseShape::default(), seed),
        selected,
        copies: 1,
        replacement,
        fraction,
        rng_seed: derive_seed(seed, 1),
    };
    Ok(build_corpus(&spec)?)
}

/// 521 generated notes plus one copy each of 10 distinct notes with 10% of
/// words replaced (531 documents).
pub fn recall_corpus(seed: u64) -> Result<SynthCorpus> {
    preset(seed, 10, false, (0.1, 0.1))
}

/// 521 generated notes plus 500 copies, each of a note drawn at random with
/// 0 to 20% of words replaced (1021 documents).
pub fn clustering_corpus(seed: u64) -> Result<SynthCorpus> {
    preset(seed, 500, true, (0.0, 0.2))
}
