//! Evaluation quantities: candidate accuracy against the exact oracle, pair
//! categories for a clustering, and memory-bound capacity estimates.

use alloc::collections::BTreeMap;

use crate::candidates::{CandidateSet, ScoredPairs};
use crate::cluster::ClusterConfig;
use crate::minhash::LshParams;
use crate::DocId;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AccuracyReport {
    pub threshold: f64,
    pub bands: usize,
    pub rows: usize,
    pub candidates: u64,
    /// Candidates that are not oracle pairs ("false candidates").
    pub false_positives: u64,
    /// Oracle pairs that never became candidates.
    pub false_negatives: u64,
    pub true_pairs: u64,
}

/// Compares candidates with `oracle`, the pairs whose exact similarity
/// exceeds `threshold`.
pub fn accuracy(candidates: &CandidateSet, oracle: &ScoredPairs, threshold: f64, bands: usize, rows: usize) -> AccuracyReport {
    let false_positives = candidates.iter().filter(|p| !oracle.contains_key(p)).count() as u64;
    let false_negatives = oracle.keys().filter(|p| !candidates.contains(p)).count() as u64;
    AccuracyReport {
        threshold,
        bands,
        rows,
        candidates: candidates.len() as u64,
        false_positives,
        false_negatives,
        true_pairs: oracle.len() as u64,
    }
}

/// Scored pairs split by similarity band and cluster co-membership.
///
/// High means above the edge threshold, mid means between the tree and
/// edge thresholds, low means below the tree threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairCategoryReport {
    pub same_set_high: u64,
    pub diff_set_high: u64,
    pub same_set_mid: u64,
    pub same_set_low: u64,
    /// Mid or low pairs split across clusters.
    pub diff_set_other: u64,
    pub pairs_skipped: u64,
}

/// `assignment` maps documents to cluster roots; unlisted documents are
/// singletons.
pub fn categorize_pairs(
    scored: &ScoredPairs,
    assignment: &BTreeMap<DocId, DocId>,
    cfg: &ClusterConfig,
    pairs_skipped: u64,
) -> PairCategoryReport {
    let root = |d: DocId| assignment.get(&d).copied().unwrap_or(d);
    let mut report = PairCategoryReport { pairs_skipped, ..PairCategoryReport::default() };
    for (pair, &sim) in scored {
        let same = root(pair.lo) == root(pair.hi);
        let slot = if sim > cfg.edge_threshold {
            if same { &mut report.same_set_high } else { &mut report.diff_set_high }
        } else if !same {
            &mut report.diff_set_other
        } else if sim >= cfg.tree_threshold {
            &mut report.same_set_mid
        } else {
            &mut report.same_set_low
        };
        *slot += 1;
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Strategy {
    InMemory,
    Design1,
    Design2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CapacityEstimate {
    pub strategy: Strategy,
    pub memory_budget: u64,
    pub max_documents: u64,
}

/// Largest corpus whose dominant in-memory structure fits in `memory_budget`
/// bytes, at 8 bytes per band value:
///
/// - in memory: the whole band matrix, `8 * b * N`
/// - design 1: one band at a time, `8 * N`
/// - design 2: one part of `N / p` documents while indexing (`8 * b * N / p`)
///   and one band while reading (`8 * N`), whichever is larger
pub fn capacity(strategy: Strategy, params: &LshParams, parts: usize, memory_budget: u64) -> CapacityEstimate {
    let budget = memory_budget as u128;
    let b = params.bands.max(1) as u128;
    let p = parts.max(1) as u128;
    let band_read = budget / 8;
    let max = match strategy {
        Strategy::InMemory => budget / (8 * b),
        Strategy::Design1 => band_read,
        Strategy::Design2 => (budget * p / (8 * b)).min(band_read),
    };
    CapacityEstimate { strategy, memory_budget, max_documents: max.min(u64::MAX as u128) as u64 }
}
