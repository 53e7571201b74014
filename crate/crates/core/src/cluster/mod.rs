//! Clustering with disjoint sets whose members are guaranteed to be similar.
//!
//! Every root carries `min_score`, a lower bound on the Jaccard similarity
//! between the root document and any document in its tree, maintained with
//! the triangle inequality on Jaccard distance. A union is refused when the
//! weakest leaf-to-leaf bound across the two trees would fall below the tree
//! threshold, so any two members of a cluster are at least that similar.

mod modularity;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::candidates::{exact_jaccard, CandidatePair, CandidateSet, ScoredPairs, ShingleLookup};
use crate::{DocId, Error, Result};

pub use modularity::modularity;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClusterConfig {
    pub tree_threshold: f64,
    pub edge_threshold: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig { tree_threshold: 0.40, edge_threshold: 0.75 }
    }
}

impl ClusterConfig {
    pub fn new(tree_threshold: f64, edge_threshold: f64) -> Result<Self> {
        let cfg = ClusterConfig { tree_threshold, edge_threshold };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.tree_threshold) || !unit.contains(&self.edge_threshold) {
            return Err(Error::InvalidClusterConfig("thresholds must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// `j(A,C) >= j(A,B) + j(B,C) - 1`. May be negative (a vacuous bound).
pub fn jaccard_lower_bound(j_ab: f64, j_bc: f64) -> f64 {
    j_ab + j_bc - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterNode {
    pub parent: usize,
    pub rank: u32,
    /// Only meaningful at roots.
    pub min_score: f64,
}

/// Disjoint sets over dense node indices `0..len`.
#[derive(Debug, Clone)]
pub struct ClusterForest {
    nodes: Vec<ClusterNode>,
}

impl ClusterForest {
    pub fn new(len: usize) -> Self {
        ClusterForest {
            nodes: (0..len).map(|i| ClusterNode { parent: i, rank: 0, min_score: 1.0 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, x: usize) -> &ClusterNode {
        &self.nodes[x]
    }

    /// Root of `x`, re-parenting the whole path onto it.
    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.nodes[root].parent != root {
            root = self.nodes[root].parent;
        }
        let mut cur = x;
        while cur != root {
            let next = self.nodes[cur].parent;
            self.nodes[cur].parent = root;
            cur = next;
        }
        root
    }

    /// Root of `x` without compressing.
    pub fn root_of(&self, mut x: usize) -> usize {
        while self.nodes[x].parent != x {
            x = self.nodes[x].parent;
        }
        x
    }

    /// Merges the trees of `x` and `y` if the result keeps every pair of
    /// members above the tree threshold. `sim` must be the exact Jaccard
    /// similarity of the two root documents. Returns whether both end up in
    /// one tree.
    pub fn union(&mut self, x: usize, y: usize, sim: f64, cfg: &ClusterConfig) -> bool {
        let xr = self.find(x);
        let yr = self.find(y);
        if xr == yr {
            return true;
        }
        let (xs, ys) = (self.nodes[xr].min_score, self.nodes[yr].min_score);
        let leaf_to_leaf = xs + ys + sim - 2.0;
        if leaf_to_leaf < cfg.tree_threshold {
            return false;
        }
        let (root, child) = if self.nodes[xr].rank >= self.nodes[yr].rank { (xr, yr) } else { (yr, xr) };
        if self.nodes[xr].rank == self.nodes[yr].rank {
            self.nodes[root].rank += 1;
        }
        self.nodes[child].parent = root;
        let through_edge = self.nodes[child].min_score - (1.0 - sim);
        let merged = self.nodes[root].min_score.min(through_edge);
        self.nodes[root].min_score = merged.clamp(0.0, 1.0);
        true
    }

    /// Groups of node indices by root, each group ascending, groups ordered by root.
    pub fn groups(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.nodes.len() {
            out.entry(self.root_of(x)).or_default().push(x);
        }
        out
    }
}

/// A cluster in document-id terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub root: DocId,
    pub members: Vec<DocId>,
    pub min_score: f64,
}

/// Counters from one or more [`ClusterRun::process_band`] calls.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandStats {
    /// Jaccard similarities actually computed.
    pub evaluated: u64,
    /// Candidate pairs whose documents already shared a root.
    pub skipped_same_root: u64,
    /// Candidate pairs whose root pair had been evaluated before.
    pub reused: u64,
    /// Pairs scored above the edge threshold.
    pub recorded: u64,
    pub unions: u64,
    pub refused: u64,
}

impl BandStats {
    /// Evaluations avoided relative to scoring every distinct candidate pair.
    pub fn skipped(&self) -> u64 {
        self.skipped_same_root + self.reused
    }

    fn add(&mut self, o: &BandStats) {
        self.evaluated += o.evaluated;
        self.skipped_same_root += o.skipped_same_root;
        self.reused += o.reused;
        self.recorded += o.recorded;
        self.unions += o.unions;
        self.refused += o.refused;
    }
}

/// State carried across bands: the forest plus pair bookkeeping.
///
/// Column `c` of every band row is document `doc_ids[c]`.
#[derive(Debug, Clone)]
pub struct ClusterRun {
    cfg: ClusterConfig,
    doc_ids: Vec<DocId>,
    forest: ClusterForest,
    seen: CandidateSet,
    scores: ScoredPairs,
    recorded: ScoredPairs,
    totals: BandStats,
}

impl ClusterRun {
    pub fn new(doc_ids: Vec<DocId>, cfg: ClusterConfig) -> Result<Self> {
        cfg.validate()?;
        let forest = ClusterForest::new(doc_ids.len());
        Ok(ClusterRun {
            cfg,
            doc_ids,
            forest,
            seen: CandidateSet::new(),
            scores: ScoredPairs::new(),
            recorded: ScoredPairs::new(),
            totals: BandStats::default(),
        })
    }

    pub fn config(&self) -> &ClusterConfig {
        &self.cfg
    }

    pub fn forest(&self) -> &ClusterForest {
        &self.forest
    }

    /// Sorts one band, and within each group of equal values tries to merge
    /// the clusters of every new candidate pair, computing each root-pair
    /// similarity at most once.
    pub fn process_band<L>(&mut self, values: &[u64], corpus: &L) -> Result<BandStats>
    where
        L: ShingleLookup + ?Sized,
    {
        if values.len() != self.doc_ids.len() {
            return Err(Error::LengthMismatch { expected: self.doc_ids.len(), actual: values.len() });
        }
        let mut stats = BandStats::default();
        let mut failure = None;
        let mut group: Vec<usize> = Vec::new();
        let doc_ids = core::mem::take(&mut self.doc_ids);
        crate::candidates::for_each_band_group(values, |cols| {
            if failure.is_some() {
                return;
            }
            group.clear();
            group.extend(cols.iter().map(|&c| c as usize));
            group.sort_unstable_by_key(|&c| doc_ids[c]);
            if let Err(e) = self.process_group(&group, &doc_ids, corpus, &mut stats) {
                failure = Some(e);
            }
        });
        self.doc_ids = doc_ids;
        if let Some(e) = failure {
            return Err(e);
        }
        self.totals.add(&stats);
        Ok(stats)
    }

    fn process_group<L>(&mut self, group: &[usize], doc_ids: &[DocId], corpus: &L, stats: &mut BandStats) -> Result<()>
    where
        L: ShingleLookup + ?Sized,
    {
        for (i, &a) in group.iter().enumerate() {
            for &b in &group[i + 1..] {
                let Some(pair) = CandidatePair::new(doc_ids[a], doc_ids[b]) else { continue };
                if !self.seen.insert(pair) {
                    continue;
                }
                let (ra, rb) = (self.forest.find(a), self.forest.find(b));
                if ra == rb {
                    stats.skipped_same_root += 1;
                    continue;
                }
                let Some(root_pair) = CandidatePair::new(doc_ids[ra], doc_ids[rb]) else { continue };
                let sim = match self.scores.get(&root_pair) {
                    Some(&s) => {
                        stats.reused += 1;
                        s
                    }
                    None => {
                        let s = exact_jaccard(corpus.require(root_pair.lo)?, corpus.require(root_pair.hi)?);
                        stats.evaluated += 1;
                        self.scores.insert(root_pair, s);
                        s
                    }
                };
                if sim > self.cfg.edge_threshold {
                    if self.recorded.insert(root_pair, sim).is_none() {
                        stats.recorded += 1;
                    }
                    if self.forest.union(ra, rb, sim, &self.cfg) {
                        stats.unions += 1;
                    } else {
                        stats.refused += 1;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn totals(&self) -> BandStats {
        self.totals
    }

    /// Distinct candidate pairs seen so far: what scoring every candidate would cost.
    pub fn candidate_pairs(&self) -> usize {
        self.seen.len()
    }

    /// Pairs above the edge threshold, whether or not they were merged.
    pub fn recorded_pairs(&self) -> &ScoredPairs {
        &self.recorded
    }

    /// Clusters ordered by root id, members ascending.
    pub fn clusters(&self, include_singletons: bool) -> Vec<Cluster> {
        let mut out: Vec<Cluster> = self
            .forest
            .groups()
            .into_iter()
            .filter(|(_, m)| include_singletons || m.len() > 1)
            .map(|(root, members)| {
                let mut members: Vec<DocId> = members.into_iter().map(|c| self.doc_ids[c]).collect();
                members.sort_unstable();
                Cluster { root: self.doc_ids[root], members, min_score: self.forest.node(root).min_score }
            })
            .collect();
        out.sort_by_key(|c| c.root);
        out
    }

    /// Document id to the id of its cluster root.
    pub fn assignment(&self) -> BTreeMap<DocId, DocId> {
        (0..self.doc_ids.len())
            .map(|c| (self.doc_ids[c], self.doc_ids[self.forest.root_of(c)]))
            .collect()
    }
}

#[cfg(test)]
mod tests;
