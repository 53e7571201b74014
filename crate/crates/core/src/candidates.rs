//! Candidate pair generation and exact verification.
//!
//! Three generators are provided, all returning canonical `(lo, hi)` pairs:
//! an inverted index from minhash value to documents, a sort of
//! `(value, document)` records, and LSH banding. [`baseline_all_pairs`] is
//! the quadratic ground truth.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::minhash::{BandVector, LshParams, Signature};
use crate::text::ShingleSet;
use crate::{DocId, Error, Result};

/// An unordered document pair stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CandidatePair {
    pub lo: DocId,
    pub hi: DocId,
}

impl CandidatePair {
    /// `None` for a self pair.
    pub fn new(a: DocId, b: DocId) -> Option<Self> {
        match a.cmp(&b) {
            core::cmp::Ordering::Less => Some(CandidatePair { lo: a, hi: b }),
            core::cmp::Ordering::Greater => Some(CandidatePair { lo: b, hi: a }),
            core::cmp::Ordering::Equal => None,
        }
    }
}

pub type CandidateSet = BTreeSet<CandidatePair>;

/// Verified pairs with their exact Jaccard similarity.
pub type ScoredPairs = BTreeMap<CandidatePair, f64>;

/// Random access to shingle sets by document id.
pub trait ShingleLookup {
    fn shingles(&self, id: DocId) -> Option<&ShingleSet>;

    fn require(&self, id: DocId) -> Result<&ShingleSet> {
        self.shingles(id).ok_or(Error::UnknownDocument(id))
    }
}

impl ShingleLookup for BTreeMap<DocId, ShingleSet> {
    fn shingles(&self, id: DocId) -> Option<&ShingleSet> {
        self.get(&id)
    }
}

/// Shingle sets sorted by document id.
#[derive(Debug, Clone, Default)]
pub struct ShingleCorpus {
    sets: Vec<ShingleSet>,
}

impl ShingleCorpus {
    pub fn new(mut sets: Vec<ShingleSet>) -> Self {
        sets.sort_by_key(|s| s.doc_id);
        ShingleCorpus { sets }
    }

    pub fn as_slice(&self) -> &[ShingleSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = DocId> + '_ {
        self.sets.iter().map(|s| s.doc_id)
    }
}

impl ShingleLookup for ShingleCorpus {
    fn shingles(&self, id: DocId) -> Option<&ShingleSet> {
        self.sets.binary_search_by_key(&id, |s| s.doc_id).ok().map(|i| &self.sets[i])
    }
}

/// `|a ∩ b| / |a ∪ b|`; two empty sets are identical (1.0).
pub fn exact_jaccard(a: &ShingleSet, b: &ShingleSet) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection_len(b);
    inter as f64 / (a.len() + b.len() - inter) as f64
}

/// Every pair with Jaccard strictly above `threshold`.
pub fn baseline_all_pairs(corpus: &[ShingleSet], threshold: f64) -> ScoredPairs {
    let mut out = ScoredPairs::new();
    for (i, a) in corpus.iter().enumerate() {
        for b in &corpus[i + 1..] {
            let sim = exact_jaccard(a, b);
            if sim > threshold {
                if let Some(pair) = CandidatePair::new(a.doc_id, b.doc_id) {
                    out.insert(pair, sim);
                }
            }
        }
    }
    out
}

/// Adds every pair of a sorted, deduplicated id list.
pub fn add_group_pairs(ids: &[DocId], out: &mut CandidateSet) {
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            if let Some(p) = CandidatePair::new(a, b) {
                out.insert(p);
            }
        }
    }
}

fn check_lengths(signatures: &[Signature]) -> Result<()> {
    if let Some(first) = signatures.first() {
        if let Some(bad) = signatures.iter().find(|s| s.len() != first.len()) {
            return Err(Error::LengthMismatch { expected: first.len(), actual: bad.len() });
        }
    }
    Ok(())
}

/// Inverted index from minhash value to the documents carrying it.
pub fn candidates_valuemap(signatures: &[Signature]) -> Result<CandidateSet> {
    check_lengths(signatures)?;
    let mut lists: BTreeMap<u64, Vec<DocId>> = BTreeMap::new();
    for sig in signatures {
        for &v in &sig.values {
            lists.entry(v).or_default().push(sig.doc_id);
        }
    }
    let mut out = CandidateSet::new();
    for mut ids in lists.into_values() {
        ids.sort_unstable();
        ids.dedup();
        add_group_pairs(&ids, &mut out);
    }
    Ok(out)
}

/// Groups equal values in a sorted `(value, doc)` stream and emits their pairs.
/// Shared with the external-memory variant, which feeds the same stream from disk.
pub fn pairs_from_sorted_records<I>(records: I, out: &mut CandidateSet)
where
    I: IntoIterator<Item = (u64, DocId)>,
{
    let mut run: Vec<DocId> = Vec::new();
    let mut current = None;
    for (v, d) in records {
        if current != Some(v) {
            add_group_pairs(&run, out);
            run.clear();
            current = Some(v);
        }
        if run.last() != Some(&d) {
            run.push(d);
        }
    }
    add_group_pairs(&run, out);
}

/// Sorts `(minhash value, document)` records and pairs up equal-value runs.
pub fn candidates_sorted(signatures: &[Signature]) -> Result<CandidateSet> {
    check_lengths(signatures)?;
    let mut records: Vec<(u64, DocId)> = signatures
        .iter()
        .flat_map(|s| s.values.iter().map(move |&v| (v, s.doc_id)))
        .collect();
    records.sort_unstable();
    let mut out = CandidateSet::new();
    pairs_from_sorted_records(records, &mut out);
    Ok(out)
}

/// Calls `f` with the column indices of every group of two or more equal
/// values, in ascending value order. Columns within a group are ascending.
///
/// Uses one `u32` per column beyond the band itself.
pub fn for_each_band_group(values: &[u64], mut f: impl FnMut(&[u32])) {
    assert!(values.len() <= u32::MAX as usize, "band wider than u32 columns");
    let mut order: Vec<u32> = (0..values.len() as u32).collect();
    order.sort_unstable_by_key(|&c| (values[c as usize], c));
    let mut start = 0;
    while start < order.len() {
        let v = values[order[start] as usize];
        let mut end = start + 1;
        while end < order.len() && values[order[end] as usize] == v {
            end += 1;
        }
        if end - start >= 2 {
            f(&order[start..end]);
        }
        start = end;
    }
}

/// Candidate pairs contributed by one band row; `doc_ids[c]` names column `c`.
pub fn band_row_pairs(values: &[u64], doc_ids: &[DocId], out: &mut CandidateSet) {
    debug_assert_eq!(values.len(), doc_ids.len());
    let mut ids = Vec::new();
    for_each_band_group(values, |cols| {
        ids.clear();
        ids.extend(cols.iter().map(|&c| doc_ids[c as usize]));
        ids.sort_unstable();
        ids.dedup();
        add_group_pairs(&ids, out);
    });
}

/// Pairs agreeing on at least one band.
pub fn candidates_banded(vectors: &[BandVector], params: &LshParams) -> Result<CandidateSet> {
    params.validate()?;
    if let Some(bad) = vectors.iter().find(|v| v.bands.len() != params.bands) {
        return Err(Error::LengthMismatch { expected: params.bands, actual: bad.bands.len() });
    }
    let doc_ids: Vec<DocId> = vectors.iter().map(|v| v.doc_id).collect();
    let mut row = Vec::with_capacity(vectors.len());
    let mut out = CandidateSet::new();
    for j in 0..params.bands {
        row.clear();
        row.extend(vectors.iter().map(|v| v.bands[j]));
        band_row_pairs(&row, &doc_ids, &mut out);
    }
    Ok(out)
}

/// Keeps candidates whose exact Jaccard is strictly above `threshold`.
pub fn verify_pairs<'a, I, L>(pairs: I, corpus: &L, threshold: f64) -> Result<ScoredPairs>
where
    I: IntoIterator<Item = &'a CandidatePair>,
    L: ShingleLookup + ?Sized,
{
    let mut out = ScoredPairs::new();
    for &pair in pairs {
        let sim = exact_jaccard(corpus.require(pair.lo)?, corpus.require(pair.hi)?);
        if sim > threshold {
            out.insert(pair, sim);
        }
    }
    Ok(out)
}
