//! Text preparation: tokens, stems and word n-gram shingles.

mod porter;

use alloc::string::String;
use alloc::vec::Vec;

pub use porter::stem;

use crate::hash::{hash64, SHINGLE_SEED};
use crate::DocId;

/// Shingle width used unless configured otherwise.
pub const DEFAULT_SHINGLE_WIDTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Document {
    pub id: DocId,
    pub text: String,
}

impl Document {
    pub fn new(id: DocId, text: impl Into<String>) -> Self {
        Document { id, text: text.into() }
    }
}

/// The hashed word n-grams of one document, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ShingleSet {
    pub doc_id: DocId,
    shingles: Vec<u64>,
}

impl ShingleSet {
    pub fn from_hashes(doc_id: DocId, mut hashes: Vec<u64>) -> Self {
        hashes.sort_unstable();
        hashes.dedup();
        ShingleSet { doc_id, shingles: hashes }
    }

    /// Sorted, distinct shingle ids.
    pub fn as_slice(&self) -> &[u64] {
        &self.shingles
    }

    pub fn len(&self) -> usize {
        self.shingles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shingles.is_empty()
    }

    pub fn contains(&self, shingle: u64) -> bool {
        self.shingles.binary_search(&shingle).is_ok()
    }

    /// Size of the intersection with `other`, by a sorted merge.
    pub fn intersection_len(&self, other: &ShingleSet) -> usize {
        let (a, b) = (self.as_slice(), other.as_slice());
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// Lowercased maximal runs of alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.chars().flat_map(char::to_lowercase).collect())
        .collect()
}

/// Hash of a token window joined by single spaces.
pub fn hash_shingle<S: AsRef<str>>(window: &[S]) -> u64 {
    let mut joined = String::new();
    for (i, token) in window.iter().enumerate() {
        if i > 0 {
            joined.push(' ');
        }
        joined.push_str(token.as_ref());
    }
    hash64(joined.as_bytes(), SHINGLE_SEED)
}

/// Hashes every contiguous window of `n` tokens. Fewer than `n` tokens
/// collapse to one shingle covering the whole sequence.
pub fn shingle<S: AsRef<str>>(doc_id: DocId, tokens: &[S], n: usize) -> ShingleSet {
    assert!(n >= 1, "shingle width must be positive");
    let hashes = if tokens.is_empty() {
        Vec::new()
    } else if tokens.len() < n {
        alloc::vec![hash_shingle(tokens)]
    } else {
        tokens.windows(n).map(hash_shingle).collect()
    };
    ShingleSet::from_hashes(doc_id, hashes)
}

/// Full preparation: tokenize, stem, shingle.
pub fn prepare(doc: &Document, n: usize) -> ShingleSet {
    let stems: Vec<String> = tokenize(&doc.text).iter().map(|t| stem(t)).collect();
    shingle(doc.id, &stems, n)
}
