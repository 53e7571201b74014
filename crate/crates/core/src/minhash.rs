//! MinHash signatures and their compression into LSH band vectors.

use alloc::vec::Vec;

use xxhash_rust::xxh64::Xxh64;

use crate::hash::{derive_seed, hash_u64, BAND_DOMAIN_TAG, SHINGLE_SEED};
use crate::text::{ShingleSet, DEFAULT_SHINGLE_WIDTH};
use crate::{DocId, Error, Result};

/// Signature value of a document without shingles.
pub const SENTINEL: u64 = u64::MAX;

/// Seed for compressing a band's rows into one value.
pub const BAND_SEED: u64 = SHINGLE_SEED ^ BAND_DOMAIN_TAG;

/// LSH configuration: `num_hashes = bands * rows`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LshParams {
    pub num_hashes: usize,
    pub bands: usize,
    pub rows: usize,
    pub shingle_width: usize,
    pub threshold: f64,
}

impl Default for LshParams {
    fn default() -> Self {
        LshParams { num_hashes: 100, bands: 50, rows: 2, shingle_width: DEFAULT_SHINGLE_WIDTH, threshold: 0.4 }
    }
}

impl LshParams {
    pub fn new(bands: usize, rows: usize, shingle_width: usize, threshold: f64) -> Result<Self> {
        let params = LshParams {
            num_hashes: bands.checked_mul(rows).ok_or(Error::InvalidParams("bands * rows overflows"))?,
            bands,
            rows,
            shingle_width,
            threshold,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands == 0 || self.rows == 0 || self.shingle_width == 0 {
            return Err(Error::InvalidParams("bands, rows and shingle width must be at least 1"));
        }
        if self.num_hashes != self.bands * self.rows {
            return Err(Error::InvalidParams("number of hashes must equal bands * rows"));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidParams("threshold must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// `M` seeded hash functions standing in for random permutations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashFamily {
    master_seed: u64,
    seeds: Vec<u64>,
}

impl HashFamily {
    /// Member `k` is keyed by the `(k + 1)`-th seed derived from `master_seed`;
    /// index 0 is reserved.
    pub fn new(size: usize, master_seed: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyHashFamily);
        }
        let seeds = (1..=size as u64).map(|i| derive_seed(master_seed, i)).collect();
        Ok(HashFamily { master_seed, seeds })
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    #[inline]
    pub fn hash(&self, k: usize, value: u64) -> u64 {
        hash_u64(value, self.seeds[k])
    }

    /// Minimum of each member function over the shingles.
    pub fn signature(&self, shingles: &ShingleSet) -> Signature {
        let mut values = alloc::vec![SENTINEL; self.seeds.len()];
        for &s in shingles.as_slice() {
            for (slot, &seed) in values.iter_mut().zip(&self.seeds) {
                let h = hash_u64(s, seed);
                if h < *slot {
                    *slot = h;
                }
            }
        }
        Signature { doc_id: shingles.doc_id, values }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub doc_id: DocId,
    pub values: Vec<u64>,
}

impl Signature {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True for the signature of an empty shingle set.
    pub fn is_sentinel(&self) -> bool {
        self.values.iter().all(|&v| v == SENTINEL)
    }

    /// First `m` rows. Member functions are indexed from a fixed seed stream,
    /// so this equals the signature under a family of size `m`.
    pub fn prefix(&self, m: usize) -> Signature {
        Signature { doc_id: self.doc_id, values: self.values[..m.min(self.values.len())].to_vec() }
    }
}

/// Fraction of rows on which two signatures agree.
pub fn estimate_similarity(a: &Signature, b: &Signature) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    if a.is_empty() {
        return Err(Error::EmptyHashFamily);
    }
    let agree = a.values.iter().zip(&b.values).filter(|(x, y)| x == y).count();
    Ok(agree as f64 / a.len() as f64)
}

/// One 64-bit value per band of `rows` consecutive signature rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandVector {
    pub doc_id: DocId,
    pub bands: Vec<u64>,
}

/// Hash of a slice of signature rows, little-endian concatenated.
pub fn compress_band(rows: &[u64]) -> u64 {
    let mut h = Xxh64::new(BAND_SEED);
    for v in rows {
        h.update(&v.to_le_bytes());
    }
    h.digest()
}

pub fn band_vector(sig: &Signature, params: &LshParams) -> Result<BandVector> {
    params.validate()?;
    if sig.len() != params.num_hashes {
        return Err(Error::LengthMismatch { expected: params.num_hashes, actual: sig.len() });
    }
    let bands = sig.values.chunks_exact(params.rows).map(compress_band).collect();
    Ok(BandVector { doc_id: sig.doc_id, bands })
}

/// Probability that a pair with Jaccard similarity `s` becomes a candidate:
/// `1 - (1 - s^r)^b`, evaluated as `-expm1(b * log1p(-s^r))` to keep full
/// relative precision when the result is tiny.
pub fn candidate_probability(s: f64, bands: u32, rows: u32) -> f64 {
    let s = s.clamp(0.0, 1.0);
    let agree_band = libm::pow(s, rows as f64);
    0.0 - libm::expm1(bands as f64 * libm::log1p(-agree_band))
}
