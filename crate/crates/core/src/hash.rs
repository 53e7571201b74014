//! The single 64-bit hash primitive used everywhere in the pipeline.
//!
//! Every hash is xxHash64 over a byte string with a 64-bit seed. Seeds are
//! derived from a master seed with the splitmix64 sequence, which is a
//! bijection of its counter, so derived seeds never repeat.

use xxhash_rust::xxh64::xxh64;

/// Master seed for shingle hashing. Fixed so that shingle ids are stable
/// across runs regardless of the minhash master seed.
pub const CORPUS_SEED: u64 = 0x6e65_6172_6475_7021;

/// Seed used to hash word n-grams (seed index 0 of the corpus seed family).
pub const SHINGLE_SEED: u64 = derive_seed(CORPUS_SEED, 0);

/// Tag xor-ed into a family's reserved seed when compressing bands, keeping
/// band values in a different domain from shingle and row hashes.
pub const BAND_DOMAIN_TAG: u64 = 0xb4d0_b4d0_b4d0_b4d0;

#[inline]
pub fn hash64(bytes: &[u8], seed: u64) -> u64 {
    xxh64(bytes, seed)
}

/// Hashes a single 64-bit value (encoded little-endian).
#[inline]
pub fn hash_u64(value: u64, seed: u64) -> u64 {
    xxh64(&value.to_le_bytes(), seed)
}

#[inline]
pub const fn splitmix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// The `index`-th seed of the splitmix64 stream started at `master`.
#[inline]
pub const fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}
