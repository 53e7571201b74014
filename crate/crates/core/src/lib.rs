//! Near-duplicate detection primitives built on MinHash signatures and banded
//! locality-sensitive hashing.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the whole
//! algorithmic path from raw text to clusters:
//!
//! - [`text`]: tokenization, Porter stemming and word n-gram shingling
//! - [`minhash`]: seeded hash families, signatures and band vectors
//! - [`candidates`]: candidate pair generation and exact verification
//! - [`cluster`]: similarity-bounded disjoint sets and modularity
//! - [`synth`]: ground-truth corpora with planted near-duplicates
//! - [`metrics`]: accuracy, pair categories and memory capacity estimates
//!
//! Storage, file formats and the command line driver live in the `neardup`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod candidates;
pub mod cluster;
mod error;
pub mod hash;
pub mod metrics;
pub mod minhash;
pub mod synth;
pub mod text;

pub use candidates::{CandidatePair, ScoredPairs, ShingleLookup};
pub use cluster::{ClusterConfig, ClusterForest};
pub use error::Error;
pub use minhash::{BandVector, HashFamily, LshParams, Signature};
pub use text::{Document, ShingleSet};

/// External document identifier.
pub type DocId = u64;

pub type Result<T, E = Error> = core::result::Result<T, E>;
