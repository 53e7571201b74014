//! Corpus-to-candidates plumbing shared by the commands and benchmarks.

use std::io;
use std::path::Path;

use neardup_core::candidates::{band_row_pairs, pairs_from_sorted_records, CandidateSet, ShingleCorpus};
use neardup_core::cluster::ClusterRun;
use neardup_core::minhash::band_vector;
use neardup_core::text::prepare;
use neardup_core::{BandVector, ClusterConfig, Document, HashFamily, LshParams, Signature};
use rayon::prelude::*;

use crate::band_store::BandSource;
use crate::error::{Error, IoContext, Result};
use crate::extsort::ExternalSorter;

/// Runs `f` on a pool of `workers` threads, or the global pool when 0.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

pub fn shingle_corpus(docs: &[Document], shingle_width: usize) -> ShingleCorpus {
    ShingleCorpus::new(docs.par_iter().map(|d| prepare(d, shingle_width)).collect())
}

pub fn signatures(corpus: &ShingleCorpus, family: &HashFamily) -> Vec<Signature> {
    corpus.as_slice().par_iter().map(|s| family.signature(s)).collect()
}

pub fn band_vectors(signatures: &[Signature], params: &LshParams) -> Result<Vec<BandVector>> {
    Ok(signatures.par_iter().map(|s| band_vector(s, params)).collect::<Result<_, _>>()?)
}

/// Shingles and band vectors, both ordered by document id.
pub struct Indexed {
    pub corpus: ShingleCorpus,
    pub vectors: Vec<BandVector>,
}

pub fn index_documents(docs: &[Document], params: &LshParams, master_seed: u64) -> Result<Indexed> {
    params.validate()?;
    let corpus = shingle_corpus(docs, params.shingle_width);
    let family = HashFamily::new(params.num_hashes, master_seed)?;
    let vectors = band_vectors(&signatures(&corpus, &family), params)?;
    Ok(Indexed { corpus, vectors })
}

/// Banded candidates, fetching and pairing bands in parallel.
pub fn candidates_from_source<S: BandSource + ?Sized>(source: &S) -> Result<CandidateSet> {
    let doc_ids = source.doc_ids();
    (0..source.num_bands())
        .into_par_iter()
        .try_fold(CandidateSet::new, |mut acc, j| {
            let band = source.read_band(j)?;
            band_row_pairs(&band, doc_ids, &mut acc);
            Ok::<_, Error>(acc)
        })
        .try_reduce(CandidateSet::new, |mut a, mut b| {
            if a.len() < b.len() {
                std::mem::swap(&mut a, &mut b);
            }
            a.append(&mut b);
            Ok(a)
        })
}

/// Banded candidates reading one band at a time on the calling thread.
pub fn candidates_sequential<S: BandSource + ?Sized>(source: &S) -> Result<CandidateSet> {
    let mut out = CandidateSet::new();
    for j in 0..source.num_bands() {
        let band = source.read_band(j)?;
        band_row_pairs(&band, source.doc_ids(), &mut out);
    }
    Ok(out)
}

/// Clusters band by band in ascending band order. Bands are prefetched
/// `prefetch` at a time in parallel; union-find updates stay sequential.
pub fn cluster_from_source<S: BandSource + ?Sized>(
    source: &S,
    corpus: &ShingleCorpus,
    cfg: ClusterConfig,
    prefetch: usize,
) -> Result<ClusterRun> {
    let mut run = ClusterRun::new(source.doc_ids().to_vec(), cfg)?;
    let bands: Vec<usize> = (0..source.num_bands()).collect();
    for chunk in bands.chunks(prefetch.max(1)) {
        let fetched: Vec<Vec<u64>> = chunk.par_iter().map(|&j| source.read_band(j)).collect::<Result<_>>()?;
        for values in &fetched {
            run.process_band(values, corpus)?;
        }
    }
    Ok(run)
}

/// Minhash-value candidates through an on-disk sort, for signature sets
/// larger than memory. Sort runs spill into `scratch`.
pub fn candidates_sorted_external(signatures: &[Signature], scratch: &Path, memory_budget: usize) -> Result<CandidateSet> {
    if let Some(first) = signatures.first() {
        if let Some(bad) = signatures.iter().find(|s| s.len() != first.len()) {
            return Err(neardup_core::Error::LengthMismatch { expected: first.len(), actual: bad.len() }.into());
        }
    }
    std::fs::create_dir_all(scratch).context(|| format!("creating {}", scratch.display()))?;
    let mut sorter = ExternalSorter::new(scratch, "minhash", memory_budget);
    for s in signatures {
        for &v in &s.values {
            sorter.push((v, s.doc_id)).context(|| "spilling sort run".into())?;
        }
    }
    let mut failure: Option<io::Error> = None;
    let stream = sorter.finish().context(|| "merging sort runs".into())?;
    let records = stream.map_while(|r| match r {
        Ok(rec) => Some(rec),
        Err(e) => {
            failure = Some(e);
            None
        }
    });
    let mut out = CandidateSet::new();
    pairs_from_sorted_records(records, &mut out);
    match failure {
        Some(e) => Err(Error::io("reading sort runs", e)),
        None => Ok(out),
    }
}
