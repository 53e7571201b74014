use std::fs;

use neardup::band_store::write_store;
use neardup::bench::clustering_corpus;
use neardup::pipeline::{candidates_from_source, candidates_sequential, cluster_from_source, index_documents};
use neardup::{BandSource, BandStore, InMemoryBands};
use neardup_core::metrics::Strategy as Design;
use neardup_core::minhash::BandVector;
use neardup_core::{ClusterConfig, LshParams};
use proptest::prelude::*;

fn params(bands: usize) -> LshParams {
    LshParams::new(bands, 2, 8, 0.4).unwrap()
}

fn matrix() -> impl Strategy<Value = (usize, Vec<BandVector>, usize)> {
    (1usize..12, 0usize..60, 1usize..15, 1u64..6).prop_flat_map(|(bands, docs, parts, range)| {
        let vectors = proptest::collection::vec(proptest::collection::vec(0..range, bands), docs).prop_map(|rows| {
            rows.into_iter().enumerate().map(|(i, bands)| BandVector { doc_id: 3 * i as u64 + 1, bands }).collect()
        });
        (Just(bands), vectors, Just(parts))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn designs_read_the_same_matrix((bands, vectors, parts) in matrix(), budget in 64usize..4096) {
        let dir = tempfile::tempdir().unwrap();
        let mem = InMemoryBands::new(&vectors, bands).unwrap();
        let mut stores = Vec::new();
        for design in [Design::Design1, Design::Design2] {
            let path = dir.path().join(format!("{design:?}"));
            write_store(&path, design, params(bands), 5, parts, budget, &vectors).unwrap();
            stores.push(BandStore::open(&path).unwrap());
        }
        let expected = candidates_sequential(&mem).unwrap();
        for store in &stores {
            prop_assert_eq!(store.doc_ids(), mem.doc_ids());
            for j in 0..bands {
                prop_assert_eq!(store.read_band(j).unwrap(), mem.read_band(j).unwrap());
                prop_assert_eq!(store.read_band_cells(j).unwrap(), mem.read_band_cells(j).unwrap());
            }
            prop_assert!(store.read_band(bands).is_err());
            prop_assert_eq!(&candidates_sequential(store).unwrap(), &expected);
            prop_assert_eq!(&candidates_from_source(store).unwrap(), &expected);
        }
    }
}

#[test]
fn designs_cluster_the_same() {
    let synth = clustering_corpus(17).unwrap();
    let p = LshParams::default();
    let ix = index_documents(&synth.documents, &p, 3).unwrap();
    let mem = InMemoryBands::new(&ix.vectors, p.bands).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = ClusterConfig::new(0.4, 0.75).unwrap();
    let expected = cluster_from_source(&mem, &ix.corpus, cfg, 4).unwrap();
    assert!(!expected.clusters(false).is_empty());
    for (design, parts) in [(Design::Design1, 1), (Design::Design2, 10), (Design::Design2, 3)] {
        let path = dir.path().join(format!("{design:?}-{parts}"));
        write_store(&path, design, p, 3, parts, 1 << 16, &ix.vectors).unwrap();
        let store = BandStore::open(&path).unwrap();
        for prefetch in [1, 7] {
            let run = cluster_from_source(&store, &ix.corpus, cfg, prefetch).unwrap();
            assert_eq!(run.clusters(true), expected.clusters(true));
            assert_eq!(run.recorded_pairs(), expected.recorded_pairs());
        }
    }
}

#[test]
fn damaged_stores_are_refused() {
    let vectors: Vec<BandVector> =
        (0..40u64).map(|d| BandVector { doc_id: d, bands: (0..6).map(|j| (d + j) % 5).collect() }).collect();
    let dir = tempfile::tempdir().unwrap();
    for design in [Design::Design1, Design::Design2] {
        let path = dir.path().join(format!("{design:?}"));
        write_store(&path, design, params(6), 1, 4, 1024, &vectors).unwrap();
        let table = path.join("matrix.kv");
        let good = fs::read(&table).unwrap();

        fs::write(&table, &good[..good.len() - 3]).unwrap();
        assert!(BandStore::open(&path).is_err(), "{design:?}: truncated table accepted");

        fs::write(&table, &good[..good.len() / 2]).unwrap();
        assert!(BandStore::open(&path).is_err(), "{design:?}: half table accepted");

        let mut bad_magic = good.clone();
        bad_magic[0] ^= 0xff;
        fs::write(&table, &bad_magic).unwrap();
        assert!(BandStore::open(&path).is_err(), "{design:?}: bad magic accepted");

        fs::write(&table, &good).unwrap();
        assert!(BandStore::open(&path).is_ok());
        fs::remove_file(path.join("meta")).unwrap();
        assert!(BandStore::open(&path).is_err(), "{design:?}: store without meta accepted");
    }
}
