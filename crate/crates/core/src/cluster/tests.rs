use super::*;
use crate::candidates::ShingleCorpus;
use crate::text::ShingleSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::vec;
use std::vec::Vec;

fn cfg(tree: f64, edge: f64) -> ClusterConfig {
    ClusterConfig::new(tree, edge).unwrap()
}

#[test]
fn lower_bound_formula() {
    assert_eq!(jaccard_lower_bound(1.0, 1.0), 1.0);
    assert!((jaccard_lower_bound(0.9, 0.9) - 0.8).abs() < 1e-12);
    assert!((jaccard_lower_bound(0.4, 0.4) + 0.2).abs() < 1e-12);
}

#[test]
fn config_validation() {
    assert!(ClusterConfig::new(0.4, 0.75).is_ok());
    assert!(ClusterConfig::new(1.0, 0.75).is_ok());
    assert!(ClusterConfig::new(0.4, 1.5).is_err());
    assert!(ClusterConfig::new(-0.1, 0.75).is_err());
    assert_eq!(ClusterConfig::default(), cfg(0.40, 0.75));
}

#[test]
fn find_and_union_basics() {
    let c = cfg(0.4, 0.75);
    let mut f = ClusterForest::new(3);
    assert_eq!(f.find(2), 2);
    assert!(f.union(0, 1, 0.9, &c));
    assert_eq!(f.find(0), f.find(1));
    let root = f.find(0);
    assert_eq!(root, 0);
    assert!((f.node(root).min_score - 0.9).abs() < 1e-12);
    assert_eq!(f.node(root).rank, 1);
    let before = f.clone();
    assert!(f.union(1, 0, 0.1, &c));
    assert_eq!(f.node(0), before.node(0));
    assert_eq!(f.node(1), before.node(1));
}

#[test]
fn union_refused_when_leaves_too_far_apart() {
    let c = cfg(0.4, 0.75);
    let mut f = ClusterForest::new(4);
    // roots 0 and 2 with min scores 0.6 and 0.7
    assert!(f.union(0, 1, 0.6, &c));
    assert!(f.union(2, 3, 0.7, &c));
    assert!((f.node(0).min_score - 0.6).abs() < 1e-12);
    assert!((f.node(2).min_score - 0.7).abs() < 1e-12);
    // 0.6 + 0.7 + 0.9 - 2 = 0.2 < 0.4
    assert!(!f.union(0, 2, 0.9, &c));
    assert_ne!(f.find(0), f.find(2));
}

#[test]
fn compression_flattens_chains() {
    let c = cfg(0.0, 0.0);
    let mut f = ClusterForest::new(101);
    for i in 1..=100 {
        assert!(f.union(0, i, 1.0, &c));
    }
    let root = f.find(100);
    for i in 0..=100 {
        assert_eq!(f.find(i), root);
        let p = f.node(i).parent;
        assert!(p == root || f.node(p).parent == root);
    }
}

#[test]
fn rank_bounds_height() {
    let c = cfg(0.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 512;
    let mut f = ClusterForest::new(n);
    for _ in 0..2000 {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        f.union(a, b, 1.0, &c);
    }
    for (root, members) in f.groups() {
        let size = members.len() as f64;
        let rank = f.node(root).rank as f64;
        assert!(rank <= size.log2() + 1.0);
        for m in members {
            let mut depth = 0;
            let mut x = m;
            while f.node(x).parent != x {
                x = f.node(x).parent;
                depth += 1;
            }
            assert!(depth as f64 <= rank);
        }
    }
}

fn set(id: DocId, hashes: impl IntoIterator<Item = u64>) -> ShingleSet {
    ShingleSet::from_hashes(id, hashes.into_iter().collect())
}

#[test]
fn exact_duplicate_group_needs_k_minus_one_evaluations() {
    let k = 6u64;
    let corpus = ShingleCorpus::new((0..k).map(|d| set(d, 0..50)).collect());
    let ids: Vec<DocId> = (0..k).collect();
    let mut run = ClusterRun::new(ids, cfg(0.4, 0.75)).unwrap();
    let band = vec![7u64; k as usize];
    let first = run.process_band(&band, &corpus).unwrap();
    assert_eq!(first.evaluated, k - 1);
    assert_eq!(first.unions, k - 1);
    assert_eq!(first.skipped_same_root, (k * (k - 1) / 2) - (k - 1));
    let second = run.process_band(&vec![9u64; k as usize], &corpus).unwrap();
    assert_eq!(second.evaluated, 0);
    assert_eq!(run.clusters(false).len(), 1);
    assert_eq!(run.clusters(false)[0].members, (0..k).collect::<Vec<_>>());
}

#[test]
fn dissimilar_pair_is_evaluated_not_merged() {
    let corpus = ShingleCorpus::new(vec![set(1, 0..10), set(2, 5..15)]);
    let mut run = ClusterRun::new(vec![1, 2], cfg(0.4, 0.75)).unwrap();
    let stats = run.process_band(&[3, 3], &corpus).unwrap();
    assert_eq!(stats.evaluated, 1);
    assert_eq!(stats.unions, 0);
    assert!(run.clusters(false).is_empty());
    assert_eq!(run.clusters(true).len(), 2);
}

#[test]
fn unknown_document_is_reported() {
    let corpus = ShingleCorpus::new(vec![set(1, 0..10)]);
    let mut run = ClusterRun::new(vec![1, 2], cfg(0.4, 0.75)).unwrap();
    assert_eq!(run.process_band(&[3, 3], &corpus), Err(Error::UnknownDocument(2)));
    assert!(run.process_band(&[3], &corpus).is_err());
}

#[test]
fn tree_threshold_one_clusters_only_exact_duplicates() {
    let corpus = ShingleCorpus::new(vec![set(1, 0..100), set(2, 0..100), set(3, 0..99)]);
    let mut run = ClusterRun::new(vec![1, 2, 3], cfg(1.0, 1.0)).unwrap();
    run.process_band(&[1, 1, 1], &corpus).unwrap();
    // edge threshold 1.0 with strict comparison rejects even exact duplicates
    assert!(run.clusters(false).is_empty());
    let mut run = ClusterRun::new(vec![1, 2, 3], cfg(1.0, 0.75)).unwrap();
    run.process_band(&[1, 1, 1], &corpus).unwrap();
    let clusters = run.clusters(false);
    assert_eq!(clusters.len(), 1);
    assert_eq!(clusters[0].members, vec![1, 2]);
}

/// Corpus of noisy copies of a few prototypes over a small universe.
fn clustered_corpus(rng: &mut ChaCha8Rng, docs: u64) -> Vec<ShingleSet> {
    let prototypes: Vec<Vec<u64>> =
        (0..4).map(|p| (0..60).map(|i| p * 1000 + i).collect()).collect();
    (0..docs)
        .map(|id| {
            let proto = &prototypes[rng.gen_range(0..prototypes.len())];
            let keep = rng.gen_range(0.6..1.0);
            let mut hs: Vec<u64> = proto.iter().copied().filter(|_| rng.gen_bool(keep)).collect();
            hs.extend((0..rng.gen_range(0..10)).map(|_| rng.gen_range(100_000..100_050)));
            set(id, hs)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clusters_respect_tree_threshold(seed in any::<u64>(), tree in 0.2f64..0.8, gap in 0.0f64..0.2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sets = clustered_corpus(&mut rng, 40);
        let corpus = ShingleCorpus::new(sets.clone());
        let ids: Vec<DocId> = sets.iter().map(|s| s.doc_id).collect();
        let c = ClusterConfig { tree_threshold: tree, edge_threshold: (tree + gap).min(1.0) };
        let mut run = ClusterRun::new(ids.clone(), c).unwrap();
        let mut no_dsu = crate::candidates::CandidateSet::new();
        for _band in 0..6 {
            // bands collide on prototype-ish buckets plus noise
            let values: Vec<u64> = sets.iter().map(|s| s.as_slice().first().copied().unwrap_or(0) / 1000 + rng.gen_range(0..2)).collect();
            crate::candidates::band_row_pairs(&values, &ids, &mut no_dsu);
            run.process_band(&values, &corpus).unwrap();
        }
        let t = run.totals();
        prop_assert_eq!(t.evaluated + t.skipped(), no_dsu.len() as u64);
        prop_assert_eq!(run.candidate_pairs(), no_dsu.len());
        for cl in run.clusters(false) {
            let root = corpus.require(cl.root).unwrap();
            for (i, &a) in cl.members.iter().enumerate() {
                let sa = corpus.require(a).unwrap();
                prop_assert!(exact_jaccard(root, sa) >= cl.min_score - 1e-12);
                for &b in &cl.members[i + 1..] {
                    let j = exact_jaccard(sa, corpus.require(b).unwrap());
                    prop_assert!(j >= tree - 1e-12, "pair ({}, {}) j={} < {}", a, b, j, tree);
                }
            }
        }
    }
}

// Modularity against a direct double sum over the adjacency matrix.
fn modularity_oracle(n: usize, comm: &[u64], edges: &[(usize, usize, f64)]) -> f64 {
    let mut a = vec![vec![0.0f64; n]; n];
    for &(u, v, w) in edges {
        a[u][v] += w;
        a[v][u] += w;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if comm[i] == comm[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

fn comm_map(comm: &[u64]) -> BTreeMap<DocId, u64> {
    comm.iter().enumerate().map(|(i, &c)| (i as DocId, c)).collect()
}

fn doc_edges(edges: &[(usize, usize, f64)]) -> Vec<(DocId, DocId, f64)> {
    edges.iter().map(|&(u, v, w)| (u as DocId, v as DocId, w)).collect()
}

#[test]
fn modularity_fixtures() {
    let triangle = [(0, 1, 0.8), (1, 2, 0.8), (0, 2, 0.8)];
    let q = modularity(&comm_map(&[0, 0, 0]), &doc_edges(&triangle)).unwrap();
    assert!(q.abs() < 1e-12);
    let q = modularity(&comm_map(&[0, 1, 2]), &doc_edges(&triangle)).unwrap();
    assert!((q + 1.0 / 3.0).abs() < 1e-12);
    let cliques = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)];
    let q = modularity(&comm_map(&[0, 0, 0, 1, 1, 1]), &doc_edges(&cliques)).unwrap();
    assert!((q - 0.5).abs() < 1e-12);
    assert_eq!(modularity(&BTreeMap::new(), &[]), Err(Error::EmptyGraph));
    assert_eq!(modularity(&BTreeMap::new(), &[(0, 1, -1.0)]), Err(Error::NegativeWeight));
}

proptest! {
    #[test]
    fn modularity_matches_direct_sum(
        comm in proptest::collection::vec(0u64..3, 6),
        edges in proptest::collection::vec((0usize..6, 0usize..6, 0.05f64..1.0), 1..15),
    ) {
        let edges: Vec<_> = edges.into_iter().filter(|(u, v, _)| u != v).collect();
        prop_assume!(!edges.is_empty());
        let got = modularity(&comm_map(&comm), &doc_edges(&edges)).unwrap();
        let want = modularity_oracle(6, &comm, &edges);
        prop_assert!((got - want).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&got));
    }
}
