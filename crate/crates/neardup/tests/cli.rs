use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn neardup(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neardup")).current_dir(dir).args(args).output().expect("run neardup")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "exit {:?}\nstderr: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn synth_index_candidates_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&neardup(d, &["--out", "synth", "--seed", "9", "synth", "--bases", "120", "--selected", "40", "--replacement", "--fraction-min", "0", "--fraction-max", "0.1"]));
    let corpus = fs::read_to_string(d.join("synth/corpus.jsonl")).unwrap();
    assert_eq!(corpus.lines().count(), 160);
    assert_eq!(fs::read_to_string(d.join("synth/manifest.jsonl")).unwrap().lines().count(), 40);

    let common = ["--corpus", "synth/corpus.jsonl", "--store", "store", "--storage", "design2", "--parts", "4"];
    let index = ok(&neardup(d, &[&common[..], &["--out", "idx", "index"]].concat()));
    let summary: serde_json::Value = serde_json::from_str(&index).unwrap();
    assert_eq!(summary["writes"], 4 * 50);
    assert!(d.join("store/meta").is_file() && d.join("store/matrix.kv").is_file());

    ok(&neardup(d, &[&common[..], &["--out", "cand", "candidates"]].concat()));
    let pairs = fs::read_to_string(d.join("cand/pairs.tsv")).unwrap();
    assert!(!pairs.is_empty());
    for line in pairs.lines() {
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!(f.len(), 3, "{line}");
        let (a, b): (u64, u64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        assert!(a < b);
        assert!(f[2].parse::<f64>().unwrap() >= 0.4);
    }

    ok(&neardup(d, &[&common[..], &["--out", "raw", "candidates", "--unverified"]].concat()));
    let raw = fs::read_to_string(d.join("raw/pairs.tsv")).unwrap();
    assert!(raw.lines().count() >= pairs.lines().count());
    assert!(raw.lines().all(|l| l.ends_with('\t')));

    ok(&neardup(d, &[&common[..], &["--out", "clu", "--edge-threshold", "0.5", "cluster"]].concat()));
    let clusters = fs::read_to_string(d.join("clu/clusters.tsv")).unwrap();
    assert!(!clusters.is_empty());
    for line in clusters.lines() {
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!(f.len(), 3, "{line}");
        assert!(f[1].split(',').count() >= 2);
    }
    for f in ["pairs.tsv", "report.csv", "report.json"] {
        assert!(d.join("clu").join(f).is_file(), "{f}");
    }

    ok(&neardup(d, &["--corpus", "synth/corpus.jsonl", "--out", "base", "baseline"]));
    assert!(d.join("base/pairs.tsv").is_file());
}

#[test]
fn in_memory_matches_store() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&neardup(d, &["--out", "s", "synth", "--bases", "80", "--selected", "20"]));
    ok(&neardup(d, &["--corpus", "s/corpus.jsonl", "--storage", "in_memory", "--out", "m", "cluster"]));
    ok(&neardup(d, &["--corpus", "s/corpus.jsonl", "--storage", "design1", "--store", "st", "--out", "i", "index"]));
    ok(&neardup(d, &["--corpus", "s/corpus.jsonl", "--storage", "design1", "--store", "st", "--out", "x", "cluster"]));
    for f in ["pairs.tsv", "clusters.tsv"] {
        assert_eq!(fs::read(d.join("m").join(f)).unwrap(), fs::read(d.join("x").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn bench_and_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&neardup(d, &["--out", "s", "synth", "--bases", "60", "--selected", "10"]));
    ok(&neardup(d, &["--corpus", "s/corpus.jsonl", "--storage", "in_memory", "--out", "acc", "bench", "--grid-bands", "10", "--grid-rows", "1", "--grid-rows", "2", "--grid-thresholds", "0.4"]));
    let csv = fs::read_to_string(d.join("acc/report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");

    ok(&neardup(d, &["--corpus", "s/corpus.jsonl", "--storage", "in_memory", "--out", "edges", "bench", "--sweep", "edges", "--edges", "0.6", "--edges", "0.9"]));
    let csv = fs::read_to_string(d.join("edges/report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
    assert!(csv.lines().next().unwrap().contains("pairs_without_dsu"));

    let cap = ok(&neardup(d, &["--memory-budget", "4g", "--out", "cap", "capacity"]));
    assert!(cap.contains("10737418"), "{cap}");
    assert!(cap.contains("107374182"), "{cap}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&neardup(d, &["--no-such-flag", "index"])), 1);
    assert_eq!(code(&neardup(d, &["--bands", "0", "capacity"])), 1);
    fs::write(d.join("bad.conf"), "bands = 50\nno_such_key = 3\n").unwrap();
    let out = neardup(d, &["--config", "bad.conf", "capacity"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.conf:2"));

    ok(&neardup(d, &["--out", "s", "synth", "--bases", "30", "--selected", "5"]));
    let missing = ["--corpus", "s/corpus.jsonl", "--store", "missing", "--storage", "design1", "--out", "o", "candidates"];
    assert_eq!(code(&neardup(d, &missing)), 3);
    let guarded = neardup(d, &["--corpus", "s/corpus.jsonl", "--baseline-limit", "10", "--out", "b", "baseline"]);
    assert_eq!(code(&guarded), 2);
    ok(&neardup(d, &["--corpus", "s/corpus.jsonl", "--baseline-limit", "10", "--force", "--out", "b", "baseline"]));

    fs::write(d.join("broken.jsonl"), "{\"id\": 1, \"text\": \"a b c\"}\nnot json\n").unwrap();
    let out = neardup(d, &["--corpus", "broken.jsonl", "--storage", "in_memory", "--out", "o", "candidates"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains('2'), "bad line should be reported");
}
