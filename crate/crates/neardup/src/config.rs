//! Run configuration: defaults, a flat `key = value` file, then flag overrides.

use std::path::{Path, PathBuf};

use neardup_core::hash::CORPUS_SEED;
use neardup_core::metrics::Strategy;
use neardup_core::{ClusterConfig, LshParams};

use crate::error::{Error, Result};

pub const DEFAULT_PARTS: usize = 10;
pub const DEFAULT_BASELINE_LIMIT: usize = 5000;
pub const DEFAULT_MEMORY_BUDGET: u64 = 256 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub store: Option<PathBuf>,
    pub out: PathBuf,
    pub params: LshParams,
    pub cluster: ClusterConfig,
    pub storage: Strategy,
    pub parts: usize,
    pub master_seed: u64,
    /// Bytes available to the sorter and to capacity estimates.
    pub memory_budget: u64,
    /// 0 means one per available core.
    pub workers: usize,
    pub baseline_limit: usize,
    pub force: bool,
    pub include_singletons: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            store: None,
            out: PathBuf::from("out"),
            params: LshParams::default(),
            cluster: ClusterConfig::default(),
            storage: Strategy::Design2,
            parts: DEFAULT_PARTS,
            master_seed: CORPUS_SEED,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            workers: 0,
            baseline_limit: DEFAULT_BASELINE_LIMIT,
            force: false,
            include_singletons: false,
        }
    }
}

pub fn parse_storage(s: &str) -> Result<Strategy> {
    match s {
        "in_memory" | "memory" => Ok(Strategy::InMemory),
        "design1" => Ok(Strategy::Design1),
        "design2" => Ok(Strategy::Design2),
        other => Err(Error::Config(format!("unknown storage {other:?}; expected in_memory, design1 or design2"))),
    }
}

/// Accepts plain bytes or a `k`, `m`, `g` suffix (binary multiples).
pub fn parse_bytes(s: &str) -> Result<u64> {
    let t = s.trim().to_ascii_lowercase();
    let t = t.strip_suffix("ib").or_else(|| t.strip_suffix('b')).unwrap_or(&t);
    let (digits, shift) = match t.chars().last() {
        Some('k') => (&t[..t.len() - 1], 10),
        Some('m') => (&t[..t.len() - 1], 20),
        Some('g') => (&t[..t.len() - 1], 30),
        _ => (t, 0),
    };
    let n: u64 = digits.trim().parse().map_err(|_| Error::Config(format!("bad byte size {s:?}")))?;
    n.checked_shl(shift).filter(|v| v >> shift == n).ok_or_else(|| Error::Config(format!("byte size {s:?} overflows")))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {value:?}"))),
    }
}

impl RunConfig {
    /// Applies one setting. Keys are the long flag names, with `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "corpus" => self.corpus = Some(value.into()),
            "store" => self.store = Some(value.into()),
            "out" => self.out = value.into(),
            "shingle_width" => self.params.shingle_width = parse_num(key, value)?,
            "bands" => self.params.bands = parse_num(key, value)?,
            "rows" => self.params.rows = parse_num(key, value)?,
            "threshold" => self.params.threshold = parse_num(key, value)?,
            "tree_threshold" => self.cluster.tree_threshold = parse_num(key, value)?,
            "edge_threshold" => self.cluster.edge_threshold = parse_num(key, value)?,
            "storage" => self.storage = parse_storage(value)?,
            "parts" => self.parts = parse_num(key, value)?,
            "seed" => self.master_seed = parse_num(key, value)?,
            "memory_budget" => self.memory_budget = parse_bytes(value)?,
            "workers" => self.workers = parse_num(key, value)?,
            "baseline_limit" => self.baseline_limit = parse_num(key, value)?,
            "force" => self.force = parse_bool(key, value)?,
            "include_singletons" => self.include_singletons = parse_bool(key, value)?,
            other => return Err(Error::Config(format!("unknown setting {other:?}"))),
        }
        self.params.num_hashes = self.params.bands * self.params.rows;
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
            self.set(k, v).map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.cluster.validate()?;
        if self.parts == 0 {
            return Err(Error::Config("parts must be at least 1".into()));
        }
        Ok(())
    }

    pub fn corpus_path(&self) -> Result<&Path> {
        self.corpus.as_deref().ok_or_else(|| Error::Config("--corpus is required".into()))
    }

    pub fn store_path(&self) -> Result<&Path> {
        self.store.as_deref().ok_or_else(|| Error::Config(format!("--store is required for {:?} storage", self.storage)))
    }

    /// Sorter budget as a usize, at least 64 KiB.
    pub fn sort_budget(&self) -> usize {
        usize::try_from(self.memory_budget).unwrap_or(usize::MAX).max(64 << 10)
    }
}
