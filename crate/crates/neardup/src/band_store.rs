//! Persistent band matrix.
//!
//! A store directory holds `matrix.kv`, an ordered table keyed band-first
//! so one band is a single prefix scan, and `meta`, a version byte followed
//! by [`StoreMeta`] as JSON. `meta` is written last and carries the committed
//! row count, so a store interrupted mid-write fails to open.
//!
//! - Design 1: key `band:u32be column:u32be`, value one `u64le`.
//! - Design 2: key `band:u32be part:u32be`, value the part's `u64le` list.

use std::fs;
use std::path::{Path, PathBuf};

use neardup_core::metrics::Strategy;
use neardup_core::{BandVector, DocId, LshParams};
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::kv::{Table, TableStats, TableWriter};

pub const STORE_VERSION: u8 = 1;
const META: &str = "meta";
const MATRIX: &str = "matrix.kv";

/// Column-major access to a band matrix, one band row at a time.
pub trait BandSource: Sync {
    /// Document id of every column, in column order.
    fn doc_ids(&self) -> &[DocId];
    fn num_bands(&self) -> usize;
    /// Values of band `band` (0-based), one per column.
    fn read_band(&self, band: usize) -> Result<Vec<u64>>;

    /// `(document, value)` cells of one band.
    fn read_band_cells(&self, band: usize) -> Result<Vec<(DocId, u64)>> {
        let values = self.read_band(band)?;
        Ok(self.doc_ids().iter().copied().zip(values).collect())
    }
}

/// The whole band matrix held in memory.
#[derive(Debug, Clone)]
pub struct InMemoryBands {
    doc_ids: Vec<DocId>,
    bands: Vec<Vec<u64>>,
}

impl InMemoryBands {
    pub fn new(vectors: &[BandVector], num_bands: usize) -> Result<Self> {
        if let Some(bad) = vectors.iter().find(|v| v.bands.len() != num_bands) {
            return Err(neardup_core::Error::LengthMismatch { expected: num_bands, actual: bad.bands.len() }.into());
        }
        let bands = (0..num_bands).map(|j| vectors.iter().map(|v| v.bands[j]).collect()).collect();
        Ok(InMemoryBands { doc_ids: vectors.iter().map(|v| v.doc_id).collect(), bands })
    }
}

impl BandSource for InMemoryBands {
    fn doc_ids(&self) -> &[DocId] {
        &self.doc_ids
    }

    fn num_bands(&self) -> usize {
        self.bands.len()
    }

    fn read_band(&self, band: usize) -> Result<Vec<u64>> {
        self.bands.get(band).cloned().ok_or(Error::UnknownBand(band))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreMeta {
    pub design: Strategy,
    pub documents: u64,
    pub bands: usize,
    pub rows: usize,
    pub shingle_width: usize,
    pub master_seed: u64,
    /// Requested part count; Design 2 only.
    pub parts: usize,
    /// Documents per part; Design 2 only.
    pub part_size: u64,
    /// Table rows written by the indexer.
    pub rows_written: u64,
    /// Document id of each column.
    pub doc_ids: Vec<DocId>,
}

impl StoreMeta {
    fn write(&self, dir: &Path) -> Result<()> {
        let mut bytes = vec![STORE_VERSION];
        serde_json::to_writer(&mut bytes, self).map_err(|e| Error::store(dir, e.to_string()))?;
        let tmp = dir.join("meta.partial");
        fs::write(&tmp, &bytes).context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, dir.join(META)).context(|| format!("committing {}", dir.display()))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(META);
        let bytes = fs::read(&path).map_err(|e| Error::store(dir, format!("cannot read meta: {e}")))?;
        match bytes.first() {
            Some(&STORE_VERSION) => {}
            Some(v) => return Err(Error::store(dir, format!("unsupported store version {v}"))),
            None => return Err(Error::store(dir, "empty meta file")),
        }
        serde_json::from_slice(&bytes[1..]).map_err(|e| Error::store(dir, format!("corrupt meta: {e}")))
    }
}

/// Counters from writing a store.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct WriteStats {
    /// Row puts issued to the table.
    pub writes: u64,
    /// Distinct rows in the finished table.
    pub rows: u64,
    /// Band-value payload bytes.
    pub payload_bytes: u64,
    /// Size of the table file.
    pub table_bytes: u64,
}

fn key(band: usize, second: u64) -> Vec<u8> {
    let mut k = Vec::with_capacity(8);
    k.extend_from_slice(&(band as u32).to_be_bytes());
    k.extend_from_slice(&(second as u32).to_be_bytes());
    k
}

fn split_key(k: &[u8]) -> Option<(usize, u64)> {
    if k.len() != 8 {
        return None;
    }
    let band = u32::from_be_bytes(k[..4].try_into().ok()?) as usize;
    let second = u32::from_be_bytes(k[4..].try_into().ok()?) as u64;
    Some((band, second))
}

fn encode_values(values: &[u64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn decode_values(bytes: &[u8]) -> Option<Vec<u64>> {
    if !bytes.len().is_multiple_of(8) {
        return None;
    }
    Some(bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).context(|| format!("creating {}", dir.display()))?;
    for stale in [META, MATRIX] {
        let p = dir.join(stale);
        if p.exists() {
            fs::remove_file(&p).context(|| format!("removing {}", p.display()))?;
        }
    }
    Ok(())
}

fn check_columns(params: &LshParams, v: &BandVector) -> Result<()> {
    if v.bands.len() != params.bands {
        return Err(neardup_core::Error::LengthMismatch { expected: params.bands, actual: v.bands.len() }.into());
    }
    Ok(())
}

/// Writes one row per `(band, document)` cell.
pub struct Design1Writer {
    dir: PathBuf,
    params: LshParams,
    master_seed: u64,
    table: TableWriter,
    doc_ids: Vec<DocId>,
    payload: u64,
}

impl Design1Writer {
    pub fn create(dir: impl Into<PathBuf>, params: LshParams, master_seed: u64, memory_budget: usize) -> Result<Self> {
        let dir = dir.into();
        params.validate()?;
        prepare_dir(&dir)?;
        let table = TableWriter::create(dir.join(MATRIX), memory_budget).context(|| format!("creating {}", dir.display()))?;
        Ok(Design1Writer { dir, params, master_seed, table, doc_ids: Vec::new(), payload: 0 })
    }

    pub fn push(&mut self, v: &BandVector) -> Result<()> {
        check_columns(&self.params, v)?;
        let column = self.doc_ids.len() as u64;
        if column > u32::MAX as u64 {
            return Err(Error::Data("more than 2^32 documents".into()));
        }
        for (j, &value) in v.bands.iter().enumerate() {
            self.table.put(key(j, column), value.to_le_bytes().to_vec()).context(|| "writing band store".into())?;
            self.payload += 8;
        }
        self.doc_ids.push(v.doc_id);
        Ok(())
    }

    pub fn finish(self) -> Result<WriteStats> {
        let t = self.table.finish().context(|| format!("finishing {}", self.dir.display()))?;
        let meta = StoreMeta {
            design: Strategy::Design1,
            documents: self.doc_ids.len() as u64,
            bands: self.params.bands,
            rows: self.params.rows,
            shingle_width: self.params.shingle_width,
            master_seed: self.master_seed,
            parts: 0,
            part_size: 0,
            rows_written: t.records,
            doc_ids: self.doc_ids,
        };
        meta.write(&self.dir)?;
        Ok(stats(t, self.payload))
    }
}

fn stats(t: TableStats, payload: u64) -> WriteStats {
    WriteStats { writes: t.puts, rows: t.records, payload_bytes: payload, table_bytes: t.bytes }
}

/// Documents per part and the resulting part count for `documents` split `parts` ways.
pub fn part_layout(documents: u64, parts: usize) -> (u64, u64) {
    let p = parts.max(1) as u64;
    if documents == 0 {
        return (1, 0);
    }
    let d = documents.div_ceil(p);
    (d, documents.div_ceil(d))
}

/// Writes one row per `(band, document part)` holding that part's values.
/// The corpus size is fixed up front so parts are equal-sized.
pub struct Design2Writer {
    dir: PathBuf,
    params: LshParams,
    master_seed: u64,
    table: TableWriter,
    parts: usize,
    part_size: u64,
    expected: u64,
    next_part: u64,
    pending: Vec<Vec<u64>>,
    doc_ids: Vec<DocId>,
    payload: u64,
}

impl Design2Writer {
    pub fn create(
        dir: impl Into<PathBuf>,
        params: LshParams,
        master_seed: u64,
        documents: u64,
        parts: usize,
        memory_budget: usize,
    ) -> Result<Self> {
        let dir = dir.into();
        params.validate()?;
        if parts == 0 {
            return Err(Error::Config("parts must be at least 1".into()));
        }
        prepare_dir(&dir)?;
        let (part_size, _) = part_layout(documents, parts);
        let table = TableWriter::create(dir.join(MATRIX), memory_budget).context(|| format!("creating {}", dir.display()))?;
        Ok(Design2Writer {
            dir,
            master_seed,
            table,
            parts,
            part_size,
            expected: documents,
            next_part: 0,
            pending: vec![Vec::with_capacity(part_size as usize); params.bands],
            params,
            doc_ids: Vec::new(),
            payload: 0,
        })
    }

    pub fn push(&mut self, v: &BandVector) -> Result<()> {
        check_columns(&self.params, v)?;
        if self.doc_ids.len() as u64 >= self.expected {
            return Err(Error::Data(format!("more documents than the declared {}", self.expected)));
        }
        for (list, &value) in self.pending.iter_mut().zip(&v.bands) {
            list.push(value);
        }
        self.doc_ids.push(v.doc_id);
        if self.pending[0].len() as u64 == self.part_size {
            self.flush()?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        if self.pending.first().is_none_or(|l| l.is_empty()) {
            return Ok(());
        }
        let part = self.next_part;
        for (j, list) in self.pending.iter_mut().enumerate() {
            self.payload += 8 * list.len() as u64;
            self.table.put(key(j, part), encode_values(list)).context(|| "writing band store".into())?;
            list.clear();
        }
        self.next_part += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<WriteStats> {
        self.flush()?;
        if self.doc_ids.len() as u64 != self.expected {
            return Err(Error::Data(format!("declared {} documents, received {}", self.expected, self.doc_ids.len())));
        }
        let t = self.table.finish().context(|| format!("finishing {}", self.dir.display()))?;
        let meta = StoreMeta {
            design: Strategy::Design2,
            documents: self.expected,
            bands: self.params.bands,
            rows: self.params.rows,
            shingle_width: self.params.shingle_width,
            master_seed: self.master_seed,
            parts: self.parts,
            part_size: self.part_size,
            rows_written: t.records,
            doc_ids: self.doc_ids,
        };
        meta.write(&self.dir)?;
        Ok(stats(t, self.payload))
    }
}

/// One Design 1 row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRow {
    pub band: usize,
    pub column: u64,
    pub value: u64,
}

/// One Design 2 row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartRow {
    pub band: usize,
    pub part: u64,
    pub values: Vec<u64>,
}

/// A committed Design 1 or Design 2 store opened for reading.
#[derive(Debug)]
pub struct BandStore {
    dir: PathBuf,
    meta: StoreMeta,
    table: Table,
}

impl BandStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let meta = StoreMeta::read(&dir)?;
        if meta.design == Strategy::InMemory {
            return Err(Error::store(&dir, "in-memory stores are not persisted"));
        }
        if meta.doc_ids.len() as u64 != meta.documents {
            return Err(Error::store(&dir, "document index does not match document count"));
        }
        let table = Table::open(dir.join(MATRIX)).map_err(|e| Error::store(&dir, format!("cannot open table: {e}")))?;
        if table.records() != meta.rows_written {
            return Err(Error::store(
                &dir,
                format!("incomplete write: {} rows committed, {} present", meta.rows_written, table.records()),
            ));
        }
        Ok(BandStore { dir, meta, table })
    }

    pub fn meta(&self) -> &StoreMeta {
        &self.meta
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// LSH parameters the store was built with.
    pub fn params(&self, threshold: f64) -> Result<LshParams> {
        Ok(LshParams::new(self.meta.bands, self.meta.rows, self.meta.shingle_width, threshold)?)
    }

    fn corrupt(&self, what: &str) -> Error {
        Error::store(&self.dir, format!("corrupt table: {what}"))
    }

    fn scan(&self, prefix: &[u8]) -> Result<impl Iterator<Item = Result<(usize, u64, Vec<u8>)>> + '_> {
        let scan = self.table.scan_prefix(prefix).map_err(|e| Error::store(&self.dir, e.to_string()))?;
        Ok(scan.map(move |r| {
            let (k, v) = r.map_err(|e| Error::store(&self.dir, e.to_string()))?;
            let (band, second) = split_key(&k).ok_or_else(|| self.corrupt("bad key"))?;
            Ok((band, second, v))
        }))
    }

    /// Every Design 1 row in key order.
    pub fn cell_rows(&self) -> Result<Vec<CellRow>> {
        self.expect_design(Strategy::Design1)?;
        self.scan(&[])?
            .map(|r| {
                let (band, column, v) = r?;
                let value = decode_values(&v).filter(|x| x.len() == 1).ok_or_else(|| self.corrupt("bad cell"))?[0];
                Ok(CellRow { band, column, value })
            })
            .collect()
    }

    /// Every Design 2 row in key order.
    pub fn part_rows(&self) -> Result<Vec<PartRow>> {
        self.expect_design(Strategy::Design2)?;
        self.scan(&[])?
            .map(|r| {
                let (band, part, v) = r?;
                let values = decode_values(&v).ok_or_else(|| self.corrupt("bad value list"))?;
                Ok(PartRow { band, part, values })
            })
            .collect()
    }

    fn expect_design(&self, design: Strategy) -> Result<()> {
        if self.meta.design != design {
            return Err(Error::store(&self.dir, format!("store is {:?}, not {:?}", self.meta.design, design)));
        }
        Ok(())
    }

    fn read_design1(&self, band: usize) -> Result<Vec<u64>> {
        let n = self.meta.documents as usize;
        let mut out = Vec::with_capacity(n);
        for r in self.scan(&(band as u32).to_be_bytes())? {
            let (_, column, v) = r?;
            if column != out.len() as u64 {
                return Err(self.corrupt(&format!("band {band} missing column {}", out.len())));
            }
            let bytes: [u8; 8] = v.as_slice().try_into().map_err(|_| self.corrupt("bad cell"))?;
            out.push(u64::from_le_bytes(bytes));
        }
        if out.len() != n {
            return Err(self.corrupt(&format!("band {band} has {} of {n} columns", out.len())));
        }
        Ok(out)
    }

    fn read_design2(&self, band: usize) -> Result<Vec<u64>> {
        let n = self.meta.documents as usize;
        let (_, parts) = part_layout(self.meta.documents, self.meta.parts);
        let mut out = Vec::with_capacity(n);
        let mut next = 0u64;
        for r in self.scan(&(band as u32).to_be_bytes())? {
            let (_, part, v) = r?;
            if part != next {
                return Err(Error::MissingPart { band, part: next as usize });
            }
            let values = decode_values(&v).ok_or_else(|| self.corrupt("bad value list"))?;
            out.extend_from_slice(&values);
            next += 1;
        }
        if next != parts {
            return Err(Error::MissingPart { band, part: next as usize });
        }
        if out.len() != n {
            return Err(self.corrupt(&format!("band {band} has {} of {n} columns", out.len())));
        }
        Ok(out)
    }
}

impl BandSource for BandStore {
    fn doc_ids(&self) -> &[DocId] {
        &self.meta.doc_ids
    }

    fn num_bands(&self) -> usize {
        self.meta.bands
    }

    fn read_band(&self, band: usize) -> Result<Vec<u64>> {
        if band >= self.meta.bands {
            return Err(Error::UnknownBand(band));
        }
        match self.meta.design {
            Strategy::Design1 => self.read_design1(band),
            Strategy::Design2 => self.read_design2(band),
            Strategy::InMemory => unreachable!("rejected at open"),
        }
    }
}

/// Writes `vectors` as a Design 1 or Design 2 store.
pub fn write_store(
    dir: &Path,
    design: Strategy,
    params: LshParams,
    master_seed: u64,
    parts: usize,
    memory_budget: usize,
    vectors: &[BandVector],
) -> Result<WriteStats> {
    match design {
        Strategy::Design1 => {
            let mut w = Design1Writer::create(dir, params, master_seed, memory_budget)?;
            for v in vectors {
                w.push(v)?;
            }
            w.finish()
        }
        Strategy::Design2 => {
            let mut w = Design2Writer::create(dir, params, master_seed, vectors.len() as u64, parts, memory_budget)?;
            for v in vectors {
                w.push(v)?;
            }
            w.finish()
        }
        Strategy::InMemory => Err(Error::Config("in_memory storage has no on-disk store".into())),
    }
}
