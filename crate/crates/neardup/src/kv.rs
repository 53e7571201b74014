//! Embedded ordered key-value table.
//!
//! Writes go through an external sort keyed by (key asc, sequence desc), so a
//! later put of the same key supersedes an earlier one. The finished table is
//! one immutable file:
//!
//! ```text
//! "NDKV" 0x01
//! record*       klen:u32le vlen:u32le key value
//! index entry*  klen:u32le key offset:u64le
//! trailer       index_offset:u64le index_len:u32le records:u64le "NDKVEND\0"
//! ```

use std::cmp::{Ordering, Reverse};
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::extsort::{read_exact_or_eof, ExternalSorter, SortRecord};

const MAGIC: &[u8; 5] = b"NDKV\x01";
const TRAILER_MAGIC: &[u8; 8] = b"NDKVEND\0";
const TRAILER_LEN: u64 = 8 + 4 + 8 + 8;
const INDEX_EVERY: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Put {
    key: Vec<u8>,
    seq: Reverse<u64>,
    value: Vec<u8>,
}

impl Ord for Put {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.key, self.seq).cmp(&(&other.key, other.seq))
    }
}

impl PartialOrd for Put {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl SortRecord for Put {
    fn encode(&self, out: &mut impl Write) -> io::Result<()> {
        out.write_all(&(self.key.len() as u32).to_le_bytes())?;
        out.write_all(&(self.value.len() as u32).to_le_bytes())?;
        out.write_all(&self.seq.0.to_le_bytes())?;
        out.write_all(&self.key)?;
        out.write_all(&self.value)
    }

    fn decode(input: &mut impl Read) -> io::Result<Option<Self>> {
        let mut head = [0u8; 16];
        if !read_exact_or_eof(input, &mut head)? {
            return Ok(None);
        }
        let klen = u32::from_le_bytes(head[..4].try_into().unwrap()) as usize;
        let vlen = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
        let seq = u64::from_le_bytes(head[8..].try_into().unwrap());
        let mut key = vec![0u8; klen];
        input.read_exact(&mut key)?;
        let mut value = vec![0u8; vlen];
        input.read_exact(&mut value)?;
        Ok(Some(Put { key, seq: Reverse(seq), value }))
    }

    fn footprint(&self) -> usize {
        self.key.len() + self.value.len() + 48
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TableStats {
    pub puts: u64,
    pub records: u64,
    pub bytes: u64,
}

pub struct TableWriter {
    path: PathBuf,
    sorter: ExternalSorter<Put>,
    puts: u64,
}

impl TableWriter {
    /// Sort runs spill into the directory holding `path`.
    pub fn create(path: impl Into<PathBuf>, memory_budget: usize) -> io::Result<Self> {
        let path = path.into();
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir)?;
        let stem = path.file_name().and_then(|s| s.to_str()).unwrap_or("table").to_string();
        Ok(TableWriter { sorter: ExternalSorter::new(dir, &format!(".{stem}"), memory_budget), path, puts: 0 })
    }

    pub fn put(&mut self, key: Vec<u8>, value: Vec<u8>) -> io::Result<()> {
        let seq = self.puts;
        self.puts += 1;
        self.sorter.push(Put { key, seq: Reverse(seq), value })
    }

    /// Writes the table to a temporary name and renames it into place.
    pub fn finish(self) -> io::Result<TableStats> {
        let tmp = self.path.with_extension("partial");
        let mut out = BufWriter::with_capacity(1 << 16, File::create(&tmp)?);
        out.write_all(MAGIC)?;
        let mut offset = MAGIC.len() as u64;
        let mut index: Vec<(Vec<u8>, u64)> = Vec::new();
        let mut records = 0u64;
        let mut last: Option<Vec<u8>> = None;
        for put in self.sorter.finish()? {
            let put = put?;
            if last.as_deref() == Some(put.key.as_slice()) {
                continue;
            }
            if records.is_multiple_of(INDEX_EVERY) {
                index.push((put.key.clone(), offset));
            }
            out.write_all(&(put.key.len() as u32).to_le_bytes())?;
            out.write_all(&(put.value.len() as u32).to_le_bytes())?;
            out.write_all(&put.key)?;
            out.write_all(&put.value)?;
            offset += 8 + put.key.len() as u64 + put.value.len() as u64;
            records += 1;
            last = Some(put.key);
        }
        let index_offset = offset;
        for (key, at) in &index {
            out.write_all(&(key.len() as u32).to_le_bytes())?;
            out.write_all(key)?;
            out.write_all(&at.to_le_bytes())?;
            offset += 4 + key.len() as u64 + 8;
        }
        out.write_all(&index_offset.to_le_bytes())?;
        out.write_all(&(index.len() as u32).to_le_bytes())?;
        out.write_all(&records.to_le_bytes())?;
        out.write_all(TRAILER_MAGIC)?;
        offset += TRAILER_LEN;
        let file = out.into_inner().map_err(|e| e.into_error())?;
        file.sync_all()?;
        drop(file);
        fs::rename(&tmp, &self.path)?;
        Ok(TableStats { puts: self.puts, records, bytes: offset })
    }
}

fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

#[derive(Debug)]
pub struct Table {
    path: PathBuf,
    index: Vec<(Vec<u8>, u64)>,
    data_end: u64,
    records: u64,
}

impl Table {
    pub fn open(path: impl Into<PathBuf>) -> io::Result<Self> {
        let path = path.into();
        let mut f = File::open(&path)?;
        let len = f.metadata()?.len();
        if len < MAGIC.len() as u64 + TRAILER_LEN {
            return Err(invalid("table file too short"));
        }
        let mut magic = [0u8; 5];
        f.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(invalid("bad table magic"));
        }
        f.seek(SeekFrom::Start(len - TRAILER_LEN))?;
        let mut trailer = [0u8; TRAILER_LEN as usize];
        f.read_exact(&mut trailer)?;
        if &trailer[20..] != TRAILER_MAGIC {
            return Err(invalid("table is incomplete (missing trailer)"));
        }
        let index_offset = u64::from_le_bytes(trailer[..8].try_into().unwrap());
        let index_len = u32::from_le_bytes(trailer[8..12].try_into().unwrap()) as usize;
        let records = u64::from_le_bytes(trailer[12..20].try_into().unwrap());
        if index_offset > len - TRAILER_LEN {
            return Err(invalid("index offset out of range"));
        }
        f.seek(SeekFrom::Start(index_offset))?;
        let mut r = BufReader::new(f.take(len - TRAILER_LEN - index_offset));
        let mut index = Vec::with_capacity(index_len);
        for _ in 0..index_len {
            let mut klen = [0u8; 4];
            r.read_exact(&mut klen)?;
            let mut key = vec![0u8; u32::from_le_bytes(klen) as usize];
            r.read_exact(&mut key)?;
            let mut at = [0u8; 8];
            r.read_exact(&mut at)?;
            index.push((key, u64::from_le_bytes(at)));
        }
        Ok(Table { path, index, data_end: index_offset, records })
    }

    pub fn records(&self) -> u64 {
        self.records
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// All records whose key starts with `prefix`, ascending by key.
    pub fn scan_prefix(&self, prefix: &[u8]) -> io::Result<Scan> {
        let start = match self.index.partition_point(|(k, _)| k.as_slice() < prefix) {
            0 => MAGIC.len() as u64,
            i => self.index[i - 1].1,
        };
        let mut f = File::open(&self.path)?;
        f.seek(SeekFrom::Start(start))?;
        Ok(Scan {
            reader: BufReader::with_capacity(1 << 16, f.take(self.data_end - start)),
            prefix: prefix.to_vec(),
            done: false,
        })
    }

    pub fn scan_all(&self) -> io::Result<Scan> {
        self.scan_prefix(&[])
    }
}

pub struct Scan {
    reader: BufReader<io::Take<File>>,
    prefix: Vec<u8>,
    done: bool,
}

impl Scan {
    fn read_record(&mut self) -> io::Result<Option<(Vec<u8>, Vec<u8>)>> {
        let mut head = [0u8; 8];
        if !read_exact_or_eof(&mut self.reader, &mut head)? {
            return Ok(None);
        }
        let klen = u32::from_le_bytes(head[..4].try_into().unwrap()) as usize;
        let vlen = u32::from_le_bytes(head[4..].try_into().unwrap()) as usize;
        let mut key = vec![0u8; klen];
        self.reader.read_exact(&mut key)?;
        let mut value = vec![0u8; vlen];
        self.reader.read_exact(&mut value)?;
        Ok(Some((key, value)))
    }
}

impl Iterator for Scan {
    type Item = io::Result<(Vec<u8>, Vec<u8>)>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            match self.read_record() {
                Ok(None) => self.done = true,
                Ok(Some((k, v))) => {
                    if k.starts_with(&self.prefix) {
                        return Some(Ok((k, v)));
                    }
                    if k.as_slice() > self.prefix.as_slice() {
                        self.done = true;
                    }
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
        None
    }
}
