//! External merge sort: records are buffered up to a byte budget, spilled
//! as sorted runs, and merged back with a k-way heap merge.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

pub trait SortRecord: Ord + Sized {
    fn encode(&self, out: &mut impl Write) -> io::Result<()>;
    /// `Ok(None)` at a clean end of input.
    fn decode(input: &mut impl Read) -> io::Result<Option<Self>>;
    /// Approximate in-memory footprint, for the spill budget.
    fn footprint(&self) -> usize;
}

/// Reads exactly `buf.len()` bytes, or reports a clean EOF if none were read.
pub(crate) fn read_exact_or_eof(input: &mut impl Read, buf: &mut [u8]) -> io::Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        match input.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "truncated record")),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

impl SortRecord for (u64, u64) {
    fn encode(&self, out: &mut impl Write) -> io::Result<()> {
        out.write_all(&self.0.to_be_bytes())?;
        out.write_all(&self.1.to_be_bytes())
    }

    fn decode(input: &mut impl Read) -> io::Result<Option<Self>> {
        let mut buf = [0u8; 16];
        if !read_exact_or_eof(input, &mut buf)? {
            return Ok(None);
        }
        let a = u64::from_be_bytes(buf[..8].try_into().unwrap());
        let b = u64::from_be_bytes(buf[8..].try_into().unwrap());
        Ok(Some((a, b)))
    }

    fn footprint(&self) -> usize {
        16
    }
}

pub struct ExternalSorter<T: SortRecord> {
    dir: PathBuf,
    prefix: String,
    budget: usize,
    buffer: Vec<T>,
    buffered: usize,
    runs: Vec<PathBuf>,
}

impl<T: SortRecord> ExternalSorter<T> {
    /// Spill files are created in `dir` as `{prefix}-{n}.run` and removed
    /// once merged or when the sorter is dropped.
    pub fn new(dir: impl Into<PathBuf>, prefix: &str, budget: usize) -> Self {
        ExternalSorter {
            dir: dir.into(),
            prefix: prefix.to_string(),
            budget: budget.max(1),
            buffer: Vec::new(),
            buffered: 0,
            runs: Vec::new(),
        }
    }

    pub fn push(&mut self, record: T) -> io::Result<()> {
        self.buffered += record.footprint() + std::mem::size_of::<T>();
        self.buffer.push(record);
        if self.buffered >= self.budget {
            self.spill()?;
        }
        Ok(())
    }

    /// Number of runs written to disk so far.
    pub fn spilled_runs(&self) -> usize {
        self.runs.len()
    }

    fn spill(&mut self) -> io::Result<()> {
        if self.buffer.is_empty() {
            return Ok(());
        }
        self.buffer.sort_unstable();
        let path = self.dir.join(format!("{}-{}.run", self.prefix, self.runs.len()));
        let mut out = BufWriter::new(File::create(&path)?);
        for r in self.buffer.drain(..) {
            r.encode(&mut out)?;
        }
        out.flush()?;
        self.runs.push(path);
        self.buffered = 0;
        Ok(())
    }

    /// Merges everything pushed so far into one ascending stream.
    pub fn finish(mut self) -> io::Result<SortedStream<T>> {
        let mut sources = Vec::with_capacity(self.runs.len() + 1);
        for path in &self.runs {
            sources.push(Source::Run(BufReader::with_capacity(1 << 16, File::open(path)?)));
        }
        self.buffer.sort_unstable();
        sources.push(Source::Memory(std::mem::take(&mut self.buffer).into_iter()));
        let mut heap = BinaryHeap::with_capacity(sources.len());
        for (i, s) in sources.iter_mut().enumerate() {
            if let Some(r) = s.next()? {
                heap.push(Reverse((r, i)));
            }
        }
        Ok(SortedStream { sources, heap, runs: std::mem::take(&mut self.runs) })
    }
}

impl<T: SortRecord> Drop for ExternalSorter<T> {
    fn drop(&mut self) {
        remove_runs(&self.runs);
    }
}

fn remove_runs(runs: &[PathBuf]) {
    for r in runs {
        let _ = fs::remove_file(r);
    }
}

enum Source<T> {
    Run(BufReader<File>),
    Memory(std::vec::IntoIter<T>),
}

impl<T: SortRecord> Source<T> {
    fn next(&mut self) -> io::Result<Option<T>> {
        match self {
            Source::Run(r) => T::decode(r),
            Source::Memory(it) => Ok(it.next()),
        }
    }
}

pub struct SortedStream<T: SortRecord> {
    sources: Vec<Source<T>>,
    heap: BinaryHeap<Reverse<(T, usize)>>,
    runs: Vec<PathBuf>,
}

impl<T: SortRecord> Iterator for SortedStream<T> {
    type Item = io::Result<T>;

    fn next(&mut self) -> Option<Self::Item> {
        let Reverse((record, i)) = self.heap.pop()?;
        match self.sources[i].next() {
            Ok(Some(n)) => self.heap.push(Reverse((n, i))),
            Ok(None) => {}
            Err(e) => return Some(Err(e)),
        }
        Some(Ok(record))
    }
}

impl<T: SortRecord> Drop for SortedStream<T> {
    fn drop(&mut self) {
        remove_runs(&self.runs);
    }
}

/// Scratch directory for runs, created if missing.
pub fn ensure_dir(dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)
}
