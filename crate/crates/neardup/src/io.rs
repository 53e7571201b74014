//! Corpus, manifest, pair, cluster and report files.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use neardup_core::cluster::Cluster;
use neardup_core::synth::ManifestEntry;
use neardup_core::{CandidatePair, Document};
use serde::Serialize;

use crate::error::{Error, IoContext, Result};

/// A line of input that was skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadLine {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct CorpusFile {
    pub documents: Vec<Document>,
    pub bad_lines: Vec<BadLine>,
}

/// Reads `{"id": .., "text": ..}` JSON lines. Malformed lines and repeated
/// ids are skipped and reported; blank lines are ignored.
pub fn read_corpus(path: &Path) -> Result<CorpusFile> {
    let file = File::open(path).context(|| format!("opening corpus {}", path.display()))?;
    let mut out = CorpusFile::default();
    let mut seen = BTreeSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.context(|| format!("reading {}:{}", path.display(), i + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Document>(&line) {
            Ok(doc) if !seen.insert(doc.id) => {
                out.bad_lines.push(BadLine { line: i + 1, message: format!("duplicate id {}", doc.id) })
            }
            Ok(doc) => out.documents.push(doc),
            Err(e) => out.bad_lines.push(BadLine { line: i + 1, message: e.to_string() }),
        }
    }
    Ok(out)
}

/// Reads a corpus and fails on the first bad line.
pub fn read_corpus_strict(path: &Path) -> Result<Vec<Document>> {
    let c = read_corpus(path)?;
    if let Some(bad) = c.bad_lines.into_iter().next() {
        return Err(Error::Parse { path: path.into(), line: bad.line, message: bad.message });
    }
    Ok(c.documents)
}

/// Writes through a temporary file renamed into place on success.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).context(|| format!("creating {}", dir.display()))?;
    }
    let tmp = path.with_extension("partial");
    let write = || -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()
    };
    write().context(|| format!("writing {}", path.display()))?;
    fs::rename(&tmp, path).context(|| format!("renaming into {}", path.display()))
}

fn write_json_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    write_atomic(path, |w| {
        for item in items {
            serde_json::to_writer(&mut *w, item)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn write_corpus(path: &Path, docs: &[Document]) -> Result<()> {
    write_json_lines(path, docs)
}

pub fn write_manifest(path: &Path, manifest: &[ManifestEntry]) -> Result<()> {
    write_json_lines(path, manifest)
}

/// `lo \t hi \t score`, with an empty score for unverified candidates.
pub fn write_pairs<'a, I>(path: &Path, pairs: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a CandidatePair, Option<f64>)>,
{
    write_atomic(path, |w| {
        for (p, score) in pairs {
            match score {
                Some(s) => writeln!(w, "{}\t{}\t{}", p.lo, p.hi, s)?,
                None => writeln!(w, "{}\t{}\t", p.lo, p.hi)?,
            }
        }
        Ok(())
    })
}

/// `root \t member,member,.. \t min_score`.
pub fn write_clusters(path: &Path, clusters: &[Cluster]) -> Result<()> {
    write_atomic(path, |w| {
        for c in clusters {
            let members: Vec<String> = c.members.iter().map(|m| m.to_string()).collect();
            writeln!(w, "{}\t{}\t{}", c.root, members.join(","), c.min_score)?;
        }
        Ok(())
    })
}

/// Flat CSV for report rows. Fields are numeric or plain identifiers, so no quoting.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

pub fn write_csv<R: CsvRow>(path: &Path, rows: &[R]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{}", R::header().join(","))?;
        for r in rows {
            writeln!(w, "{}", r.fields().join(","))?;
        }
        Ok(())
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}
