//! Seeded corpora with planted near-duplicates.
//!
//! [`build_corpus`] copies selected base documents and replaces a random
//! fraction of each copy's words with tokens from a synthetic vocabulary
//! that never occurs in the base, and records every planted pair in a
//! manifest. [`generate_bases`] produces stand-in base notes when no real
//! corpus is at hand.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::candidates::{exact_jaccard, ShingleLookup};
use crate::text::Document;
use crate::{DocId, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub base_docs: Vec<Document>,
    /// Number of base documents drawn to receive copies.
    pub selected: usize,
    /// Draw bases with replacement, so one base may be drawn repeatedly.
    pub replacement: bool,
    /// Copies generated per selected base.
    pub copies: usize,
    /// Each copy draws its perturbation fraction uniformly from this range.
    pub fraction: (f64, f64),
    pub rng_seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.fraction;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::InvalidSynthSpec("fraction range must satisfy 0 <= lo <= hi <= 1"));
        }
        if self.selected > self.base_docs.len() && !(self.replacement && !self.base_docs.is_empty()) {
            return Err(Error::InvalidSynthSpec("more bases selected than available"));
        }
        Ok(())
    }
}

/// One planted pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ManifestEntry {
    pub base_id: DocId,
    pub dup_id: DocId,
    pub fraction: f64,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub jaccard: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub documents: Vec<Document>,
    pub manifest: Vec<ManifestEntry>,
}

/// Byte spans of whitespace-separated words.
fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// A token of the synthetic replacement vocabulary. The `qx` prefix and
/// ten random letters keep it out of ordinary text.
fn synthetic_token(rng: &mut impl Rng) -> String {
    let mut t = String::from("qx");
    for _ in 0..10 {
        t.push((b'a' + rng.gen_range(0..26u8)) as char);
    }
    t
}

/// Replaces `floor(fraction * words)` distinct word positions with synthetic
/// tokens absent from the document. Everything else, whitespace included, is
/// kept byte for byte.
pub fn perturb(doc: &Document, fraction: f64, new_id: DocId, rng: &mut impl Rng) -> Document {
    let spans = word_spans(&doc.text);
    let count = libm::floor(fraction.clamp(0.0, 1.0) * spans.len() as f64) as usize;
    if count == 0 {
        return Document::new(new_id, doc.text.clone());
    }
    let present: BTreeSet<&str> = spans.iter().map(|&(s, e)| &doc.text[s..e]).collect();
    let mut chosen = index::sample(rng, spans.len(), count).into_vec();
    chosen.sort_unstable();
    let mut text = String::with_capacity(doc.text.len() + count * 4);
    let mut cursor = 0;
    for i in chosen {
        let (s, e) = spans[i];
        text.push_str(&doc.text[cursor..s]);
        let token = loop {
            let t = synthetic_token(rng);
            if !present.contains(t.as_str()) {
                break t;
            }
        };
        text.push_str(&token);
        cursor = e;
    }
    text.push_str(&doc.text[cursor..]);
    Document::new(new_id, text)
}

/// Bases followed by their planted copies. Copy ids continue after the
/// largest base id.
pub fn build_corpus(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut documents = spec.base_docs.clone();
    let mut manifest = Vec::with_capacity(spec.selected * spec.copies);
    let mut next_id = spec.base_docs.iter().map(|d| d.id + 1).max().unwrap_or(0);
    if spec.copies > 0 {
        let picks: Vec<usize> = if spec.replacement {
            (0..spec.selected).map(|_| rng.gen_range(0..spec.base_docs.len())).collect()
        } else {
            index::sample(&mut rng, spec.base_docs.len(), spec.selected).into_vec()
        };
        let (lo, hi) = spec.fraction;
        for base in picks.into_iter().map(|i| &spec.base_docs[i]) {
            for _ in 0..spec.copies {
                let fraction = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
                let copy = perturb(base, fraction, next_id, &mut rng);
                manifest.push(ManifestEntry { base_id: base.id, dup_id: copy.id, fraction, jaccard: None });
                documents.push(copy);
                next_id += 1;
            }
        }
    }
    Ok(SynthCorpus { documents, manifest })
}

/// Fills in the exact Jaccard of every planted pair.
pub fn annotate_manifest<L>(manifest: &mut [ManifestEntry], corpus: &L) -> Result<()>
where
    L: ShingleLookup + ?Sized,
{
    for entry in manifest {
        let sim = exact_jaccard(corpus.require(entry.base_id)?, corpus.require(entry.dup_id)?);
        entry.jaccard = Some(sim);
    }
    Ok(())
}

/// Shape of generated base notes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseShape {
    /// Pseudo-words in the vocabulary.
    pub vocabulary: usize,
    /// Boilerplate sentences shared across all notes.
    pub boilerplate: usize,
    /// Notes per patient, inclusive range.
    pub notes_per_patient: (usize, usize),
    /// Words per note, inclusive range.
    pub words: (usize, usize),
    /// Probability a sentence of the previous note is carried into the next.
    pub carry_forward: f64,
}

impl Default for BaseShape {
    fn default() -> Self {
        BaseShape { vocabulary: 4000, boilerplate: 60, notes_per_patient: (1, 5), words: (150, 450), carry_forward: 0.5 }
    }
}

const SYLLABLES: &[&str] = &[
    "ba", "ce", "di", "fo", "gu", "ha", "je", "ki", "lo", "mu", "na", "pe", "ri", "so", "tu", "va",
    "we", "ya", "zo", "bra", "cle", "dro", "fli", "gra", "pla", "sta", "tri", "ver", "mon", "tal",
];

fn pseudo_word(mut n: usize) -> String {
    let mut w = String::new();
    loop {
        w.push_str(SYLLABLES[n % SYLLABLES.len()]);
        n /= SYLLABLES.len();
        if n == 0 {
            break;
        }
        n -= 1;
    }
    w
}

struct Vocabulary {
    words: Vec<String>,
    cumulative: Vec<f64>,
}

impl Vocabulary {
    fn new(size: usize) -> Self {
        let words: Vec<String> = (0..size).map(|i| pseudo_word(i + SYLLABLES.len())).collect();
        let mut acc = 0.0;
        let cumulative = (0..size)
            .map(|i| {
                acc += 1.0 / (i + 1) as f64;
                acc
            })
            .collect();
        Vocabulary { words, cumulative }
    }

    /// Zipf-distributed word.
    fn sample(&self, rng: &mut impl Rng) -> &str {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let u = rng.gen_range(0.0..total);
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.words.len() - 1);
        &self.words[i]
    }

    fn sentence(&self, rng: &mut impl Rng) -> String {
        let len = rng.gen_range(6..=16);
        let mut s = String::new();
        for i in 0..len {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(self.sample(rng));
        }
        s.push('.');
        s
    }
}

/// Stand-in base notes: patients with a few notes each, where later notes
/// carry sentences forward from earlier ones and all notes draw on a shared
/// pool of boilerplate. Ids are `0..count`.
pub fn generate_bases(count: usize, shape: &BaseShape, rng_seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let vocab = Vocabulary::new(shape.vocabulary.max(1));
    let boilerplate: Vec<String> = (0..shape.boilerplate).map(|_| vocab.sentence(&mut rng)).collect();
    let mut docs = Vec::with_capacity(count);
    while docs.len() < count {
        let (lo, hi) = shape.notes_per_patient;
        let notes = rng.gen_range(lo.max(1)..=hi.max(lo.max(1)));
        let mut previous: Vec<String> = Vec::new();
        for _ in 0..notes {
            if docs.len() == count {
                break;
            }
            let target = rng.gen_range(shape.words.0..=shape.words.1.max(shape.words.0));
            let mut sentences: Vec<String> = Vec::new();
            let mut words = 0;
            let carried: Vec<String> =
                previous.iter().filter(|_| rng.gen_bool(shape.carry_forward)).cloned().collect();
            let mut carried = carried.into_iter();
            while words < target {
                let s = match rng.gen_range(0..10) {
                    0 if !boilerplate.is_empty() => boilerplate[rng.gen_range(0..boilerplate.len())].clone(),
                    1..=5 => carried.next().unwrap_or_else(|| vocab.sentence(&mut rng)),
                    _ => vocab.sentence(&mut rng),
                };
                words += s.split_whitespace().count();
                sentences.push(s);
            }
            let id = docs.len() as DocId;
            previous = sentences.clone();
            docs.push(Document::new(id, sentences.join(" ")));
        }
    }
    docs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::ShingleCorpus;
    use crate::text::prepare;
    use std::vec;

    fn spec(bases: Vec<Document>, selected: usize, copies: usize, fraction: (f64, f64)) -> SynthSpec {
        SynthSpec { base_docs: bases, selected, copies, replacement: false, fraction, rng_seed: 7 }
    }

    #[test]
    fn zero_fraction_keeps_text() {
        let doc = Document::new(1, "a  b\tc");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let copy = perturb(&doc, 0.0, 9, &mut rng);
        assert_eq!(copy.text, doc.text);
        assert_eq!(copy.id, 9);
        assert_eq!(perturb(&Document::new(2, ""), 0.5, 3, &mut rng).text, "");
    }

    #[test]
    fn full_perturbation_destroys_overlap() {
        let bases = generate_bases(1, &BaseShape::default(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let copy = perturb(&bases[0], 1.0, 5, &mut rng);
        let (a, b) = (prepare(&bases[0], 8), prepare(&copy, 8));
        assert_eq!(exact_jaccard(&a, &b), 0.0);
        assert_eq!(copy.text.split_whitespace().count(), bases[0].text.split_whitespace().count());
    }

    #[test]
    fn ten_percent_perturbation_distribution() {
        let shape = BaseShape { words: (500, 500), ..BaseShape::default() };
        let base = &generate_bases(1, &shape, 11)[0];
        let a = prepare(base, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sims: Vec<f64> =
            (0..100).map(|i| exact_jaccard(&a, &prepare(&perturb(base, 0.1, 100 + i, &mut rng), 8))).collect();
        let mean = sims.iter().sum::<f64>() / sims.len() as f64;
        let min = sims.iter().cloned().fold(1.0, f64::min);
        let max = sims.iter().cloned().fold(0.0, f64::max);
        // 8-word windows each survive with probability about 0.9^8
        assert!(mean > 0.2 && mean < 0.4, "mean {mean}");
        assert!(min > 0.1 && max < 0.5, "range [{min}, {max}]");
    }

    #[test]
    fn corpus_shapes() {
        let bases = generate_bases(521, &BaseShape::default(), 1);
        assert_eq!(bases.len(), 521);
        let small = build_corpus(&spec(bases.clone(), 10, 1, (0.1, 0.1))).unwrap();
        assert_eq!(small.documents.len(), 531);
        assert_eq!(small.manifest.len(), 10);
        let distinct: BTreeSet<DocId> = small.manifest.iter().map(|m| m.base_id).collect();
        assert_eq!(distinct.len(), 10);
        let large = build_corpus(&SynthSpec { replacement: true, ..spec(bases.clone(), 500, 1, (0.0, 0.2)) }).unwrap();
        assert_eq!(large.documents.len(), 1021);
        let drawn: BTreeSet<DocId> = large.manifest.iter().map(|m| m.base_id).collect();
        assert!(drawn.len() < 500);
        assert!(large.manifest.iter().all(|m| (0.0..=0.2).contains(&m.fraction)));
        let none = build_corpus(&spec(bases.clone(), 10, 0, (0.1, 0.1))).unwrap();
        assert_eq!(none.documents, bases);
        assert!(none.manifest.is_empty());
    }

    #[test]
    fn generation_is_deterministic() {
        let bases = generate_bases(40, &BaseShape::default(), 5);
        assert_eq!(bases, generate_bases(40, &BaseShape::default(), 5));
        let s = spec(bases, 5, 3, (0.0, 0.2));
        assert_eq!(build_corpus(&s).unwrap(), build_corpus(&s).unwrap());
    }

    #[test]
    fn invalid_specs() {
        let bases = generate_bases(3, &BaseShape::default(), 5);
        assert!(build_corpus(&spec(bases.clone(), 4, 1, (0.0, 0.1))).is_err());
        assert!(build_corpus(&SynthSpec { replacement: true, ..spec(bases.clone(), 4, 1, (0.0, 0.1)) }).is_ok());
        assert!(build_corpus(&SynthSpec { replacement: true, ..spec(Vec::new(), 1, 1, (0.0, 0.1)) }).is_err());
        assert!(build_corpus(&spec(bases, 1, 1, (0.3, 0.1))).is_err());
    }

    #[test]
    fn manifest_annotation() {
        let bases = generate_bases(20, &BaseShape::default(), 8);
        let mut synth = build_corpus(&spec(bases, 4, 2, (0.0, 0.0))).unwrap();
        let corpus = ShingleCorpus::new(synth.documents.iter().map(|d| prepare(d, 8)).collect());
        annotate_manifest(&mut synth.manifest, &corpus).unwrap();
        assert!(synth.manifest.iter().all(|m| m.jaccard == Some(1.0)));
        let mut bad = vec![ManifestEntry { base_id: 0, dup_id: 999, fraction: 0.0, jaccard: None }];
        assert_eq!(annotate_manifest(&mut bad, &corpus), Err(Error::UnknownDocument(999)));
    }
}
