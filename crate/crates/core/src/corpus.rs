//! Line-delimited JSON corpora: streaming, reservoir sampling and token counts.
//!
//! Each line is an object with a required `"text"` string, an optional `"id"`
//! string and an optional integer `"label"`. Any other keys are kept as document
//! metadata. Files ending in `.gz` are decompressed on the fly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use flate2::read::MultiGzDecoder;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    #[serde(flatten)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl Document {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            id: None,
            text: text.into(),
            label: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = Some(label);
        self
    }

    fn parse(line: &str, line_no: usize) -> Result<Self> {
        let doc: Document = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        if doc.text.trim().is_empty() {
            return Err(Error::MalformedRecord {
                line: line_no,
                reason: "empty text".into(),
            });
        }
        Ok(doc)
    }
}

/// How malformed lines are handled while streaming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Stop at the first malformed line with `MalformedRecord`.
    Strict,
    /// Skip malformed lines and record their line numbers.
    #[default]
    Lenient,
}

/// Token counting rule used for budget accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenScheme {
    /// Runs of non-whitespace characters.
    #[default]
    Whitespace,
    /// Unicode (UAX #29) words; punctuation is not a token.
    UnicodeWord,
}

impl TokenScheme {
    pub fn count(self, text: &str) -> u64 {
        match self {
            TokenScheme::Whitespace => text.split_whitespace().count() as u64,
            TokenScheme::UnicodeWord => text.unicode_words().count() as u64,
        }
    }

    fn slot(self) -> usize {
        match self {
            TokenScheme::Whitespace => 0,
            TokenScheme::UnicodeWord => 1,
        }
    }
}

/// A corpus file with lazily computed document and token counts.
#[derive(Debug)]
pub struct CorpusHandle {
    path: PathBuf,
    mode: ParseMode,
    doc_count: OnceLock<u64>,
    token_counts: [OnceLock<u64>; 2],
}

impl CorpusHandle {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            mode: ParseMode::default(),
            doc_count: OnceLock::new(),
            token_counts: [OnceLock::new(), OnceLock::new()],
        }
    }

    pub fn with_mode(mut self, mode: ParseMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn mode(&self) -> ParseMode {
        self.mode
    }

    /// Opens a fresh stream over the file.
    pub fn stream(&self) -> Result<DocumentStream> {
        stream_documents(self)
    }

    pub fn doc_count(&self) -> Result<u64> {
        if let Some(&c) = self.doc_count.get() {
            return Ok(c);
        }
        let mut count = 0u64;
        for doc in self.stream()? {
            doc?;
            count += 1;
        }
        Ok(*self.doc_count.get_or_init(|| count))
    }

    pub fn token_count(&self, scheme: TokenScheme) -> Result<u64> {
        count_tokens(self, scheme)
    }
}

/// Iterator over the documents of a corpus file, in file order.
pub struct DocumentStream {
    reader: Box<dyn BufRead + Send>,
    path: PathBuf,
    mode: ParseMode,
    line_no: usize,
    buf: String,
    skipped: Vec<usize>,
    failed: bool,
}

impl DocumentStream {
    /// Line numbers (1-based) skipped as malformed so far.
    pub fn skipped(&self) -> &[usize] {
        &self.skipped
    }
}

impl Iterator for DocumentStream {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(Error::io(&self.path, e)));
                }
            }
            self.line_no += 1;
            let line = self.buf.trim();
            if line.is_empty() {
                continue;
            }
            match Document::parse(line, self.line_no) {
                Ok(doc) => return Some(Ok(doc)),
                Err(e) => match self.mode {
                    ParseMode::Strict => {
                        self.failed = true;
                        return Some(Err(e));
                    }
                    ParseMode::Lenient => self.skipped.push(self.line_no),
                },
            }
        }
    }
}

pub(crate) fn open_reader(path: &Path) -> Result<Box<dyn BufRead + Send>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let inner: Box<dyn Read + Send> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::new(inner)))
}

pub fn stream_documents(handle: &CorpusHandle) -> Result<DocumentStream> {
    Ok(DocumentStream {
        reader: open_reader(&handle.path)?,
        path: handle.path.clone(),
        mode: handle.mode,
        line_no: 0,
        buf: String::new(),
        skipped: Vec::new(),
        failed: false,
    })
}

/// Documents drawn by [`sample_documents`].
#[derive(Debug, Clone)]
pub struct Sample {
    pub documents: Vec<Document>,
    /// Number of documents seen in the corpus.
    pub corpus_size: u64,
    /// Set when the corpus had fewer documents than requested.
    pub undersized: bool,
}

/// Uniform sample of `count` documents without replacement (Algorithm R).
///
/// Returns the whole corpus, flagged `undersized`, when it holds fewer than
/// `count` documents.
pub fn sample_documents(handle: &CorpusHandle, count: usize, seed: u64) -> Result<Sample> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reservoir: Vec<Document> = Vec::with_capacity(count.min(1 << 16));
    let mut seen = 0u64;
    for doc in handle.stream()? {
        let doc = doc?;
        if (seen as usize) < count {
            reservoir.push(doc);
        } else {
            let j = rng.random_range(0..=seen);
            if (j as usize) < count {
                reservoir[j as usize] = doc;
            }
        }
        seen += 1;
    }
    if seen == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(Sample {
        documents: reservoir,
        corpus_size: seen,
        undersized: (seen as usize) < count,
    })
}

/// Total tokens over all documents under `scheme`.
pub fn count_tokens(handle: &CorpusHandle, scheme: TokenScheme) -> Result<u64> {
    let slot = &handle.token_counts[scheme.slot()];
    if let Some(&c) = slot.get() {
        return Ok(c);
    }
    let mut total = 0u64;
    for doc in handle.stream()? {
        total += scheme.count(&doc?.text);
    }
    Ok(*slot.get_or_init(|| total))
}

/// Writes documents as JSON Lines.
pub fn write_documents<'a>(path: &Path, docs: impl IntoIterator<Item = &'a Document>) -> Result<()> {
    use std::io::Write;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for doc in docs {
        serde_json::to_writer(&mut w, doc)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use tempfile::TempDir;

    fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn corpus_of(dir: &TempDir, name: &str, n: usize) -> CorpusHandle {
        let docs: Vec<Document> = (0..n)
            .map(|i| Document::new(format!("doc {i} value {}", i % 7)).with_id(format!("d{i}")))
            .collect();
        let p = dir.path().join(name);
        write_documents(&p, &docs).unwrap();
        CorpusHandle::new(p)
    }

    #[test]
    fn streams_in_order() {
        let dir = TempDir::new().unwrap();
        let p = write(
            &dir,
            "a.jsonl",
            "{\"text\":\"one\"}\n{\"text\":\"two\",\"id\":\"x\"}\n{\"text\":\"three\",\"label\":2,\"lang\":\"py\"}\n",
        );
        let docs: Vec<_> = CorpusHandle::new(p).stream().unwrap().collect::<Result<_>>().unwrap();
        assert_eq!(docs.len(), 3);
        assert_eq!(docs[0].text, "one");
        assert_eq!(docs[1].id.as_deref(), Some("x"));
        assert_eq!(docs[2].label, Some(2));
        assert_eq!(docs[2].metadata["lang"], "py");
    }

    #[test]
    fn empty_file_is_empty_stream() {
        let dir = TempDir::new().unwrap();
        let p = write(&dir, "e.jsonl", "");
        assert_eq!(CorpusHandle::new(p).stream().unwrap().count(), 0);
    }

    #[test]
    fn missing_text_is_malformed() {
        let dir = TempDir::new().unwrap();
        let p = write(
            &dir,
            "m.jsonl",
            "{\"text\":\"ok\"}\n{\"id\":\"no-text\"}\n{\"text\":\"  \"}\n{\"text\":\"fine\"}\n",
        );
        let strict = CorpusHandle::new(&p).with_mode(ParseMode::Strict);
        let out: Vec<_> = strict.stream().unwrap().collect();
        assert_eq!(out.len(), 2);
        assert!(matches!(out[1], Err(Error::MalformedRecord { line: 2, .. })));

        let mut lenient = CorpusHandle::new(&p).stream().unwrap();
        let docs: Vec<_> = lenient.by_ref().collect::<Result<_>>().unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(lenient.skipped(), &[2, 3]);
    }

    #[test]
    fn missing_file_is_io_failure() {
        let err = CorpusHandle::new("/nonexistent/x.jsonl").stream().err().unwrap();
        assert!(matches!(err, Error::IoFailure { .. }));
    }

    #[test]
    fn gzip_input() {
        let dir = TempDir::new().unwrap();
        let p = dir.path().join("c.jsonl.gz");
        let mut enc = flate2::write::GzEncoder::new(File::create(&p).unwrap(), flate2::Compression::default());
        enc.write_all(b"{\"text\":\"a b c\"}\n{\"text\":\"d\"}\n").unwrap();
        enc.finish().unwrap();
        let h = CorpusHandle::new(p);
        assert_eq!(h.doc_count().unwrap(), 2);
        assert_eq!(h.token_count(TokenScheme::Whitespace).unwrap(), 4);
    }

    #[test]
    fn token_counts() {
        let dir = TempDir::new().unwrap();
        let p = write(&dir, "t.jsonl", "{\"text\":\"a b c\"}\n");
        assert_eq!(count_tokens(&CorpusHandle::new(p), TokenScheme::Whitespace).unwrap(), 3);
        let e = write(&dir, "e.jsonl", "");
        assert_eq!(count_tokens(&CorpusHandle::new(e), TokenScheme::Whitespace).unwrap(), 0);
        // UAX #29: the comma between letters is a boundary and not a word.
        assert_eq!(TokenScheme::UnicodeWord.count("a,b c"), 3);
        assert_eq!(TokenScheme::Whitespace.count("a,b c"), 2);
    }

    #[test]
    fn token_counts_are_additive() {
        let dir = TempDir::new().unwrap();
        let a = "{\"text\":\"x y, z\"}\n{\"text\":\"héllo wörld\"}\n";
        let b = "{\"text\":\"one two three four\"}\n";
        let pa = write(&dir, "a.jsonl", a);
        let pb = write(&dir, "b.jsonl", b);
        let pab = write(&dir, "ab.jsonl", &format!("{a}{b}"));
        for scheme in [TokenScheme::Whitespace, TokenScheme::UnicodeWord] {
            let sum = count_tokens(&CorpusHandle::new(&pa), scheme).unwrap()
                + count_tokens(&CorpusHandle::new(&pb), scheme).unwrap();
            assert_eq!(count_tokens(&CorpusHandle::new(&pab), scheme).unwrap(), sum);
        }
    }

    #[test]
    fn undersized_corpus_returns_everything() {
        let dir = TempDir::new().unwrap();
        let h = corpus_of(&dir, "s.jsonl", 5);
        let s = sample_documents(&h, 1000, 1).unwrap();
        assert!(s.undersized);
        assert_eq!(s.corpus_size, 5);
        let mut ids: Vec<_> = s.documents.iter().map(|d| d.id.clone().unwrap()).collect();
        ids.sort();
        assert_eq!(ids, vec!["d0", "d1", "d2", "d3", "d4"]);
    }

    #[test]
    fn empty_corpus_sampling_fails() {
        let dir = TempDir::new().unwrap();
        let p = write(&dir, "e.jsonl", "");
        assert!(matches!(
            sample_documents(&CorpusHandle::new(p), 10, 0),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn sampling_is_deterministic_and_seed_sensitive() {
        let dir = TempDir::new().unwrap();
        let h = corpus_of(&dir, "big.jsonl", 10_000);
        let a = sample_documents(&h, 1000, 42).unwrap();
        let b = sample_documents(&h, 1000, 42).unwrap();
        let c = sample_documents(&h, 1000, 43).unwrap();
        assert!(!a.undersized);
        assert_eq!(a.documents, b.documents);
        assert_ne!(a.documents, c.documents);
    }

    #[test]
    fn sample_mean_matches_corpus_mean() {
        // Per-document statistic: i mod 7, bounded in [0, 6].
        let dir = TempDir::new().unwrap();
        let h = corpus_of(&dir, "big.jsonl", 10_000);
        let stat = |d: &Document| d.id.as_ref().unwrap()[1..].parse::<f64>().unwrap() % 7.0;
        let all: Vec<f64> = h.stream().unwrap().map(|d| stat(&d.unwrap())).collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        let var = all.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / all.len() as f64;
        let n = 1000.0;
        // Finite-population correction for sampling without replacement.
        let sigma = (var / n * (10_000.0 - n) / (10_000.0 - 1.0)).sqrt();
        for seed in 0..5 {
            let s = sample_documents(&h, 1000, seed).unwrap();
            let m = s.documents.iter().map(stat).sum::<f64>() / n;
            assert!((m - mean).abs() < 4.0 * sigma, "seed {seed}: {m} vs {mean}");
        }
    }

    #[test]
    fn repeated_streams_are_identical() {
        let dir = TempDir::new().unwrap();
        let h = corpus_of(&dir, "r.jsonl", 50);
        let a: Vec<_> = h.stream().unwrap().map(|d| d.unwrap()).collect();
        let b: Vec<_> = h.stream().unwrap().map(|d| d.unwrap()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn full_sample_is_the_corpus_multiset() {
        let dir = TempDir::new().unwrap();
        let h = corpus_of(&dir, "r.jsonl", 37);
        for n in [37, 38, 500] {
            let mut got: Vec<_> = sample_documents(&h, n, 9)
                .unwrap()
                .documents
                .into_iter()
                .map(|d| d.id.unwrap())
                .collect();
            got.sort();
            let mut want: Vec<_> = (0..37).map(|i| format!("d{i}")).collect();
            want.sort();
            assert_eq!(got, want);
        }
    }
}
