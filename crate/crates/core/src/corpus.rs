//! Parallel corpus ingestion, cleaning, splitting and training-data generators.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{self, clean_segment};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub src: String,
    pub tgt: String,
    /// Provenance label such as "lexicon" or "stories". Empty when unknown.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub source_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_id: Option<String>,
}

impl SentencePair {
    pub fn new(src: impl Into<String>, tgt: impl Into<String>) -> Self {
        SentencePair {
            src: src.into(),
            tgt: tgt.into(),
            source_id: String::new(),
            doc_id: None,
        }
    }

    pub fn with_doc(mut self, doc_id: impl Into<String>) -> Self {
        self.doc_id = Some(doc_id.into());
        self
    }

    pub fn with_source(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    fn normalized(self) -> Self {
        SentencePair {
            src: clean_segment(&self.src),
            tgt: clean_segment(&self.tgt),
            source_id: self.source_id.trim().to_string(),
            doc_id: self
                .doc_id
                .map(|d| d.trim().to_string())
                .filter(|d| !d.is_empty()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub pairs: Vec<SentencePair>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, pairs: Vec<SentencePair>) -> Self {
        Corpus {
            name: name.into(),
            pairs,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> Vec<String> {
        self.pairs.iter().map(|p| p.src.clone()).collect()
    }

    pub fn targets(&self) -> Vec<String> {
        self.pairs.iter().map(|p| p.tgt.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Tsv,
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(CorpusFormat::Tsv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::Config(format!("unknown corpus format {other:?}"))),
        }
    }
}

impl CorpusFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) => ext.parse(),
            None => Err(Error::Config(format!(
                "cannot infer corpus format of {}",
                path.display()
            ))),
        }
    }
}

#[derive(Deserialize)]
struct JsonlRecord {
    src: String,
    tgt: String,
    #[serde(default)]
    source_id: Option<String>,
    #[serde(default)]
    doc_id: Option<String>,
}

/// Parses corpus text. Blank lines are skipped; line numbers in errors are 1-based.
pub fn parse_corpus(name: &str, content: &str, format: CorpusFormat) -> Result<Corpus> {
    let mut pairs = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let pair = match format {
            CorpusFormat::Tsv => parse_tsv_line(line, line_no)?,
            CorpusFormat::Jsonl => {
                let rec: JsonlRecord =
                    serde_json::from_str(line).map_err(|e| Error::parse(line_no, e.to_string()))?;
                SentencePair {
                    src: rec.src,
                    tgt: rec.tgt,
                    source_id: rec.source_id.unwrap_or_default(),
                    doc_id: rec.doc_id,
                }
            }
        };
        pairs.push(pair.normalized());
    }
    Ok(Corpus::new(name, pairs))
}

fn parse_tsv_line(line: &str, line_no: usize) -> Result<SentencePair> {
    let fields: Vec<&str> = line.split('\t').collect();
    match fields.as_slice() {
        [src, tgt] => Ok(SentencePair::new(*src, *tgt)),
        [src, tgt, source_id, doc_id] => Ok(SentencePair {
            src: src.to_string(),
            tgt: tgt.to_string(),
            source_id: source_id.to_string(),
            doc_id: Some(doc_id.to_string()),
        }),
        _ => Err(Error::parse(
            line_no,
            format!(
                "expected 2 fields (or 4 with source_id and doc_id), found {}",
                fields.len()
            ),
        )),
    }
}

/// Reads a corpus file. The corpus name is the file stem.
pub fn ingest(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_corpus(&name, &content, format)
}

pub fn serialize_corpus(corpus: &Corpus, format: CorpusFormat) -> Result<String> {
    let mut out = String::new();
    for (i, pair) in corpus.pairs.iter().enumerate() {
        match format {
            CorpusFormat::Tsv => {
                let fields = [&pair.src, &pair.tgt, &pair.source_id];
                if fields
                    .iter()
                    .chain(pair.doc_id.as_ref().iter())
                    .any(|f| f.contains(['\t', '\n', '\r']))
                {
                    return Err(Error::InvalidInput(format!(
                        "pair {i} contains a tab or newline and cannot be written as TSV"
                    )));
                }
                out.push_str(&pair.src);
                out.push('\t');
                out.push_str(&pair.tgt);
                if !pair.source_id.is_empty() || pair.doc_id.is_some() {
                    out.push('\t');
                    out.push_str(&pair.source_id);
                    out.push('\t');
                    out.push_str(pair.doc_id.as_deref().unwrap_or(""));
                }
            }
            CorpusFormat::Jsonl => out.push_str(&serde_json::to_string(pair)?),
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>, format: CorpusFormat) -> Result<()> {
    let path = path.as_ref();
    let body = serialize_corpus(corpus, format)?;
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub removed_empty: usize,
    pub removed_duplicates: usize,
    pub removed_ratio_outliers: usize,
    /// Kept pairs whose bracketed markup was stripped.
    pub fixed_markup: usize,
    pub kept: usize,
}

impl CleaningReport {
    pub fn input_size(&self) -> usize {
        self.kept + self.removed_empty + self.removed_duplicates + self.removed_ratio_outliers
    }
}

pub const DEFAULT_MAX_LEN_RATIO: f64 = 5.0;

/// Removes innermost `[...]` groups until none remain. Returns `None` when
/// nothing was removed.
fn strip_markup(segment: &str) -> Option<String> {
    let mut current = segment.to_string();
    let mut changed = false;
    loop {
        let mut out = String::with_capacity(current.len());
        let mut removed = false;
        let mut rest = current.as_str();
        while let Some(open) = rest.find('[') {
            let after = &rest[open + 1..];
            match after.find([']', '[']) {
                Some(rel) if after.as_bytes()[rel] == b']' => {
                    out.push_str(&rest[..open]);
                    rest = &after[rel + 1..];
                    removed = true;
                }
                Some(rel) => {
                    // nested: keep this '[' and continue from the inner one
                    out.push_str(&rest[..open + 1 + rel]);
                    rest = &after[rel..];
                }
                None => break,
            }
        }
        out.push_str(rest);
        if !removed {
            break;
        }
        changed = true;
        current = out;
    }
    changed.then(|| current.split_whitespace().collect::<Vec<_>>().join(" "))
}

fn length_ratio_exceeds(src: &str, tgt: &str, max_len_ratio: f64) -> bool {
    let a = text::token_count(src);
    let b = text::token_count(tgt);
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    lo >= 1 && hi as f64 / lo as f64 > max_len_ratio
}

/// Drops empty, length-ratio outlier and duplicate pairs and strips bracketed
/// markup. Checks run in that order per pair; the first occurrence of a
/// duplicate is kept.
pub fn clean(corpus: &Corpus, max_len_ratio: f64) -> (Corpus, CleaningReport) {
    let mut report = CleaningReport::default();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut kept = Vec::with_capacity(corpus.pairs.len());

    for pair in &corpus.pairs {
        let mut pair = pair.clone().normalized();
        let mut fixed = false;
        if let Some(src) = strip_markup(&pair.src) {
            pair.src = src;
            fixed = true;
        }
        if let Some(tgt) = strip_markup(&pair.tgt) {
            pair.tgt = tgt;
            fixed = true;
        }

        if pair.src.is_empty() || pair.tgt.is_empty() {
            report.removed_empty += 1;
        } else if length_ratio_exceeds(&pair.src, &pair.tgt, max_len_ratio) {
            report.removed_ratio_outliers += 1;
        } else if !seen.insert((pair.src.clone(), pair.tgt.clone())) {
            report.removed_duplicates += 1;
        } else {
            if fixed {
                report.fixed_markup += 1;
            }
            kept.push(pair);
        }
    }
    report.kept = kept.len();
    (Corpus::new(corpus.name.clone(), kept), report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitSpec {
    RandomFraction { test_fraction: f64, seed: u64 },
    HeldOutDoc { held_doc_ids: BTreeSet<String> },
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SplitSpec::RandomFraction { test_fraction, .. } => {
                if !(*test_fraction > 0.0 && *test_fraction < 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "test_fraction must be in (0, 1), got {test_fraction}"
                    )));
                }
            }
            SplitSpec::HeldOutDoc { held_doc_ids } => {
                if held_doc_ids.is_empty() {
                    return Err(Error::InvalidInput("held_doc_ids is empty".into()));
                }
            }
        }
        Ok(())
    }
}

/// Partitions a corpus into (train, test). Both sides keep corpus order.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    spec.validate()?;
    let n = corpus.pairs.len();
    let in_test: Vec<bool> = match spec {
        SplitSpec::RandomFraction {
            test_fraction,
            seed,
        } => {
            let test_size = (n as f64 * test_fraction).round() as usize;
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
            let mut mask = vec![false; n];
            for &i in &order[..test_size.min(n)] {
                mask[i] = true;
            }
            mask
        }
        SplitSpec::HeldOutDoc { held_doc_ids } => {
            let mask: Vec<bool> = corpus
                .pairs
                .iter()
                .map(|p| p.doc_id.as_ref().is_some_and(|d| held_doc_ids.contains(d)))
                .collect();
            if !mask.iter().any(|&m| m) {
                return Err(Error::EmptySplit);
            }
            mask
        }
    };

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (pair, to_test) in corpus.pairs.iter().zip(in_test) {
        if to_test {
            test.push(pair.clone());
        } else {
            train.push(pair.clone());
        }
    }
    Ok((
        Corpus::new(format!("{}.train", corpus.name), train),
        Corpus::new(format!("{}.test", corpus.name), test),
    ))
}

pub const DEFAULT_MAX_CONTEXT: usize = 5;

/// Decomposes sentences into (preceding context, next token) examples with
/// contexts capped at `max_context` tokens.
pub fn gen_context_targets<S: AsRef<str>>(
    sentences: &[S],
    max_context: usize,
) -> Result<Vec<(Vec<String>, String)>> {
    if max_context == 0 {
        return Err(Error::InvalidInput("max_context must be at least 1".into()));
    }
    let mut out = Vec::new();
    for sentence in sentences {
        let tokens = text::tokenize(sentence.as_ref());
        for i in 1..tokens.len() {
            let start = i.saturating_sub(max_context);
            out.push((tokens[start..i].to_vec(), tokens[i].clone()));
        }
    }
    Ok(out)
}
