//! Open-set language identification with multinomial naive Bayes over word
//! unigrams and character trigrams.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{self, TokenKind};

const FORMAT_ID: &str = "wordsmith-langid";
const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Lowercased features of a text: `w:<word>` and `c:<trigram>` over each
/// word padded with one space on both sides.
pub fn features(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for tok in text::tokenize_spans(text) {
        if tok.kind == TokenKind::Punct {
            continue;
        }
        let word = tok.text.to_lowercase();
        let padded: Vec<char> = std::iter::once(' ')
            .chain(word.chars())
            .chain(std::iter::once(' '))
            .collect();
        for gram in padded.windows(3) {
            out.push(format!("c:{}", gram.iter().collect::<String>()));
        }
        out.push(format!("w:{word}"));
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct ClassStats {
    docs: u64,
    total: u64,
    counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangIdModel {
    format: String,
    version: u32,
    classes: BTreeMap<String, ClassStats>,
    vocab: BTreeSet<String>,
    pub rejection_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum LangGuess {
    Known { lang: String, confidence: f64 },
    Unknown,
}

impl LangGuess {
    pub fn lang(&self) -> Option<&str> {
        match self {
            LangGuess::Known { lang, .. } => Some(lang),
            LangGuess::Unknown => None,
        }
    }
}

pub fn train_langid<S: AsRef<str>, L: AsRef<str>>(
    labeled: &[(S, L)],
    threshold: f64,
) -> Result<LangIdModel> {
    if labeled.is_empty() {
        return Err(Error::EmptyTrainingData);
    }
    if !threshold.is_finite() {
        return Err(Error::InvalidInput("threshold must be finite".into()));
    }
    let mut classes: BTreeMap<String, ClassStats> = BTreeMap::new();
    let mut vocab = BTreeSet::new();
    for (text, lang) in labeled {
        let lang = lang.as_ref().trim();
        if lang.is_empty() {
            return Err(Error::InvalidInput("empty language code".into()));
        }
        let stats = classes.entry(lang.to_string()).or_default();
        stats.docs += 1;
        for f in features(text.as_ref()) {
            stats.total += 1;
            *stats.counts.entry(f.clone()).or_default() += 1;
            vocab.insert(f);
        }
    }
    if classes.len() < 2 {
        return Err(Error::TooFewClasses);
    }
    Ok(LangIdModel {
        format: FORMAT_ID.into(),
        version: FORMAT_VERSION,
        classes,
        vocab,
        rejection_threshold: threshold,
    })
}

impl LangIdModel {
    pub fn classes(&self) -> Vec<String> {
        self.classes.keys().cloned().collect()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Posterior over classes (sorted by class code). Features outside the
    /// training vocabulary are ignored, so text with no known feature gets
    /// the class priors.
    pub fn posteriors(&self, text: &str) -> Vec<(String, f64)> {
        let feats: Vec<String> = features(text)
            .into_iter()
            .filter(|f| self.vocab.contains(f))
            .collect();
        let total_docs: u64 = self.classes.values().map(|c| c.docs).sum();
        let v = self.vocab.len() as f64;
        let logs: Vec<f64> = self
            .classes
            .values()
            .map(|c| {
                let denom = (c.total as f64 + v).ln();
                let prior = (c.docs as f64 / total_docs as f64).ln();
                prior
                    + feats
                        .iter()
                        .map(|f| (c.counts.get(f).copied().unwrap_or(0) as f64 + 1.0).ln() - denom)
                        .sum::<f64>()
            })
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logs.iter().map(|l| (l - max).exp()).sum();
        self.classes
            .keys()
            .zip(logs)
            .map(|(k, l)| (k.clone(), (l - max).exp() / z))
            .collect()
    }

    /// Most probable class, or `Unknown` when the text is blank, has no known
    /// feature, or the top posterior is below the rejection threshold.
    pub fn identify(&self, text: &str) -> LangGuess {
        if !features(text).iter().any(|f| self.vocab.contains(f)) {
            return LangGuess::Unknown;
        }
        let (lang, p) = self
            .posteriors(text)
            .into_iter()
            .fold(None::<(String, f64)>, |best, (l, p)| match best {
                Some((_, bp)) if bp >= p => best,
                _ => Some((l, p)),
            })
            .expect("at least two classes");
        if p < self.rejection_threshold {
            LangGuess::Unknown
        } else {
            LangGuess::Known {
                lang,
                confidence: p,
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let model: LangIdModel = serde_json::from_str(json)?;
        if model.format != FORMAT_ID || model.version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported langid model format {} v{}",
                model.format, model.version
            )));
        }
        if model.classes.len() < 2 {
            return Err(Error::TooFewClasses);
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&json)
    }
}

/// Label used in the confusion matrix for rejected inputs.
pub const UNKNOWN_LABEL: &str = "<unknown>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangIdReport {
    pub n: usize,
    pub accuracy: f64,
    /// Recall per gold label, including labels outside the model's classes.
    pub per_class_recall: BTreeMap<String, f64>,
    /// gold label -> predicted label (or `<unknown>`) -> count.
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
    pub unknown_rate: f64,
}

/// Items whose gold label is not one of the model classes count as correct
/// only when rejected as unknown.
pub fn evaluate_langid<S: AsRef<str>, L: AsRef<str>>(
    model: &LangIdModel,
    test: &[(S, L)],
) -> Result<LangIdReport> {
    if test.is_empty() {
        return Err(Error::InvalidInput("empty test set".into()));
    }
    let mut confusion: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let (mut correct, mut unknown) = (0usize, 0usize);
    let mut per_gold: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (text, gold) in test {
        let gold = gold.as_ref().trim();
        let guess = model.identify(text.as_ref());
        let predicted = guess.lang().unwrap_or(UNKNOWN_LABEL);
        if guess == LangGuess::Unknown {
            unknown += 1;
        }
        let in_repertoire = model.classes.contains_key(gold);
        let ok = if in_repertoire {
            predicted == gold
        } else {
            guess == LangGuess::Unknown
        };
        let slot = per_gold.entry(gold.to_string()).or_default();
        slot.1 += 1;
        if ok {
            correct += 1;
            slot.0 += 1;
        }
        *confusion
            .entry(gold.to_string())
            .or_default()
            .entry(predicted.to_string())
            .or_default() += 1;
    }
    let n = test.len() as f64;
    Ok(LangIdReport {
        n: test.len(),
        accuracy: correct as f64 / n,
        per_class_recall: per_gold
            .into_iter()
            .map(|(k, (ok, total))| (k, ok as f64 / total as f64))
            .collect(),
        confusion,
        unknown_rate: unknown as f64 / n,
    })
}
