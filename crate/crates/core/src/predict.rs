//! Next-word prediction with an order-capped n-gram model.
//!
//! Training uses the same (context of up to five tokens, next token)
//! decomposition produced by [`gen_context_targets`]. Every suffix of each
//! context is counted, and the empty context holds unigram counts over all
//! tokens. Prediction picks the longest suffix of the typed context that has
//! observed successors and ranks those successors by raw count.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::gen_context_targets;
use crate::error::{Error, Result};
use crate::text;

pub const MAX_CONTEXT_LIMIT: usize = 5;
const FORMAT_ID: &str = "wordsmith-ngram";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NgramOptions {
    pub max_context: usize,
    /// Fold case before counting and before every lookup.
    pub lowercase: bool,
}

impl Default for NgramOptions {
    fn default() -> Self {
        NgramOptions {
            max_context: MAX_CONTEXT_LIMIT,
            lowercase: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Successors {
    total: u64,
    counts: HashMap<String, u64>,
}

impl Successors {
    fn add(&mut self, token: &str, n: u64) {
        self.total += n;
        *self.counts.entry(token.to_string()).or_default() += n;
    }

    fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    max_context: usize,
    lowercase: bool,
    contexts: HashMap<Vec<String>, Successors>,
    vocab: BTreeSet<String>,
    total_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub token: String,
    pub score: f64,
    /// Length of the context suffix the suggestion was drawn from; 0 means unigram.
    pub context_len_used: usize,
}

/// Per-user counts added to the model's counts at ranking time.
#[derive(Debug, Clone, Default)]
pub struct CountOverlay {
    contexts: HashMap<Vec<String>, HashMap<String, u64>>,
}

impl CountOverlay {
    pub fn add(&mut self, context: &[String], token: &str, n: u64) {
        *self
            .contexts
            .entry(context.to_vec())
            .or_default()
            .entry(token.to_string())
            .or_default() += n;
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }
}

pub fn train_ngram<S: AsRef<str>>(sentences: &[S], max_context: usize) -> Result<NgramModel> {
    NgramModel::train(
        sentences,
        NgramOptions {
            max_context,
            ..NgramOptions::default()
        },
    )
}

impl NgramModel {
    pub fn train<S: AsRef<str>>(sentences: &[S], opts: NgramOptions) -> Result<Self> {
        if !(1..=MAX_CONTEXT_LIMIT).contains(&opts.max_context) {
            return Err(Error::InvalidInput(format!(
                "max_context must be in 1..={MAX_CONTEXT_LIMIT}, got {}",
                opts.max_context
            )));
        }
        if sentences.is_empty() {
            return Err(Error::EmptyTrainingData);
        }
        let fold = |t: &str| {
            if opts.lowercase {
                t.to_lowercase()
            } else {
                t.to_string()
            }
        };

        let mut model = NgramModel {
            max_context: opts.max_context,
            lowercase: opts.lowercase,
            contexts: HashMap::new(),
            vocab: BTreeSet::new(),
            total_tokens: 0,
        };
        let mut unigrams = Successors::default();
        for sentence in sentences {
            for token in text::tokenize(sentence.as_ref()) {
                let token = fold(&token);
                unigrams.add(&token, 1);
                model.vocab.insert(token);
            }
        }
        if unigrams.total == 0 {
            return Err(Error::EmptyTrainingData);
        }
        model.total_tokens = unigrams.total;
        model.contexts.insert(Vec::new(), unigrams);

        for (context, target) in gen_context_targets(sentences, opts.max_context)? {
            let context: Vec<String> = context.iter().map(|t| fold(t)).collect();
            let target = fold(&target);
            for len in 1..=context.len() {
                model
                    .contexts
                    .entry(context[context.len() - len..].to_vec())
                    .or_default()
                    .add(&target, 1);
            }
        }
        debug_assert!(model.validate().is_ok());
        Ok(model)
    }

    pub fn max_context(&self) -> usize {
        self.max_context
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    pub fn vocab(&self) -> &BTreeSet<String> {
        &self.vocab
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Number of distinct contexts, including the empty one.
    pub fn context_count(&self) -> usize {
        self.contexts.len()
    }

    /// Successor counts observed after `context`, sorted by token.
    pub fn successor_counts(&self, context: &[String]) -> BTreeMap<String, u64> {
        self.contexts
            .get(context)
            .map(|s| s.counts.iter().map(|(t, c)| (t.clone(), *c)).collect())
            .unwrap_or_default()
    }

    /// Checks the count invariants: each context total equals the sum of its
    /// successor counts, the unigram total equals `total_tokens`, and the
    /// vocabulary is exactly the set of counted tokens.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !(1..=MAX_CONTEXT_LIMIT).contains(&self.max_context) {
            return bad(format!("max_context {} out of range", self.max_context));
        }
        let mut seen = BTreeSet::new();
        for (ctx, succ) in &self.contexts {
            if ctx.len() > self.max_context {
                return bad(format!("context {ctx:?} longer than max_context"));
            }
            if succ.counts.values().sum::<u64>() != succ.total {
                return bad(format!(
                    "context {ctx:?} total does not match its successors"
                ));
            }
            seen.extend(ctx.iter().cloned());
            seen.extend(succ.counts.keys().cloned());
        }
        let unigram_total = self.contexts.get(&Vec::new()).map_or(0, |s| s.total);
        if unigram_total != self.total_tokens {
            return bad("unigram total does not match total_tokens".into());
        }
        if seen != self.vocab {
            return bad("vocabulary does not match counted tokens".into());
        }
        Ok(())
    }

    fn prepare_context(&self, context: &str) -> Vec<String> {
        let mut tokens = text::tokenize(context);
        if self.lowercase {
            tokens.iter_mut().for_each(|t| *t = t.to_lowercase());
        }
        let keep = tokens.len().min(self.max_context);
        tokens.split_off(tokens.len() - keep)
    }

    /// Top-`k` next tokens after `context`.
    pub fn next_word(&self, context: &str, k: usize) -> Result<Vec<Suggestion>> {
        self.next_word_with_overlay(context, k, None)
    }

    pub fn next_word_with_overlay(
        &self,
        context: &str,
        k: usize,
        overlay: Option<&CountOverlay>,
    ) -> Result<Vec<Suggestion>> {
        if self.vocab.is_empty() {
            return Err(Error::InvalidInput("model has an empty vocabulary".into()));
        }
        let tokens = self.prepare_context(context);
        for len in (0..=tokens.len()).rev() {
            let ctx = &tokens[tokens.len() - len..];
            let mut merged: HashMap<&str, u64> = HashMap::new();
            if let Some(succ) = self.contexts.get(ctx) {
                for (t, c) in &succ.counts {
                    *merged.entry(t.as_str()).or_default() += c;
                }
            }
            if let Some(extra) = overlay.and_then(|o| o.contexts.get(ctx)) {
                for (t, c) in extra {
                    if self.vocab.contains(t) {
                        *merged.entry(t.as_str()).or_default() += c;
                    }
                }
            }
            let total: u64 = merged.values().sum();
            if total == 0 {
                continue;
            }
            let mut ranked: Vec<(&str, u64)> = merged.into_iter().filter(|&(_, c)| c > 0).collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            return Ok(ranked
                .into_iter()
                .take(k)
                .map(|(token, c)| Suggestion {
                    token: token.to_string(),
                    score: c as f64 / total as f64,
                    context_len_used: len,
                })
                .collect());
        }
        Err(Error::InvalidInput("model has no unigram counts".into()))
    }

    /// Longest suffix of `context` (at most `max_context` tokens) with observed successors.
    fn backoff_level<'a>(&'a self, context: &[String]) -> &'a Successors {
        let keep = context.len().min(self.max_context);
        let context = &context[context.len() - keep..];
        (1..=context.len())
            .rev()
            .find_map(|len| {
                self.contexts
                    .get(&context[context.len() - len..])
                    .filter(|s| s.total > 0)
            })
            .unwrap_or_else(|| &self.contexts[&Vec::new()])
    }

    /// Log probability (natural log) of a token sequence. Each token is scored
    /// at the backoff level selected for its preceding context, with add-one
    /// smoothing over the vocabulary so unseen tokens stay finite. An empty
    /// sequence scores 0.
    pub fn score_sequence<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let tokens: Vec<String> = tokens
            .iter()
            .map(|t| {
                if self.lowercase {
                    t.as_ref().to_lowercase()
                } else {
                    t.as_ref().to_string()
                }
            })
            .collect();
        let vocab = self.vocab.len() as f64;
        (0..tokens.len())
            .map(|i| {
                let level = self.backoff_level(&tokens[..i]);
                let count = level.count(&tokens[i]) as f64;
                ((count + 1.0) / (level.total as f64 + vocab)).ln()
            })
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut contexts: Vec<ContextRecord> = self
            .contexts
            .iter()
            .map(|(ctx, succ)| ContextRecord {
                context: ctx.clone(),
                successors: succ.counts.iter().map(|(t, c)| (t.clone(), *c)).collect(),
            })
            .collect();
        contexts.sort_by(|a, b| a.context.cmp(&b.context));
        let file = ModelFile {
            format: FORMAT_ID.to_string(),
            version: FORMAT_VERSION,
            max_context: self.max_context,
            lowercase: self.lowercase,
            total_tokens: self.total_tokens,
            vocab: self.vocab.iter().cloned().collect(),
            contexts,
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(json)?;
        if file.format != FORMAT_ID || file.version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported model format {} v{}",
                file.format, file.version
            )));
        }
        let mut contexts = HashMap::new();
        for rec in file.contexts {
            let mut succ = Successors::default();
            for (t, c) in rec.successors {
                succ.add(&t, c);
            }
            contexts.insert(rec.context, succ);
        }
        let model = NgramModel {
            max_context: file.max_context,
            lowercase: file.lowercase,
            contexts,
            vocab: file.vocab.into_iter().collect(),
            total_tokens: file.total_tokens,
        };
        model.validate()?;
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

#[derive(Serialize, Deserialize)]
struct ContextRecord {
    context: Vec<String>,
    successors: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    max_context: usize,
    lowercase: bool,
    total_tokens: u64,
    vocab: Vec<String>,
    contexts: Vec<ContextRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> NgramModel {
        train_ngram(&["a b c", "a b d", "a b c"], 5).unwrap()
    }

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn tokens(sugg: &[Suggestion]) -> Vec<(&str, f64)> {
        sugg.iter().map(|s| (s.token.as_str(), s.score)).collect()
    }

    #[test]
    fn counts_single_sentence() {
        let m = train_ngram(&["a b"], 5).unwrap();
        assert_eq!(
            m.successor_counts(&[]),
            [("a".into(), 1), ("b".into(), 1)].into()
        );
        assert_eq!(m.successor_counts(&s(&["a"])), [("b".into(), 1)].into());
    }

    #[test]
    fn counts_toy_corpus() {
        let m = toy();
        assert_eq!(
            m.successor_counts(&s(&["a", "b"])),
            [("c".into(), 2), ("d".into(), 1)].into()
        );
        assert_eq!(m.total_tokens(), 9);
        m.validate().unwrap();
    }

    #[test]
    fn training_is_deterministic() {
        assert_eq!(toy(), toy());
        assert_eq!(toy().to_json().unwrap(), toy().to_json().unwrap());
    }

    #[test]
    fn training_errors() {
        assert!(matches!(
            train_ngram::<&str>(&[], 5),
            Err(Error::EmptyTrainingData)
        ));
        assert!(train_ngram(&["a"], 0).is_err());
        assert!(train_ngram(&["a"], 6).is_err());
    }

    #[test]
    fn next_word_longest_context() {
        let got = toy().next_word("a b", 2).unwrap();
        assert_eq!(tokens(&got), vec![("c", 2.0 / 3.0), ("d", 1.0 / 3.0)]);
        assert!(got.iter().all(|s| s.context_len_used == 2));
    }

    #[test]
    fn next_word_backs_off_to_unigrams() {
        let m = toy();
        let got = m.next_word("z z", 1).unwrap();
        assert_eq!(tokens(&got), vec![("a", 3.0 / 9.0)]);
        assert_eq!(got[0].context_len_used, 0);
        let got = m.next_word("", 1).unwrap();
        assert_eq!(got[0].token, "a");
        // partially known context backs off to its known suffix
        let got = m.next_word("z b", 5).unwrap();
        assert_eq!(got[0].context_len_used, 1);
    }

    #[test]
    fn overlay_changes_ranking() {
        let m = toy();
        let mut overlay = CountOverlay::default();
        overlay.add(&s(&["a", "b"]), "d", 2);
        overlay.add(&s(&["a", "b"]), "unseen", 10);
        let got = m.next_word_with_overlay("a b", 5, Some(&overlay)).unwrap();
        assert_eq!(tokens(&got), vec![("d", 0.6), ("c", 0.4)]);
    }

    #[test]
    fn score_single_token() {
        let m = toy();
        // unigram level: (n + 1) / (N + V)
        let expected = ((3.0f64 + 1.0) / (9.0 + 4.0)).ln();
        assert!((m.score_sequence(&["a"]) - expected).abs() < 1e-12);
        let unseen = (1.0 / 13.0f64).ln();
        assert!((m.score_sequence(&["q"]) - unseen).abs() < 1e-12);
    }

    #[test]
    fn score_monotone_and_non_increasing() {
        let m = toy();
        assert!(m.score_sequence(&["a", "b", "c"]) >= m.score_sequence(&["a", "b", "d"]));
        assert!(m.score_sequence(&["a", "b"]) >= m.score_sequence(&["a", "b", "c"]));
        assert_eq!(m.score_sequence::<&str>(&[]), 0.0);
    }

    #[test]
    fn lowercase_option() {
        let m = NgramModel::train(
            &["A b", "a B"],
            NgramOptions {
                max_context: 2,
                lowercase: true,
            },
        )
        .unwrap();
        assert_eq!(m.vocab().len(), 2);
        let got = m.next_word("A", 1).unwrap();
        assert_eq!(tokens(&got), vec![("b", 1.0)]);
    }

    #[test]
    fn json_round_trip() {
        let m = toy();
        let back = NgramModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_inconsistent_json() {
        let mut v: serde_json::Value = serde_json::from_str(&toy().to_json().unwrap()).unwrap();
        v["total_tokens"] = 3.into();
        assert!(NgramModel::from_json(&v.to_string()).is_err());
        v["total_tokens"] = 9.into();
        v["version"] = 99.into();
        assert!(matches!(
            NgramModel::from_json(&v.to_string()),
            Err(Error::Config(_))
        ));
    }
}
