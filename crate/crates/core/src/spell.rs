//! Synthetic typo generation and noisy-channel spell correction.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{levenshtein_chars, Lexicon};
use crate::metrics::chrf_sentence;
use crate::predict::NgramModel;
use crate::text::{self, normalize, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Substitute,
    Delete,
    Insert,
}

/// One applied edit. For `Insert` the character goes before `position`; for
/// `Delete` `ch` is the removed character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub kind: EditKind,
    pub position: usize,
    #[serde(rename = "char")]
    pub ch: char,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypoModel {
    pub ops: Vec<EditKind>,
    /// Characters used for substitutions and insertions.
    pub alphabet: Vec<char>,
    /// Edits applied per sentence by [`gen_typo_pairs`], rounded.
    pub rate: f64,
}

impl TypoModel {
    pub fn new(alphabet: impl IntoIterator<Item = char>) -> Result<Self> {
        let alphabet: BTreeSet<char> = alphabet.into_iter().collect();
        let model = TypoModel {
            ops: vec![EditKind::Substitute, EditKind::Delete, EditKind::Insert],
            alphabet: alphabet.into_iter().collect(),
            rate: 1.0,
        };
        model.validate()?;
        Ok(model)
    }

    /// Alphabet made of every alphabetic character in the lexicon headwords.
    pub fn from_lexicon(lex: &Lexicon) -> Result<Self> {
        Self::new(
            lex.entries()
                .iter()
                .flat_map(|e| e.headword.chars())
                .filter(|c| c.is_alphabetic()),
        )
    }

    pub fn from_sentences<S: AsRef<str>>(sentences: &[S]) -> Result<Self> {
        Self::new(
            sentences
                .iter()
                .flat_map(|s| normalize(s.as_ref()).chars().collect::<Vec<_>>())
                .filter(|c| c.is_alphabetic()),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphabet.is_empty() {
            return Err(Error::InvalidInput("typo alphabet is empty".into()));
        }
        if self.ops.is_empty() {
            return Err(Error::InvalidInput("no edit kinds enabled".into()));
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "invalid edit rate {}",
                self.rate
            )));
        }
        Ok(())
    }
}

const MAX_ATTEMPTS: usize = 16;

fn pick_edit(rng: &mut ChaCha8Rng, model: &TypoModel, word: &[char], pos: usize) -> Edit {
    let mut kind = model.ops[rng.random_range(0..model.ops.len())];
    if pos >= word.len() && kind != EditKind::Insert {
        kind = EditKind::Insert;
    }
    if kind == EditKind::Substitute {
        let current = word[pos];
        let choices: Vec<char> = model
            .alphabet
            .iter()
            .copied()
            .filter(|&c| c != current)
            .collect();
        if choices.is_empty() {
            kind = EditKind::Insert;
        } else {
            return Edit {
                kind,
                position: pos,
                ch: choices[rng.random_range(0..choices.len())],
            };
        }
    }
    match kind {
        EditKind::Delete => Edit {
            kind,
            position: pos,
            ch: word[pos],
        },
        _ => Edit {
            kind: EditKind::Insert,
            position: pos,
            ch: model.alphabet[rng.random_range(0..model.alphabet.len())],
        },
    }
}

/// Applies edits at distinct positions of the original word.
fn apply_distinct(word: &[char], edits: &[Edit]) -> Vec<char> {
    let mut out = Vec::with_capacity(word.len() + edits.len());
    let mut edits = edits.iter().peekable();
    for (i, &c) in word.iter().enumerate() {
        match edits.next_if(|e| e.position == i) {
            Some(e) => match e.kind {
                EditKind::Insert => {
                    out.push(e.ch);
                    out.push(c);
                }
                EditKind::Substitute => out.push(e.ch),
                EditKind::Delete => {}
            },
            None => out.push(c),
        }
    }
    out
}

fn apply_one(word: &mut Vec<char>, edit: &Edit) {
    match edit.kind {
        EditKind::Insert => word.insert(edit.position, edit.ch),
        EditKind::Substitute => word[edit.position] = edit.ch,
        EditKind::Delete => {
            word.remove(edit.position);
        }
    }
}

/// Applies `n_edits` random edits to `word`, deterministically per `seed`.
///
/// When `n_edits` fits in the word, edits land on distinct positions and the
/// draw is retried until the result is exactly `n_edits` edits away (adjacent
/// insert/delete pairs can otherwise collapse into a single substitution).
/// If retries run out and deletion is enabled, the drawn positions are
/// deleted instead. Longer runs apply edits one after another.
pub fn corrupt(
    word: &str,
    n_edits: usize,
    model: &TypoModel,
    seed: u64,
) -> Result<(String, Vec<Edit>)> {
    model.validate()?;
    let chars: Vec<char> = normalize(word).chars().collect();
    if n_edits == 0 {
        return Ok((chars.into_iter().collect(), Vec::new()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if n_edits <= chars.len() {
        let mut last = None;
        for _ in 0..MAX_ATTEMPTS {
            let mut positions = index::sample(&mut rng, chars.len(), n_edits).into_vec();
            positions.sort_unstable();
            let edits: Vec<Edit> = positions
                .iter()
                .map(|&p| pick_edit(&mut rng, model, &chars, p))
                .collect();
            let out = apply_distinct(&chars, &edits);
            if levenshtein_chars(&chars, &out) == n_edits {
                return Ok((out.into_iter().collect(), edits));
            }
            last = Some((out, edits));
        }
        let (out, edits) = last.expect("at least one attempt");
        if model.ops.contains(&EditKind::Delete) {
            let edits: Vec<Edit> = edits
                .iter()
                .map(|e| Edit {
                    kind: EditKind::Delete,
                    position: e.position,
                    ch: chars[e.position],
                })
                .collect();
            let out = apply_distinct(&chars, &edits);
            return Ok((out.into_iter().collect(), edits));
        }
        return Ok((out.into_iter().collect(), edits));
    }

    let mut current = chars;
    let mut edits = Vec::with_capacity(n_edits);
    for _ in 0..n_edits {
        let pos = rng.random_range(0..=current.len());
        let edit = pick_edit(&mut rng, model, &current, pos);
        apply_one(&mut current, &edit);
        edits.push(edit);
    }
    Ok((current.into_iter().collect(), edits))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypoPair {
    pub incorrect: String,
    pub correct: String,
    pub edits: Vec<Edit>,
    /// Index of the corrupted token, absent when the sentence had no word to corrupt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_index: Option<usize>,
    #[serde(default)]
    pub unchanged: bool,
}

/// Builds (incorrect, correct) sentence pairs by corrupting one randomly
/// chosen word per sentence.
pub fn gen_typo_pairs<S: AsRef<str>>(
    sentences: &[S],
    model: &TypoModel,
    seed: u64,
) -> Result<Vec<TypoPair>> {
    if sentences.is_empty() {
        return Err(Error::InvalidInput("no sentences to corrupt".into()));
    }
    model.validate()?;
    let n_edits = model.rate.round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(sentences.len());
    for sentence in sentences {
        let correct = text::clean_segment(sentence.as_ref());
        let tokens = text::tokenize_spans(&correct);
        let words: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.kind == TokenKind::Word)
            .map(|(i, _)| i)
            .collect();
        if words.is_empty() {
            pairs.push(TypoPair {
                incorrect: correct.clone(),
                correct,
                edits: Vec::new(),
                token_index: None,
                unchanged: true,
            });
            continue;
        }
        let pick = words[rng.random_range(0..words.len())];
        let word_seed: u64 = rng.random();
        let token = &tokens[pick];
        let (corrupted, edits) = corrupt(&token.text, n_edits, model, word_seed)?;
        let incorrect = text::replace_spans(&correct, &[(token.start, token.end, &corrupted)]);
        pairs.push(TypoPair {
            incorrect,
            correct,
            edits,
            token_index: Some(pick),
            unchanged: false,
        });
    }
    Ok(pairs)
}

pub fn check_word(word: &str, lex: &Lexicon) -> bool {
    let word = normalize(word);
    !word.is_empty() && lex.contains(&word)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpellConfig {
    pub max_dist: usize,
    pub k: usize,
    /// Log-space cost of one edit.
    pub edit_penalty: f64,
}

impl Default for SpellConfig {
    fn default() -> Self {
        SpellConfig {
            max_dist: 2,
            k: 5,
            edit_penalty: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionSource {
    Lexicon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub candidate: String,
    pub score: f64,
    pub dist: usize,
    pub source: CorrectionSource,
}

/// Ranks lexicon headwords near `word`. The score adds an edit cost to a
/// language-model term: the n-gram log probability of `context + candidate`
/// when a model is given, otherwise the add-one unigram log probability from
/// lexicon frequencies. An exact headword match is always ranked first.
pub fn suggest(
    word: &str,
    lex: &Lexicon,
    lm: Option<&NgramModel>,
    context: Option<&[String]>,
    config: &SpellConfig,
) -> Vec<Correction> {
    let word = normalize(word.trim());
    if word.is_empty() {
        return Vec::new();
    }
    let lex_denominator = (lex.total_freq() + lex.len() as u64) as f64;
    let mut ranked: Vec<Correction> = lex
        .lookup_approx(&word, config.max_dist, usize::MAX)
        .into_iter()
        .map(|hit| {
            let lm_score = match lm {
                Some(lm) => {
                    let mut seq: Vec<String> = context.map(<[String]>::to_vec).unwrap_or_default();
                    seq.push(hit.entry.headword.clone());
                    lm.score_sequence(&seq)
                }
                None => ((hit.entry.freq as f64 + 1.0) / lex_denominator).ln(),
            };
            Correction {
                score: lm_score - hit.dist as f64 * config.edit_penalty,
                candidate: hit.entry.headword,
                dist: hit.dist,
                source: CorrectionSource::Lexicon,
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        (b.dist == 0)
            .cmp(&(a.dist == 0))
            .then_with(|| b.score.total_cmp(&a.score))
            .then_with(|| a.dist.cmp(&b.dist))
            .then_with(|| a.candidate.cmp(&b.candidate))
    });
    ranked.truncate(config.k);
    ranked
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedSpan {
    /// Character offsets into the NFC form of the checked sentence.
    pub start: usize,
    pub end: usize,
    pub token_index: usize,
    pub token: String,
    pub corrections: Vec<Correction>,
}

/// Flags every word token missing from the lexicon, with suggestions ranked
/// in the context of the tokens before it. Numbers and punctuation are skipped.
pub fn check_sentence(
    sentence: &str,
    lex: &Lexicon,
    lm: Option<&NgramModel>,
    config: &SpellConfig,
) -> Vec<FlaggedSpan> {
    let tokens = text::tokenize_spans(sentence);
    let mut flagged = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if token.kind != TokenKind::Word || lex.contains(&token.text) {
            continue;
        }
        let context: Vec<String> = tokens[..i].iter().map(|t| t.text.clone()).collect();
        flagged.push(FlaggedSpan {
            start: token.start,
            end: token.end,
            token_index: i,
            token: token.text.clone(),
            corrections: suggest(&token.text, lex, lm, Some(&context), config),
        });
    }
    flagged
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectorReport {
    pub pairs: usize,
    /// Fraction of sentences reproduced exactly by taking every rank-1 correction.
    pub accuracy_top1: f64,
    /// Same, choosing the right correction whenever it is among the top 3.
    pub accuracy_top3: f64,
    /// Fraction of corrupted word positions fixed by the rank-1 correction.
    pub word_accuracy_top1: f64,
    pub chrf_mean: f64,
}

pub fn evaluate_corrector<S: AsRef<str>>(
    pairs: &[(S, S)],
    lex: &Lexicon,
    lm: Option<&NgramModel>,
    config: &SpellConfig,
) -> Result<CorrectorReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no pairs to evaluate".into()));
    }
    let (mut top1, mut top3, mut chrf_sum) = (0usize, 0usize, 0.0);
    let (mut words_total, mut words_fixed) = (0usize, 0usize);

    for (incorrect, correct) in pairs {
        let incorrect = text::clean_segment(incorrect.as_ref());
        let correct = text::clean_segment(correct.as_ref());
        let flags = check_sentence(&incorrect, lex, lm, config);
        let in_tokens = text::tokenize_spans(&incorrect);
        let gold_tokens = text::tokenize_spans(&correct);
        let aligned = in_tokens.len() == gold_tokens.len();

        let rank1 = |f: &FlaggedSpan| -> String {
            f.corrections
                .first()
                .map_or_else(|| f.token.clone(), |c| c.candidate.clone())
        };
        let best: Vec<String> = flags.iter().map(rank1).collect();
        let oracle: Vec<String> = flags
            .iter()
            .zip(&best)
            .map(|(f, b)| {
                let gold = aligned.then(|| &gold_tokens[f.token_index].text);
                match gold {
                    Some(g) if f.corrections.iter().take(3).any(|c| &c.candidate == g) => g.clone(),
                    _ => b.clone(),
                }
            })
            .collect();
        let rebuild = |choice: &[String]| {
            let spans: Vec<(usize, usize, &str)> = flags
                .iter()
                .zip(choice)
                .map(|(f, c)| (f.start, f.end, c.as_str()))
                .collect();
            text::replace_spans(&incorrect, &spans)
        };
        let corrected = rebuild(&best);
        if corrected == correct {
            top1 += 1;
        }
        if rebuild(&oracle) == correct {
            top3 += 1;
        }
        chrf_sum += chrf_sentence(
            &corrected,
            &correct,
            crate::metrics::DEFAULT_CHAR_N,
            crate::metrics::DEFAULT_BETA,
        );

        if aligned {
            for (i, (got, gold)) in in_tokens.iter().zip(&gold_tokens).enumerate() {
                if got.text == gold.text {
                    continue;
                }
                words_total += 1;
                let fixed = flags
                    .iter()
                    .zip(&best)
                    .find(|(f, _)| f.token_index == i)
                    .is_some_and(|(_, b)| *b == gold.text);
                if fixed {
                    words_fixed += 1;
                }
            }
        }
    }
    let n = pairs.len() as f64;
    Ok(CorrectorReport {
        pairs: pairs.len(),
        accuracy_top1: top1 as f64 / n,
        accuracy_top3: top3 as f64 / n,
        word_accuracy_top1: if words_total == 0 {
            1.0
        } else {
            words_fixed as f64 / words_total as f64
        },
        chrf_mean: chrf_sum / n,
    })
}
