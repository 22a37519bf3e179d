//! Segment-level MT metrics and training-set diagnostics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

pub const DEFAULT_MAX_N: usize = 4;
pub const DEFAULT_CHAR_N: usize = 6;
pub const DEFAULT_BETA: f64 = 2.0;

/// Identifier written into score reports for the BLEU smoothing in use.
pub const BLEU_SMOOTHING: &str = "exp";

fn ngram_counts<T: Eq + std::hash::Hash + Clone>(items: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n == 0 || items.len() < n {
        return counts;
    }
    for gram in items.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Sentence BLEU on the shared tokenizer, 0-100.
///
/// Clipped n-gram precisions for n = 1..=`max_n` are combined by geometric
/// mean over the orders the candidate is long enough to have. A zero match
/// count at the k-th such order is replaced by `1 / (2^k * total_n)`
/// (exponential smoothing). The brevity penalty uses the reference length
/// closest to the candidate length, shorter on ties.
pub fn bleu_sentence<S: AsRef<str>>(candidate: &str, references: &[S], max_n: usize) -> f64 {
    let cand = text::tokenize(candidate);
    let refs: Vec<Vec<String>> = references
        .iter()
        .map(|r| text::tokenize(r.as_ref()))
        .collect();
    if cand.is_empty() || refs.is_empty() || max_n == 0 {
        return 0.0;
    }
    let c = cand.len();
    let r = refs
        .iter()
        .map(Vec::len)
        .min_by_key(|&len| (len.abs_diff(c), len))
        .unwrap_or(0);

    let order = max_n.min(c);
    let mut log_sum = 0.0;
    let mut smooth = 1.0;
    for n in 1..=order {
        let cand_counts = ngram_counts(&cand, n);
        let mut max_ref: HashMap<&[String], usize> = HashMap::new();
        for reference in &refs {
            for (gram, count) in ngram_counts(reference, n) {
                let slot = max_ref.entry(gram).or_insert(0);
                *slot = (*slot).max(count);
            }
        }
        let matches: usize = cand_counts
            .iter()
            .map(|(gram, &count)| count.min(max_ref.get(gram).copied().unwrap_or(0)))
            .sum();
        let total = (c + 1 - n) as f64;
        let precision = if matches == 0 {
            smooth *= 2.0;
            1.0 / (smooth * total)
        } else {
            matches as f64 / total
        };
        log_sum += precision.ln();
    }
    let bp = if c < r {
        (1.0 - r as f64 / c as f64).exp()
    } else {
        1.0
    };
    (100.0 * bp * (log_sum / order as f64).exp()).clamp(0.0, 100.0)
}

/// Strips ends and collapses internal whitespace runs to one space.
fn chrf_normalize(s: &str) -> Vec<char> {
    text::normalize(s)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .chars()
        .collect()
}

/// Character n-gram F-score, 0-100.
///
/// Precision and recall are averaged over the orders n = 1..=`char_n` for
/// which the reference has at least one n-gram (a candidate too short for an
/// order contributes precision 0 there), then combined as F-beta.
pub fn chrf_sentence(candidate: &str, reference: &str, char_n: usize, beta: f64) -> f64 {
    let cand = chrf_normalize(candidate);
    let refr = chrf_normalize(reference);
    if cand.is_empty() || refr.is_empty() {
        return 0.0;
    }
    let (mut p_sum, mut r_sum, mut orders) = (0.0, 0.0, 0usize);
    for n in 1..=char_n.min(refr.len()) {
        let ref_counts = ngram_counts(&refr, n);
        let cand_counts = ngram_counts(&cand, n);
        let ref_total = refr.len() + 1 - n;
        let cand_total = cand.len().saturating_sub(n - 1);
        let matches: usize = cand_counts
            .iter()
            .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
            .sum();
        p_sum += if cand_total == 0 {
            0.0
        } else {
            matches as f64 / cand_total as f64
        };
        r_sum += matches as f64 / ref_total as f64;
        orders += 1;
    }
    if orders == 0 {
        return 0.0;
    }
    let p = p_sum / orders as f64;
    let r = r_sum / orders as f64;
    let b2 = beta * beta;
    let denom = b2 * p + r;
    if denom == 0.0 {
        return 0.0;
    }
    (100.0 * (1.0 + b2) * p * r / denom).clamp(0.0, 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "lowercase")]
pub enum Metric {
    Bleu { max_n: usize },
    Chrf { char_n: usize, beta: f64 },
}

impl Metric {
    pub fn bleu() -> Self {
        Metric::Bleu {
            max_n: DEFAULT_MAX_N,
        }
    }

    pub fn chrf() -> Self {
        Metric::Chrf {
            char_n: DEFAULT_CHAR_N,
            beta: DEFAULT_BETA,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Bleu { .. } => "bleu",
            Metric::Chrf { .. } => "chrf",
        }
    }

    pub fn score(&self, candidate: &str, reference: &str) -> f64 {
        match *self {
            Metric::Bleu { max_n } => bleu_sentence(candidate, &[reference], max_n),
            Metric::Chrf { char_n, beta } => chrf_sentence(candidate, reference, char_n, beta),
        }
    }

    fn params(&self) -> BTreeMap<String, serde_json::Value> {
        let mut p = BTreeMap::new();
        match *self {
            Metric::Bleu { max_n } => {
                p.insert("max_n".into(), max_n.into());
                p.insert("smoothing".into(), BLEU_SMOOTHING.into());
                p.insert("effective_order".into(), true.into());
                p.insert("tokenizer".into(), "nfc-ws-punct".into());
            }
            Metric::Chrf { char_n, beta } => {
                p.insert("char_n".into(), char_n.into());
                p.insert("beta".into(), beta.into());
                p.insert("whitespace".into(), "strip-single-space".into());
            }
        }
        p
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bleu" => Ok(Metric::bleu()),
            "chrf" => Ok(Metric::chrf()),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub metric: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub scores: Vec<f64>,
}

impl ScoreReport {
    pub fn from_scores(metric: &Metric, scores: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&scores);
        ScoreReport {
            metric: metric.name().to_string(),
            params: metric.params(),
            n: scores.len(),
            mean,
            std,
            scores,
        }
    }
}

/// Mean and population standard deviation; (0, 0) for an empty slice.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn score_corpus<S: AsRef<str> + Sync>(
    metric: &Metric,
    candidates: &[S],
    references: &[S],
) -> Result<ScoreReport> {
    if candidates.len() != references.len() {
        return Err(Error::InvalidInput(format!(
            "{} candidates but {} references",
            candidates.len(),
            references.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no segments to score".into()));
    }
    let scores: Vec<f64> = candidates
        .par_iter()
        .zip(references.par_iter())
        .map(|(c, r)| metric.score(c.as_ref(), r.as_ref()))
        .collect();
    Ok(ScoreReport::from_scores(metric, scores))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticThresholds {
    /// Scores at or above this count as perfect.
    pub perfect_score: f64,
    pub high_tail_score: f64,
    pub perfect_fraction: f64,
    pub bimodality: f64,
    pub high_tail_fraction: f64,
    pub min_samples: usize,
}

impl Default for DiagnosticThresholds {
    fn default() -> Self {
        DiagnosticThresholds {
            perfect_score: 99.5,
            high_tail_score: 95.0,
            perfect_fraction: 0.15,
            bimodality: 5.0 / 9.0,
            high_tail_fraction: 0.10,
            min_samples: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionDiagnostic {
    pub n: usize,
    pub perfect_fraction: f64,
    pub high_tail_fraction: f64,
    pub skewness: f64,
    pub kurtosis_excess: f64,
    pub bimodality_coefficient: f64,
    pub memorization_flag: bool,
}

/// Shape test for training-set score distributions: a model that retrieves
/// training targets instead of translating shows an atom of perfect scores
/// or a bimodal shape with a heavy high tail.
///
/// Skewness and excess kurtosis are the bias-adjusted sample estimators;
/// a constant sample has both set to 0.
pub fn memorization_diagnostic(
    scores: &[f64],
    th: &DiagnosticThresholds,
) -> Result<DistributionDiagnostic> {
    let needed = th.min_samples.max(4);
    if scores.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: scores.len(),
        });
    }
    let n = scores.len() as f64;
    let perfect = scores.iter().filter(|&&s| s >= th.perfect_score).count() as f64 / n;
    let high = scores.iter().filter(|&&s| s >= th.high_tail_score).count() as f64 / n;

    let mean = scores.iter().sum::<f64>() / n;
    let moment = |k: i32| scores.iter().map(|s| (s - mean).powi(k)).sum::<f64>() / n;
    let m2 = moment(2);
    let (skewness, kurtosis_excess) = if m2 <= f64::EPSILON * mean.abs().max(1.0) {
        (0.0, 0.0)
    } else {
        let g1 = moment(3) / m2.powf(1.5);
        let g2 = moment(4) / (m2 * m2) - 3.0;
        let skew = g1 * (n * (n - 1.0)).sqrt() / (n - 2.0);
        let kurt = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
        (skew, kurt)
    };
    let bimodality = (skewness * skewness + 1.0)
        / (kurtosis_excess + 3.0 * (n - 1.0).powi(2) / ((n - 2.0) * (n - 3.0)));
    let flag = perfect >= th.perfect_fraction
        || (bimodality > th.bimodality && high >= th.high_tail_fraction);
    Ok(DistributionDiagnostic {
        n: scores.len(),
        perfect_fraction: perfect,
        high_tail_fraction: high,
        skewness,
        kurtosis_excess,
        bimodality_coefficient: bimodality,
        memorization_flag: flag,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContaminationRecord {
    pub index: usize,
    pub flagged: bool,
    pub matched_keywords: Vec<String>,
    pub matched_ngrams: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContaminationReport {
    pub ngram_len: usize,
    pub records: Vec<ContaminationRecord>,
    pub flagged_count: usize,
    pub flagged_fraction: f64,
}

fn ngram_set<S: AsRef<str>>(corpus: &[S], n: usize) -> HashSet<Vec<String>> {
    corpus
        .iter()
        .flat_map(|line| {
            let toks = text::tokenize(line.as_ref());
            toks.windows(n).map(<[String]>::to_vec).collect::<Vec<_>>()
        })
        .collect()
}

/// Flags outputs that contain a keyword (case-insensitive, whole tokens;
/// multi-token keywords match as contiguous runs) or an n-gram that occurs
/// in the toxic corpus but never in the clean corpus.
pub fn contamination_scan<S: AsRef<str>>(
    outputs: &[S],
    toxic_corpus: &[S],
    clean_corpus: &[S],
    keywords: &[S],
    ngram_len: usize,
) -> Result<ContaminationReport> {
    if ngram_len < 2 {
        return Err(Error::InvalidInput(format!(
            "ngram_len must be at least 2, got {ngram_len}"
        )));
    }
    let clean = ngram_set(clean_corpus, ngram_len);
    let distinctive: HashSet<Vec<String>> = ngram_set(toxic_corpus, ngram_len)
        .into_iter()
        .filter(|g| !clean.contains(g))
        .collect();
    let keyword_tokens: Vec<(String, Vec<String>)> = keywords
        .iter()
        .map(|k| {
            let toks = text::tokenize(k.as_ref())
                .iter()
                .map(|t| t.to_lowercase())
                .collect();
            (k.as_ref().trim().to_string(), toks)
        })
        .filter(|(_, toks): &(String, Vec<String>)| !toks.is_empty())
        .collect();

    let records: Vec<ContaminationRecord> = outputs
        .iter()
        .enumerate()
        .map(|(index, output)| {
            let toks = text::tokenize(output.as_ref());
            let lower: Vec<String> = toks.iter().map(|t| t.to_lowercase()).collect();
            let mut matched_keywords: Vec<String> = Vec::new();
            for (kw, kt) in &keyword_tokens {
                if lower.windows(kt.len()).any(|w| w == kt.as_slice())
                    && !matched_keywords.contains(kw)
                {
                    matched_keywords.push(kw.clone());
                }
            }
            let mut matched_ngrams: Vec<String> = Vec::new();
            for gram in toks.windows(ngram_len) {
                if distinctive.contains(gram) {
                    let joined = gram.join(" ");
                    if !matched_ngrams.contains(&joined) {
                        matched_ngrams.push(joined);
                    }
                }
            }
            ContaminationRecord {
                index,
                flagged: !matched_keywords.is_empty() || !matched_ngrams.is_empty(),
                matched_keywords,
                matched_ngrams,
            }
        })
        .collect();
    let flagged_count = records.iter().filter(|r| r.flagged).count();
    let flagged_fraction = if records.is_empty() {
        0.0
    } else {
        flagged_count as f64 / records.len() as f64
    };
    Ok(ContaminationReport {
        ngram_len,
        records,
        flagged_count,
        flagged_fraction,
    })
}

/// Seven-point human usefulness scale for translator outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Usefulness {
    VeryWrong = 1,
    Incorrect = 2,
    MostlyIncorrect = 3,
    Usable = 4,
    MostlyCorrect = 5,
    Correct = 6,
    NearPerfect = 7,
}

impl Usefulness {
    /// Best first.
    pub const ALL: [Usefulness; 7] = [
        Usefulness::NearPerfect,
        Usefulness::Correct,
        Usefulness::MostlyCorrect,
        Usefulness::Usable,
        Usefulness::MostlyIncorrect,
        Usefulness::Incorrect,
        Usefulness::VeryWrong,
    ];

    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(value: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|u| u.ordinal() == value)
    }

    pub fn label(self) -> &'static str {
        match self {
            Usefulness::NearPerfect => "near-perfect",
            Usefulness::Correct => "correct",
            Usefulness::MostlyCorrect => "mostly-correct",
            Usefulness::Usable => "usable",
            Usefulness::MostlyIncorrect => "mostly-incorrect",
            Usefulness::Incorrect => "incorrect",
            Usefulness::VeryWrong => "very-wrong",
        }
    }
}

impl fmt::Display for Usefulness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Usefulness {
    type Err = Error;

    /// Accepts the kebab-case labels, with spaces or underscores in place of hyphens.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_lowercase().replace([' ', '_'], "-");
        Self::ALL
            .into_iter()
            .find(|u| u.label() == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown usefulness label {s:?}")))
    }
}

/// One line of a ratings file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub index: usize,
    pub label: Usefulness,
    #[serde(default)]
    pub rater: String,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsefulnessBin {
    pub label: Usefulness,
    pub ordinal: u8,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsefulnessHistogram {
    pub total: usize,
    /// Best to worst.
    pub bins: Vec<UsefulnessBin>,
}

impl UsefulnessHistogram {
    pub fn count(&self, label: Usefulness) -> usize {
        self.bins
            .iter()
            .find(|b| b.label == label)
            .map_or(0, |b| b.count)
    }

    pub fn fraction(&self, label: Usefulness) -> f64 {
        self.bins
            .iter()
            .find(|b| b.label == label)
            .map_or(0.0, |b| b.fraction)
    }
}

pub fn usefulness_histogram(ratings: &[Usefulness]) -> UsefulnessHistogram {
    let total = ratings.len();
    let bins = Usefulness::ALL
        .into_iter()
        .map(|label| {
            let count = ratings.iter().filter(|&&r| r == label).count();
            UsefulnessBin {
                label,
                ordinal: label.ordinal(),
                count,
                fraction: if total == 0 {
                    0.0
                } else {
                    count as f64 / total as f64
                },
            }
        })
        .collect();
    UsefulnessHistogram { total, bins }
}
