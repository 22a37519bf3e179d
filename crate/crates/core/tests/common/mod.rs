//! Brute-force reference implementations and fixture builders shared by the
//! integration tests and the acceptance harness. Nothing here calls into the
//! library's own scoring code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordsmith_core::{CleaningReport, Corpus, LexiconEntry, SentencePair};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn grams<T: Clone + PartialEq>(seq: &[T], n: usize) -> Vec<Vec<T>> {
    if seq.len() < n {
        return Vec::new();
    }
    (0..=seq.len() - n)
        .map(|i| seq[i..i + n].to_vec())
        .collect()
}

fn occurrences<T: PartialEq>(haystack: &[Vec<T>], needle: &[T]) -> usize {
    haystack.iter().filter(|g| g.as_slice() == needle).count()
}

/// Clipped matches of `cand` n-grams against `refs`, counted by scanning.
fn clipped<T: Clone + PartialEq>(cand: &[Vec<T>], refs: &[Vec<Vec<T>>]) -> usize {
    let mut seen: Vec<&Vec<T>> = Vec::new();
    let mut total = 0;
    for g in cand {
        if seen.contains(&g) {
            continue;
        }
        seen.push(g);
        let in_cand = occurrences(cand, g);
        let max_ref = refs.iter().map(|r| occurrences(r, g)).max().unwrap_or(0);
        total += in_cand.min(max_ref);
    }
    total
}

/// Sentence BLEU over whitespace tokens with exponential smoothing and
/// effective order.
pub fn bleu_oracle(cand: &str, refs: &[&str], max_n: usize) -> f64 {
    let c: Vec<&str> = cand.split_whitespace().collect();
    let rs: Vec<Vec<&str>> = refs
        .iter()
        .map(|r| r.split_whitespace().collect())
        .collect();
    if c.is_empty() || rs.is_empty() {
        return 0.0;
    }
    let mut best_r = usize::MAX;
    for r in &rs {
        let (d, bd) = (r.len().abs_diff(c.len()), best_r.abs_diff(c.len()));
        if best_r == usize::MAX || d < bd || (d == bd && r.len() < best_r) {
            best_r = r.len();
        }
    }
    let order = max_n.min(c.len());
    let mut product = 1.0f64;
    let mut k = 0;
    for n in 1..=order {
        let cg = grams(&c, n);
        let rg: Vec<_> = rs.iter().map(|r| grams(r, n)).collect();
        let m = clipped(&cg, &rg);
        let p = if m == 0 {
            k += 1;
            1.0 / (2f64.powi(k) * cg.len() as f64)
        } else {
            m as f64 / cg.len() as f64
        };
        product *= p;
    }
    let bp = if c.len() < best_r {
        (1.0 - best_r as f64 / c.len() as f64).exp()
    } else {
        1.0
    };
    100.0 * bp * product.powf(1.0 / order as f64)
}

/// chrF with whitespace collapsed to single spaces and spaces kept in the
/// character n-grams.
pub fn chrf_oracle(cand: &str, reference: &str, char_n: usize, beta: f64) -> f64 {
    let norm = |s: &str| -> Vec<char> {
        s.split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .chars()
            .collect()
    };
    let (c, r) = (norm(cand), norm(reference));
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let (mut ps, mut rs, mut orders) = (0.0, 0.0, 0.0);
    for n in 1..=char_n {
        let rg = grams(&r, n);
        if rg.is_empty() {
            break;
        }
        let cg = grams(&c, n);
        let m = clipped(&cg, std::slice::from_ref(&rg)) as f64;
        ps += if cg.is_empty() {
            0.0
        } else {
            m / cg.len() as f64
        };
        rs += m / rg.len() as f64;
        orders += 1.0;
    }
    let (p, rec) = (ps / orders, rs / orders);
    let b2 = beta * beta;
    if b2 * p + rec == 0.0 {
        return 0.0;
    }
    100.0 * (1.0 + b2) * p * rec / (b2 * p + rec)
}

const SYLLABLES: &[&str] = &["a", "ba", "ka", "mi", "no", "ru", "te", "zo", "li", "pe"];

pub fn random_word(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(1..=3);
    (0..len).map(|_| *SYLLABLES.choose(rng).unwrap()).collect()
}

/// A short whitespace-tokenized sentence over a small vocabulary so n-gram
/// overlaps are common.
pub fn random_sentence(rng: &mut ChaCha8Rng, vocab: &[String], max_len: usize) -> String {
    let len = rng.random_range(1..=max_len);
    (0..len)
        .map(|_| vocab.choose(rng).unwrap().as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn random_vocab(rng: &mut ChaCha8Rng, size: usize) -> Vec<String> {
    let mut set = BTreeSet::new();
    while set.len() < size {
        set.insert(random_word(rng));
    }
    set.into_iter().collect()
}

/// Next-token distribution by direct counting: the longest suffix of the
/// query that occurs as a context suffix in `examples`, falling back to
/// whole-corpus token frequencies.
pub fn next_word_oracle(
    examples: &[(Vec<String>, String)],
    all_tokens: &[String],
    query: &[String],
    max_context: usize,
) -> (usize, BTreeMap<String, f64>) {
    let query = &query[query.len().saturating_sub(max_context)..];
    for len in (1..=query.len()).rev() {
        let suffix = &query[query.len() - len..];
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for (ctx, tgt) in examples {
            if ctx.len() >= len && &ctx[ctx.len() - len..] == suffix {
                *counts.entry(tgt.clone()).or_default() += 1;
            }
        }
        let total: u64 = counts.values().sum();
        if total > 0 {
            return (
                len,
                counts
                    .into_iter()
                    .map(|(t, c)| (t, c as f64 / total as f64))
                    .collect(),
            );
        }
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for t in all_tokens {
        *counts.entry(t.clone()).or_default() += 1;
    }
    let total = all_tokens.len() as f64;
    (
        0,
        counts
            .into_iter()
            .map(|(t, c)| (t, c as f64 / total))
            .collect(),
    )
}

fn edit_distance(a: &str, b: &str) -> usize {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// `n` random words over `alphabet` with every pair at least `min_dist`
/// edits apart, so a single edit has exactly one lexicon word at distance 1.
pub fn separated_words(
    seed: u64,
    n: usize,
    alphabet: &[char],
    len: usize,
    min_dist: usize,
) -> Vec<String> {
    let mut rng = rng(seed);
    let mut words: Vec<String> = Vec::new();
    while words.len() < n {
        let w: String = (0..len)
            .map(|_| *alphabet.choose(&mut rng).unwrap())
            .collect();
        if words.iter().all(|o| edit_distance(o, &w) >= min_dist) {
            words.push(w);
        }
    }
    words
}

pub fn lexicon_entries(words: &[String]) -> Vec<LexiconEntry> {
    words
        .iter()
        .map(|w| LexiconEntry::new(w.clone(), "en", &format!("gloss of {w}")).with_freq(1))
        .collect()
}

/// Whether `output` contains a keyword token run (case-insensitive) or a
/// `n`-gram present in `toxic` and absent from `clean`. Tokens are maximal
/// alphanumeric runs; the remaining non-space characters are single tokens.
pub fn contamination_oracle(
    output: &str,
    toxic: &[&str],
    clean: &[&str],
    keywords: &[&str],
    n: usize,
) -> bool {
    fn toks(s: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = String::new();
        for ch in s.chars() {
            if ch.is_alphanumeric() {
                cur.push(ch);
                continue;
            }
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !ch.is_whitespace() {
                out.push(ch.to_string());
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
        out
    }
    let out_toks = toks(output);
    let lower: Vec<String> = out_toks.iter().map(|t| t.to_lowercase()).collect();
    for kw in keywords {
        let k: Vec<String> = toks(kw).iter().map(|t| t.to_lowercase()).collect();
        if !k.is_empty() && grams(&lower, k.len()).contains(&k) {
            return true;
        }
    }
    let clean_grams: Vec<Vec<String>> = clean.iter().flat_map(|l| grams(&toks(l), n)).collect();
    let toxic_grams: Vec<Vec<String>> = toxic.iter().flat_map(|l| grams(&toks(l), n)).collect();
    grams(&out_toks, n)
        .iter()
        .any(|g| toxic_grams.contains(g) && !clean_grams.contains(g))
}

pub const TOXIC: &[&str] = &[
    "In the beginning was the word and the word was with God.",
    "Blessed are the meek for they shall inherit the earth.",
    "Jesus wept.",
    "He washed his feet in the water of the river.",
    "And the light shineth in darkness.",
];

pub const CLEAN: &[&str] = &[
    "The river was cold in the morning.",
    "She washed her hands in the water.",
    "The word for river is mivo.",
    "They shall walk to the market for bread.",
    "The light in the house was warm.",
];

/// Outputs assembled from toxic and clean fragments plus neutral filler.
pub fn contamination_outputs(seed: u64, n: usize) -> Vec<String> {
    let fragments: Vec<String> = TOXIC
        .iter()
        .chain(CLEAN)
        .flat_map(|s| {
            let words: Vec<&str> = s.trim_end_matches('.').split(' ').collect();
            words.windows(4).map(|w| w.join(" ")).collect::<Vec<_>>()
        })
        .collect();
    let filler = [
        "the man",
        "a small dog",
        "went home",
        "jesus",
        "river",
        "quietly",
        "JESUS christ",
    ];
    let mut rng = rng(seed);
    (0..n)
        .map(|_| {
            let parts = rng.random_range(1..=3);
            (0..parts)
                .map(|_| {
                    if rng.random_bool(0.4) {
                        fragments.choose(&mut rng).unwrap().clone()
                    } else {
                        filler.choose(&mut rng).unwrap().to_string()
                    }
                })
                .collect::<Vec<_>>()
                .join(" ")
                + "."
        })
        .collect()
}

/// Right-skewed unimodal scores in roughly [5, 90]: a scaled sum of two
/// exponentials (gamma with shape 2), capped below the high tail.
pub fn skewed_scores(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let g: f64 =
                -(rng.random::<f64>().max(1e-12)).ln() - (rng.random::<f64>().max(1e-12)).ln();
            (5.0 + scale * g).min(90.0)
        })
        .collect()
}

/// A 50-pair cleaning fixture: 32 ordinary pairs, 5 with an empty target,
/// 4 exact duplicates of ordinary pairs, 3 length-ratio outliers and 6 with
/// bracketed markup that survive once stripped. No pair falls into two
/// categories, so 50 - 5 - 4 - 3 = 38 pairs are kept and 6 of those are
/// counted as fixed.
pub fn cleaning_fixture() -> (Corpus, CleaningReport) {
    let words = [
        "aba", "kimè", "mivo", "tolu", "sena", "ruka", "peli", "zono",
    ];
    let gloss = [
        "man", "house", "river", "stone", "fire", "hand", "bird", "night",
    ];
    let mut ordinary = Vec::new();
    for i in 0..32 {
        let (a, b) = (i % 8, (i / 8 + i) % 8);
        ordinary.push(SentencePair::new(
            format!("{} {} {}", words[a], words[b], i),
            format!("the {} and the {} {}", gloss[a], gloss[b], i),
        ));
    }
    let mut pairs = Vec::new();
    let mut o = ordinary.iter().cloned();
    let long = "aba kimè mivo tolu sena ruka peli zono aba kimè mivo tolu";
    for slot in 0..50 {
        let pair = match slot {
            3 | 11 | 19 | 27 | 40 => SentencePair::new(format!("sena {slot}"), "  "),
            8 | 16 | 33 | 45 => ordinary[slot / 8].clone(),
            13 | 29 | 47 => SentencePair::new(format!("{long} {slot}"), "fire"),
            5 | 21 | 24 | 37 | 42 | 49 => SentencePair::new(
                format!("peli [n.] {slot}"),
                format!("bird [lit. small flyer] number {slot}"),
            ),
            _ => o.next().expect("32 ordinary slots"),
        };
        pairs.push(pair);
    }
    assert!(o.next().is_none());
    let expected = CleaningReport {
        removed_empty: 5,
        removed_duplicates: 4,
        removed_ratio_outliers: 3,
        fixed_markup: 6,
        kept: 38,
    };
    (Corpus::new("fixture", pairs), expected)
}

fn letter_words(letters: &[char], seed: u64, n: usize) -> Vec<String> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            (0..r.random_range(2..6))
                .map(|_| *letters.choose(&mut r).unwrap())
                .collect()
        })
        .collect()
}

fn letter_sentences(vocab: &[String], seed: u64, n: usize) -> Vec<String> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            (0..r.random_range(2..8))
                .map(|_| vocab.choose(&mut r).unwrap().as_str())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

pub type Labeled = Vec<(String, String)>;

/// Two languages "aa" and "bb" over disjoint letters (so their words and
/// character trigrams are disjoint too), returned as (train, test, third)
/// where `third` is text in a language over letters neither has seen.
pub fn langid_fixture() -> (Labeled, Labeled, Vec<String>) {
    let a = letter_words(&['a', 'e', 'i', 'k', 'l', 'm'], 1, 40);
    let b = letter_words(&['o', 'u', 'r', 's', 't', 'z'], 2, 40);
    let c = letter_words(&['b', 'd', 'g', 'h', 'n', 'p'], 3, 40);
    let label = |v: Vec<String>, l: &str| {
        v.into_iter()
            .map(|s| (s, l.to_string()))
            .collect::<Vec<_>>()
    };
    let mut train = label(letter_sentences(&a, 10, 30), "aa");
    train.extend(label(letter_sentences(&b, 11, 30), "bb"));
    let mut test = label(letter_sentences(&a, 20, 25), "aa");
    test.extend(label(letter_sentences(&b, 21, 25), "bb"));
    (train, test, letter_sentences(&c, 30, 20))
}
