//! Synthetic workloads sized well beyond the toy data.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordsmith_core::{Lexicon, LexiconEntry};

const SYLLABLES: &[&str] = &[
    "a", "e", "i", "o", "u", "ka", "ke", "ki", "ko", "ku", "ma", "me", "mi", "mo", "na", "ne",
    "ni", "no", "ra", "ri", "ro", "ta", "te", "ti", "to", "sa", "se", "so", "la", "li",
];

pub fn word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=4);
    (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect()
}

/// A lexicon of `n` distinct headwords with Zipf-like frequencies.
pub fn lexicon(n: usize, seed: u64) -> Lexicon {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words = std::collections::BTreeSet::new();
    while words.len() < n {
        words.insert(word(&mut rng));
    }
    let entries = words.into_iter().enumerate().map(|(rank, w)| {
        LexiconEntry::new(w, "en", "gloss").with_freq((10_000 / (rank + 1)) as u64)
    });
    Lexicon::from_entries(entries).expect("distinct headwords")
}

/// `n` sentences of 4 to 15 words drawn from `vocab`.
pub fn sentences(vocab: &[String], n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.random_range(4..=15);
            (0..len)
                .map(|_| vocab.choose(&mut rng).unwrap().as_str())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}
