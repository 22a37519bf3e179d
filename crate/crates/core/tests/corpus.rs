mod common;

use std::collections::BTreeSet;

use common::{cleaning_fixture, random_sentence, random_vocab, rng};
use proptest::prelude::*;
use rand::Rng;
use wordsmith_core::corpus::{parse_corpus, serialize_corpus, DEFAULT_MAX_LEN_RATIO};
use wordsmith_core::{clean, ingest, split, Corpus, CorpusFormat, SentencePair, SplitSpec};

#[test]
fn cleaning_fixture_report_is_exact() {
    let (corpus, expected) = cleaning_fixture();
    assert_eq!(corpus.len(), 50);
    let (cleaned, report) = clean(&corpus, DEFAULT_MAX_LEN_RATIO);
    assert_eq!(report, expected);
    assert_eq!(cleaned.len(), 38);
    assert!(cleaned
        .pairs
        .iter()
        .all(|p| !p.src.contains('[') && !p.tgt.contains('[')));
}

#[test]
fn cleaning_is_idempotent_on_fixture() {
    let (corpus, _) = cleaning_fixture();
    let (once, _) = clean(&corpus, DEFAULT_MAX_LEN_RATIO);
    let (twice, report) = clean(&once, DEFAULT_MAX_LEN_RATIO);
    assert_eq!(once.pairs, twice.pairs);
    assert_eq!(report.kept, once.len());
    assert_eq!(report.input_size(), report.kept);
}

#[test]
fn bundled_toy_corpus_loads_and_cleans() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/toy/corpus.tsv");
    let corpus = ingest(path, CorpusFormat::Tsv).unwrap();
    let (cleaned, report) = clean(&corpus, DEFAULT_MAX_LEN_RATIO);
    assert_eq!(report.input_size(), corpus.len());
    // one injected duplicate plus two short sentences the generator happened to repeat
    assert_eq!(
        (
            report.removed_empty,
            report.removed_duplicates,
            report.removed_ratio_outliers
        ),
        (1, 3, 1)
    );
    assert!(report.fixed_markup >= 1);
    assert_eq!(cleaned.len(), report.kept);
}

fn random_corpus(seed: u64) -> Corpus {
    let mut r = rng(seed);
    let vocab = random_vocab(&mut r, 6);
    let n = r.random_range(0..40);
    let pairs = (0..n)
        .map(|i| {
            let src = random_sentence(&mut r, &vocab, 5);
            let tgt = if r.random_bool(0.1) {
                String::new()
            } else if r.random_bool(0.1) {
                format!("{} [note]", random_sentence(&mut r, &vocab, 4))
            } else {
                random_sentence(&mut r, &vocab, 5)
            };
            SentencePair::new(src, tgt)
                .with_source("gen")
                .with_doc(format!("d{}", i % 4))
        })
        .collect();
    Corpus::new("random", pairs)
}

proptest! {
    #[test]
    fn clean_is_idempotent(seed in any::<u64>(), ratio in 1.5f64..6.0) {
        let corpus = random_corpus(seed);
        let (once, first) = clean(&corpus, ratio);
        let (twice, _) = clean(&once, ratio);
        prop_assert_eq!(&once.pairs, &twice.pairs);
        prop_assert_eq!(first.input_size(), corpus.len());
    }

    #[test]
    fn random_split_partitions(seed in any::<u64>(), frac in 0.0f64..=1.0, split_seed in any::<u64>()) {
        let corpus = random_corpus(seed);
        let spec = SplitSpec::RandomFraction { test_fraction: frac, seed: split_seed };
        match split(&corpus, &spec) {
            Ok((train, test)) => {
                prop_assert_eq!(train.len() + test.len(), corpus.len());
                prop_assert_eq!(test.len(), (corpus.len() as f64 * frac).round() as usize);
                let mut all: Vec<_> = train.pairs.iter().chain(&test.pairs).cloned().collect();
                let mut orig = corpus.pairs.clone();
                let key = |p: &SentencePair| (p.src.clone(), p.tgt.clone(), p.doc_id.clone());
                all.sort_by_key(key);
                orig.sort_by_key(key);
                prop_assert_eq!(all, orig);
                prop_assert_eq!(split(&corpus, &spec).unwrap(), (train, test));
            }
            Err(_) => prop_assert!(corpus.is_empty() || (corpus.len() as f64 * frac).round() == 0.0),
        }
    }

    #[test]
    fn held_out_docs_partition(seed in any::<u64>()) {
        let corpus = random_corpus(seed);
        let held: BTreeSet<String> = ["d1".to_string()].into();
        if let Ok((train, test)) = split(&corpus, &SplitSpec::HeldOutDoc { held_doc_ids: held }) {
            prop_assert!(test.pairs.iter().all(|p| p.doc_id.as_deref() == Some("d1")));
            prop_assert!(train.pairs.iter().all(|p| p.doc_id.as_deref() != Some("d1")));
            prop_assert_eq!(train.len() + test.len(), corpus.len());
        }
    }

    #[test]
    fn serialization_round_trips(seed in any::<u64>()) {
        let (corpus, _) = clean(&random_corpus(seed), 100.0);
        for format in [CorpusFormat::Tsv, CorpusFormat::Jsonl] {
            let text = serialize_corpus(&corpus, format).unwrap();
            let back = parse_corpus("random", &text, format).unwrap();
            prop_assert_eq!(&back.pairs, &corpus.pairs);
        }
    }
}
