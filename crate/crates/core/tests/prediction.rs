mod common;

use common::{next_word_oracle, random_sentence, random_vocab, rng};
use proptest::prelude::*;
use rand::Rng;
use wordsmith_core::corpus::gen_context_targets;
use wordsmith_core::text::tokenize;
use wordsmith_core::{train_ngram, CountOverlay, NgramModel};

#[test]
fn three_sentence_example() {
    let model = train_ngram(&["a b c", "a b d", "a b c"], 5).unwrap();
    let got = model.next_word("a b", 10).unwrap();
    let pairs: Vec<(&str, f64)> = got.iter().map(|s| (s.token.as_str(), s.score)).collect();
    assert_eq!(pairs, vec![("c", 2.0 / 3.0), ("d", 1.0 / 3.0)]);
    assert_eq!(got[0].context_len_used, 2);
}

fn check_against_oracle(sentences: &[String], max_context: usize, queries: &[String]) {
    let model = train_ngram(sentences, max_context).unwrap();
    model.validate().unwrap();
    let examples = gen_context_targets(sentences, max_context).unwrap();
    let all: Vec<String> = sentences.iter().flat_map(|s| tokenize(s)).collect();
    for q in queries {
        let (level, dist) = next_word_oracle(&examples, &all, &tokenize(q), max_context);
        let got = model.next_word(q, usize::MAX).unwrap();
        assert_eq!(got.len(), dist.len(), "query {q:?}");
        for s in &got {
            assert_eq!(s.context_len_used, level, "query {q:?}");
            assert!(
                (s.score - dist[&s.token]).abs() < 1e-12,
                "query {q:?} token {}",
                s.token
            );
        }
        for w in got.windows(2) {
            assert!(
                w[0].score > w[1].score || (w[0].score == w[1].score && w[0].token < w[1].token)
            );
        }
    }
}

#[test]
fn distributions_match_counting_oracle_on_random_corpora() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let vocab = random_vocab(&mut r, 3 + (seed as usize % 5));
        let sentences: Vec<String> = (0..r.random_range(3..12))
            .map(|_| random_sentence(&mut r, &vocab, 7))
            .collect();
        let mut queries: Vec<String> = (0..15)
            .map(|_| random_sentence(&mut r, &vocab, 6))
            .collect();
        queries.push(String::new());
        queries.push("unseen tokens".into());
        for max_context in 1..=5 {
            check_against_oracle(&sentences, max_context, &queries);
        }
    }
}

#[test]
fn unseen_and_empty_contexts_use_unigrams() {
    let model = train_ngram(&["a b c", "a b d", "a b c"], 5).unwrap();
    let unseen = model.next_word("z z", 1).unwrap();
    assert_eq!(
        (
            unseen[0].token.as_str(),
            unseen[0].score,
            unseen[0].context_len_used
        ),
        ("a", 3.0 / 9.0, 0)
    );
    assert_eq!(model.next_word("", 1).unwrap()[0].token, "a");
}

#[test]
fn single_token_score_formula() {
    let model = train_ngram(&["a b c", "a b d", "a b c"], 5).unwrap();
    // a seen 3 times, 9 tokens, vocabulary of 4
    assert!((model.score_sequence(&["a"]) - (4.0f64 / 13.0).ln()).abs() < 1e-12);
    assert!((model.score_sequence(&["zz"]) - (1.0f64 / 13.0).ln()).abs() < 1e-12);
}

#[test]
fn overlay_adds_to_counts() {
    let model = train_ngram(&["a b c", "a b d", "a b c"], 5).unwrap();
    let mut overlay = CountOverlay::default();
    overlay.add(&["a".into(), "b".into()], "d", 3);
    overlay.add(&["a".into(), "b".into()], "never", 9);
    let got = model
        .next_word_with_overlay("a b", 5, Some(&overlay))
        .unwrap();
    assert_eq!(got[0].token, "d");
    assert!((got[0].score - 4.0 / 6.0).abs() < 1e-12);
    assert_eq!(got.len(), 2);
}

#[test]
fn json_round_trip() {
    let model = train_ngram(&["na aba ka", "na abo mivo ka", "aba ka"], 3).unwrap();
    let back = NgramModel::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(back, model);
    assert_eq!(back.to_json().unwrap(), model.to_json().unwrap());
}

proptest! {
    #[test]
    fn higher_counts_rank_higher(seed in any::<u64>()) {
        let mut r = rng(seed);
        let vocab = random_vocab(&mut r, 4);
        let sentences: Vec<String> = (0..6).map(|_| random_sentence(&mut r, &vocab, 6)).collect();
        let model = train_ngram(&sentences, 3).unwrap();
        let q = random_sentence(&mut r, &vocab, 3);
        let got = model.next_word(&q, usize::MAX).unwrap();
        let total: f64 = got.iter().map(|s| s.score).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(got.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn appending_never_increases_log_probability(seed in any::<u64>()) {
        let mut r = rng(seed);
        let vocab = random_vocab(&mut r, 4);
        let sentences: Vec<String> = (0..5).map(|_| random_sentence(&mut r, &vocab, 5)).collect();
        let model = train_ngram(&sentences, 3).unwrap();
        let mut toks = tokenize(&random_sentence(&mut r, &vocab, 4));
        let before = model.score_sequence(&toks);
        prop_assert!(before <= 0.0);
        toks.push(if r.random_bool(0.5) { vocab[0].clone() } else { "unseen".into() });
        prop_assert!(model.score_sequence(&toks) <= before);
    }

    #[test]
    fn higher_count_successor_scores_at_least_as_high(seed in any::<u64>()) {
        let mut r = rng(seed);
        let vocab = random_vocab(&mut r, 4);
        let sentences: Vec<String> = (0..6).map(|_| random_sentence(&mut r, &vocab, 6)).collect();
        let model = train_ngram(&sentences, 3).unwrap();
        let ctx = tokenize(&random_sentence(&mut r, &vocab, 2));
        let level = model.next_word(&ctx.join(" "), usize::MAX).unwrap();
        for w in level.windows(2) {
            let score = |t: &str| {
                let mut seq = ctx.clone();
                seq.push(t.to_string());
                model.score_sequence(&seq)
            };
            prop_assert!(score(&w[0].token) >= score(&w[1].token));
        }
    }
}
