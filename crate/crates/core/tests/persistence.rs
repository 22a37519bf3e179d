use std::fs;

use wordsmith_core::corpus::write_corpus;
use wordsmith_core::{
    ingest, train_langid, train_ngram, Corpus, CorpusFormat, LangIdModel, Lexicon, LexiconEntry,
    NgramModel, SentencePair,
};

#[test]
fn models_and_corpora_survive_a_disk_round_trip() {
    let dir = tempfile::tempdir().unwrap();

    let ngram = train_ngram(&["na aba ka", "na abo mivo"], 3).unwrap();
    ngram.save(dir.path().join("ngram.json")).unwrap();
    assert_eq!(
        NgramModel::load(dir.path().join("ngram.json")).unwrap(),
        ngram
    );

    let langid = train_langid(&[("na aba", "tok"), ("the man", "en")], 0.5).unwrap();
    langid.save(dir.path().join("langid.json")).unwrap();
    assert_eq!(
        LangIdModel::load(dir.path().join("langid.json")).unwrap(),
        langid
    );

    let lex =
        Lexicon::from_entries([LexiconEntry::new("kimè", "en", "house").with_freq(4)]).unwrap();
    fs::write(dir.path().join("lex.jsonl"), lex.to_jsonl().unwrap()).unwrap();
    assert_eq!(
        Lexicon::load(dir.path().join("lex.jsonl"))
            .unwrap()
            .entries(),
        lex.entries()
    );

    let corpus = Corpus::new(
        "c",
        vec![
            SentencePair::new("na aba", "the man")
                .with_source("s")
                .with_doc("d1"),
            SentencePair::new("hoñe", "rain"),
        ],
    );
    for (file, format) in [
        ("c.tsv", CorpusFormat::Tsv),
        ("c.jsonl", CorpusFormat::Jsonl),
    ] {
        let path = dir.path().join(file);
        write_corpus(&corpus, &path, format).unwrap();
        assert_eq!(ingest(&path, format).unwrap().pairs, corpus.pairs);
    }
}

#[test]
fn missing_and_malformed_files_report_their_location() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let err = NgramModel::load(&missing).unwrap_err().to_string();
    assert!(err.contains("nope.json"), "{err}");

    fs::write(
        dir.path().join("lex.jsonl"),
        "{\"headword\": \"a\"}\nnot json\n",
    )
    .unwrap();
    let err = Lexicon::load(dir.path().join("lex.jsonl"))
        .unwrap_err()
        .to_string();
    assert!(err.contains("line"), "{err}");

    fs::write(
        dir.path().join("m.json"),
        "{\"format\": \"something-else\", \"version\": 1}",
    )
    .unwrap();
    assert!(LangIdModel::load(dir.path().join("m.json")).is_err());
}
