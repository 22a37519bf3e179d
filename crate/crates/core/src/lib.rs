//! Writing-assistant toolkit for low-resource languages: corpus preparation,
//! dictionary lookup and word completion, next-word prediction, spell
//! checking, language identification, translation backends and MT evaluation.

pub mod corpus;
pub mod error;
pub mod langid;
pub mod lexicon;
pub mod metrics;
pub mod predict;
pub mod spell;
pub mod text;
pub mod translate;

pub use corpus::{
    clean, gen_context_targets, ingest, split, CleaningReport, Corpus, CorpusFormat, SentencePair,
    SplitSpec,
};
pub use error::{Error, Result};
pub use langid::{evaluate_langid, train_langid, LangGuess, LangIdModel, LangIdReport};
pub use lexicon::{levenshtein, Gloss, Lexicon, LexiconEntry, LookupHit};
pub use metrics::{
    bleu_sentence, chrf_sentence, contamination_scan, memorization_diagnostic, score_corpus,
    usefulness_histogram, ContaminationReport, DiagnosticThresholds, DistributionDiagnostic,
    Metric, ScoreReport, Usefulness,
};
pub use predict::{train_ngram, CountOverlay, NgramModel, NgramOptions, Suggestion};
pub use spell::{
    check_sentence, check_word, corrupt, evaluate_corrector, gen_typo_pairs, suggest, Correction,
    CorrectorReport, EditKind, FlaggedSpan, SpellConfig, TypoModel, TypoPair,
};
pub use translate::{
    Backend, CacheStats, Direction, TranslationResult, Translator, TranslatorSpec,
};
