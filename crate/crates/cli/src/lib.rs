//! The `wordsmith` command line. Every subcommand prints one JSON document
//! (to stdout or `--out`) and a one-line summary on stderr.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data errors.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use wordsmith_core::corpus::{write_corpus, DEFAULT_MAX_LEN_RATIO};
use wordsmith_core::metrics::{Rating, DEFAULT_BETA, DEFAULT_CHAR_N, DEFAULT_MAX_N};
use wordsmith_core::predict::MAX_CONTEXT_LIMIT;
use wordsmith_core::spell::TypoPair;
use wordsmith_core::{
    clean, contamination_scan, evaluate_corrector, evaluate_langid, gen_typo_pairs, ingest,
    memorization_diagnostic, score_corpus, split, train_langid, usefulness_histogram, Corpus,
    CorpusFormat, DiagnosticThresholds, LangIdModel, Lexicon, Metric, NgramModel, NgramOptions,
    ScoreReport, SpellConfig, SplitSpec, TypoModel,
};

#[derive(Debug, Parser)]
#[command(
    name = "wordsmith",
    version,
    about = "Writing-assistant toolkit for low-resource languages"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read a TSV or JSONL parallel corpus and report its contents.
    Ingest(IngestArgs),
    /// Strip markup and drop empty, duplicate and length-ratio outlier pairs.
    Clean(CleanArgs),
    /// Split a corpus into train and test sets.
    Split(SplitArgs),
    /// Train the next-word n-gram model.
    TrainNgram(TrainNgramArgs),
    /// Train the language identifier.
    TrainLangid(TrainLangidArgs),
    /// Generate synthetic (misspelled, correct) sentence pairs.
    GenTypos(GenTyposArgs),
    /// Score translations, the spell corrector or the language identifier.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Check a score distribution for signs of training-set memorization.
    DiagMemorization(DiagArgs),
    /// Flag outputs that contain keywords or phrases specific to a toxic corpus.
    ScanContamination(ScanArgs),
    /// Summarize human usefulness ratings.
    UsefulnessReport(UsefulnessArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Src,
    Tgt,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<String>,
    /// Write the normalized corpus here (format from the extension).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the cleaning report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_LEN_RATIO)]
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitMode {
    Random,
    HeldOutDoc,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: SplitMode,
    /// Test fraction for random mode.
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Required for random mode.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated document ids held out for held-out-doc mode.
    #[arg(long, value_delimiter = ',')]
    pub held_docs: Vec<String>,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub test_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TextInput {
    /// Corpus (.tsv/.jsonl) or plain text with one sentence per line.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Corpus side to read.
    #[arg(long, value_enum, default_value_t = Side::Src)]
    pub side: Side,
}

#[derive(Debug, Args)]
pub struct TrainNgramArgs {
    #[command(flatten)]
    pub text: TextInput,
    #[arg(long, default_value_t = MAX_CONTEXT_LIMIT, value_parser = clap::value_parser!(u8).range(1..=MAX_CONTEXT_LIMIT as i64).map(usize::from))]
    pub max_context: usize,
    #[arg(long)]
    pub lowercase: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LabeledInput {
    /// TSV of text<TAB>label lines.
    #[arg(
        long = "in",
        conflicts_with = "from_corpus",
        required_unless_present = "from_corpus"
    )]
    pub input: Option<PathBuf>,
    /// Parallel corpus whose sides are labeled with --src-lang and --tgt-lang.
    #[arg(long, requires_all = ["src_lang", "tgt_lang"])]
    pub from_corpus: Option<PathBuf>,
    #[arg(long)]
    pub src_lang: Option<String>,
    #[arg(long)]
    pub tgt_lang: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainLangidArgs {
    #[command(flatten)]
    pub data: LabeledInput,
    /// Minimum posterior for a confident answer; below it the result is unknown.
    #[arg(long, default_value_t = wordsmith_core::langid::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenTyposArgs {
    #[command(flatten)]
    pub text: TextInput,
    #[arg(long)]
    pub seed: u64,
    /// Edits per corrupted word.
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    /// Take the typo alphabet from this lexicon instead of the input text.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// JSONL file of generated pairs.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Mean sentence BLEU of candidates against references, line by line.
    Bleu(BleuArgs),
    /// Mean sentence chrF of candidates against references, line by line.
    Chrf(ChrfArgs),
    /// Accuracy of the spell corrector on (misspelled, correct) pairs.
    Spell(EvalSpellArgs),
    /// Accuracy of a language identifier on labeled text.
    Langid(EvalLangidArgs),
}

#[derive(Debug, Args)]
pub struct PairedLines {
    #[arg(long)]
    pub cand: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
}

#[derive(Debug, Args)]
pub struct BleuArgs {
    #[command(flatten)]
    pub files: PairedLines,
    #[arg(long, default_value_t = DEFAULT_MAX_N, value_parser = clap::value_parser!(u8).range(1..=8).map(usize::from))]
    pub max_n: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ChrfArgs {
    #[command(flatten)]
    pub files: PairedLines,
    #[arg(long, default_value_t = DEFAULT_CHAR_N, value_parser = clap::value_parser!(u8).range(1..=12).map(usize::from))]
    pub char_n: usize,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct EvalSpellArgs {
    /// JSONL from gen-typos, or TSV of misspelled<TAB>correct lines.
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub lexicon: PathBuf,
    /// N-gram model used as the language-model term.
    #[arg(long)]
    pub ngram: Option<PathBuf>,
    #[arg(long, default_value_t = SpellConfig::default().max_dist)]
    pub max_dist: usize,
    #[arg(long, default_value_t = SpellConfig::default().k)]
    pub k: usize,
    #[arg(long, default_value_t = SpellConfig::default().edit_penalty)]
    pub edit_penalty: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct EvalLangidArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: LabeledInput,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    /// A score report from `eval bleu|chrf`, or one score per line.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub perfect_score: Option<f64>,
    #[arg(long)]
    pub perfect_fraction: Option<f64>,
    #[arg(long)]
    pub bimodality: Option<f64>,
    #[arg(long)]
    pub high_tail_score: Option<f64>,
    #[arg(long)]
    pub high_tail_fraction: Option<f64>,
    #[arg(long)]
    pub min_samples: Option<usize>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Translator outputs, one per line.
    #[arg(long)]
    pub outputs: PathBuf,
    #[arg(long)]
    pub toxic: PathBuf,
    #[arg(long)]
    pub clean: PathBuf,
    #[arg(long = "keyword")]
    pub keywords: Vec<String>,
    /// File with one keyword per line.
    #[arg(long)]
    pub keywords_file: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub ngram: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct UsefulnessArgs {
    /// JSONL of ratings.
    #[arg(long)]
    pub ratings: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Override the bind address from the config.
    #[arg(long)]
    pub bind: Option<String>,
}

/// A failed command, split by exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<wordsmith_core::Error> for Failure {
    fn from(e: wordsmith_core::Error) -> Self {
        Failure::Data(e.into())
    }
}

/// What a successful command produced.
#[derive(Debug)]
pub struct Output {
    pub json: String,
    pub out: Option<PathBuf>,
    pub summary: String,
}

impl Output {
    fn new<T: Serialize>(
        value: &T,
        out: Option<PathBuf>,
        summary: String,
    ) -> Result<Self, Failure> {
        Ok(Output {
            json: to_json(value)?,
            out,
            summary,
        })
    }
}

/// Pretty JSON with a trailing newline, the form every subcommand emits.
pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(output) => match emit(&output) {
            Ok(()) => {
                eprintln!("{}", output.summary);
                0
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                2
            }
        },
        Err(failure) => {
            match &failure {
                Failure::Usage(msg) => {
                    eprintln!("error: {msg}\n\nFor more information, try '--help'.")
                }
                Failure::Data(e) => eprintln!("error: {e:#}"),
            }
            failure.exit_code()
        }
    }
}

fn emit(output: &Output) -> anyhow::Result<()> {
    match &output.out {
        Some(path) => write_file(path, &output.json),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(output.json.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn execute(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Clean(a) => cmd_clean(a),
        Command::Split(a) => cmd_split(a),
        Command::TrainNgram(a) => cmd_train_ngram(a),
        Command::TrainLangid(a) => cmd_train_langid(a),
        Command::GenTypos(a) => cmd_gen_typos(a),
        Command::Eval(EvalCommand::Bleu(a)) => {
            cmd_eval_metric(Metric::Bleu { max_n: a.max_n }, &a.files, a.out)
        }
        Command::Eval(EvalCommand::Chrf(a)) => cmd_eval_metric(
            Metric::Chrf {
                char_n: a.char_n,
                beta: a.beta,
            },
            &a.files,
            a.out,
        ),
        Command::Eval(EvalCommand::Spell(a)) => cmd_eval_spell(a),
        Command::Eval(EvalCommand::Langid(a)) => cmd_eval_langid(a),
        Command::DiagMemorization(a) => cmd_diag(a),
        Command::ScanContamination(a) => cmd_scan(a),
        Command::UsefulnessReport(a) => cmd_usefulness(a),
        Command::Serve(a) => cmd_serve(a),
    }
}

fn read_file(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, content: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn corpus_format(path: &Path) -> Option<CorpusFormat> {
    CorpusFormat::from_path(path).ok()
}

fn read_corpus(path: &Path) -> Result<Corpus, Failure> {
    let format = corpus_format(path).ok_or_else(|| {
        Failure::Usage(format!("{} is not a .tsv or .jsonl corpus", path.display()))
    })?;
    Ok(ingest(path, format).with_context(|| format!("reading corpus {}", path.display()))?)
}

fn write_corpus_file(corpus: &Corpus, path: &Path) -> Result<(), Failure> {
    let format = corpus_format(path).ok_or_else(|| {
        Failure::Usage(format!(
            "{}: output must end in .tsv or .jsonl",
            path.display()
        ))
    })?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    write_corpus(corpus, path, format)?;
    Ok(())
}

/// Non-empty lines of a text file, trimmed.
fn read_nonempty_lines(path: &Path) -> anyhow::Result<Vec<String>> {
    Ok(read_file(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

/// Sentences from one side of a corpus, or the lines of a plain text file.
pub fn read_sentences(input: &TextInput) -> Result<Vec<String>, Failure> {
    match corpus_format(&input.input) {
        Some(_) => {
            let corpus = read_corpus(&input.input)?;
            Ok(match input.side {
                Side::Src => corpus.sources(),
                Side::Tgt => corpus.targets(),
            })
        }
        None => Ok(read_nonempty_lines(&input.input)?),
    }
}

/// (text, label) examples from a labeled TSV or a labeled parallel corpus.
pub fn read_labeled(input: &LabeledInput) -> Result<Vec<(String, String)>, Failure> {
    if let Some(path) = &input.from_corpus {
        let (src, tgt) = match (&input.src_lang, &input.tgt_lang) {
            (Some(s), Some(t)) => (s, t),
            _ => {
                return Err(Failure::Usage(
                    "--from-corpus needs --src-lang and --tgt-lang".into(),
                ))
            }
        };
        let corpus = read_corpus(path)?;
        let mut out = Vec::with_capacity(corpus.len() * 2);
        for pair in &corpus.pairs {
            out.push((pair.src.clone(), src.clone()));
            out.push((pair.tgt.clone(), tgt.clone()));
        }
        return Ok(out);
    }
    let path = input
        .input
        .as_ref()
        .ok_or_else(|| Failure::Usage("either --in or --from-corpus is required".into()))?;
    let mut out = Vec::new();
    for (i, line) in read_file(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (text, label) = line.rsplit_once('\t').ok_or_else(|| {
            anyhow!(
                "{}: line {}: expected text<TAB>label",
                path.display(),
                i + 1
            )
        })?;
        out.push((text.to_string(), label.trim().to_string()));
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IngestSummary {
    pub name: String,
    pub pairs: usize,
    pub sources: BTreeMap<String, usize>,
    pub documents: usize,
    pub src_tokens: usize,
    pub tgt_tokens: usize,
}

pub fn ingest_summary(corpus: &Corpus) -> IngestSummary {
    let mut sources = BTreeMap::new();
    for pair in &corpus.pairs {
        *sources.entry(pair.source_id.clone()).or_insert(0) += 1;
    }
    let documents: BTreeSet<&str> = corpus
        .pairs
        .iter()
        .filter_map(|p| p.doc_id.as_deref())
        .collect();
    let count = |f: fn(&wordsmith_core::SentencePair) -> &str| -> usize {
        corpus
            .pairs
            .iter()
            .map(|p| wordsmith_core::text::token_count(f(p)))
            .sum()
    };
    IngestSummary {
        name: corpus.name.clone(),
        pairs: corpus.len(),
        sources,
        documents: documents.len(),
        src_tokens: count(|p| &p.src),
        tgt_tokens: count(|p| &p.tgt),
    }
}

fn cmd_ingest(a: IngestArgs) -> Result<Output, Failure> {
    let format = match &a.format {
        Some(f) => f
            .parse()
            .map_err(|e: wordsmith_core::Error| Failure::Usage(e.to_string()))?,
        None => corpus_format(&a.input).ok_or_else(|| {
            Failure::Usage(format!(
                "cannot infer the format of {}; pass --format",
                a.input.display()
            ))
        })?,
    };
    let corpus = ingest(&a.input, format)
        .with_context(|| format!("reading corpus {}", a.input.display()))?;
    if let Some(out) = &a.out {
        write_corpus_file(&corpus, out)?;
    }
    let summary = ingest_summary(&corpus);
    let line = format!(
        "ingested {} pairs from {}",
        summary.pairs,
        a.input.display()
    );
    Output::new(&summary, None, line)
}

fn cmd_clean(a: CleanArgs) -> Result<Output, Failure> {
    if a.max_ratio.is_nan() || a.max_ratio < 1.0 {
        return Err(Failure::Usage(format!(
            "--max-ratio must be at least 1, got {}",
            a.max_ratio
        )));
    }
    let corpus = read_corpus(&a.input)?;
    let (cleaned, report) = clean(&corpus, a.max_ratio);
    write_corpus_file(&cleaned, &a.out)?;
    let json = to_json(&report)?;
    if let Some(path) = &a.report {
        write_file(path, &json)?;
    }
    Ok(Output {
        json,
        out: None,
        summary: format!("kept {} of {} pairs", report.kept, report.input_size()),
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SplitSummary {
    pub spec: SplitSpec,
    pub train: usize,
    pub test: usize,
}

fn cmd_split(a: SplitArgs) -> Result<Output, Failure> {
    let spec = match a.mode {
        SplitMode::Random => {
            let seed = a
                .seed
                .ok_or_else(|| Failure::Usage("--seed is required for --mode random".into()))?;
            let fraction = a
                .fraction
                .ok_or_else(|| Failure::Usage("--fraction is required for --mode random".into()))?;
            SplitSpec::RandomFraction {
                test_fraction: fraction,
                seed,
            }
        }
        SplitMode::HeldOutDoc => SplitSpec::HeldOutDoc {
            held_doc_ids: a
                .held_docs
                .iter()
                .map(|d| d.trim().to_string())
                .filter(|d| !d.is_empty())
                .collect(),
        },
    };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let corpus = read_corpus(&a.input)?;
    let (train, test) = split(&corpus, &spec)?;
    write_corpus_file(&train, &a.train_out)?;
    write_corpus_file(&test, &a.test_out)?;
    let summary = SplitSummary {
        spec,
        train: train.len(),
        test: test.len(),
    };
    let line = format!(
        "split into {} train and {} test pairs",
        summary.train, summary.test
    );
    Output::new(&summary, None, line)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NgramSummary {
    pub sentences: usize,
    pub max_context: usize,
    pub lowercase: bool,
    pub vocab_size: usize,
    pub contexts: usize,
    pub total_tokens: u64,
}

fn cmd_train_ngram(a: TrainNgramArgs) -> Result<Output, Failure> {
    let sentences = read_sentences(&a.text)?;
    let model = NgramModel::train(
        &sentences,
        NgramOptions {
            max_context: a.max_context,
            lowercase: a.lowercase,
        },
    )?;
    write_file(&a.out, &model.to_json()?)?;
    let summary = NgramSummary {
        sentences: sentences.len(),
        max_context: model.max_context(),
        lowercase: model.lowercase(),
        vocab_size: model.vocab().len(),
        contexts: model.context_count(),
        total_tokens: model.total_tokens(),
    };
    let line = format!(
        "trained n-gram model on {} sentences ({} word types)",
        summary.sentences, summary.vocab_size
    );
    Output::new(&summary, None, line)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LangidSummary {
    pub examples: BTreeMap<String, usize>,
    pub vocab_size: usize,
    pub rejection_threshold: f64,
}

fn cmd_train_langid(a: TrainLangidArgs) -> Result<Output, Failure> {
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(Failure::Usage(format!(
            "--threshold must be in [0, 1], got {}",
            a.threshold
        )));
    }
    let labeled = read_labeled(&a.data)?;
    let model = train_langid(&labeled, a.threshold)?;
    write_file(&a.out, &model.to_json()?)?;
    let mut examples = BTreeMap::new();
    for (_, label) in &labeled {
        *examples.entry(label.clone()).or_insert(0) += 1;
    }
    let summary = LangidSummary {
        examples,
        vocab_size: model.vocab_size(),
        rejection_threshold: model.rejection_threshold,
    };
    let line = format!("trained language identifier on {} examples", labeled.len());
    Output::new(&summary, None, line)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TyposSummary {
    pub seed: u64,
    pub pairs: usize,
    pub unchanged: usize,
    pub edits: usize,
}

fn cmd_gen_typos(a: GenTyposArgs) -> Result<Output, Failure> {
    if !(a.rate.is_finite() && a.rate >= 0.0) {
        return Err(Failure::Usage(format!(
            "--rate must be a non-negative number, got {}",
            a.rate
        )));
    }
    let sentences = read_sentences(&a.text)?;
    let mut model = match &a.lexicon {
        Some(path) => TypoModel::from_lexicon(&Lexicon::load(path)?)?,
        None => TypoModel::from_sentences(&sentences)?,
    };
    model.rate = a.rate;
    let pairs = gen_typo_pairs(&sentences, &model, a.seed)?;
    let mut jsonl = String::new();
    for pair in &pairs {
        jsonl.push_str(&serde_json::to_string(pair).context("serializing typo pair")?);
        jsonl.push('\n');
    }
    write_file(&a.out, &jsonl)?;
    let summary = TyposSummary {
        seed: a.seed,
        pairs: pairs.len(),
        unchanged: pairs.iter().filter(|p| p.unchanged).count(),
        edits: pairs.iter().map(|p| p.edits.len()).sum(),
    };
    let line = format!("generated {} typo pairs", summary.pairs);
    Output::new(&summary, None, line)
}

fn read_lines(path: &Path) -> anyhow::Result<Vec<String>> {
    Ok(read_file(path)?.lines().map(String::from).collect())
}

fn cmd_eval_metric(metric: Metric, files: &PairedLines, out: OutArg) -> Result<Output, Failure> {
    let cands = read_lines(&files.cand)?;
    let refs = read_lines(&files.reference)?;
    let report = score_corpus(&metric, &cands, &refs)?;
    let line = format!(
        "{} mean {:.2} ± {:.2} over {} segments",
        report.metric, report.mean, report.std, report.n
    );
    Output::new(&report, out.out, line)
}

/// (misspelled, correct) pairs from gen-typos JSONL or a two-column TSV.
pub fn read_spell_pairs(path: &Path) -> Result<Vec<(String, String)>, Failure> {
    let content = read_file(path)?;
    let is_jsonl = path.extension().is_some_and(|e| e == "jsonl");
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if is_jsonl {
            let pair: TypoPair = serde_json::from_str(line)
                .with_context(|| format!("{}: line {}", path.display(), i + 1))?;
            out.push((pair.incorrect, pair.correct));
        } else {
            let (bad, good) = line.split_once('\t').ok_or_else(|| {
                anyhow!(
                    "{}: line {}: expected misspelled<TAB>correct",
                    path.display(),
                    i + 1
                )
            })?;
            out.push((bad.to_string(), good.to_string()));
        }
    }
    Ok(out)
}

fn cmd_eval_spell(a: EvalSpellArgs) -> Result<Output, Failure> {
    if a.k == 0 {
        return Err(Failure::Usage("--k must be positive".into()));
    }
    let pairs = read_spell_pairs(&a.pairs)?;
    let lexicon = Lexicon::load(&a.lexicon)?;
    let lm = a.ngram.as_ref().map(NgramModel::load).transpose()?;
    let cfg = SpellConfig {
        max_dist: a.max_dist,
        k: a.k,
        edit_penalty: a.edit_penalty,
    };
    let report = evaluate_corrector(&pairs, &lexicon, lm.as_ref(), &cfg)?;
    let line = format!(
        "spell top-1 {:.1}%, top-3 {:.1}% on {} pairs",
        100.0 * report.accuracy_top1,
        100.0 * report.accuracy_top3,
        report.pairs
    );
    Output::new(&report, a.out.out, line)
}

fn cmd_eval_langid(a: EvalLangidArgs) -> Result<Output, Failure> {
    let model = LangIdModel::load(&a.model)?;
    let labeled = read_labeled(&a.data)?;
    let report = evaluate_langid(&model, &labeled)?;
    let line = format!(
        "langid accuracy {:.1}% on {} examples ({:.1}% unknown)",
        100.0 * report.accuracy,
        report.n,
        100.0 * report.unknown_rate
    );
    Output::new(&report, a.out.out, line)
}

fn read_scores(path: &Path) -> anyhow::Result<Vec<f64>> {
    let content = read_file(path)?;
    if content.trim_start().starts_with('{') {
        let report: ScoreReport = serde_json::from_str(&content)
            .with_context(|| format!("{}: not a score report", path.display()))?;
        return Ok(report.scores);
    }
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .with_context(|| format!("{}: line {}: not a number", path.display(), i + 1))
        })
        .collect()
}

fn cmd_diag(a: DiagArgs) -> Result<Output, Failure> {
    let mut th = DiagnosticThresholds::default();
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut th.perfect_score, a.perfect_score);
    set(&mut th.perfect_fraction, a.perfect_fraction);
    set(&mut th.bimodality, a.bimodality);
    set(&mut th.high_tail_score, a.high_tail_score);
    set(&mut th.high_tail_fraction, a.high_tail_fraction);
    if let Some(m) = a.min_samples {
        th.min_samples = m;
    }
    let scores = read_scores(&a.scores)?;
    let diag = memorization_diagnostic(&scores, &th)?;
    let line = format!(
        "{} scores, {:.1}% perfect, bimodality {:.3}: {}",
        diag.n,
        100.0 * diag.perfect_fraction,
        diag.bimodality_coefficient,
        if diag.memorization_flag {
            "memorization suspected"
        } else {
            "no memorization signal"
        }
    );
    Output::new(&diag, a.out.out, line)
}

fn cmd_scan(a: ScanArgs) -> Result<Output, Failure> {
    let mut keywords = a.keywords.clone();
    if let Some(path) = &a.keywords_file {
        keywords.extend(read_nonempty_lines(path)?);
    }
    if a.ngram < 2 {
        return Err(Failure::Usage(format!(
            "--ngram must be at least 2, got {}",
            a.ngram
        )));
    }
    let outputs = read_lines(&a.outputs)?;
    let toxic = read_nonempty_lines(&a.toxic)?;
    let clean_corpus = read_nonempty_lines(&a.clean)?;
    let report = contamination_scan(&outputs, &toxic, &clean_corpus, &keywords, a.ngram)?;
    let line = format!(
        "{} of {} outputs flagged",
        report.flagged_count,
        report.records.len()
    );
    Output::new(&report, a.out.out, line)
}

fn cmd_usefulness(a: UsefulnessArgs) -> Result<Output, Failure> {
    let content = read_file(&a.ratings)?;
    let mut labels = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rating: Rating = serde_json::from_str(line)
            .with_context(|| format!("{}: line {}", a.ratings.display(), i + 1))?;
        labels.push(rating.label);
    }
    let hist = usefulness_histogram(&labels);
    let line = format!("{} ratings", hist.total);
    Output::new(&hist, a.out.out, line)
}

fn cmd_serve(a: ServeArgs) -> Result<Output, Failure> {
    let mut config =
        wordsmith_service::ServiceConfig::load(&a.config).map_err(|e| Failure::Data(e.into()))?;
    if let Some(bind) = a.bind {
        config.bind = bind;
    }
    let runtime = tokio::runtime::Runtime::new().context("starting the async runtime")?;
    runtime
        .block_on(wordsmith_service::serve(config))
        .map_err(|e| Failure::Data(e.into()))?;
    Ok(Output {
        json: "{\"status\": \"stopped\"}\n".into(),
        out: None,
        summary: "server stopped".into(),
    })
}
