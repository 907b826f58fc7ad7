//! Decoding: batch word transliteration, noisy-channel sentence
//! decoding, and romanized corpus simulation.

use std::path::PathBuf;

use anyhow::{anyhow, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use lipi_core::sentence::{self, decode_sentence, tokenize_romanized, ParallelMode};
use lipi_core::simulate::{rare_char_replace, romanize_corpus, SimMode, SimulationConfig};
use lipi_core::translit::Direction;

use crate::common::{self, Global};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    Latin2native,
    Native2latin,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Direction {
        match d {
            DirectionArg::Latin2native => Direction::LatinToNative,
            DirectionArg::Native2latin => Direction::NativeToLatin,
        }
    }
}

#[derive(Debug, clap::Args, Serialize)]
pub struct TranslitArgs {
    /// Pair model file.
    #[arg(long)]
    model: PathBuf,

    /// Which side of the pair model is consumed.
    #[arg(long, value_enum)]
    direction: DirectionArg,

    /// Hypotheses per word.
    #[arg(long, default_value_t = 1)]
    k: usize,

    /// `exact`, or a beam width.
    #[arg(long, default_value = "64")]
    beam: String,

    /// Most consecutive insertion pairs the search may take.
    #[arg(long, default_value_t = 3)]
    max_insertions: usize,

    /// Input words, one per line.
    #[arg(long)]
    input: PathBuf,

    /// Output rows `input<TAB>rank<TAB>output<TAB>log2_score`.
    #[arg(long)]
    out: PathBuf,
}

pub fn translit(args: &TranslitArgs, global: &Global) -> Result<()> {
    let decoder = common::load_decoder(
        &args.model,
        args.direction.into(),
        args.max_insertions,
        &args.beam,
    )?;
    let words: Vec<String> = common::read_lines(&args.input)?
        .into_iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| match args.direction {
            DirectionArg::Latin2native => l.trim().to_lowercase(),
            DirectionArg::Native2latin => l.trim().to_string(),
        })
        .collect();

    let decoded: Vec<_> = words
        .par_iter()
        .map(|w| decoder.transliterate(w, args.k))
        .collect();

    let mut rows = Vec::new();
    let mut skipped = 0usize;
    for (word, result) in words.iter().zip(decoded) {
        match result {
            Ok(list) => {
                for (rank, hyp) in list.hypotheses.iter().enumerate() {
                    rows.push(format!(
                        "{word}\t{}\t{}\t{}",
                        rank + 1,
                        hyp.output,
                        hyp.log2_score
                    ));
                }
            }
            Err(e) => {
                skipped += 1;
                eprintln!("skipping `{word}`: {e}");
            }
        }
    }
    common::write_lines(&args.out, &rows)?;
    eprintln!(
        "decoded {} of {} words ({} rows)",
        words.len() - skipped,
        words.len(),
        rows.len()
    );
    common::write_echo(
        global,
        "translit",
        args,
        json!({
            "words_in": words.len(),
            "words_decoded": words.len() - skipped,
            "words_skipped": skipped,
            "rows": rows.len(),
        }),
        &args.out,
    )
}

#[derive(Debug, clap::Args, Serialize)]
pub struct DecodeSentencesArgs {
    /// Pair model file, decoded latin-to-native per word.
    #[arg(long)]
    pair_model: PathBuf,

    /// Word model file scoring native token sequences.
    #[arg(long)]
    word_lm: PathBuf,

    /// Candidate transliterations per word.
    #[arg(long, default_value_t = 8)]
    k: usize,

    /// Weight on the word-model score against the channel score.
    #[arg(long, default_value_t = 1.0)]
    lm_weight: f64,

    /// `exact`, or a beam width.
    #[arg(long, default_value = "64")]
    beam: String,

    /// Most consecutive insertion pairs the search may take.
    #[arg(long, default_value_t = 3)]
    max_insertions: usize,

    /// Romanized sentences, one per line.
    #[arg(long)]
    input: PathBuf,

    /// Output native sentences, one per line.
    #[arg(long)]
    out: PathBuf,
}

pub fn decode_sentences(args: &DecodeSentencesArgs, global: &Global) -> Result<()> {
    let decoder = common::load_decoder(
        &args.pair_model,
        Direction::LatinToNative,
        args.max_insertions,
        &args.beam,
    )?;
    let lm = common::load_model(&args.word_lm)?;
    let lines = common::read_lines(&args.input)?;

    let decoded: Vec<(String, usize)> = lines
        .par_iter()
        .map(|line| {
            let tokens = tokenize_romanized(line);
            decode_sentence(&tokens, &decoder, &lm, args.k, args.lm_weight)
                .map(|d| (d.text, d.fallbacks.len()))
                .map_err(|e| anyhow!("decode `{line}`: {e}"))
        })
        .collect::<Result<_>>()?;

    let fallback_words: usize = decoded.iter().map(|(_, n)| n).sum();
    let out_lines: Vec<String> = decoded.into_iter().map(|(text, _)| text).collect();
    common::write_lines(&args.out, &out_lines)?;
    eprintln!(
        "decoded {} sentences ({} words fell back to pass-through)",
        out_lines.len(),
        fallback_words
    );
    common::write_echo(
        global,
        "decode-sentences",
        args,
        json!({ "lines": out_lines.len(), "fallback_words": fallback_words }),
        &args.out,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    /// Decode each word type once; identical instances romanize identically.
    Viterbi,
    /// Sample every word instance from the softmax over its k-best.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParallelArg {
    /// Keep only a-z runs on the romanized side, one space between them.
    Whitespace,
    /// Keep everything, mapping native punctuation and digits to Latin.
    FullString,
}

#[derive(Debug, clap::Args, Serialize)]
pub struct SimulateArgs {
    /// Script profile file.
    #[arg(long)]
    profile: PathBuf,

    /// Lexicon whose native words define which characters get romanized.
    #[arg(long)]
    lexicon: PathBuf,

    /// Pair model file, decoded native-to-latin.
    #[arg(long)]
    model: PathBuf,

    /// Native sentences, one per line.
    #[arg(long)]
    input: PathBuf,

    /// Romanized output, one line per input line per copy.
    #[arg(long)]
    out: PathBuf,

    #[arg(long, value_enum, default_value_t = ModeArg::Sampled)]
    mode: ModeArg,

    /// Whole-corpus repetitions; sampled mode re-samples each copy.
    #[arg(long, default_value_t = 1)]
    copies: u64,

    /// Candidates per word in sampled mode.
    #[arg(long, default_value_t = 8)]
    k: usize,

    /// Characters rarer than this in the romanized output become U+FFFD;
    /// 0 disables the replacement.
    #[arg(long, default_value_t = 2)]
    min_char_count: u64,

    /// Evaluation corpus rewritten with the same replacement set.
    #[arg(long, requires = "eval_out")]
    eval_in: Option<PathBuf>,

    /// Where the rewritten evaluation corpus goes.
    #[arg(long, requires = "eval_in")]
    eval_out: Option<PathBuf>,

    /// `exact`, or a beam width.
    #[arg(long, default_value = "64")]
    beam: String,

    /// Most consecutive insertion pairs the search may take.
    #[arg(long, default_value_t = 3)]
    max_insertions: usize,

    /// Emit `romanized<TAB>native` sentence pairs instead of a plain
    /// romanized corpus; ignores --mode, --copies, and --min-char-count.
    #[arg(long, value_enum)]
    parallel: Option<ParallelArg>,

    /// JSON summary path; defaults to `<out>.summary.json`.
    #[arg(long)]
    summary: Option<PathBuf>,
}

pub fn simulate(args: &SimulateArgs, global: &Global) -> Result<()> {
    let (profile, _rows) = common::load_profile_with_lexicon(&args.profile, &args.lexicon)?;
    let decoder = common::load_decoder(
        &args.model,
        Direction::NativeToLatin,
        args.max_insertions,
        &args.beam,
    )?;
    let lines = common::read_lines(&args.input)?;

    let summary = match args.parallel {
        Some(mode) => {
            let mode = match mode {
                ParallelArg::Whitespace => ParallelMode::Whitespace,
                ParallelArg::FullString => ParallelMode::FullString,
            };
            let corpus = sentence::simulate_parallel_corpus(
                &lines,
                &decoder,
                &profile,
                mode,
                args.k,
                global.seed,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let rows: Vec<String> = corpus
                .pairs
                .iter()
                .map(|(rom, nat)| format!("{rom}\t{nat}"))
                .collect();
            common::write_lines(&args.out, &rows)?;
            json!({
                "lines_in": lines.len(),
                "lines_out": rows.len(),
                "skipped_words": corpus.skipped_words,
            })
        }
        None => {
            let cfg = SimulationConfig {
                mode: match args.mode {
                    ModeArg::Viterbi => SimMode::Viterbi,
                    ModeArg::Sampled => SimMode::Sampled,
                },
                copies: args.copies,
                k: args.k,
                min_char_count: args.min_char_count,
                seed: global.seed,
            };
            let (mut romanized, report) =
                romanize_corpus(&lines, &decoder, &profile, &cfg).map_err(|e| anyhow!("{e}"))?;
            let mut replacement = json!(null);
            if args.min_char_count > 0 {
                let eval_lines = match &args.eval_in {
                    Some(path) => common::read_lines(path)?,
                    None => Vec::new(),
                };
                let (train, eval, rep) =
                    rare_char_replace(&romanized, &eval_lines, args.min_char_count)
                        .map_err(|e| anyhow!("{e}"))?;
                romanized = train;
                if let Some(path) = &args.eval_out {
                    common::write_lines(path, &eval)?;
                }
                replacement = json!({
                    "replaced_types": rep.replaced_types,
                    "train_replacements": rep.train_replacements,
                    "eval_replacements": rep.eval_replacements,
                });
            }
            common::write_lines(&args.out, &romanized)?;
            json!({
                "lines_in": report.lines_in,
                "lines_out": report.lines_out,
                "skipped_words": report.skipped_words,
                "replacement": replacement,
            })
        }
    };

    let summary_path = args
        .summary
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.summary.json", args.out.display())));
    common::write_text(
        &summary_path,
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    eprintln!("simulate summary written to {}", summary_path.display());
    common::write_echo(global, "simulate", args, summary, &args.out)
}
