//! `lipi`: one binary covering the whole pipeline, from raw wiki pages
//! to trained transliteration models, decoded text, simulated romanized
//! corpora, and evaluation reports.
//!
//! Every subcommand is a deterministic wrapper over the library: the
//! same flags, inputs, and seed always produce the same output bytes,
//! and each run writes a config echo file beside its main output.

use std::process::ExitCode;

use clap::Parser;

mod common;
mod decode;
mod prep;
mod score;
mod train;

#[derive(Debug, Parser)]
#[command(
    name = "lipi",
    version,
    about = "Transliteration toolkit: corpus filtering, pair-model training, decoding, \
             simulation, and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: common::Global,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Filter wiki pages to a clean native-script sentence corpus.
    FilterCorpus(prep::FilterCorpusArgs),
    /// Collect frequent native word types from a sentence corpus.
    SampleLexicon(prep::SampleLexiconArgs),
    /// Split a lexicon into stem-disjoint train/dev/test parts.
    SplitLexicon(prep::SplitLexiconArgs),
    /// Align a romanization lexicon and train the joint pair model.
    TrainPair(train::TrainPairArgs),
    /// Transliterate words in batch with a trained pair model.
    Translit(decode::TranslitArgs),
    /// Train a character or word model from a plain corpus.
    TrainLm(train::TrainLmArgs),
    /// Decode romanized sentences with per-word candidates and a word model.
    DecodeSentences(decode::DecodeSentencesArgs),
    /// Romanize a native corpus for model training or parallel data.
    Simulate(decode::SimulateArgs),
    /// Score hypotheses against references; optionally score a character model.
    Eval(score::EvalArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.jobs)
            .build_global();
        if let Err(e) = pool {
            eprintln!("error: set up {} workers: {e}", cli.global.jobs);
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::FilterCorpus(args) => prep::filter_corpus(args, &cli.global),
        Command::SampleLexicon(args) => prep::sample_lexicon(args, &cli.global),
        Command::SplitLexicon(args) => prep::split_lexicon(args, &cli.global),
        Command::TrainPair(args) => train::train_pair(args, &cli.global),
        Command::Translit(args) => decode::translit(args, &cli.global),
        Command::TrainLm(args) => train::train_lm(args, &cli.global),
        Command::DecodeSentences(args) => decode::decode_sentences(args, &cli.global),
        Command::Simulate(args) => decode::simulate(args, &cli.global),
        Command::Eval(args) => score::eval(args, &cli.global),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
