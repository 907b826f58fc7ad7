//! Model training: the joint pair n-gram from a romanization lexicon,
//! and character or word language models from plain corpora.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use serde::Serialize;
use serde_json::json;

use lipi_core::align::{self, LexiconEntry};
use lipi_core::ngram::{arpa, train_katz, train_witten_bell, CountTable, NgramModel};
use lipi_core::scriptdata::normalize;

use crate::common::{self, Global};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothingArg {
    WittenBell,
    Katz,
}

fn train_model(table: &CountTable, smoothing: SmoothingArg, gt_max: u32) -> Result<NgramModel> {
    let model = match smoothing {
        SmoothingArg::WittenBell => train_witten_bell(table),
        SmoothingArg::Katz => train_katz(table, gt_max),
    };
    model.map_err(|e| anyhow!("train model: {e}"))
}

#[derive(Debug, clap::Args, Serialize)]
pub struct TrainPairArgs {
    /// Romanization lexicon: `native<TAB>romanization<TAB>attestations`.
    #[arg(long)]
    lexicon: PathBuf,

    /// Pair model order.
    #[arg(long, default_value_t = 6)]
    order: usize,

    #[arg(long, value_enum, default_value_t = SmoothingArg::WittenBell)]
    smoothing: SmoothingArg,

    /// Katz only: Good-Turing discounting applies to counts up to this.
    #[arg(long, default_value_t = 5)]
    gt_max: u32,

    /// Alignment iteration cap.
    #[arg(long, default_value_t = 50)]
    em_max_iter: usize,

    /// Relative log-likelihood change that stops alignment early.
    #[arg(long, default_value_t = 1e-6)]
    em_tol: f64,

    /// Optional dump of the final alignments in pair-symbol text,
    /// one lexicon entry per line.
    #[arg(long)]
    alignments: Option<PathBuf>,

    /// Output model file.
    #[arg(long)]
    out: PathBuf,
}

pub fn train_pair(args: &TrainPairArgs, global: &Global) -> Result<()> {
    let rows = common::read_lexicon(&args.lexicon)?;
    let mut entries = Vec::new();
    let mut skipped = 0usize;
    for row in &rows {
        let latin = row.latin.as_deref().unwrap_or("");
        let usable = !row.native.is_empty()
            && !latin.is_empty()
            && latin.chars().all(|c| c.is_ascii_lowercase());
        if usable {
            entries.push(LexiconEntry::new(
                row.native.clone(),
                latin.to_string(),
                row.count.max(1),
            ));
        } else {
            skipped += 1;
        }
    }
    if entries.is_empty() {
        bail!(
            "{}: no usable rows (need `native<TAB>romanization<TAB>attestations` with an a-z \
             romanization)",
            args.lexicon.display()
        );
    }
    if skipped > 0 {
        eprintln!("skipped {skipped} rows without a usable a-z romanization");
    }

    let alignment = align::em_train(&entries, args.em_max_iter, args.em_tol)
        .map_err(|e| anyhow!("alignment training: {e}"))?;
    let mut aligned: Vec<(Vec<String>, u64)> = Vec::with_capacity(entries.len());
    let mut dump = Vec::new();
    for entry in &entries {
        let path = align::viterbi_align(entry, &alignment)
            .map_err(|e| anyhow!("align {}/{}: {e}", entry.native, entry.latin))?;
        if args.alignments.is_some() {
            dump.push(align::format_pair_sequence(&path));
        }
        aligned.push((
            path.iter().map(|p| p.to_string()).collect(),
            entry.attestations,
        ));
    }
    if let Some(path) = &args.alignments {
        common::write_lines(path, &dump)?;
    }

    let weighted: Vec<(&[String], u64)> = aligned
        .iter()
        .map(|(seq, w)| (seq.as_slice(), *w))
        .collect();
    let table = CountTable::from_weighted(&weighted, args.order)
        .map_err(|e| anyhow!("count pair n-grams: {e}"))?;
    let model = train_model(&table, args.smoothing, args.gt_max)?;
    common::write_text(&args.out, &arpa::to_arpa(&model))?;

    let trace = alignment.log2_likelihood_trace();
    eprintln!(
        "trained order-{} pair model on {} entries ({} alignment iterations)",
        args.order,
        entries.len(),
        trace.len()
    );
    common::write_echo(
        global,
        "train-pair",
        args,
        json!({
            "entries": entries.len(),
            "rows_skipped": skipped,
            "em_iterations": trace.len(),
            "em_converged": alignment.converged(),
            "final_log2_likelihood": trace.last(),
            "model_warnings": model.warnings(),
        }),
        &args.out,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitArg {
    /// Each code point is a symbol (whitespace included).
    Char,
    /// Whitespace-delimited tokens are symbols.
    Word,
}

#[derive(Debug, clap::Args, Serialize)]
pub struct TrainLmArgs {
    /// Training corpus, one sequence per line; blank lines are skipped.
    #[arg(long)]
    corpus: PathBuf,

    /// How a line becomes a symbol sequence.
    #[arg(long, value_enum)]
    unit: UnitArg,

    #[arg(long, default_value_t = 3)]
    order: usize,

    /// Defaults to witten-bell for --unit char and katz for --unit word.
    #[arg(long, value_enum)]
    smoothing: Option<SmoothingArg>,

    /// Katz only: Good-Turing discounting applies to counts up to this.
    #[arg(long, default_value_t = 5)]
    gt_max: u32,

    /// Output model file.
    #[arg(long)]
    out: PathBuf,
}

pub fn train_lm(args: &TrainLmArgs, global: &Global) -> Result<()> {
    let lines = common::read_lines(&args.corpus)?;
    let sequences: Vec<Vec<String>> = lines
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let line = normalize(l);
            match args.unit {
                UnitArg::Char => line.chars().map(String::from).collect(),
                UnitArg::Word => line.split_whitespace().map(str::to_string).collect(),
            }
        })
        .collect();
    if sequences.is_empty() {
        bail!("{}: corpus has no non-blank lines", args.corpus.display());
    }
    let smoothing = args.smoothing.unwrap_or(match args.unit {
        UnitArg::Char => SmoothingArg::WittenBell,
        UnitArg::Word => SmoothingArg::Katz,
    });
    let table = CountTable::from_sequences(&sequences, args.order)
        .map_err(|e| anyhow!("count n-grams: {e}"))?;
    let model = train_model(&table, smoothing, args.gt_max)?;
    common::write_text(&args.out, &arpa::to_arpa(&model))?;
    eprintln!(
        "trained order-{} model over {} symbols from {} sequences",
        args.order,
        model.vocab().len(),
        sequences.len()
    );
    common::write_echo(
        global,
        "train-lm",
        args,
        json!({
            "sequences": sequences.len(),
            "vocab": model.vocab().len(),
            "smoothing_resolved": smoothing,
            "model_warnings": model.warnings(),
        }),
        &args.out,
    )
}
