//! Corpus preparation: page and sentence filtering, lexicon sampling,
//! and the stem-disjoint lexicon split.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use lipi_core::align::LexiconEntry;
use lipi_core::corpus::{self, FilterThresholds, PageFlags, PageRecord, SplitSizes};

use crate::common::{self, Global, LexiconRow};

#[derive(Debug, clap::Args, Serialize)]
pub struct FilterCorpusArgs {
    /// Script profile file.
    #[arg(long)]
    profile: PathBuf,

    /// Input pages, one JSON record per line.
    #[arg(long)]
    pages: PathBuf,

    /// Output for kept sentences, one per line.
    #[arg(long)]
    sentences: PathBuf,

    /// Output for `page_id<TAB>section_title<TAB>sentence_index` rows,
    /// one per kept sentence.
    #[arg(long)]
    metadata: PathBuf,

    /// Drop section titles whose aggregate outside-character fraction
    /// exceeds this (strictly).
    #[arg(long, default_value_t = 0.20)]
    section_outside_max: f64,

    /// Keep sentences with at most this fraction of outside characters.
    #[arg(long, default_value_t = 0.10)]
    sent_outside_max: f64,

    /// Keep sentences with at least this fraction of native characters.
    #[arg(long, default_value_t = 0.85)]
    sent_native_min: f64,

    /// Keep sentences with at least this fraction of native words.
    #[arg(long, default_value_t = 0.85)]
    sent_word_native_min: f64,

    /// Recursively halve sentences longer than --split-token-max tokens.
    #[arg(long, default_value_t = false)]
    split_long: bool,

    /// Token count above which --split-long halves a sentence.
    #[arg(long, default_value_t = 30)]
    split_token_max: usize,
}

/// JSON mirror of one input page. Unknown fields are ignored; missing
/// flags and sections default to empty.
#[derive(Debug, Deserialize)]
struct PageIn {
    page_id: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    flags: FlagsIn,
    #[serde(default)]
    sections: Vec<SectionIn>,
}

#[derive(Debug, Default, Deserialize)]
struct FlagsIn {
    #[serde(default)]
    is_redirect: bool,
    #[serde(default)]
    has_settlement_infobox: bool,
    #[serde(default)]
    has_collapsible_template: bool,
    #[serde(default)]
    refs_censusindia_or_enwiki: bool,
    #[serde(default)]
    has_wikitable_or_long_list: bool,
}

#[derive(Debug, Deserialize)]
struct SectionIn {
    section_title: String,
    text: String,
}

fn read_pages(path: &Path) -> Result<Vec<PageRecord>> {
    let text = common::read_text(path)?;
    let mut pages = Vec::new();
    for (no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let page: PageIn = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: bad page record", path.display(), no + 1))?;
        pages.push(PageRecord {
            page_id: page.page_id,
            title: page.title,
            flags: PageFlags {
                is_redirect: page.flags.is_redirect,
                has_settlement_infobox: page.flags.has_settlement_infobox,
                has_collapsible_template: page.flags.has_collapsible_template,
                refs_censusindia_or_enwiki: page.flags.refs_censusindia_or_enwiki,
                has_wikitable_or_long_list: page.flags.has_wikitable_or_long_list,
            },
            sections: page
                .sections
                .into_iter()
                .map(|s| (s.section_title, s.text))
                .collect(),
        });
    }
    Ok(pages)
}

pub fn filter_corpus(args: &FilterCorpusArgs, global: &Global) -> Result<()> {
    let profile = common::load_profile(&args.profile)?;
    let pages = read_pages(&args.pages)?;
    let thresholds = FilterThresholds {
        section_outside_max: args.section_outside_max,
        sent_outside_max: args.sent_outside_max,
        sent_native_min: args.sent_native_min,
        sent_word_native_min: args.sent_word_native_min,
        split_token_max: args.split_token_max,
        ..FilterThresholds::default()
    };
    let filtered = corpus::filter_corpus(&pages, &profile, &thresholds);

    let mut sentences = Vec::new();
    let mut meta_rows = Vec::new();
    for (sentence, meta) in filtered.sentences.iter().zip(&filtered.metadata) {
        let segments: Vec<String> = if args.split_long {
            let tokens: Vec<String> = sentence.split_whitespace().map(str::to_string).collect();
            corpus::split_long_sentence(&tokens, args.split_token_max)
                .map_err(|e| anyhow!("{e}"))?
                .into_iter()
                .map(|seg| seg.join(" "))
                .collect()
        } else {
            vec![sentence.clone()]
        };
        for segment in segments {
            sentences.push(segment);
            meta_rows.push(format!(
                "{}\t{}\t{}",
                meta.page_id,
                meta.section_title.replace('\t', " "),
                meta.sentence_index
            ));
        }
    }
    common::write_lines(&args.sentences, &sentences)?;
    common::write_lines(&args.metadata, &meta_rows)?;

    let r = &filtered.report;
    eprintln!(
        "kept {} sentences from {} pages ({} pages omitted, {} section titles dropped, \
         {} sentences omitted)",
        sentences.len(),
        r.pages_kept,
        r.pages_omitted,
        r.omitted_titles.len(),
        r.sentences_omitted
    );
    common::write_echo(
        global,
        "filter-corpus",
        args,
        json!({
            "pages_kept": r.pages_kept,
            "pages_omitted": r.pages_omitted,
            "omitted_titles": r.omitted_titles,
            "sentences_kept": r.sentences_kept,
            "sentences_omitted": r.sentences_omitted,
            "lines_written": sentences.len(),
        }),
        &args.sentences,
    )
}

#[derive(Debug, clap::Args, Serialize)]
pub struct SampleLexiconArgs {
    /// Script profile file.
    #[arg(long)]
    profile: PathBuf,

    /// Kept sentences, one per line.
    #[arg(long)]
    sentences: PathBuf,

    /// Output lexicon, `native<TAB>frequency` rows sorted by descending
    /// frequency then lexicographically.
    #[arg(long)]
    out: PathBuf,

    /// Minimum corpus frequency for a word type to enter the lexicon.
    #[arg(long, default_value_t = 2)]
    word_min_freq: u64,
}

pub fn sample_lexicon(args: &SampleLexiconArgs, global: &Global) -> Result<()> {
    let profile = common::load_profile(&args.profile)?;
    let sentences = common::read_lines(&args.sentences)?;
    let thresholds = FilterThresholds {
        word_min_freq: args.word_min_freq,
        ..FilterThresholds::default()
    };
    let words = corpus::sample_lexicon_words(&sentences, &profile, &thresholds);
    let rows: Vec<LexiconRow> = words
        .iter()
        .map(|(native, count)| LexiconRow {
            native: native.clone(),
            latin: None,
            count: *count,
        })
        .collect();
    common::write_lexicon(&args.out, &rows)?;
    eprintln!(
        "sampled {} word types from {} sentences",
        rows.len(),
        sentences.len()
    );
    common::write_echo(
        global,
        "sample-lexicon",
        args,
        json!({ "sentences": sentences.len(), "word_types": rows.len() }),
        &args.out,
    )
}

#[derive(Debug, clap::Args, Serialize)]
pub struct SplitLexiconArgs {
    /// Input lexicon (either layout).
    #[arg(long)]
    lexicon: PathBuf,

    /// Native word types in the training split.
    #[arg(long, default_value_t = 25000)]
    train_size: usize,

    /// Native word types in the development split.
    #[arg(long, default_value_t = 2500)]
    dev_size: usize,

    /// Native word types in the test split.
    #[arg(long, default_value_t = 2500)]
    test_size: usize,

    #[arg(long)]
    out_train: PathBuf,

    #[arg(long)]
    out_dev: PathBuf,

    #[arg(long)]
    out_test: PathBuf,
}

pub fn split_lexicon(args: &SplitLexiconArgs, global: &Global) -> Result<()> {
    let rows = common::read_lexicon(&args.lexicon)?;
    let entries: Vec<LexiconEntry> = rows
        .iter()
        .map(|r| {
            LexiconEntry::new(
                r.native.clone(),
                r.latin.clone().unwrap_or_default(),
                r.count,
            )
        })
        .collect();
    let sizes = SplitSizes {
        train: args.train_size,
        dev: args.dev_size,
        test: args.test_size,
    };
    let (train, dev, test) = corpus::split_lexicon(&entries, corpus::stem_heuristic, sizes)
        .map_err(|e| anyhow!("{e}"))?;

    let back = |part: Vec<LexiconEntry>| -> Vec<LexiconRow> {
        part.into_iter()
            .map(|e| LexiconRow {
                native: e.native,
                latin: if e.latin.is_empty() {
                    None
                } else {
                    Some(e.latin)
                },
                count: e.attestations,
            })
            .collect()
    };
    let (train, dev, test) = (back(train), back(dev), back(test));
    common::write_lexicon(&args.out_train, &train)?;
    common::write_lexicon(&args.out_dev, &dev)?;
    common::write_lexicon(&args.out_test, &test)?;
    eprintln!(
        "split {} rows into {} train / {} dev / {} test",
        rows.len(),
        train.len(),
        dev.len(),
        test.len()
    );
    common::write_echo(
        global,
        "split-lexicon",
        args,
        json!({
            "rows": rows.len(),
            "train_rows": train.len(),
            "dev_rows": dev.len(),
            "test_rows": test.len(),
        }),
        &args.out_train,
    )
}
