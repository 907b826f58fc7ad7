//! Shared plumbing for the subcommands: file readers and writers for the
//! pipeline's text formats, model loading, and the run-config echo.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use lipi_core::ngram::{arpa, NgramModel};
use lipi_core::scriptdata::{normalize, ScriptProfile};
use lipi_core::translit::{Beam, Direction, PairDecoder};

/// Flags every subcommand accepts.
#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct Global {
    /// Seed for every random draw in the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; 0 keeps the runtime default. Output bytes never
    /// depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Run-config echo path; defaults to `<main output>.run.json`.
    #[arg(long, global = true)]
    pub echo: Option<PathBuf>,
}

/// Writes the resolved configuration plus a result summary next to the
/// main output, so any run can be reproduced from its artifacts alone.
pub fn write_echo<C: Serialize>(
    global: &Global,
    command: &str,
    config: &C,
    summary: serde_json::Value,
    primary_output: &Path,
) -> Result<()> {
    let path = global
        .echo
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.run.json", primary_output.display())));
    let body = serde_json::json!({
        "command": command,
        "seed": global.seed,
        "jobs": global.jobs,
        "config": config,
        "summary": summary,
    });
    let text = serde_json::to_string_pretty(&body)?;
    write_text(&path, &(text + "\n"))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("read {}", path.display()))
}

pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?.lines().map(str::to_string).collect())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("write {}", path.display()))
}

pub fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut text = lines.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn load_profile(path: &Path) -> Result<ScriptProfile> {
    ScriptProfile::parse(&read_text(path)?).map_err(|e| anyhow!("parse {}: {e}", path.display()))
}

pub fn load_model(path: &Path) -> Result<NgramModel> {
    arpa::from_arpa(&read_text(path)?).map_err(|e| anyhow!("parse {}: {e}", path.display()))
}

/// `exact`, or a positive per-layer hypothesis width.
pub fn parse_beam(flag: &str) -> Result<Beam> {
    if flag == "exact" {
        return Ok(Beam::Exact);
    }
    let width: usize = flag
        .parse()
        .map_err(|_| anyhow!("beam must be `exact` or a positive integer, got `{flag}`"))?;
    if width == 0 {
        bail!("beam width must be at least 1");
    }
    Ok(Beam::Width(width))
}

pub fn load_decoder(
    model: &Path,
    direction: Direction,
    max_insertions: usize,
    beam_flag: &str,
) -> Result<PairDecoder> {
    PairDecoder::new(
        load_model(model)?,
        direction,
        max_insertions,
        parse_beam(beam_flag)?,
    )
    .map_err(|e| anyhow!("compile decoder from {}: {e}", model.display()))
}

/// One lexicon row. Two tab-separated fields are `native<TAB>frequency`;
/// three are `native<TAB>romanization<TAB>attestations`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconRow {
    pub native: String,
    pub latin: Option<String>,
    pub count: u64,
}

/// Reads either lexicon layout; the native side is NFC-normalized and
/// the romanization lowercased. Blank lines are skipped.
pub fn read_lexicon(path: &Path) -> Result<Vec<LexiconRow>> {
    let text = read_text(path)?;
    let mut rows = Vec::new();
    for (no, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let row = match fields.as_slice() {
            [native, count] => LexiconRow {
                native: normalize(native),
                latin: None,
                count: parse_count(count, path, no)?,
            },
            [native, latin, count] => LexiconRow {
                native: normalize(native),
                latin: Some(latin.trim().to_ascii_lowercase()),
                count: parse_count(count, path, no)?,
            },
            _ => bail!(
                "{}:{}: expected 2 or 3 tab-separated fields, got {}",
                path.display(),
                no + 1,
                fields.len()
            ),
        };
        rows.push(row);
    }
    Ok(rows)
}

fn parse_count(field: &str, path: &Path, no: usize) -> Result<u64> {
    field.trim().parse().map_err(|_| {
        anyhow!(
            "{}:{}: frequency field `{field}` is not a non-negative integer",
            path.display(),
            no + 1
        )
    })
}

pub fn write_lexicon(path: &Path, rows: &[LexiconRow]) -> Result<()> {
    let lines: Vec<String> = rows
        .iter()
        .map(|r| match &r.latin {
            Some(l) => format!("{}\t{}\t{}", r.native, l, r.count),
            None => format!("{}\t{}", r.native, r.count),
        })
        .collect();
    write_lines(path, &lines)
}

/// Loads a profile and restricts its covered character set to the
/// characters of the lexicon's native words.
pub fn load_profile_with_lexicon(
    profile: &Path,
    lexicon: &Path,
) -> Result<(ScriptProfile, Vec<LexiconRow>)> {
    let mut p = load_profile(profile)?;
    let rows = read_lexicon(lexicon)?;
    p.set_lexicon_block(rows.iter().map(|r| r.native.as_str()))
        .map_err(|e| anyhow!("lexicon {} does not fit profile: {e}", lexicon.display()))?;
    Ok((p, rows))
}
