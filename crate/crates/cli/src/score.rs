//! Evaluation: edit-distance error rates under four protocols, plus
//! bits-per-character scoring of a character model.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use serde::Serialize;
use serde_json::json;

use lipi_core::eval::{cer, passthrough_eval, wer, whitespace_eval, EvalReport};
use lipi_core::ngram::bits_per_character;

use crate::common::{self, Global};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolArg {
    /// Code-point error rate.
    Cer,
    /// Whitespace-token error rate.
    Wer,
    /// References reduced to covered-script words; hypotheses are word
    /// sequences. Needs --profile and --lexicon.
    Whitespace,
    /// Plain token error rate on full sentences with pass-through
    /// material intact on both sides.
    Passthrough,
}

#[derive(Debug, clap::Args, Serialize)]
pub struct EvalArgs {
    /// Edit-metric protocol; needs --refs and --hyps.
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,

    /// Reference sentences, one per line.
    #[arg(long, requires = "hyps")]
    refs: Option<PathBuf>,

    /// Hypothesis sentences (or word sequences), one per line.
    #[arg(long, requires = "refs")]
    hyps: Option<PathBuf>,

    /// Script profile file (whitespace protocol).
    #[arg(long)]
    profile: Option<PathBuf>,

    /// Lexicon whose native words define the covered character set
    /// (whitespace protocol).
    #[arg(long)]
    lexicon: Option<PathBuf>,

    /// Lowercase both sides before comparison.
    #[arg(long, default_value_t = false)]
    decase: bool,

    /// Character model file to score --lm-eval with.
    #[arg(long, requires = "lm_eval")]
    lm: Option<PathBuf>,

    /// Corpus the character model scores, one line per sentence.
    #[arg(long, requires = "lm")]
    lm_eval: Option<PathBuf>,

    /// Parallel corpus supplying the bits-per-native-character
    /// denominator; defaults to --lm-eval itself.
    #[arg(long)]
    bpnc_denom: Option<PathBuf>,

    /// JSON report output.
    #[arg(long)]
    report: PathBuf,
}

fn edit_report(args: &EvalArgs) -> Result<Option<(ProtocolArg, EvalReport)>> {
    let (protocol, refs_path, hyps_path) = match (&args.protocol, &args.refs, &args.hyps) {
        (Some(p), Some(r), Some(h)) => (*p, r, h),
        (None, None, None) => return Ok(None),
        _ => bail!("--protocol, --refs, and --hyps go together"),
    };
    let mut refs = common::read_lines(refs_path)?;
    let mut hyps = common::read_lines(hyps_path)?;
    if args.decase {
        refs = refs.iter().map(|l| l.to_lowercase()).collect();
        hyps = hyps.iter().map(|l| l.to_lowercase()).collect();
    }
    let report = match protocol {
        ProtocolArg::Cer => cer(&refs, &hyps),
        ProtocolArg::Wer => wer(&refs, &hyps),
        ProtocolArg::Passthrough => passthrough_eval(&refs, &hyps),
        ProtocolArg::Whitespace => {
            let (profile, lexicon) = match (&args.profile, &args.lexicon) {
                (Some(p), Some(l)) => (p, l),
                _ => bail!("--protocol whitespace needs --profile and --lexicon"),
            };
            let (profile, _rows) = common::load_profile_with_lexicon(profile, lexicon)?;
            let hyp_words: Vec<Vec<String>> = hyps
                .iter()
                .map(|l| l.split_whitespace().map(str::to_string).collect())
                .collect();
            whitespace_eval(&refs, &hyp_words, &profile)
        }
    }
    .map_err(|e| anyhow!("{e}"))?;
    Ok(Some((protocol, report)))
}

fn lm_report(args: &EvalArgs) -> Result<Option<(f64, f64)>> {
    let (lm_path, eval_path) = match (&args.lm, &args.lm_eval) {
        (Some(m), Some(e)) => (m, e),
        _ => return Ok(None),
    };
    let model = common::load_model(lm_path)?;
    let corpus = common::read_lines(eval_path)?;
    let denominator = match &args.bpnc_denom {
        Some(path) => common::read_lines(path)?,
        None => corpus.clone(),
    };
    bits_per_character(&model, &corpus, &denominator)
        .map(Some)
        .map_err(|e| anyhow!("{e}"))
}

pub fn eval(args: &EvalArgs, global: &Global) -> Result<()> {
    let edit = edit_report(args)?;
    let bits = lm_report(args)?;
    if edit.is_none() && bits.is_none() {
        bail!("nothing to do: pass --protocol with --refs/--hyps, or --lm with --lm-eval");
    }

    let mut body = json!({
        "settings": {
            "tie_break": "substitution, then deletion, then insertion",
            "rounding": "half-up to one decimal",
            "decased": args.decase,
        },
    });
    if let Some((protocol, report)) = &edit {
        let stats = |s: &lipi_core::eval::EditStats| {
            json!({
                "substitutions": s.substitutions,
                "deletions": s.deletions,
                "insertions": s.insertions,
                "ref_tokens": s.ref_tokens,
            })
        };
        body["protocol"] = json!(protocol);
        body["corpus"] = stats(&report.corpus);
        body["corpus"]["error_rate_percent"] = json!(report.rate_percent());
        body["corpus"]["error_rate_rounded"] = json!(report.rate_rounded());
        body["per_sentence"] = json!(report.per_sentence.iter().map(stats).collect::<Vec<_>>());
        body["empty_refs"] = json!(report.empty_refs);
        println!("{:.1}", report.rate_rounded());
    }
    if let Some((bpc, bpnc)) = bits {
        body["bpc"] = json!(bpc);
        body["bpnc"] = json!(bpnc);
        println!("bpc {bpc:.4}");
        println!("bpnc {bpnc:.4}");
    }

    common::write_text(&args.report, &(serde_json::to_string_pretty(&body)? + "\n"))?;
    common::write_echo(global, "eval", args, json!(null), &args.report)
}
