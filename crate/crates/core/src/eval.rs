//! Edit-distance evaluation: CER, WER, and the two sentence-level
//! transliteration protocols (whitespace-delimited words and full-string
//! pass-through).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::scriptdata::{normalize, ScriptProfile};

/// Errors from corpus-level evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    /// Reference and hypothesis corpora have different line counts.
    LengthMismatch { refs: usize, hyps: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::LengthMismatch { refs, hyps } => {
                write!(f, "reference/hypothesis length mismatch: {refs} vs {hyps}")
            }
        }
    }
}

impl core::error::Error for EvalError {}

/// Edit operation counts from aligning one hypothesis to one reference.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EditStats {
    pub substitutions: u64,
    pub deletions: u64,
    pub insertions: u64,
    /// Reference length in the unit being compared (tokens or characters).
    pub ref_tokens: u64,
}

impl EditStats {
    pub fn total_edits(&self) -> u64 {
        self.substitutions + self.deletions + self.insertions
    }

    /// Error rate as a percentage, with an empty-reference floor of 1 in
    /// the denominator.
    pub fn error_rate(&self) -> f64 {
        100.0 * self.total_edits() as f64 / self.ref_tokens.max(1) as f64
    }

    pub fn add(&mut self, other: &EditStats) {
        self.substitutions += other.substitutions;
        self.deletions += other.deletions;
        self.insertions += other.insertions;
        self.ref_tokens += other.ref_tokens;
    }
}

/// Minimum-edit alignment of `hyp` against `reference`.
///
/// Unit costs; deletions are reference items missing from the hypothesis,
/// insertions are hypothesis items absent from the reference. Among
/// minimum-cost alignments the backtrace prefers substitution, then
/// deletion, then insertion, so the decomposition is deterministic; the
/// total count is the classic Levenshtein distance either way.
pub fn edit_align<T: Eq>(reference: &[T], hyp: &[T]) -> EditStats {
    let m = reference.len();
    let n = hyp.len();
    let width = n + 1;
    let mut dist = Vec::with_capacity((m + 1) * width);
    for j in 0..=n {
        dist.push(j as u32);
    }
    for i in 1..=m {
        dist.push(i as u32);
        for j in 1..=n {
            let sub = dist[(i - 1) * width + (j - 1)] + u32::from(reference[i - 1] != hyp[j - 1]);
            let del = dist[(i - 1) * width + j] + 1;
            let ins = dist[i * width + (j - 1)] + 1;
            dist.push(sub.min(del).min(ins));
        }
    }

    let mut stats = EditStats {
        ref_tokens: m as u64,
        ..EditStats::default()
    };
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let here = dist[i * width + j];
        if i > 0 && j > 0 {
            let diag = dist[(i - 1) * width + (j - 1)];
            if reference[i - 1] == hyp[j - 1] && diag == here {
                i -= 1;
                j -= 1;
                continue;
            }
            if diag + 1 == here {
                stats.substitutions += 1;
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dist[(i - 1) * width + j] + 1 == here {
            stats.deletions += 1;
            i -= 1;
            continue;
        }
        stats.insertions += 1;
        j -= 1;
    }
    stats
}

/// Corpus evaluation result: per-line stats plus aggregated counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub per_sentence: Vec<EditStats>,
    pub corpus: EditStats,
    /// Number of empty references encountered (scored with denominator 1).
    pub empty_refs: usize,
    /// Bits per character, when a language model was scored alongside.
    pub bpc: Option<f64>,
    /// Bits per character of a shared denominator corpus.
    pub bpnc: Option<f64>,
}

impl EvalReport {
    fn from_pairs(per_sentence: Vec<EditStats>) -> Self {
        let mut corpus = EditStats::default();
        let mut empty_refs = 0;
        for s in &per_sentence {
            corpus.add(s);
            if s.ref_tokens == 0 {
                empty_refs += 1;
            }
        }
        EvalReport {
            per_sentence,
            corpus,
            empty_refs,
            bpc: None,
            bpnc: None,
        }
    }

    /// Corpus-level error rate: aggregated edit counts over aggregated
    /// reference length (not an average of per-sentence rates).
    pub fn rate_percent(&self) -> f64 {
        self.corpus.error_rate()
    }

    /// Corpus rate rounded half-up to one decimal place.
    pub fn rate_rounded(&self) -> f64 {
        round1(self.rate_percent())
    }
}

/// Rounds half-up to one decimal place (7.69 -> 7.7, 15.38 -> 15.4).
pub fn round1(x: f64) -> f64 {
    math::round(x * 10.0) / 10.0
}

/// Word error rate over whitespace-delimited tokens.
pub fn wer(refs: &[String], hyps: &[String]) -> Result<EvalReport, EvalError> {
    check_len(refs, hyps)?;
    let per = refs
        .iter()
        .zip(hyps)
        .map(|(r, h)| {
            let rt: Vec<&str> = r.split_whitespace().collect();
            let ht: Vec<&str> = h.split_whitespace().collect();
            edit_align(&rt, &ht)
        })
        .collect();
    Ok(EvalReport::from_pairs(per))
}

/// Character error rate over code points, both sides NFC-normalized.
pub fn cer(refs: &[String], hyps: &[String]) -> Result<EvalReport, EvalError> {
    check_len(refs, hyps)?;
    let per = refs
        .iter()
        .zip(hyps)
        .map(|(r, h)| {
            let rc: Vec<char> = normalize(r).chars().collect();
            let hc: Vec<char> = normalize(h).chars().collect();
            edit_align(&rc, &hc)
        })
        .collect();
    Ok(EvalReport::from_pairs(per))
}

/// Whitespace protocol: the reference sentence is reduced to its native
/// words by mapping every character outside `B̂` to whitespace, and the
/// hypothesis word sequence is scored against those tokens.
pub fn whitespace_eval(
    refs: &[String],
    hyps: &[Vec<String>],
    profile: &ScriptProfile,
) -> Result<EvalReport, EvalError> {
    if refs.len() != hyps.len() {
        return Err(EvalError::LengthMismatch {
            refs: refs.len(),
            hyps: hyps.len(),
        });
    }
    let per = refs
        .iter()
        .zip(hyps)
        .map(|(r, h)| {
            let reduced: String = normalize(r)
                .chars()
                .map(|c| if profile.in_lexicon_block(c) { c } else { ' ' })
                .collect();
            let rt: Vec<&str> = reduced.split_whitespace().collect();
            let ht: Vec<&str> = h.iter().map(String::as_str).collect();
            edit_align(&rt, &ht)
        })
        .collect();
    Ok(EvalReport::from_pairs(per))
}

/// Pass-through protocol: plain WER between full reference sentences and
/// full hypothesis sentences (non-word material intact on both sides).
pub fn passthrough_eval(refs: &[String], hyps: &[String]) -> Result<EvalReport, EvalError> {
    wer(refs, hyps)
}

fn check_len(refs: &[String], hyps: &[String]) -> Result<(), EvalError> {
    if refs.len() == hyps.len() {
        Ok(())
    } else {
        Err(EvalError::LengthMismatch {
            refs: refs.len(),
            hyps: hyps.len(),
        })
    }
}
