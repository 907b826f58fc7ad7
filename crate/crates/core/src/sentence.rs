//! Sentence-level transliteration: lossless romanized tokenization, a
//! noisy-channel decoder that combines per-word k-best candidates with a
//! native word LM, and parallel-corpus simulation in the reverse
//! direction.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::ngram::{NgramModel, BOS_ID, EOS_ID, UNK_ID};
use crate::scriptdata::ScriptProfile;
use crate::translit::PairDecoder;

/// Token classes produced by [`tokenize_romanized`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    /// Maximal a-z run (after ASCII de-casing); the decodable unit.
    LatinWord,
    /// Anything else between whitespace; reinserted verbatim.
    Passthrough,
}

/// One token with its de-cased decoding form and the original text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Exact input slice, for lossless reassembly.
    pub original: String,
    /// ASCII-lowercased form used for decoding.
    pub text: String,
    pub kind: TokenKind,
}

/// A romanized sentence split into tokens and the whitespace between
/// them. `separators` has one more element than `tokens`: the runs
/// before the first token, between tokens, and after the last.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenizedSentence {
    pub tokens: Vec<Token>,
    pub separators: Vec<String>,
}

impl TokenizedSentence {
    pub fn latin_word_count(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| t.kind == TokenKind::LatinWord)
            .count()
    }

    /// Original input, byte for byte.
    pub fn reassemble_original(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.separators[0]);
        for (i, tok) in self.tokens.iter().enumerate() {
            out.push_str(&tok.original);
            out.push_str(&self.separators[i + 1]);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SentenceError {
    /// Substituted word count differs from the latin-word token count.
    WordCountMismatch { expected: usize, got: usize },
    /// k must be at least 1.
    ZeroK,
}

impl fmt::Display for SentenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SentenceError::WordCountMismatch { expected, got } => {
                write!(f, "expected {expected} substitution words, got {got}")
            }
            SentenceError::ZeroK => write!(f, "k must be at least 1"),
        }
    }
}

impl core::error::Error for SentenceError {}

/// Splits a romanized sentence into maximal a-z word runs and
/// passthrough runs, preserving every byte. ASCII letters are de-cased
/// in the decoding form (`text`); `original` keeps the input casing.
pub fn tokenize_romanized(input: &str) -> TokenizedSentence {
    let mut tokens = Vec::new();
    let mut separators = Vec::new();
    let mut sep = String::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            sep.push(c);
            chars.next();
            continue;
        }
        separators.push(core::mem::take(&mut sep));
        let mut original = String::new();
        let kind = if c.is_ascii_alphabetic() {
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphabetic() {
                    original.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            TokenKind::LatinWord
        } else {
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c.is_ascii_alphabetic() {
                    break;
                }
                original.push(c);
                chars.next();
            }
            TokenKind::Passthrough
        };
        let text = match kind {
            TokenKind::LatinWord => original.to_ascii_lowercase(),
            TokenKind::Passthrough => original.clone(),
        };
        tokens.push(Token {
            original,
            text,
            kind,
        });
    }
    separators.push(sep);
    if tokens.is_empty() {
        // Degenerate all-whitespace input: one separator holding it all.
        let only = separators.pop().unwrap_or_default();
        separators.clear();
        separators.push(only);
    }
    TokenizedSentence { tokens, separators }
}

/// Replaces each latin-word token with the corresponding native word,
/// keeping passthrough tokens and separators verbatim.
pub fn passthrough_reassemble(
    s: &TokenizedSentence,
    native_words: &[String],
) -> Result<String, SentenceError> {
    let expected = s.latin_word_count();
    if native_words.len() != expected {
        return Err(SentenceError::WordCountMismatch {
            expected,
            got: native_words.len(),
        });
    }
    let mut out = String::new();
    out.push_str(&s.separators[0]);
    let mut next = 0;
    for (i, tok) in s.tokens.iter().enumerate() {
        match tok.kind {
            TokenKind::LatinWord => {
                out.push_str(&native_words[next]);
                next += 1;
            }
            TokenKind::Passthrough => out.push_str(&tok.original),
        }
        out.push_str(&s.separators[i + 1]);
    }
    Ok(out)
}

/// Result of [`decode_sentence`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedSentence {
    pub text: String,
    /// Channel log2 score plus `lm_weight` times the LM log2 score.
    pub log2_score: f64,
    /// Latin words that had no decodable candidate and passed through.
    pub fallbacks: Vec<String>,
}

/// Noisy-channel decoding: per-word k-best candidates scored jointly
/// with a native word LM. Each passthrough token (and each fallback
/// word) enters LM scoring as the unknown marker so context flows
/// across punctuation; its channel score is zero.
pub fn decode_sentence(
    s: &TokenizedSentence,
    decoder: &PairDecoder,
    lm: &NgramModel,
    k: usize,
    lm_weight: f64,
) -> Result<DecodedSentence, SentenceError> {
    if k == 0 {
        return Err(SentenceError::ZeroK);
    }

    // Candidates per token: (channel log2 score, LM event id, word text
    // if this token is a latin word slot).
    let mut lattice: Vec<Vec<(f64, u32, Option<String>)>> = Vec::new();
    let mut fallbacks = Vec::new();
    for tok in &s.tokens {
        match tok.kind {
            TokenKind::LatinWord => match decoder.transliterate(&tok.text, k) {
                Ok(list) if !list.is_empty() => {
                    lattice.push(
                        list.hypotheses
                            .into_iter()
                            .map(|h| {
                                let id = lm.vocab().id_or_unk(&h.output);
                                (h.log2_score, id, Some(h.output))
                            })
                            .collect(),
                    );
                }
                _ => {
                    fallbacks.push(tok.original.clone());
                    lattice.push(alloc::vec![(0.0, UNK_ID, Some(tok.original.clone()))]);
                }
            },
            TokenKind::Passthrough => {
                lattice.push(alloc::vec![(0.0, UNK_ID, None)]);
            }
        }
    }

    // Viterbi over LM contexts. Backpointers record (previous context,
    // candidate index) per token.
    use alloc::collections::BTreeMap;
    let ctx_len = lm.order().saturating_sub(1);
    let init: Vec<u32> = alloc::vec![BOS_ID; ctx_len];
    let mut states: BTreeMap<Vec<u32>, (f64, Vec<usize>)> = BTreeMap::new();
    states.insert(init, (0.0, Vec::new()));
    for cands in &lattice {
        let mut next: BTreeMap<Vec<u32>, (f64, Vec<usize>)> = BTreeMap::new();
        for (ctx, (score, picks)) in &states {
            for (ci, (channel, id, _)) in cands.iter().enumerate() {
                let total = score + channel + lm_weight * lm.log2_prob_ids(ctx, *id);
                let mut next_ctx = ctx.clone();
                if ctx_len > 0 {
                    next_ctx.push(*id);
                    if next_ctx.len() > ctx_len {
                        next_ctx.remove(0);
                    }
                }
                let slot = next
                    .entry(next_ctx)
                    .or_insert((f64::NEG_INFINITY, Vec::new()));
                if total > slot.0 {
                    let mut p = picks.clone();
                    p.push(ci);
                    *slot = (total, p);
                }
            }
        }
        states = next;
    }

    let mut best_score = f64::NEG_INFINITY;
    let mut best_picks: Vec<usize> = Vec::new();
    for (ctx, (score, picks)) in &states {
        let total = score + lm_weight * lm.log2_prob_ids(ctx, EOS_ID);
        if total > best_score {
            best_score = total;
            best_picks = picks.clone();
        }
    }

    let mut native_words = Vec::new();
    for (cands, &pick) in lattice.iter().zip(&best_picks) {
        if let (_, _, Some(word)) = &cands[pick] {
            native_words.push(word.clone());
        }
    }
    let text = passthrough_reassemble(s, &native_words)?;
    Ok(DecodedSentence {
        text,
        log2_score: best_score,
        fallbacks,
    })
}

/// Romanization mode for [`simulate_parallel_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParallelMode {
    /// Keep only a-z runs on the romanized side, one space between them.
    Whitespace,
    /// Keep everything, mapping native punctuation and digits to their
    /// Latin equivalents from the script profile.
    FullString,
}

/// A simulated (romanized, native) sentence-pair corpus.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParallelCorpus {
    /// (romanized, native) per input line, in input order.
    pub pairs: Vec<(String, String)>,
    /// Lexicon-block words the reverse decoder could not decode; these
    /// were copied verbatim.
    pub skipped_words: u64,
}

/// Romanizes each native sentence by sampling every lexicon-block word
/// instance from the reverse decoder's softmax-renormalized k-best.
/// One generator is derived per line from `seed`, so output is
/// identical no matter how lines are scheduled.
pub fn simulate_parallel_corpus(
    native_corpus: &[String],
    reverse_decoder: &PairDecoder,
    profile: &ScriptProfile,
    mode: ParallelMode,
    k: usize,
    seed: u64,
) -> Result<ParallelCorpus, SentenceError> {
    if k == 0 {
        return Err(SentenceError::ZeroK);
    }
    let mut pairs = Vec::with_capacity(native_corpus.len());
    let mut skipped_words = 0u64;
    for (line_no, native) in native_corpus.iter().enumerate() {
        let mut rng = math::stream_rng(seed, 0, line_no as u64);
        let romanized = romanize_line(
            native,
            reverse_decoder,
            profile,
            mode,
            k,
            &mut rng,
            &mut skipped_words,
        );
        pairs.push((romanized, native.clone()));
    }
    Ok(ParallelCorpus {
        pairs,
        skipped_words,
    })
}

pub(crate) fn romanize_line(
    native: &str,
    decoder: &PairDecoder,
    profile: &ScriptProfile,
    mode: ParallelMode,
    k: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
    skipped_words: &mut u64,
) -> String {
    let mut raw = String::new();
    let chars: Vec<char> = native.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if profile.in_lexicon_block(chars[i]) {
            let start = i;
            while i < chars.len() && profile.in_lexicon_block(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match decoder.transliterate(&word, k) {
                Ok(list) if !list.is_empty() => {
                    let pick = list.sample(rng);
                    raw.push_str(&list.hypotheses[pick].output);
                }
                _ => {
                    *skipped_words += 1;
                    raw.push_str(&word);
                }
            }
        } else {
            raw.push(chars[i]);
            i += 1;
        }
    }
    match mode {
        ParallelMode::Whitespace => {
            let spaced: String = raw
                .chars()
                .map(|c| {
                    let c = c.to_ascii_lowercase();
                    if c.is_ascii_lowercase() {
                        c
                    } else {
                        ' '
                    }
                })
                .collect();
            let words: Vec<&str> = spaced.split_whitespace().collect();
            words.join(" ")
        }
        ParallelMode::FullString => profile
            .deterministic_latinize(&raw)
            .chars()
            .map(|c| c.to_ascii_lowercase())
            .collect(),
    }
}
