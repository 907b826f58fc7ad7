//! Romanized LM training corpora simulated from native text: Viterbi or
//! sampled word romanization, corpus replication, and rare-character
//! replacement.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::scriptdata::ScriptProfile;
use crate::translit::{KBestList, PairDecoder};

/// How each lexicon-block word is romanized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Decode each distinct word type once; every instance of the type
    /// gets the same 1-best romanization. Ignores `k` and `seed`.
    Viterbi,
    /// Sample every word instance independently from the softmax over
    /// its k-best candidates.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub mode: SimMode,
    /// Whole-corpus repetitions; sampled mode re-samples each copy.
    pub copies: u64,
    pub k: usize,
    /// Characters rarer than this in training text become U+FFFD.
    pub min_char_count: u64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            mode: SimMode::Sampled,
            copies: 1,
            k: 8,
            min_char_count: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    ZeroCopies,
    ZeroK,
    ZeroMinCount,
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::ZeroCopies => write!(f, "copies must be at least 1"),
            SimError::ZeroK => write!(f, "k must be at least 1"),
            SimError::ZeroMinCount => write!(f, "min_char_count must be at least 1"),
        }
    }
}

impl core::error::Error for SimError {}

/// Counts reported by [`romanize_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimReport {
    pub lines_in: usize,
    pub lines_out: usize,
    /// Word instances (across all copies) the decoder could not decode;
    /// each was copied verbatim.
    pub skipped_words: u64,
}

enum Segment {
    /// Maximal run of lexicon-block characters.
    Word(String),
    /// Everything else, byte-identical in the output.
    Other(String),
}

fn split_segments(line: &str, profile: &ScriptProfile) -> Vec<Segment> {
    let mut segments = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let in_block = profile.in_lexicon_block(chars[i]);
        let start = i;
        while i < chars.len() && profile.in_lexicon_block(chars[i]) == in_block {
            i += 1;
        }
        let text: String = chars[start..i].iter().collect();
        segments.push(if in_block {
            Segment::Word(text)
        } else {
            Segment::Other(text)
        });
    }
    segments
}

/// Romanizes a native corpus with the reverse (native-to-latin) decoder.
/// Characters outside the lexicon block pass through byte-identical.
/// Output holds `copies` repetitions of the corpus, copy-major.
pub fn romanize_corpus(
    native_corpus: &[String],
    reverse_decoder: &PairDecoder,
    profile: &ScriptProfile,
    cfg: &SimulationConfig,
) -> Result<(Vec<String>, SimReport), SimError> {
    if cfg.copies == 0 {
        return Err(SimError::ZeroCopies);
    }
    if cfg.mode == SimMode::Sampled && cfg.k == 0 {
        return Err(SimError::ZeroK);
    }

    // Per-type caches; sampling remains per instance.
    let mut viterbi_cache: BTreeMap<String, Option<String>> = BTreeMap::new();
    let mut kbest_cache: BTreeMap<String, Option<KBestList>> = BTreeMap::new();

    let mut out = Vec::with_capacity(native_corpus.len() * cfg.copies as usize);
    let mut skipped_words = 0u64;
    for copy in 0..cfg.copies {
        for (line_no, line) in native_corpus.iter().enumerate() {
            let mut rng = math::stream_rng(cfg.seed, copy, line_no as u64);
            let mut romanized = String::new();
            for segment in split_segments(line, profile) {
                match segment {
                    Segment::Other(text) => romanized.push_str(&text),
                    Segment::Word(word) => match cfg.mode {
                        SimMode::Viterbi => {
                            let entry = viterbi_cache.entry(word.clone()).or_insert_with(|| {
                                match reverse_decoder.transliterate(&word, 1) {
                                    Ok(list) if !list.is_empty() => {
                                        Some(list.hypotheses[0].output.clone())
                                    }
                                    _ => None,
                                }
                            });
                            match entry {
                                Some(best) => romanized.push_str(best),
                                None => {
                                    skipped_words += 1;
                                    romanized.push_str(&word);
                                }
                            }
                        }
                        SimMode::Sampled => {
                            let entry = kbest_cache.entry(word.clone()).or_insert_with(|| {
                                match reverse_decoder.transliterate(&word, cfg.k) {
                                    Ok(list) if !list.is_empty() => Some(list),
                                    _ => None,
                                }
                            });
                            match entry {
                                Some(list) => {
                                    let pick = list.sample(&mut rng);
                                    romanized.push_str(&list.hypotheses[pick].output);
                                }
                                None => {
                                    skipped_words += 1;
                                    romanized.push_str(&word);
                                }
                            }
                        }
                    },
                }
            }
            out.push(romanized);
        }
    }
    let report = SimReport {
        lines_in: native_corpus.len(),
        lines_out: out.len(),
        skipped_words,
    };
    Ok((out, report))
}

/// Replacement counts reported by [`rare_char_replace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReplacementReport {
    /// Distinct characters that fell under the threshold.
    pub replaced_types: usize,
    pub train_replacements: u64,
    pub eval_replacements: u64,
}

/// Replaces characters occurring fewer than `min_count` times in the
/// training corpus with U+FFFD in both corpora. Counting uses the
/// training corpus only, so characters seen solely in evaluation text
/// are always replaced there.
pub fn rare_char_replace(
    train: &[String],
    eval: &[String],
    min_count: u64,
) -> Result<(Vec<String>, Vec<String>, ReplacementReport), SimError> {
    if min_count == 0 {
        return Err(SimError::ZeroMinCount);
    }
    let mut counts: BTreeMap<char, u64> = BTreeMap::new();
    for line in train {
        for c in line.chars() {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    let keep = |c: char| counts.get(&c).copied().unwrap_or(0) >= min_count;
    let mut report = ReplacementReport {
        replaced_types: counts.values().filter(|&&n| n < min_count).count(),
        ..ReplacementReport::default()
    };
    let map_corpus = |lines: &[String], replacements: &mut u64| -> Vec<String> {
        lines
            .iter()
            .map(|line| {
                line.chars()
                    .map(|c| {
                        if keep(c) {
                            c
                        } else {
                            *replacements += 1;
                            '\u{FFFD}'
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let train_out = map_corpus(train, &mut report.train_replacements);
    let eval_out = map_corpus(eval, &mut report.eval_replacements);
    Ok((train_out, eval_out, report))
}
