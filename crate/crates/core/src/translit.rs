//! k-best transliteration decoding with a pair n-gram model.
//!
//! The model is an n-gram LM over aligned character pairs. Decoding an
//! input word explores the lattice of pair sequences whose input-side
//! projection equals the word: each step either consumes the next input
//! character (possibly emitting nothing) or inserts an output character
//! (consuming nothing), with a cap on consecutive insertions. Hypotheses
//! are recombined on (input position, LM context, insertion run); the
//! k-best list is deduplicated by output string, keeping each output's
//! best path score.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand_core::RngCore;

use crate::align::PairSymbol;
use crate::math;
use crate::ngram::{NgramModel, BOS_ID, EOS, EOS_ID, UNK};

/// Which side of the pair symbols is consumed as input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Input is romanized text; output is native script.
    LatinToNative,
    /// Input is native script; output is romanized text.
    NativeToLatin,
}

/// Search width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Beam {
    /// No pruning; exact search over the recombined lattice.
    Exact,
    /// Keep this many states per input position.
    Width(usize),
}

/// Decoding errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeError {
    /// The model vocabulary contains a symbol that is not a pair symbol.
    NotPairVocab { symbol: String },
    /// An input character appears on no pair's input side.
    UnknownInputSymbol { ch: char },
    /// Empty input word.
    EmptyInput,
    /// k must be at least 1.
    ZeroK,
    /// Beam width must be at least 1.
    ZeroBeam,
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::NotPairVocab { symbol } => {
                write!(f, "model vocabulary entry {symbol:?} is not a pair symbol")
            }
            DecodeError::UnknownInputSymbol { ch } => {
                write!(
                    f,
                    "input character {ch:?} (U+{:04X}) not covered by the model",
                    *ch as u32
                )
            }
            DecodeError::EmptyInput => write!(f, "empty input"),
            DecodeError::ZeroK => write!(f, "k must be at least 1"),
            DecodeError::ZeroBeam => write!(f, "beam width must be at least 1"),
        }
    }
}

impl core::error::Error for DecodeError {}

/// One decoded candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub output: String,
    /// Joint log2 probability of the best pair sequence yielding `output`,
    /// end marker included.
    pub log2_score: f64,
}

/// Candidates ordered by descending score (ties by output string).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KBestList {
    pub hypotheses: Vec<Hypothesis>,
}

impl KBestList {
    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    /// Normalized linear weights proportional to 2^score.
    pub fn softmax_probs(&self) -> Vec<f64> {
        if self.hypotheses.is_empty() {
            return Vec::new();
        }
        let max = self
            .hypotheses
            .iter()
            .map(|h| h.log2_score)
            .fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = self
            .hypotheses
            .iter()
            .map(|h| math::exp2(h.log2_score - max))
            .collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    /// Samples an index in proportion to the softmax weights.
    pub fn sample(&self, rng: &mut dyn RngCore) -> usize {
        let probs = self.softmax_probs();
        let x = math::unit_f64(rng.next_u64());
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if x < acc {
                return i;
            }
        }
        probs.len().saturating_sub(1)
    }
}

struct Arc {
    sym_id: u32,
    out: Option<char>,
}

/// A pair n-gram model compiled for decoding in one direction.
pub struct PairDecoder {
    lm: NgramModel,
    direction: Direction,
    max_consec_insertions: usize,
    beam: Beam,
    consume: BTreeMap<char, Vec<Arc>>,
    insert: Vec<Arc>,
}

impl PairDecoder {
    /// Compiles the model's pair vocabulary into input-indexed arcs.
    /// Every non-reserved vocabulary symbol must parse as a pair symbol.
    pub fn new(
        lm: NgramModel,
        direction: Direction,
        max_consec_insertions: usize,
        beam: Beam,
    ) -> Result<Self, DecodeError> {
        if matches!(beam, Beam::Width(0)) {
            return Err(DecodeError::ZeroBeam);
        }
        let mut consume: BTreeMap<char, Vec<Arc>> = BTreeMap::new();
        let mut insert = Vec::new();
        for sym in lm.vocab().event_symbols() {
            if sym == EOS || sym == UNK {
                continue;
            }
            let pair = PairSymbol::from_str(sym).map_err(|_| DecodeError::NotPairVocab {
                symbol: sym.to_string(),
            })?;
            let (input, output) = match direction {
                Direction::LatinToNative => (pair.latin(), pair.native()),
                Direction::NativeToLatin => (pair.native(), pair.latin()),
            };
            let sym_id = lm.vocab().id(sym).expect("vocabulary symbol");
            match input {
                Some(c) => consume.entry(c).or_default().push(Arc {
                    sym_id,
                    out: output,
                }),
                None => insert.push(Arc {
                    sym_id,
                    out: output,
                }),
            }
        }
        Ok(PairDecoder {
            lm,
            direction,
            max_consec_insertions,
            beam,
            consume,
            insert,
        })
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn model(&self) -> &NgramModel {
        &self.lm
    }

    /// Joint log2 score the decoder assigns a full pair sequence (end
    /// marker included).
    pub fn score_pair_sequence(&self, seq: &[PairSymbol]) -> f64 {
        let syms: Vec<String> = seq.iter().map(|s| alloc::format!("{s}")).collect();
        self.lm.score(&syms)
    }

    /// Up to `k` best distinct output strings for `input`.
    pub fn transliterate(&self, input: &str, k: usize) -> Result<KBestList, DecodeError> {
        if k == 0 {
            return Err(DecodeError::ZeroK);
        }
        if input.is_empty() {
            return Err(DecodeError::EmptyInput);
        }
        let chars: Vec<char> = input.chars().collect();
        for &c in &chars {
            if !self.consume.contains_key(&c) {
                return Err(DecodeError::UnknownInputSymbol { ch: c });
            }
        }

        let ctx_len = self.lm.order().saturating_sub(1);

        // State = (insertion run, LM context). Entries within a state are
        // (score, output prefix), sorted by score desc then output asc,
        // deduplicated by output: two paths in the same state with the
        // same output are interchangeable for every continuation, so per
        // state the k best distinct-output entries suffice for exact
        // k-best scores. Entries tying the k-th score are all retained:
        // prefix order is not preserved under concatenation, so cutting
        // inside a tie cohort could surface the wrong representative of
        // an equal-scoring output set.
        type StateKey = (usize, Vec<u32>);
        let mut layer: BTreeMap<StateKey, Vec<(f64, String)>> = BTreeMap::new();
        layer.insert(
            (0, alloc::vec![BOS_ID; ctx_len]),
            alloc::vec![(0.0, String::new())],
        );

        fn push(entries: &mut Vec<(f64, String)>, score: f64, out: String, k: usize) {
            if let Some(i) = entries.iter().position(|(_, o)| *o == out) {
                if entries[i].0 >= score {
                    return;
                }
                entries.remove(i);
            }
            let at = entries
                .partition_point(|(s, o)| *s > score || (*s == score && o.as_str() < out.as_str()));
            if at >= k && entries[k - 1].0 != score {
                return;
            }
            entries.insert(at, (score, out));
            if entries.len() > k {
                let kth = entries[k - 1].0;
                let cut = entries.partition_point(|(s, _)| *s >= kth);
                entries.truncate(cut);
            }
        }

        let extend = |out: &str, ch: Option<char>| -> String {
            let mut s = String::with_capacity(out.len() + 4);
            s.push_str(out);
            if let Some(c) = ch {
                s.push(c);
            }
            s
        };

        for pos in 0..=chars.len() {
            // Insertion closure within this input position; runs grow
            // strictly, so one ascending sweep reaches a fixpoint.
            for run in 0..self.max_consec_insertions {
                let sources: Vec<(StateKey, Vec<(f64, String)>)> = layer
                    .range((run, Vec::new())..(run + 1, Vec::new()))
                    .map(|(s, e)| (s.clone(), e.clone()))
                    .collect();
                for ((_, ctx), entries) in sources {
                    for arc in &self.insert {
                        let step = self.lm.log2_prob_ids(&ctx, arc.sym_id);
                        let mut next_ctx = ctx.clone();
                        advance(&mut next_ctx, arc.sym_id, ctx_len);
                        let slot = layer.entry((run + 1, next_ctx)).or_default();
                        for (score, out) in &entries {
                            push(slot, score + step, extend(out, arc.out), k);
                        }
                    }
                }
            }

            if let Beam::Width(width) = self.beam {
                if layer.len() > width {
                    let mut keyed: Vec<(f64, StateKey)> =
                        layer.iter().map(|(s, e)| (e[0].0, s.clone())).collect();
                    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
                    keyed.truncate(width);
                    let keep: alloc::collections::BTreeSet<StateKey> =
                        keyed.into_iter().map(|(_, s)| s).collect();
                    layer.retain(|s, _| keep.contains(s));
                }
            }

            if pos == chars.len() {
                break;
            }

            // Consume the next input character.
            let mut next: BTreeMap<StateKey, Vec<(f64, String)>> = BTreeMap::new();
            for ((_, ctx), entries) in &layer {
                for arc in &self.consume[&chars[pos]] {
                    let step = self.lm.log2_prob_ids(ctx, arc.sym_id);
                    let mut next_ctx = ctx.clone();
                    advance(&mut next_ctx, arc.sym_id, ctx_len);
                    let slot = next.entry((0, next_ctx)).or_default();
                    for (score, out) in entries {
                        push(slot, score + step, extend(out, arc.out), k);
                    }
                }
            }
            layer = next;
        }

        // Final states: add the end-marker event, then keep the best
        // score per distinct output across states.
        let mut finals: Vec<(f64, String)> = Vec::new();
        for ((_, ctx), entries) in &layer {
            let eos = self.lm.log2_prob_ids(ctx, EOS_ID);
            for (score, out) in entries {
                finals.push((score + eos, out.clone()));
            }
        }
        let mut best: BTreeMap<String, f64> = BTreeMap::new();
        for (score, output) in finals {
            let e = best.entry(output).or_insert(f64::NEG_INFINITY);
            if score > *e {
                *e = score;
            }
        }
        let mut ranked: Vec<(f64, String)> = best.into_iter().map(|(o, s)| (s, o)).collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        ranked.truncate(k);
        let hypotheses = ranked
            .into_iter()
            .map(|(log2_score, output)| Hypothesis { output, log2_score })
            .collect();
        Ok(KBestList { hypotheses })
    }
}

fn advance(ctx: &mut Vec<u32>, sym: u32, ctx_len: usize) {
    if ctx_len == 0 {
        return;
    }
    ctx.push(sym);
    if ctx.len() > ctx_len {
        ctx.remove(0);
    }
}
