//! EM-trained character alignment between native-script and romanized
//! word forms.
//!
//! An alignment is a monotone sequence of character pairs; each pair joins
//! one native character, one Latin character, or one of each. The lattice
//! of all alignments for a word pair is a grid DAG; EM estimates a single
//! pair distribution from the expected edge counts of every lattice,
//! weighted by attestation counts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::math;

/// One aligned character pair. At most one side is empty (epsilon).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PairSymbol {
    native: Option<char>,
    latin: Option<char>,
}

impl PairSymbol {
    /// Builds a pair; `None` on both sides is rejected.
    pub fn new(native: Option<char>, latin: Option<char>) -> Result<Self, AlignError> {
        if native.is_none() && latin.is_none() {
            return Err(AlignError::EmptyPair);
        }
        Ok(PairSymbol { native, latin })
    }

    pub fn native(&self) -> Option<char> {
        self.native
    }

    pub fn latin(&self) -> Option<char> {
        self.latin
    }
}

/// Text form: `native:latin` with `_` for an empty side, e.g. `க:k`,
/// `_:a`, `்:_`. The underscore is reserved; neither side may be a literal
/// `_` character.
impl fmt::Display for PairSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}",
            self.native.unwrap_or('_'),
            self.latin.unwrap_or('_')
        )
    }
}

impl FromStr for PairSymbol {
    type Err = AlignError;

    fn from_str(s: &str) -> Result<Self, AlignError> {
        let bad = || AlignError::BadPairSymbol {
            text: s.to_string(),
        };
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 3 || chars[1] != ':' {
            return Err(bad());
        }
        let side = |c: char| if c == '_' { None } else { Some(c) };
        PairSymbol::new(side(chars[0]), side(chars[2])).map_err(|_| bad())
    }
}

/// One lexicon entry: a native word, one romanization, and how many times
/// that romanization was attested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub native: String,
    pub latin: String,
    pub attestations: u64,
}

impl LexiconEntry {
    pub fn new(native: impl Into<String>, latin: impl Into<String>, attestations: u64) -> Self {
        LexiconEntry {
            native: native.into(),
            latin: latin.into(),
            attestations,
        }
    }
}

/// Alignment errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlignError {
    /// A lattice side is empty.
    EmptySide { native: String, latin: String },
    /// Pair with epsilon on both sides.
    EmptyPair,
    /// Unparseable pair-symbol text.
    BadPairSymbol { text: String },
    /// No positive-probability path through an entry's lattice.
    NoPath { native: String, latin: String },
    /// Training called with no entries.
    EmptyLexicon,
    /// Entry with attestation count zero.
    ZeroAttestation { native: String, latin: String },
    /// Model construction from an empty or non-positive distribution.
    BadDistribution,
}

impl fmt::Display for AlignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlignError::EmptySide { native, latin } => {
                write!(f, "empty side in entry {native:?} / {latin:?}")
            }
            AlignError::EmptyPair => write!(f, "pair symbol empty on both sides"),
            AlignError::BadPairSymbol { text } => write!(f, "bad pair symbol {text:?}"),
            AlignError::NoPath { native, latin } => {
                write!(f, "no alignment path for {native:?} / {latin:?}")
            }
            AlignError::EmptyLexicon => write!(f, "no lexicon entries"),
            AlignError::ZeroAttestation { native, latin } => {
                write!(f, "zero attestations for {native:?} / {latin:?}")
            }
            AlignError::BadDistribution => write!(f, "empty or non-positive pair distribution"),
        }
    }
}

impl core::error::Error for AlignError {}

/// The grid of monotone alignments between one native word and one
/// romanization. Nodes are `(i, j)` prefix positions; edges consume one
/// native character, one Latin character, or one of each.
#[derive(Debug, Clone)]
pub struct AlignmentLattice {
    native: Vec<char>,
    latin: Vec<char>,
}

impl AlignmentLattice {
    pub fn new(native: &str, latin: &str) -> Result<Self, AlignError> {
        if native.is_empty() || latin.is_empty() {
            return Err(AlignError::EmptySide {
                native: native.to_string(),
                latin: latin.to_string(),
            });
        }
        Ok(AlignmentLattice {
            native: native.chars().collect(),
            latin: latin.chars().collect(),
        })
    }

    pub fn native_len(&self) -> usize {
        self.native.len()
    }

    pub fn latin_len(&self) -> usize {
        self.latin.len()
    }

    /// Number of distinct alignment paths (Delannoy numbers; u128 since
    /// these grow fast).
    pub fn num_paths(&self) -> u128 {
        let (n, m) = (self.native.len(), self.latin.len());
        let mut row = alloc::vec![1u128; m + 1];
        for _ in 1..=n {
            let mut prev_diag = row[0];
            for j in 1..=m {
                let up = row[j];
                row[j] = up + row[j - 1] + prev_diag;
                prev_diag = up;
            }
        }
        row[m]
    }

    /// Enumerates every path as a pair sequence. Exponential; intended for
    /// small test lattices only.
    pub fn enumerate_paths(&self) -> Vec<Vec<PairSymbol>> {
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        self.walk(0, 0, &mut prefix, &mut out);
        out
    }

    fn walk(
        &self,
        i: usize,
        j: usize,
        prefix: &mut Vec<PairSymbol>,
        out: &mut Vec<Vec<PairSymbol>>,
    ) {
        let (n, m) = (self.native.len(), self.latin.len());
        if i == n && j == m {
            out.push(prefix.clone());
            return;
        }
        if i < n && j < m {
            prefix.push(PairSymbol {
                native: Some(self.native[i]),
                latin: Some(self.latin[j]),
            });
            self.walk(i + 1, j + 1, prefix, out);
            prefix.pop();
        }
        if i < n {
            prefix.push(PairSymbol {
                native: Some(self.native[i]),
                latin: None,
            });
            self.walk(i + 1, j, prefix, out);
            prefix.pop();
        }
        if j < m {
            prefix.push(PairSymbol {
                native: None,
                latin: Some(self.latin[j]),
            });
            self.walk(i, j + 1, prefix, out);
            prefix.pop();
        }
    }
}

/// A single pair distribution estimated by EM.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentModel {
    pair_log2: BTreeMap<PairSymbol, f64>,
    log2_likelihood_trace: Vec<f64>,
    converged: bool,
}

impl AlignmentModel {
    /// Builds a model directly from linear pair probabilities (normalized
    /// here). Probabilities must be positive.
    pub fn from_pair_probs(pairs: &[(PairSymbol, f64)]) -> Result<Self, AlignError> {
        if pairs.is_empty() {
            return Err(AlignError::BadDistribution);
        }
        let total: f64 = pairs.iter().map(|(_, p)| *p).sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(AlignError::BadDistribution);
        }
        let mut map = BTreeMap::new();
        for &(s, p) in pairs {
            if !p.is_finite() || p <= 0.0 {
                return Err(AlignError::BadDistribution);
            }
            map.insert(s, math::log2(p / total));
        }
        Ok(AlignmentModel {
            pair_log2: map,
            log2_likelihood_trace: Vec::new(),
            converged: false,
        })
    }

    /// log2 probability of one pair; `None` if the pair is outside the
    /// model's inventory.
    pub fn pair_log2_prob(&self, s: &PairSymbol) -> Option<f64> {
        self.pair_log2.get(s).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&PairSymbol, f64)> {
        self.pair_log2.iter().map(|(s, &p)| (s, p))
    }

    /// Training log2-likelihood per iteration (under the parameters that
    /// entered that iteration). Non-decreasing.
    pub fn log2_likelihood_trace(&self) -> &[f64] {
        &self.log2_likelihood_trace
    }

    /// Whether training stopped on the tolerance rather than the iteration
    /// cap.
    pub fn converged(&self) -> bool {
        self.converged
    }
}

/// E-step quantities for one entry under a model.
#[derive(Debug, Clone)]
pub struct EntryPosteriors {
    /// log2 of the total path probability of the entry's lattice.
    pub log2_likelihood: f64,
    /// Posterior mass leaving the source node; 1 up to rounding.
    pub source_out_sum: f64,
    /// Posterior mass entering the sink node; 1 up to rounding.
    pub sink_in_sum: f64,
    /// Expected pair counts for a single traversal (unweighted).
    pub expected_counts: BTreeMap<PairSymbol, f64>,
}

/// Forward-backward over one entry's lattice.
pub fn entry_posteriors(
    entry: &LexiconEntry,
    model: &AlignmentModel,
) -> Result<EntryPosteriors, AlignError> {
    let lat = AlignmentLattice::new(&entry.native, &entry.latin)?;
    let (n, m) = (lat.native.len(), lat.latin.len());
    let width = m + 1;
    let idx = |i: usize, j: usize| i * width + j;
    let lp = |nc: Option<char>, lc: Option<char>| -> f64 {
        model
            .pair_log2
            .get(&PairSymbol {
                native: nc,
                latin: lc,
            })
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    };

    let mut fwd = alloc::vec![f64::NEG_INFINITY; (n + 1) * width];
    fwd[0] = 0.0;
    for i in 0..=n {
        for j in 0..=m {
            let here = fwd[idx(i, j)];
            if here == f64::NEG_INFINITY {
                continue;
            }
            if i < n && j < m {
                let t = here + lp(Some(lat.native[i]), Some(lat.latin[j]));
                fwd[idx(i + 1, j + 1)] = math::log2_add(fwd[idx(i + 1, j + 1)], t);
            }
            if i < n {
                let t = here + lp(Some(lat.native[i]), None);
                fwd[idx(i + 1, j)] = math::log2_add(fwd[idx(i + 1, j)], t);
            }
            if j < m {
                let t = here + lp(None, Some(lat.latin[j]));
                fwd[idx(i, j + 1)] = math::log2_add(fwd[idx(i, j + 1)], t);
            }
        }
    }
    let log_z = fwd[idx(n, m)];
    if log_z == f64::NEG_INFINITY {
        return Err(AlignError::NoPath {
            native: entry.native.clone(),
            latin: entry.latin.clone(),
        });
    }

    let mut bwd = alloc::vec![f64::NEG_INFINITY; (n + 1) * width];
    bwd[idx(n, m)] = 0.0;
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            if i == n && j == m {
                continue;
            }
            let mut acc = f64::NEG_INFINITY;
            if i < n && j < m {
                acc = math::log2_add(
                    acc,
                    lp(Some(lat.native[i]), Some(lat.latin[j])) + bwd[idx(i + 1, j + 1)],
                );
            }
            if i < n {
                acc = math::log2_add(acc, lp(Some(lat.native[i]), None) + bwd[idx(i + 1, j)]);
            }
            if j < m {
                acc = math::log2_add(acc, lp(None, Some(lat.latin[j])) + bwd[idx(i, j + 1)]);
            }
            bwd[idx(i, j)] = acc;
        }
    }

    let mut expected: BTreeMap<PairSymbol, f64> = BTreeMap::new();
    let mut source_out = 0.0;
    let mut sink_in = 0.0;
    for i in 0..=n {
        for j in 0..=m {
            let f = fwd[idx(i, j)];
            if f == f64::NEG_INFINITY {
                continue;
            }
            let mut edge = |sym: PairSymbol, to: (usize, usize)| {
                let w = lp(sym.native, sym.latin);
                let post = math::exp2(f + w + bwd[idx(to.0, to.1)] - log_z);
                if post > 0.0 {
                    *expected.entry(sym).or_insert(0.0) += post;
                }
                if i == 0 && j == 0 {
                    source_out += post;
                }
                if to == (n, m) {
                    sink_in += post;
                }
            };
            if i < n && j < m {
                edge(
                    PairSymbol {
                        native: Some(lat.native[i]),
                        latin: Some(lat.latin[j]),
                    },
                    (i + 1, j + 1),
                );
            }
            if i < n {
                edge(
                    PairSymbol {
                        native: Some(lat.native[i]),
                        latin: None,
                    },
                    (i + 1, j),
                );
            }
            if j < m {
                edge(
                    PairSymbol {
                        native: None,
                        latin: Some(lat.latin[j]),
                    },
                    (i, j + 1),
                );
            }
        }
    }

    Ok(EntryPosteriors {
        log2_likelihood: log_z,
        source_out_sum: source_out,
        sink_in_sum: sink_in,
        expected_counts: expected,
    })
}

/// EM training of the pair distribution.
///
/// Initialization is uniform over every pair that occurs in any entry's
/// lattice. Each iteration runs forward-backward on every lattice (scaled
/// by attestations) and re-normalizes expected counts. Stops when the
/// relative log-likelihood change drops below `tol` or after `max_iter`
/// iterations.
pub fn em_train(
    entries: &[LexiconEntry],
    max_iter: usize,
    tol: f64,
) -> Result<AlignmentModel, AlignError> {
    if entries.is_empty() {
        return Err(AlignError::EmptyLexicon);
    }
    let mut inventory: BTreeSet<PairSymbol> = BTreeSet::new();
    for e in entries {
        if e.attestations == 0 {
            return Err(AlignError::ZeroAttestation {
                native: e.native.clone(),
                latin: e.latin.clone(),
            });
        }
        let lat = AlignmentLattice::new(&e.native, &e.latin)?;
        for &nc in &lat.native {
            inventory.insert(PairSymbol {
                native: Some(nc),
                latin: None,
            });
            for &lc in &lat.latin {
                inventory.insert(PairSymbol {
                    native: Some(nc),
                    latin: Some(lc),
                });
            }
        }
        for &lc in &lat.latin {
            inventory.insert(PairSymbol {
                native: None,
                latin: Some(lc),
            });
        }
    }

    let uniform = -math::log2(inventory.len() as f64);
    let mut model = AlignmentModel {
        pair_log2: inventory.iter().map(|&s| (s, uniform)).collect(),
        log2_likelihood_trace: Vec::new(),
        converged: false,
    };

    for _ in 0..max_iter {
        let mut counts: BTreeMap<PairSymbol, f64> = BTreeMap::new();
        let mut ll = 0.0;
        for e in entries {
            let post = entry_posteriors(e, &model)?;
            let w = e.attestations as f64;
            ll += w * post.log2_likelihood;
            for (s, c) in post.expected_counts {
                *counts.entry(s).or_insert(0.0) += w * c;
            }
        }
        let prev = model.log2_likelihood_trace.last().copied();
        model.log2_likelihood_trace.push(ll);
        if let Some(prev) = prev {
            if math::abs(ll - prev) / math::abs(prev).max(1e-12) < tol {
                model.converged = true;
                break;
            }
        }
        let total: f64 = counts.values().sum();
        model.pair_log2 = counts
            .into_iter()
            .filter(|(_, c)| *c > 0.0)
            .map(|(s, c)| (s, math::log2(c / total)))
            .collect();
    }
    Ok(model)
}

/// Highest-probability alignment path for one entry.
///
/// Ties prefer, locally at each node, the two-sided pair over the
/// native-only pair over the Latin-only pair.
pub fn viterbi_align(
    entry: &LexiconEntry,
    model: &AlignmentModel,
) -> Result<Vec<PairSymbol>, AlignError> {
    let lat = AlignmentLattice::new(&entry.native, &entry.latin)?;
    let (n, m) = (lat.native.len(), lat.latin.len());
    let width = m + 1;
    let idx = |i: usize, j: usize| i * width + j;
    let lp = |nc: Option<char>, lc: Option<char>| -> f64 {
        model
            .pair_log2
            .get(&PairSymbol {
                native: nc,
                latin: lc,
            })
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    };

    let mut best = alloc::vec![f64::NEG_INFINITY; (n + 1) * width];
    // 0 = unset, 1 = diagonal, 2 = native-only, 3 = latin-only.
    let mut back = alloc::vec![0u8; (n + 1) * width];
    best[0] = 0.0;
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut b = f64::NEG_INFINITY;
            let mut arc = 0u8;
            if i > 0 && j > 0 {
                let t =
                    best[idx(i - 1, j - 1)] + lp(Some(lat.native[i - 1]), Some(lat.latin[j - 1]));
                if t > b {
                    b = t;
                    arc = 1;
                }
            }
            if i > 0 {
                let t = best[idx(i - 1, j)] + lp(Some(lat.native[i - 1]), None);
                if t > b {
                    b = t;
                    arc = 2;
                }
            }
            if j > 0 {
                let t = best[idx(i, j - 1)] + lp(None, Some(lat.latin[j - 1]));
                if t > b {
                    b = t;
                    arc = 3;
                }
            }
            best[idx(i, j)] = b;
            back[idx(i, j)] = arc;
        }
    }
    if best[idx(n, m)] == f64::NEG_INFINITY {
        return Err(AlignError::NoPath {
            native: entry.native.clone(),
            latin: entry.latin.clone(),
        });
    }

    let mut path = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        match back[idx(i, j)] {
            1 => {
                path.push(PairSymbol {
                    native: Some(lat.native[i - 1]),
                    latin: Some(lat.latin[j - 1]),
                });
                i -= 1;
                j -= 1;
            }
            2 => {
                path.push(PairSymbol {
                    native: Some(lat.native[i - 1]),
                    latin: None,
                });
                i -= 1;
            }
            _ => {
                path.push(PairSymbol {
                    native: None,
                    latin: Some(lat.latin[j - 1]),
                });
                j -= 1;
            }
        }
    }
    path.reverse();
    Ok(path)
}

/// Formats a pair sequence as space-separated `native:latin` symbols.
pub fn format_pair_sequence(seq: &[PairSymbol]) -> String {
    let mut out = String::new();
    for (k, s) in seq.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        out.push_str(&alloc::format!("{s}"));
    }
    out
}

/// Parses a space-separated pair-symbol line.
pub fn parse_pair_sequence(line: &str) -> Result<Vec<PairSymbol>, AlignError> {
    line.split_whitespace().map(PairSymbol::from_str).collect()
}

/// The native-side and Latin-side projections of a pair sequence.
pub fn project(seq: &[PairSymbol]) -> (String, String) {
    let mut native = String::new();
    let mut latin = String::new();
    for s in seq {
        if let Some(c) = s.native {
            native.push(c);
        }
        if let Some(c) = s.latin {
            latin.push(c);
        }
    }
    (native, latin)
}
