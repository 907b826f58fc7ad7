//! ARPA text serialization for back-off n-gram models.
//!
//! Probabilities and back-off weights are written in log10 as shortest
//! exact decimal strings, so numeric round-trips are limited only by the
//! log2/log10 conversion (well inside 1e-10 on scores). Symbols containing
//! `%` or whitespace are percent-escaped; contexts that carry a back-off
//! weight but no stored probability (begin-marker prefixes) are emitted as
//! dummy entries with log10 probability -99, the conventional placeholder.

use alloc::borrow::Cow;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{NgramError, NgramModel, SmoothingKind, Vocab};

const DUMMY_LOG10: f64 = -99.0;

fn escape(sym: &str) -> Cow<'_, str> {
    if !sym.contains(['%', ' ', '\t', '\n', '\r']) {
        return Cow::Borrowed(sym);
    }
    let mut out = String::with_capacity(sym.len() + 6);
    for c in sym.chars() {
        match c {
            '%' => out.push_str("%25"),
            ' ' => out.push_str("%20"),
            '\t' => out.push_str("%09"),
            '\n' => out.push_str("%0A"),
            '\r' => out.push_str("%0D"),
            _ => out.push(c),
        }
    }
    Cow::Owned(out)
}

fn unescape(tok: &str, line: usize) -> Result<String, NgramError> {
    if !tok.contains('%') {
        return Ok(tok.to_string());
    }
    let mut out = String::with_capacity(tok.len());
    let mut chars = tok.chars();
    while let Some(c) = chars.next() {
        if c != '%' {
            out.push(c);
            continue;
        }
        let code: String = chars.by_ref().take(2).collect();
        match code.as_str() {
            "25" => out.push('%'),
            "20" => out.push(' '),
            "09" => out.push('\t'),
            "0A" => out.push('\n'),
            "0D" => out.push('\r'),
            _ => {
                return Err(NgramError::ArpaParse {
                    line,
                    msg: format!("bad escape %{code} in symbol {tok:?}"),
                })
            }
        }
    }
    Ok(out)
}

fn log10_of_log2(x: f64) -> f64 {
    x * core::f64::consts::LOG10_2
}

fn log2_of_log10(x: f64) -> f64 {
    x * core::f64::consts::LOG2_10
}

/// Serializes a model to ARPA text.
pub fn to_arpa(model: &NgramModel) -> String {
    let order = model.order();
    let vocab = model.vocab();
    let mut out = String::new();
    out.push_str(&format!("smoothing: {}\n", model.smoothing()));
    for w in model.warnings() {
        out.push_str(&format!("warning: {w}\n"));
    }
    out.push('\n');

    // Per order, the line set is the union of stored n-grams and contexts
    // carrying a back-off weight.
    type Line<'a> = (&'a Vec<u32>, Option<f64>, Option<f64>);
    let mut lines: Vec<Vec<Line>> = Vec::new();
    for k in 1..=order {
        let mut keys: BTreeSet<&Vec<u32>> = BTreeSet::new();
        keys.extend(model.prob_map().keys().filter(|g| g.len() == k));
        keys.extend(model.backoff_map().keys().filter(|g| g.len() == k));
        lines.push(
            keys.into_iter()
                .map(|g| {
                    (
                        g,
                        model.prob_map().get(g).copied(),
                        model.backoff_map().get(g).copied(),
                    )
                })
                .collect(),
        );
    }

    out.push_str("\\data\\\n");
    for (k, set) in lines.iter().enumerate() {
        out.push_str(&format!("ngram {}={}\n", k + 1, set.len()));
    }
    for (k, set) in lines.iter().enumerate() {
        out.push_str(&format!("\n\\{}-grams:\n", k + 1));
        for (gram, p, b) in set {
            let p10 = p.map(log10_of_log2).unwrap_or(DUMMY_LOG10);
            out.push_str(&format!("{p10}"));
            out.push('\t');
            for (i, &id) in gram.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&escape(vocab.sym(id)));
            }
            if let Some(b) = b {
                out.push_str(&format!("\t{}", log10_of_log2(*b)));
            }
            out.push('\n');
        }
    }
    out.push_str("\n\\end\\\n");
    out
}

/// Parses ARPA text into a model. Leading metadata lines before `\data\`
/// are skipped (a `smoothing:` line, when present, restores the tag).
pub fn from_arpa(text: &str) -> Result<NgramModel, NgramError> {
    let mut smoothing = SmoothingKind::WittenBell;
    let mut lines = text.lines().enumerate().peekable();

    // Preamble.
    let mut found_data = false;
    for (_, raw) in lines.by_ref() {
        let line = raw.trim();
        if line == "\\data\\" {
            found_data = true;
            break;
        }
        if let Some(rest) = line.strip_prefix("smoothing:") {
            let rest = rest.trim();
            if rest == "witten_bell" {
                smoothing = SmoothingKind::WittenBell;
            } else if let Some(v) = rest.strip_prefix("katz gt_max=") {
                if let Ok(g) = v.trim().parse::<u32>() {
                    smoothing = SmoothingKind::Katz { gt_max: g };
                }
            }
        }
    }
    if !found_data {
        return Err(NgramError::ArpaParse {
            line: text.lines().count(),
            msg: "missing \\data\\ section".to_string(),
        });
    }

    // Declared counts.
    let mut declared: Vec<usize> = Vec::new();
    let mut pending_header: Option<(usize, usize)> = None;
    for (idx, raw) in lines.by_ref() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("ngram ") {
            let (k, n) = rest.split_once('=').ok_or_else(|| NgramError::ArpaParse {
                line: idx + 1,
                msg: "malformed ngram count line".to_string(),
            })?;
            let k: usize = k.trim().parse().map_err(|_| NgramError::ArpaParse {
                line: idx + 1,
                msg: "bad order in count line".to_string(),
            })?;
            let n: usize = n.trim().parse().map_err(|_| NgramError::ArpaParse {
                line: idx + 1,
                msg: "bad count in count line".to_string(),
            })?;
            if k != declared.len() + 1 {
                return Err(NgramError::ArpaParse {
                    line: idx + 1,
                    msg: format!("expected ngram {} count", declared.len() + 1),
                });
            }
            declared.push(n);
        } else if let Some(k) = section_header(line) {
            pending_header = Some((idx, k));
            break;
        } else {
            return Err(NgramError::ArpaParse {
                line: idx + 1,
                msg: format!("unexpected line in \\data\\ section: {line:?}"),
            });
        }
    }
    let order = declared.len();
    if order == 0 {
        return Err(NgramError::ArpaParse {
            line: 0,
            msg: "no ngram counts declared".to_string(),
        });
    }

    // Sections, in order: (line number, symbols, log10 prob, back-off).
    type RawLine = (usize, Vec<String>, f64, Option<f64>);
    let mut raw_sections: Vec<Vec<RawLine>> = Vec::new();
    for k in 1..=order {
        let header = match pending_header.take() {
            Some(h) => h,
            None => {
                let mut found = None;
                for (idx, raw) in lines.by_ref() {
                    let line = raw.trim();
                    if line.is_empty() {
                        continue;
                    }
                    if let Some(kk) = section_header(line) {
                        found = Some((idx, kk));
                        break;
                    }
                    return Err(NgramError::ArpaParse {
                        line: idx + 1,
                        msg: format!("expected \\{k}-grams: header, found {line:?}"),
                    });
                }
                found.ok_or_else(|| NgramError::ArpaParse {
                    line: text.lines().count(),
                    msg: format!("missing \\{k}-grams: section"),
                })?
            }
        };
        if header.1 != k {
            return Err(NgramError::ArpaParse {
                line: header.0 + 1,
                msg: format!("expected \\{k}-grams: section, found \\{}-grams:", header.1),
            });
        }
        let mut entries = Vec::with_capacity(declared[k - 1]);
        loop {
            let Some(&(idx, raw)) = lines.peek() else {
                if entries.len() == declared[k - 1] {
                    break; // complete section at end of input
                }
                return Err(NgramError::ArpaParse {
                    line: text.lines().count(),
                    msg: format!("unterminated \\{k}-grams: section"),
                });
            };
            let line = raw.trim();
            if line.is_empty() {
                lines.next();
                continue;
            }
            if section_header(line).is_some() || line == "\\end\\" {
                break;
            }
            lines.next();
            let fields: Vec<&str> = line.split_whitespace().collect();
            let (has_bow, expected) = if fields.len() == k + 2 {
                (true, k + 2)
            } else {
                (false, k + 1)
            };
            if fields.len() != expected {
                return Err(NgramError::ArpaParse {
                    line: idx + 1,
                    msg: format!(
                        "expected {} or {} fields, found {}",
                        k + 1,
                        k + 2,
                        fields.len()
                    ),
                });
            }
            let p10: f64 = fields[0].parse().map_err(|_| NgramError::ArpaParse {
                line: idx + 1,
                msg: format!("bad probability {:?}", fields[0]),
            })?;
            let syms: Vec<String> = fields[1..1 + k]
                .iter()
                .map(|t| unescape(t, idx + 1))
                .collect::<Result<_, _>>()?;
            let bow = if has_bow {
                Some(
                    fields[k + 1]
                        .parse::<f64>()
                        .map_err(|_| NgramError::ArpaParse {
                            line: idx + 1,
                            msg: format!("bad back-off weight {:?}", fields[k + 1]),
                        })?,
                )
            } else {
                None
            };
            entries.push((idx + 1, syms, p10, bow));
        }
        if entries.len() != declared[k - 1] {
            return Err(NgramError::ArpaParse {
                line: header.0 + 1,
                msg: format!(
                    "\\{k}-grams: declared {} entries, found {}",
                    declared[k - 1],
                    entries.len()
                ),
            });
        }
        raw_sections.push(entries);
    }

    // Terminator.
    let mut terminated = false;
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "\\end\\" {
            terminated = true;
            continue;
        }
        if !terminated {
            return Err(NgramError::ArpaParse {
                line: idx + 1,
                msg: format!("expected \\end\\, found {line:?}"),
            });
        }
    }
    if !terminated {
        return Err(NgramError::ArpaParse {
            line: text.lines().count(),
            msg: "missing \\end\\ terminator".to_string(),
        });
    }

    // Vocabulary from the unigram section.
    let mut set = BTreeSet::new();
    for (line, syms, _, _) in &raw_sections[0] {
        let s = &syms[0];
        if s != super::BOS && s != super::EOS && s != super::UNK && !set.insert(s.clone()) {
            return Err(NgramError::ArpaParse {
                line: *line,
                msg: format!("duplicate unigram {s:?}"),
            });
        }
    }
    let vocab = Vocab::from_symbols(set).expect("reserved symbols filtered");

    let mut prob = BTreeMap::new();
    let mut backoff = BTreeMap::new();
    for (k, entries) in raw_sections.iter().enumerate() {
        for (line, syms, p10, bow) in entries {
            let ids: Vec<u32> = syms
                .iter()
                .map(|s| {
                    vocab.id(s).ok_or_else(|| NgramError::ArpaParse {
                        line: *line,
                        msg: format!("symbol {s:?} missing from unigram section"),
                    })
                })
                .collect::<Result<_, _>>()?;
            if prob.insert(ids.clone(), log2_of_log10(*p10)).is_some() {
                return Err(NgramError::ArpaParse {
                    line: *line,
                    msg: format!("duplicate {}-gram {syms:?}", k + 1),
                });
            }
            if let Some(b) = bow {
                if k + 1 >= order {
                    return Err(NgramError::ArpaParse {
                        line: *line,
                        msg: "back-off weight on a maximum-order entry".to_string(),
                    });
                }
                backoff.insert(ids, log2_of_log10(*b));
            }
        }
    }

    Ok(NgramModel::reconstruct(
        order, vocab, prob, backoff, smoothing,
    ))
}

fn section_header(line: &str) -> Option<usize> {
    let rest = line.strip_prefix('\\')?;
    let rest = rest.strip_suffix("-grams:")?;
    rest.parse().ok()
}
