//! Per-language script profiles and Unicode normalization.
//!
//! A profile describes three character sets for one language:
//!
//! - `B`: the native script block(s), e.g. Devanagari for Hindi
//! - `N`: special non-letter characters permitted inside otherwise-native
//!   text (ASCII punctuation and digits, native digits, danda marks,
//!   general punctuation)
//! - `B̂`: the subset of `B` observed in the romanization lexicon, set at
//!   runtime once a lexicon is available
//!
//! plus a deterministic mapping from selected native characters to ASCII
//! used when romanized output must be produced without a trained model.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use unicode_normalization::UnicodeNormalization;

/// Errors from parsing a profile file or attaching a lexicon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileError {
    /// A line that does not match any known record form.
    BadLine { line: usize, text: String },
    /// A `range` record with lo > hi or an invalid code point.
    BadRange { line: usize },
    /// A code point outside the valid Unicode scalar range.
    BadCodePoint { line: usize },
    /// Required `lang` or `script` header missing.
    MissingHeader(&'static str),
    /// A lexicon word contains a character outside the native block.
    LexiconOutsideBlock { word: String, ch: char },
}

impl fmt::Display for ProfileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileError::BadLine { line, text } => {
                write!(f, "line {line}: unrecognized record: {text:?}")
            }
            ProfileError::BadRange { line } => write!(f, "line {line}: empty or inverted range"),
            ProfileError::BadCodePoint { line } => write!(f, "line {line}: invalid code point"),
            ProfileError::MissingHeader(h) => write!(f, "missing {h} header"),
            ProfileError::LexiconOutsideBlock { word, ch } => {
                write!(
                    f,
                    "lexicon word {word:?} contains {ch:?} (U+{:04X}) outside the native block",
                    *ch as u32
                )
            }
        }
    }
}

impl core::error::Error for ProfileError {}

/// Class membership of one character under a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharClass {
    /// Member of the native script block `B`.
    pub in_native_block: bool,
    /// Member of the special non-letter set `N`.
    pub in_special_nonletters: bool,
    /// Member of the lexicon-observed subset `B̂`.
    pub in_lexicon_block: bool,
    /// ASCII `a-z` or `A-Z`.
    pub basic_latin_letter: bool,
}

/// Script description for one language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptProfile {
    language_tag: String,
    script_name: String,
    native_ranges: Vec<(u32, u32)>,
    special_nonletters: BTreeSet<char>,
    lexicon_block: BTreeSet<char>,
    latin_map: BTreeMap<char, char>,
}

impl ScriptProfile {
    /// Parses the profile text format.
    ///
    /// Records, one per line (`#` starts a comment):
    ///
    /// ```text
    /// lang hi
    /// script Devanagari
    /// range 0900..097F B
    /// char 0964 N
    /// map 0966 0
    /// ```
    ///
    /// `range` lines declare inclusive code point ranges of `B`; `char`
    /// lines declare members of `N`; `map` lines declare the deterministic
    /// native-to-ASCII mapping. `B̂` starts empty and is attached later via
    /// [`ScriptProfile::set_lexicon_block`].
    pub fn parse(text: &str) -> Result<Self, ProfileError> {
        let mut language_tag = None;
        let mut script_name = None;
        let mut native_ranges = Vec::new();
        let mut special_nonletters = BTreeSet::new();
        let mut latin_map = BTreeMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let bad = || ProfileError::BadLine {
                line: line_no,
                text: raw.trim().to_string(),
            };
            match parts.next() {
                Some("lang") => {
                    language_tag = Some(parts.next().ok_or_else(bad)?.to_string());
                }
                Some("script") => {
                    script_name = Some(parts.next().ok_or_else(bad)?.to_string());
                }
                Some("range") => {
                    let spec = parts.next().ok_or_else(bad)?;
                    if parts.next() != Some("B") {
                        return Err(bad());
                    }
                    let (lo, hi) = spec.split_once("..").ok_or_else(bad)?;
                    let lo = parse_hex(lo, line_no)?;
                    let hi = parse_hex(hi, line_no)?;
                    if lo > hi {
                        return Err(ProfileError::BadRange { line: line_no });
                    }
                    native_ranges.push((lo, hi));
                }
                Some("char") => {
                    let cp = parse_hex(parts.next().ok_or_else(bad)?, line_no)?;
                    if parts.next() != Some("N") {
                        return Err(bad());
                    }
                    special_nonletters.insert(scalar(cp, line_no)?);
                }
                Some("map") => {
                    let from = scalar(parse_hex(parts.next().ok_or_else(bad)?, line_no)?, line_no)?;
                    let to_tok = parts.next().ok_or_else(bad)?;
                    let to = if to_tok.chars().count() == 1 {
                        to_tok.chars().next().unwrap()
                    } else {
                        scalar(parse_hex(to_tok, line_no)?, line_no)?
                    };
                    if !to.is_ascii() {
                        return Err(bad());
                    }
                    latin_map.insert(from, to);
                }
                _ => return Err(bad()),
            }
            if parts.next().is_some() {
                return Err(bad());
            }
        }

        native_ranges.sort_unstable();
        Ok(ScriptProfile {
            language_tag: language_tag.ok_or(ProfileError::MissingHeader("lang"))?,
            script_name: script_name.ok_or(ProfileError::MissingHeader("script"))?,
            native_ranges,
            special_nonletters,
            lexicon_block: BTreeSet::new(),
            latin_map,
        })
    }

    /// Serializes back to the profile text format.
    pub fn to_profile_text(&self) -> String {
        let mut out = String::new();
        out.push_str("lang ");
        out.push_str(&self.language_tag);
        out.push_str("\nscript ");
        out.push_str(&self.script_name);
        out.push('\n');
        for &(lo, hi) in &self.native_ranges {
            out.push_str(&alloc::format!("range {lo:04X}..{hi:04X} B\n"));
        }
        for &c in &self.special_nonletters {
            out.push_str(&alloc::format!("char {:04X} N\n", c as u32));
        }
        for (&from, &to) in &self.latin_map {
            out.push_str(&alloc::format!("map {:04X} {to}\n", from as u32));
        }
        out
    }

    pub fn language_tag(&self) -> &str {
        &self.language_tag
    }

    pub fn script_name(&self) -> &str {
        &self.script_name
    }

    /// Membership in the native script block `B`.
    pub fn in_native_block(&self, c: char) -> bool {
        let cp = c as u32;
        self.native_ranges
            .iter()
            .any(|&(lo, hi)| (lo..=hi).contains(&cp))
    }

    /// Membership in the special non-letter set `N`.
    pub fn in_special_nonletters(&self, c: char) -> bool {
        self.special_nonletters.contains(&c)
    }

    /// Membership in the lexicon-observed subset `B̂` (empty until a
    /// lexicon is attached).
    pub fn in_lexicon_block(&self, c: char) -> bool {
        self.lexicon_block.contains(&c)
    }

    /// Replaces `B̂` with the set of characters appearing in `words`.
    ///
    /// Every character must lie in `B`; the first violation is reported and
    /// `B̂` is left unchanged.
    pub fn set_lexicon_block<'a, I>(&mut self, words: I) -> Result<(), ProfileError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut block = BTreeSet::new();
        for word in words {
            for ch in word.chars() {
                if !self.in_native_block(ch) {
                    return Err(ProfileError::LexiconOutsideBlock {
                        word: word.to_string(),
                        ch,
                    });
                }
                block.insert(ch);
            }
        }
        self.lexicon_block = block;
        Ok(())
    }

    /// Full class membership for one character.
    pub fn classify(&self, c: char) -> CharClass {
        CharClass {
            in_native_block: self.in_native_block(c),
            in_special_nonletters: self.in_special_nonletters(c),
            in_lexicon_block: self.in_lexicon_block(c),
            basic_latin_letter: is_basic_latin_letter(c),
        }
    }

    /// Rule-based romanization of the characters covered by the profile's
    /// mapping (sentence punctuation, native digits); all other characters
    /// pass through unchanged. Idempotent: mapped outputs are ASCII, which
    /// no mapping covers.
    pub fn deterministic_latinize(&self, text: &str) -> String {
        text.chars()
            .map(|c| *self.latin_map.get(&c).unwrap_or(&c))
            .collect()
    }

    /// The native-to-ASCII mapping entries.
    pub fn latin_map(&self) -> impl Iterator<Item = (char, char)> + '_ {
        self.latin_map.iter().map(|(&k, &v)| (k, v))
    }
}

fn parse_hex(tok: &str, line: usize) -> Result<u32, ProfileError> {
    u32::from_str_radix(tok, 16).map_err(|_| ProfileError::BadCodePoint { line })
}

fn scalar(cp: u32, line: usize) -> Result<char, ProfileError> {
    char::from_u32(cp).ok_or(ProfileError::BadCodePoint { line })
}

/// ASCII `a-z` / `A-Z`.
pub fn is_basic_latin_letter(c: char) -> bool {
    c.is_ascii_alphabetic()
}

/// Unicode NFC normalization. Total on valid `&str`; invalid encodings are
/// rejected upstream when bytes are decoded.
pub fn normalize(text: &str) -> String {
    text.nfc().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hi_profile() -> ScriptProfile {
        let mut text = String::from(
            "lang hi\nscript Devanagari\nrange 0900..097F B\nchar 0964 N\nmap 0964 .\n",
        );
        // ASCII non-letters and Devanagari digits as N, digits also mapped.
        for cp in 0x21..0x7Fu32 {
            let c = char::from_u32(cp).unwrap();
            if !c.is_ascii_alphabetic() {
                text.push_str(&alloc::format!("char {cp:04X} N\n"));
            }
        }
        for d in 0..10u32 {
            text.push_str(&alloc::format!("char {:04X} N\n", 0x966 + d));
            text.push_str(&alloc::format!("map {:04X} {}\n", 0x966 + d, d));
        }
        ScriptProfile::parse(&text).unwrap()
    }

    #[test]
    fn danda_is_special_nonletter() {
        let p = hi_profile();
        let c = '\u{0964}';
        assert!(p.in_special_nonletters(c));
        assert!(p.in_native_block(c));
    }

    #[test]
    fn ascii_letter_outside_native_block() {
        let p = hi_profile();
        let cls = p.classify('a');
        assert!(cls.basic_latin_letter);
        assert!(!cls.in_native_block);
        assert!(!cls.in_special_nonletters);
    }

    #[test]
    fn native_digit_in_both_b_and_n() {
        let p = hi_profile();
        let cls = p.classify('\u{0966}');
        assert!(cls.in_native_block);
        assert!(cls.in_special_nonletters);
        assert!(!cls.basic_latin_letter);
    }

    #[test]
    fn latinize_examples() {
        let p = hi_profile();
        assert_eq!(p.deterministic_latinize("\u{0964}"), ".");
        assert_eq!(p.deterministic_latinize("abc"), "abc");
        assert_eq!(p.deterministic_latinize("\u{096B}"), "5");
    }

    #[test]
    fn latinize_idempotent() {
        let p = hi_profile();
        let input = "\u{0915}\u{0964} abc \u{0966}\u{096F}!";
        let once = p.deterministic_latinize(input);
        assert_eq!(p.deterministic_latinize(&once), once);
    }

    #[test]
    fn normalize_composes_and_decomposes() {
        // e + combining acute composes.
        assert_eq!(normalize("e\u{0301}"), "\u{00E9}");
        // Devanagari qa is a composition exclusion: it decomposes under NFC.
        assert_eq!(normalize("\u{0958}"), "\u{0915}\u{093C}");
        // Consonant + candrabindu has no precomposed form; NFC keeps both.
        assert_eq!(normalize("\u{0938}\u{0901}"), "\u{0938}\u{0901}");
    }

    #[test]
    fn normalize_idempotent_on_mixed_strings() {
        let samples = [
            "ka\u{0301}\u{0958}x",
            "\u{0915}\u{093C}\u{0964} hello",
            "mixed \u{00E9}\u{0301} marks",
        ];
        for s in samples {
            let once = normalize(s);
            assert_eq!(normalize(&once), once);
        }
    }

    #[test]
    fn lexicon_block_subset_enforced() {
        let mut p = hi_profile();
        p.set_lexicon_block(["\u{0915}\u{0916}", "\u{0917}"])
            .unwrap();
        assert!(p.in_lexicon_block('\u{0915}'));
        assert!(!p.in_lexicon_block('\u{0918}'));
        let err = p.set_lexicon_block(["\u{0915}a"]).unwrap_err();
        assert!(matches!(
            err,
            ProfileError::LexiconOutsideBlock { ch: 'a', .. }
        ));
        // Failed attach leaves the previous block in place.
        assert!(p.in_lexicon_block('\u{0915}'));
    }

    #[test]
    fn parse_rejects_bad_lines() {
        assert!(matches!(
            ScriptProfile::parse("lang hi\nscript X\nbogus 1 2\n"),
            Err(ProfileError::BadLine { line: 3, .. })
        ));
        assert!(matches!(
            ScriptProfile::parse("lang hi\nscript X\nrange 097F..0900 B\n"),
            Err(ProfileError::BadRange { line: 3 })
        ));
        assert!(matches!(
            ScriptProfile::parse("range 0900..097F B\n"),
            Err(ProfileError::MissingHeader("lang"))
        ));
    }

    #[test]
    fn profile_text_round_trips() {
        let p = hi_profile();
        let q = ScriptProfile::parse(&p.to_profile_text()).unwrap();
        assert_eq!(p, q);
    }
}
