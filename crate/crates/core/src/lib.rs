//! Transliteration between South Asian native scripts and the Latin alphabet.
//!
//! The crate covers the full modeling pipeline:
//!
//! - [`scriptdata`]: per-language script profiles (native block, special
//!   non-letters, lexicon coverage) and Unicode NFC normalization
//! - [`corpus`]: Wikipedia-style page/section/sentence filtering, sentence
//!   segmentation, and lexicon sampling/splitting
//! - [`align`]: EM-trained character alignment between native-script and
//!   romanized word forms
//! - [`ngram`]: Witten-Bell and Katz back-off n-gram language models with
//!   ARPA serialization
//! - [`translit`]: k-best transliteration decoding over pair n-gram models
//! - [`sentence`]: romanized sentence tokenization and noisy-channel
//!   full-sentence decoding
//! - [`simulate`]: single- and multi-reference romanization of native corpora
//! - [`eval`]: CER/WER edit-distance scoring and bits-per-character metrics
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable default
//! features and enable `libm` for builds without the standard library.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod math;

pub mod align;
pub mod corpus;
pub mod eval;
pub mod ngram;
pub mod scriptdata;
pub mod sentence;
pub mod simulate;
pub mod translit;
