//! Finite fields and the error-correcting codes used for key binding:
//! repetition, first-order Reed-Muller, shortened Reed-Solomon, binary BCH
//! and their concatenations.
//!
//! All codecs work on bit vectors (`u8` values 0/1). Multi-bit symbols are
//! serialized most significant bit first.

mod bch;
mod concat;
pub mod gf;
mod reed_muller;
mod reed_solomon;
mod repetition;

pub use bch::Bch;
pub use concat::Concatenated;
pub use gf::{Field, FieldElement};
pub use reed_muller::{rm_decode_mld, ReedMuller};
pub use reed_solomon::ReedSolomon;
pub use repetition::Repetition;

use crate::{Error, Result};
use std::fmt;

/// Result of a decoding attempt. A `Decoded` word beyond the decoding
/// radius may be a miscorrection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    Decoded(Vec<u8>),
    /// Two or more codewords are equally close (Reed-Muller only).
    Erasure,
    Failure,
}

impl DecodeOutcome {
    pub fn message(&self) -> Option<&[u8]> {
        match self {
            DecodeOutcome::Decoded(m) => Some(m),
            _ => None,
        }
    }
}

/// A constructive binary block code.
pub trait Codec: Send + Sync {
    fn name(&self) -> String;
    /// Block length in bits.
    fn n(&self) -> usize;
    /// Message length in bits.
    fn k(&self) -> usize;
    /// Minimum distance (a lower bound for concatenations).
    fn d(&self) -> usize;
    /// Guaranteed error-correction radius in bits.
    fn radius(&self) -> usize {
        (self.d() - 1) / 2
    }
    /// Bits per outer symbol when used as the outer code of a
    /// concatenation.
    fn symbol_bits(&self) -> usize {
        1
    }
    fn encode(&self, message: &[u8]) -> Result<Vec<u8>>;
    fn decode(&self, received: &[u8]) -> Result<DecodeOutcome>;
    /// Decoding with per-symbol erasure flags. Codes without erasure
    /// decoding ignore the flags.
    fn decode_with_erasures(&self, received: &[u8], erased: &[bool]) -> Result<DecodeOutcome> {
        let _ = erased;
        self.decode(received)
    }
}

/// Named code parameters, with or without a constructive codec.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeSpec {
    Repetition(usize),
    /// RM(1, 5), the (32, 6, 16) code.
    ReedMuller,
    /// Shortened from RS(63, 57) over GF(64).
    ReedSolomon {
        n: usize,
        k: usize,
    },
    /// Narrow-sense primitive BCH over GF(256).
    Bch {
        n: usize,
        k: usize,
        t: usize,
    },
    Concatenated {
        outer: Box<CodeSpec>,
        inner: Box<CodeSpec>,
    },
    /// Parameters usable in analysis only.
    AnalysisOnly {
        name: String,
        n: usize,
        k: usize,
        d: usize,
        t: usize,
    },
}

/// Names accepted by [`CodeSpec::from_name`].
pub const REGISTRY: [&str; 6] = ["rep3", "rm32_6", "rs28_22", "bch255_131", "rm32_6+rs28_22", "rep3+ebch256_132"];

impl CodeSpec {
    pub fn from_name(name: &str) -> Result<Self> {
        let spec = match name {
            "rep3" => CodeSpec::Repetition(3),
            "rm32_6" => CodeSpec::ReedMuller,
            "rs28_22" => CodeSpec::ReedSolomon { n: 28, k: 22 },
            "bch255_131" => CodeSpec::Bch { n: 255, k: 131, t: 18 },
            "ebch256_132" => CodeSpec::AnalysisOnly { name: "ebch256_132".into(), n: 256, k: 132, d: 36, t: 17 },
            _ => match name.split_once('+') {
                Some((inner, outer)) => CodeSpec::Concatenated {
                    outer: Box::new(CodeSpec::from_name(outer)?),
                    inner: Box::new(CodeSpec::from_name(inner)?),
                },
                None => return Err(Error::invalid(format!("unknown code {name:?}; known: {}", REGISTRY.join(", ")))),
            },
        };
        Ok(spec)
    }

    pub fn name(&self) -> String {
        match self {
            CodeSpec::Repetition(n) => format!("rep{n}"),
            CodeSpec::ReedMuller => "rm32_6".into(),
            CodeSpec::ReedSolomon { n, k } => format!("rs{n}_{k}"),
            CodeSpec::Bch { n, k, .. } => format!("bch{n}_{k}"),
            CodeSpec::Concatenated { outer, inner } => format!("{}+{}", inner.name(), outer.name()),
            CodeSpec::AnalysisOnly { name, .. } => name.clone(),
        }
    }

    /// `(n, k, d)` in bits; `d` of a concatenation is the product bound.
    pub fn params(&self) -> (usize, usize, usize) {
        match self {
            CodeSpec::Repetition(n) => (*n, 1, *n),
            CodeSpec::ReedMuller => (32, 6, 16),
            CodeSpec::ReedSolomon { n, k } => (6 * n, 6 * k, n - k + 1),
            CodeSpec::Bch { n, k, t } => (*n, *k, 2 * t + 1),
            CodeSpec::Concatenated { outer, inner } => {
                let (no, ko, d_o) = outer.params();
                let (ni, _, di) = inner.params();
                let symbols = no / outer.symbol_bits();
                (symbols * ni, ko, d_o * di)
            }
            CodeSpec::AnalysisOnly { n, k, d, .. } => (*n, *k, *d),
        }
    }

    /// Guaranteed bit-error radius `t`.
    pub fn radius(&self) -> usize {
        match self {
            CodeSpec::AnalysisOnly { t, .. } | CodeSpec::Bch { t, .. } => *t,
            _ => (self.params().2 - 1) / 2,
        }
    }

    pub fn rate(&self) -> f64 {
        let (n, k, _) = self.params();
        k as f64 / n as f64
    }

    /// Bits per code symbol.
    pub fn symbol_bits(&self) -> usize {
        match self {
            CodeSpec::ReedSolomon { .. } => 6,
            _ => 1,
        }
    }

    pub fn codec(&self) -> Result<Box<dyn Codec>> {
        Ok(match self {
            CodeSpec::Repetition(n) => Box::new(Repetition::new(*n)?),
            CodeSpec::ReedMuller => Box::new(ReedMuller),
            CodeSpec::ReedSolomon { n, k } => Box::new(ReedSolomon::new(*n, *k)?),
            CodeSpec::Bch { n, k, t } => Box::new(Bch::new(*n, *k, *t)?),
            CodeSpec::Concatenated { outer, inner } => Box::new(Concatenated::new(outer.codec()?, inner.codec()?)?),
            CodeSpec::AnalysisOnly { name, .. } => return Err(Error::NoCodec(name.clone())),
        })
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

pub(crate) fn check_len(what: &str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected: format!("{expected} {what}"), actual: actual.to_string() });
    }
    Ok(())
}

pub(crate) fn check_bits(bits: &[u8]) -> Result<()> {
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::invalid("bit vector contains a value other than 0 or 1"));
    }
    Ok(())
}

pub(crate) fn symbols_from_bits(bits: &[u8], width: usize) -> Vec<u8> {
    bits.chunks(width).map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b)).collect()
}

pub(crate) fn bits_from_symbols(symbols: &[u8], width: usize) -> Vec<u8> {
    symbols.iter().flat_map(|&s| (0..width).rev().map(move |i| (s >> i) & 1)).collect()
}
