//! Bit-exact model of the fixed-point datapath: RO counters, the
//! multiplication-free 16x16 Walsh-Hadamard transform built from
//! four-point butterflies, and the quantizer boundary ROM.
//!
//! Halving uses an arithmetic right shift, so odd negative sums round
//! toward minus infinity.

use crate::quantize::{gray_bits, BitAllocation};
use crate::source::CoefficientStats;
use crate::special::normal_quantile;
use crate::{Error, Result};
use std::io::{Read, Write};

pub const COUNTER_BITS: u32 = 16;
pub const DATAPATH_BITS: u32 = 20;
/// Side length of the transform.
pub const SIDE: usize = 16;
const PASSES: u32 = 4;

/// Smallest two's-complement width holding `v`.
pub fn bits_required(v: i64) -> u32 {
    if v >= 0 {
        65 - v.leading_zeros()
    } else {
        65 - (!v).leading_zeros()
    }
}

/// A signed value with a declared two's-complement width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedWord {
    value: i64,
    width: u32,
}

impl FixedWord {
    pub fn new(value: i64, width: u32) -> Result<Self> {
        if !(1..=63).contains(&width) || bits_required(value) > width {
            return Err(Error::Overflow { value, width });
        }
        Ok(Self { value, width })
    }

    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn width(&self) -> u32 {
        self.width
    }
}

/// Unshifted butterfly sums
/// `[x0+x1+x2+x3, x0-x1+x2-x3, x0+x1-x2-x3, x0-x1-x2+x3]`.
pub fn butterfly_sums(x: [i64; 4]) -> [i64; 4] {
    let [a, b, c, d] = x;
    [a + b + c + d, a - b + c - d, a + b - c - d, a - b - c + d]
}

/// Four-point 2D Walsh-Hadamard butterfly with halving. Inputs share one
/// width `w`; the sums need at most `w + 2` bits and the outputs `w + 1`.
pub fn dwht4p(x: [FixedWord; 4]) -> Result<[FixedWord; 4]> {
    let w = x[0].width;
    if x.iter().any(|v| v.width != w) {
        return Err(Error::invalid("butterfly inputs must share one width"));
    }
    let sums = butterfly_sums(x.map(|v| v.value));
    let mut out = [FixedWord { value: 0, width: w + 1 }; 4];
    for (o, s) in out.iter_mut().zip(sums) {
        FixedWord::new(s, w + 2)?;
        *o = FixedWord::new(s >> 1, w + 1)?;
    }
    Ok(out)
}

/// The four RAM addresses `r * 16 + c` read and written by one butterfly:
/// `(r, c)`, `(r, c + h)`, `(r + h, c)`, `(r + h, c + h)`.
pub type Quad = [u8; 4];

/// Butterfly schedule: pass `s` uses stride `h = 2^s` and visits every
/// `(r, c)` with bit `s` clear in both, row-major. Every address appears
/// exactly once per pass.
pub fn schedule() -> Vec<Vec<Quad>> {
    (0..PASSES)
        .map(|s| {
            let h = 1usize << s;
            let mut quads = Vec::with_capacity(SIDE * SIDE / 4);
            for r in (0..SIDE).filter(|r| r & h == 0) {
                for c in (0..SIDE).filter(|c| c & h == 0) {
                    let a = |r: usize, c: usize| (r * SIDE + c) as u8;
                    quads.push([a(r, c), a(r, c + h), a(r + h, c), a(r + h, c + h)]);
                }
            }
            quads
        })
        .collect()
}

/// The schedule flattened into 256 ROM words of four 8-bit addresses.
pub fn index_rom() -> Vec<[u8; 4]> {
    schedule().into_iter().flatten().collect()
}

/// Result of the fixed-point transform.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedTransform {
    /// Row-major coefficients, scaled like the orthonormal transform.
    pub values: Vec<i64>,
    /// Widest butterfly sum before halving, in bits.
    pub max_sum_bits: u32,
    /// Widest value written back to RAM, in bits.
    pub max_stored_bits: u32,
}

/// Applies the four butterfly passes in place over a 16x16 array of 16-bit
/// counter values. The result approximates the orthonormal 2D Walsh-
/// Hadamard transform in natural order; each pass truncates by at most
/// half a unit.
pub fn dwht2d_fixed(input: &[i64]) -> Result<FixedTransform> {
    if input.len() != SIDE * SIDE {
        return Err(Error::DimensionMismatch { expected: "256 values".into(), actual: input.len().to_string() });
    }
    let mut ram = input.iter().map(|&v| FixedWord::new(v, COUNTER_BITS)).collect::<Result<Vec<FixedWord>>>()?;
    let (mut max_sum_bits, mut max_stored_bits) = (0, 0);
    for (s, pass) in schedule().iter().enumerate() {
        let width = COUNTER_BITS + s as u32;
        for quad in pass {
            let x = quad.map(|a| FixedWord { value: ram[a as usize].value, width });
            let sums = butterfly_sums(x.map(|v| v.value));
            max_sum_bits = max_sum_bits.max(sums.iter().map(|&v| bits_required(v)).max().unwrap());
            let y = dwht4p(x)?;
            for (a, v) in quad.iter().zip(y) {
                FixedWord::new(v.value, DATAPATH_BITS)?;
                max_stored_bits = max_stored_bits.max(bits_required(v.value));
                ram[*a as usize] = v;
            }
        }
    }
    Ok(FixedTransform { values: ram.iter().map(|w| w.value).collect(), max_sum_bits, max_stored_bits })
}

/// Worst-case `|fixed - exact|` after `passes` halving stages: the error
/// bound `E` obeys `E' = 2E + 1/2`.
pub fn truncation_bound(passes: u32) -> f64 {
    (0..passes).fold(0.0, |e, _| 2.0 * e + 0.5)
}

/// `T_min = (2^w - 1) / f`: time until a `w`-bit counter clocked at `f`
/// overflows.
pub fn counter_overload_time(width_bits: u32, f_hz: f64) -> Result<f64> {
    if width_bits == 0 || width_bits > 63 || !(f_hz > 0.0) {
        return Err(Error::invalid("counter width must be in 1..=63 and frequency positive"));
    }
    Ok(((1u64 << width_bits) - 1) as f64 / f_hz)
}

/// Whether counting for `window` seconds stays clear of overflow.
pub fn counter_window_ok(width_bits: u32, f_hz: f64, window: f64) -> Result<bool> {
    Ok(window <= counter_overload_time(width_bits, f_hz)?)
}

/// Quantizer boundaries in raw coefficient units, `2^{K_i} - 1` words per
/// used coefficient in ascending coefficient order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerRom {
    /// `(coefficient position, K_i)` for each used coefficient.
    pub layout: Vec<(usize, u8)>,
    pub words: Vec<i64>,
    pub word_bits: u32,
}

impl QuantizerRom {
    pub fn total_bytes(&self) -> usize {
        (self.words.len() * self.word_bits as usize).div_ceil(8)
    }

    /// A JSON line `{"words":..,"word_bits":..}` followed by three
    /// little-endian bytes per word, upper four bits zero.
    pub fn write_image<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::json!({ "words": self.words.len(), "word_bits": self.word_bits });
        writeln!(w, "{header}")?;
        let mask = (1i64 << self.word_bits) - 1;
        for &v in &self.words {
            let u = (v & mask) as u32;
            w.write_all(&u.to_le_bytes()[..3])?;
        }
        Ok(())
    }

    /// Reads the words of an image written by [`write_image`](Self::write_image).
    pub fn read_image<R: Read>(mut r: R) -> Result<Vec<i64>> {
        let mut data = Vec::new();
        r.read_to_end(&mut data)?;
        let nl = data.iter().position(|&b| b == b'\n').ok_or_else(|| Error::invalid("missing ROM header line"))?;
        let header: serde_json::Value = serde_json::from_slice(&data[..nl])?;
        let words = header["words"].as_u64().ok_or_else(|| Error::invalid("ROM header lacks words"))? as usize;
        let bits = header["word_bits"].as_u64().ok_or_else(|| Error::invalid("ROM header lacks word_bits"))? as u32;
        if !(1..=24).contains(&bits) {
            return Err(Error::invalid(format!("unsupported word width {bits}")));
        }
        let body = &data[nl + 1..];
        if body.len() != 3 * words {
            return Err(Error::invalid(format!("ROM body has {} bytes, expected {}", body.len(), 3 * words)));
        }
        Ok(body
            .chunks(3)
            .map(|b| {
                let u = u32::from_le_bytes([b[0], b[1], b[2], 0]) as i64;
                if u >> (bits - 1) & 1 == 1 {
                    u - (1 << bits)
                } else {
                    u
                }
            })
            .collect())
    }

    /// Hardware quantization of raw fixed-point coefficients: Gray labels
    /// of `1 + #{boundaries < value}` per used coefficient.
    pub fn quantize(&self, coeffs: &[i64]) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        let mut offset = 0;
        for &(pos, k) in &self.layout {
            let v = *coeffs.get(pos).ok_or_else(|| Error::invalid(format!("no coefficient at position {pos}")))?;
            let n = (1usize << k) - 1;
            let b = &self.words[offset..offset + n];
            out.extend(gray_bits(1 + b.iter().filter(|&&x| x < v).count(), k)?);
            offset += n;
        }
        Ok(out)
    }
}

/// Builds the boundary ROM: `round(μ_i + σ_i Φ⁻¹(k / 2^{K_i}))` for
/// `k = 1 .. 2^{K_i} - 1`, checked against the datapath width.
pub fn quantizer_rom(alloc: &BitAllocation, stats: &CoefficientStats) -> Result<QuantizerRom> {
    if alloc.bits().len() != stats.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("allocation over {} coefficients", stats.len()),
            actual: alloc.bits().len().to_string(),
        });
    }
    let mut layout = Vec::new();
    let mut words = Vec::new();
    for (pos, (&k, s)) in alloc.bits().iter().zip(stats.iter()).enumerate() {
        if k == 0 {
            continue;
        }
        let levels = 1usize << k;
        for j in 1..levels {
            let b = (s.mu + s.sigma * normal_quantile(j as f64 / levels as f64)).round();
            if !b.is_finite() || bits_required(b as i64) > DATAPATH_BITS || b.abs() > 1e18 {
                return Err(Error::Overflow { value: b as i64, width: DATAPATH_BITS });
            }
            words.push(b as i64);
        }
        layout.push((pos, k));
    }
    Ok(QuantizerRom { layout, words, word_bits: DATAPATH_BITS })
}
