//! Bit-vector helpers. Bit sequences are `u8` slices holding 0 or 1.

use crate::{Error, Result};

/// Packs bits little-endian within each byte: bit `i` lands in byte `i / 8`
/// at position `i % 8`. The last byte is zero-padded.
pub fn pack_le(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 8] |= (b & 1) << (i % 8);
    }
    out
}

/// Inverse of [`pack_le`] for the first `n` bits.
pub fn unpack_le(bytes: &[u8], n: usize) -> Result<Vec<u8>> {
    if bytes.len() < n.div_ceil(8) {
        return Err(Error::invalid(format!("need {} bytes for {n} bits, have {}", n.div_ceil(8), bytes.len())));
    }
    Ok((0..n).map(|i| (bytes[i / 8] >> (i % 8)) & 1).collect())
}

pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn weight(a: &[u8]) -> usize {
    a.iter().filter(|&&b| b != 0).count()
}

pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Renders bits as a `0`/`1` string.
pub fn to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b != 0 { '1' } else { '0' }).collect()
}

pub fn from_str(s: &str) -> Result<Vec<u8>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::invalid(format!("not a bit: {other:?}"))),
        })
        .collect()
}

/// Bits of a byte string, most-significant bit of each byte first. Used for
/// keys written as hex.
pub fn from_bytes_msb(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1)).collect()
}

pub fn to_bytes_msb(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8).map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i)))).collect()
}
