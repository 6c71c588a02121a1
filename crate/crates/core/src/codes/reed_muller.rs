use super::{check_bits, check_len, Codec, DecodeOutcome};
use crate::Result;

/// First-order Reed-Muller code RM(1, 5), parameters (32, 6, 16).
///
/// Message `(m0, m1, .., m5)` maps to `c_j = m0 + Σ_i m_i j_{5-i}` where
/// `j_b` is bit `b` of the position `j`, i.e. `m1` multiplies the most
/// significant position bit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReedMuller;

const N: usize = 32;

fn linear_part(message: &[u8]) -> usize {
    message[1..].iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

impl Codec for ReedMuller {
    fn name(&self) -> String {
        "rm32_6".into()
    }

    fn n(&self) -> usize {
        N
    }

    fn k(&self) -> usize {
        6
    }

    fn d(&self) -> usize {
        16
    }

    fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        check_len("message bits", 6, message.len())?;
        check_bits(message)?;
        let u = linear_part(message);
        Ok((0..N).map(|j| message[0] ^ ((u & j).count_ones() & 1) as u8).collect())
    }

    fn decode(&self, received: &[u8]) -> Result<DecodeOutcome> {
        check_len("received bits", N, received.len())?;
        check_bits(received)?;
        Ok(rm_decode_mld(received))
    }
}

/// Exact minimum-distance decoding through the fast Hadamard transform.
/// The correlation `F(u)` gives distance `(32 - F(u)) / 2` to the codeword
/// with linear part `u` and `m0 = 0`, and `(32 + F(u)) / 2` with `m0 = 1`.
/// Several codewords at the minimum distance produce an erasure.
pub fn rm_decode_mld(received: &[u8]) -> DecodeOutcome {
    assert_eq!(received.len(), N);
    let mut f: [i32; N] = std::array::from_fn(|j| 1 - 2 * received[j] as i32);
    let mut h = 1;
    while h < N {
        for start in (0..N).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (f[i], f[i + h]);
                f[i] = a + b;
                f[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let best = f.iter().map(|v| v.abs()).max().unwrap();
    let mut winners = f.iter().enumerate().filter(|(_, v)| v.abs() == best);
    let (u, &fu) = winners.next().unwrap();
    // With best = 0 every codeword is at distance 16.
    if best == 0 || winners.next().is_some() {
        return DecodeOutcome::Erasure;
    }
    let mut msg = vec![(fu < 0) as u8];
    msg.extend((0..5).rev().map(|b| ((u >> b) & 1) as u8));
    DecodeOutcome::Decoded(msg)
}
