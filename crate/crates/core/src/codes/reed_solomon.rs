use super::gf::Field;
use super::{bits_from_symbols, check_bits, check_len, symbols_from_bits, Codec, DecodeOutcome};
use crate::{Error, Result};

/// Narrow-sense Reed-Solomon code over GF(64), shortened from RS(63, n - k + 57)
/// by fixing the leading information symbols to zero.
///
/// Codeword symbol `i` is the coefficient of `x^i`; positions `0..n-k` hold
/// parity and `n-k..n` the message. Generator roots are `α^1 ..= α^{n-k}`.
#[derive(Debug, Clone)]
pub struct ReedSolomon {
    n: usize,
    k: usize,
    generator: Vec<u8>,
}

impl ReedSolomon {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let f = Field::gf64();
        if k == 0 || k >= n || n > f.order() {
            return Err(Error::invalid(format!("invalid Reed-Solomon parameters ({n}, {k}) over GF(64)")));
        }
        let mut generator = vec![1u8];
        for i in 1..=(n - k) {
            generator = f.poly_mul(&generator, &[f.alpha_pow(i as i64), 1]);
        }
        Ok(Self { n, k, generator })
    }

    fn field(&self) -> &'static Field {
        Field::gf64()
    }

    fn parity_len(&self) -> usize {
        self.n - self.k
    }

    pub fn generator(&self) -> &[u8] {
        &self.generator
    }

    /// Systematic encoding of `k` symbols in `0..64`.
    pub fn encode_symbols(&self, message: &[u8]) -> Result<Vec<u8>> {
        check_len("message symbols", self.k, message.len())?;
        if message.iter().any(|&s| s >= 64) {
            return Err(Error::invalid("symbol outside GF(64)"));
        }
        let f = self.field();
        let p = self.parity_len();
        let mut word = vec![0u8; self.n];
        word[p..].copy_from_slice(message);
        // Remainder of m(x) x^p modulo the monic generator.
        let mut rem = word.clone();
        for i in (p..self.n).rev() {
            let c = rem[i];
            if c != 0 {
                for (j, &g) in self.generator.iter().enumerate() {
                    rem[i - p + j] ^= f.mul(c, g);
                }
            }
        }
        word[..p].copy_from_slice(&rem[..p]);
        Ok(word)
    }

    fn syndromes(&self, word: &[u8]) -> Vec<u8> {
        let f = self.field();
        (1..=self.parity_len()).map(|j| f.eval(word, f.alpha_pow(j as i64))).collect()
    }

    /// Errors-and-erasures decoding. Succeeds whenever `2e + ν < n - k + 1`;
    /// `Decoded` carries the `k` message symbols.
    pub fn decode_symbols(&self, received: &[u8], erased: &[bool]) -> Result<DecodeOutcome> {
        check_len("received symbols", self.n, received.len())?;
        check_len("erasure flags", self.n, erased.len())?;
        if received.iter().any(|&s| s >= 64) {
            return Err(Error::invalid("symbol outside GF(64)"));
        }
        let f = self.field();
        let p = self.parity_len();
        let mut word = received.to_vec();
        let erasures: Vec<usize> = (0..self.n).filter(|&i| erased[i]).collect();
        if erasures.len() > p {
            return Ok(DecodeOutcome::Failure);
        }
        for &i in &erasures {
            word[i] = 0;
        }
        let s = self.syndromes(&word);
        if s.iter().all(|&x| x == 0) {
            return Ok(DecodeOutcome::Decoded(word[p..].to_vec()));
        }
        let mut gamma = vec![1u8];
        for &i in &erasures {
            gamma = f.poly_mul(&gamma, &[1, f.alpha_pow(i as i64)]);
        }
        let lambda = f.berlekamp_massey(&s, &gamma);
        let Some(positions) = f.locate(&lambda, self.n) else {
            return Ok(DecodeOutcome::Failure);
        };
        // Ω(x) = S(x) Λ(x) mod x^p with S(x) = Σ S_{j+1} x^j.
        let mut omega = f.poly_mul(&s, &lambda);
        omega.truncate(p);
        let dlambda = f.derivative(&lambda);
        for &l in &positions {
            let xinv = f.alpha_pow(-(l as i64));
            let den = f.eval(&dlambda, xinv);
            if den == 0 {
                return Ok(DecodeOutcome::Failure);
            }
            word[l] ^= f.div(f.eval(&omega, xinv), den);
        }
        let errors = positions.iter().filter(|&&l| !erased[l]).count();
        if self.syndromes(&word).iter().any(|&x| x != 0) || 2 * errors + erasures.len() > p {
            return Ok(DecodeOutcome::Failure);
        }
        Ok(DecodeOutcome::Decoded(word[p..].to_vec()))
    }
}

impl Codec for ReedSolomon {
    fn name(&self) -> String {
        format!("rs{}_{}", self.n, self.k)
    }

    fn n(&self) -> usize {
        6 * self.n
    }

    fn k(&self) -> usize {
        6 * self.k
    }

    /// Symbol distance; bit radius equals symbol radius only for bursts.
    fn d(&self) -> usize {
        self.n - self.k + 1
    }

    fn symbol_bits(&self) -> usize {
        6
    }

    fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        check_len("message bits", 6 * self.k, message.len())?;
        check_bits(message)?;
        Ok(bits_from_symbols(&self.encode_symbols(&symbols_from_bits(message, 6))?, 6))
    }

    fn decode(&self, received: &[u8]) -> Result<DecodeOutcome> {
        self.decode_with_erasures(received, &vec![false; self.n])
    }

    fn decode_with_erasures(&self, received: &[u8], erased: &[bool]) -> Result<DecodeOutcome> {
        check_len("received bits", 6 * self.n, received.len())?;
        check_bits(received)?;
        Ok(match self.decode_symbols(&symbols_from_bits(received, 6), erased)? {
            DecodeOutcome::Decoded(m) => DecodeOutcome::Decoded(bits_from_symbols(&m, 6)),
            other => other,
        })
    }
}
