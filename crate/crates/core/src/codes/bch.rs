use super::gf::Field;
use super::{check_bits, check_len, Codec, DecodeOutcome};
use crate::{Error, Result};

/// Narrow-sense primitive binary BCH code of length 255 over GF(256),
/// designed to correct `t` errors.
///
/// The generator is the least common multiple of the minimal polynomials
/// of `α^1 ..= α^{2t}`. Bit `i` of a codeword is the coefficient of `x^i`;
/// positions `0..n-k` hold parity and `n-k..n` the message.
#[derive(Debug, Clone)]
pub struct Bch {
    n: usize,
    k: usize,
    t: usize,
    generator: Vec<u8>,
}

/// Product of `(x - α^j)` over the cyclotomic coset of `i`, as a GF(2)
/// polynomial.
fn minimal_polynomial(f: &Field, i: usize) -> Vec<u8> {
    let mut coset = vec![i % f.order()];
    loop {
        let next = coset.last().unwrap() * 2 % f.order();
        if next == coset[0] {
            break;
        }
        coset.push(next);
    }
    let mut p = vec![1u8];
    for &j in &coset {
        p = f.poly_mul(&p, &[f.alpha_pow(j as i64), 1]);
    }
    assert!(p.iter().all(|&c| c <= 1), "minimal polynomial has non-binary coefficients");
    p
}

fn binary_poly_mul(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 1 {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= y;
            }
        }
    }
    out
}

impl Bch {
    pub fn new(n: usize, k: usize, t: usize) -> Result<Self> {
        let f = Field::gf256();
        if n != f.order() {
            return Err(Error::invalid(format!("only primitive length {} is supported, got {n}", f.order())));
        }
        let mut seen = vec![false; f.order()];
        let mut generator = vec![1u8];
        for i in 1..=2 * t {
            if seen[i % f.order()] {
                continue;
            }
            let mut j = i % f.order();
            loop {
                seen[j] = true;
                j = j * 2 % f.order();
                if j == i % f.order() {
                    break;
                }
            }
            generator = binary_poly_mul(&generator, &minimal_polynomial(f, i));
        }
        if generator.len() - 1 != n - k {
            return Err(Error::invalid(format!(
                "a {t}-error-correcting BCH code of length {n} has dimension {}, not {k}",
                n + 1 - generator.len()
            )));
        }
        Ok(Self { n, k, t, generator })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn generator(&self) -> &[u8] {
        &self.generator
    }

    fn parity_len(&self) -> usize {
        self.n - self.k
    }
}

impl Codec for Bch {
    fn name(&self) -> String {
        format!("bch{}_{}", self.n, self.k)
    }

    fn n(&self) -> usize {
        self.n
    }

    fn k(&self) -> usize {
        self.k
    }

    fn d(&self) -> usize {
        2 * self.t + 1
    }

    fn radius(&self) -> usize {
        self.t
    }

    fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        check_len("message bits", self.k, message.len())?;
        check_bits(message)?;
        let p = self.parity_len();
        let mut word = vec![0u8; self.n];
        word[p..].copy_from_slice(message);
        let mut rem = word.clone();
        for i in (p..self.n).rev() {
            if rem[i] == 1 {
                for (j, &g) in self.generator.iter().enumerate() {
                    rem[i - p + j] ^= g;
                }
            }
        }
        word[..p].copy_from_slice(&rem[..p]);
        Ok(word)
    }

    /// Bounded-distance decoding: syndromes, Berlekamp-Massey, Chien search.
    fn decode(&self, received: &[u8]) -> Result<DecodeOutcome> {
        check_len("received bits", self.n, received.len())?;
        check_bits(received)?;
        let f = Field::gf256();
        let p = self.parity_len();
        let syndromes: Vec<u8> = (1..=2 * self.t).map(|j| f.eval(received, f.alpha_pow(j as i64))).collect();
        if syndromes.iter().all(|&s| s == 0) {
            return Ok(DecodeOutcome::Decoded(received[p..].to_vec()));
        }
        let lambda = f.berlekamp_massey(&syndromes, &[1]);
        if lambda.len() - 1 > self.t {
            return Ok(DecodeOutcome::Failure);
        }
        let Some(positions) = f.locate(&lambda, self.n) else {
            return Ok(DecodeOutcome::Failure);
        };
        let mut word = received.to_vec();
        for l in positions {
            word[l] ^= 1;
        }
        Ok(DecodeOutcome::Decoded(word[p..].to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::weight;
    use rand::{seq::index::sample, Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn code() -> Bch {
        Bch::new(255, 131, 18).unwrap()
    }

    #[test]
    fn generator_degree_and_roots() {
        let c = code();
        assert_eq!(c.generator().len() - 1, 124);
        let f = Field::gf256();
        for j in 1..=36 {
            assert_eq!(f.eval(c.generator(), f.alpha_pow(j)), 0, "α^{j} is not a root");
        }
        assert!(Bch::new(255, 132, 18).is_err());
    }

    #[test]
    fn small_codes_have_known_dimensions() {
        for (t, k) in [(1, 247), (2, 239), (3, 231), (4, 223), (8, 191)] {
            assert!(Bch::new(255, k, t).is_ok(), "t={t}");
        }
    }

    #[test]
    fn corrects_up_to_eighteen() {
        let c = code();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for _ in 0..300 {
            let m: Vec<u8> = (0..131).map(|_| rng.random_range(0..2)).collect();
            let mut r = c.encode(&m).unwrap();
            let w = rng.random_range(0..=18);
            for i in sample(&mut rng, 255, w) {
                r[i] ^= 1;
            }
            assert_eq!(c.decode(&r).unwrap(), DecodeOutcome::Decoded(m));
        }
    }

    #[test]
    fn minimum_weight_of_generator_multiples() {
        let c = code();
        assert!(weight(c.generator()) >= 37);
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        for _ in 0..200 {
            let m: Vec<u8> = (0..131).map(|_| rng.random_range(0..2)).collect();
            let w = weight(&c.encode(&m).unwrap());
            assert!(w == 0 || w >= 37);
        }
    }

    #[test]
    fn beyond_radius_is_failure_or_other_codeword() {
        let c = code();
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        for _ in 0..100 {
            let m: Vec<u8> = (0..131).map(|_| rng.random_range(0..2)).collect();
            let mut r = c.encode(&m).unwrap();
            for i in sample(&mut rng, 255, 40) {
                r[i] ^= 1;
            }
            if let DecodeOutcome::Decoded(x) = c.decode(&r).unwrap() {
                assert_ne!(x, m);
            }
        }
    }
}
