use super::{check_len, Codec, DecodeOutcome};
use crate::{Error, Result};

/// Two-level concatenation: the outer codeword is split into symbols, each
/// encoded by the inner code. Inner erasures and failures become outer
/// symbol erasures.
pub struct Concatenated {
    outer: Box<dyn Codec>,
    inner: Box<dyn Codec>,
}

impl Concatenated {
    pub fn new(outer: Box<dyn Codec>, inner: Box<dyn Codec>) -> Result<Self> {
        if inner.k() != outer.symbol_bits() {
            return Err(Error::invalid(format!(
                "inner {} carries {} bits but outer {} has {}-bit symbols",
                inner.name(),
                inner.k(),
                outer.name(),
                outer.symbol_bits()
            )));
        }
        Ok(Self { outer, inner })
    }

    fn symbols(&self) -> usize {
        self.outer.n() / self.outer.symbol_bits()
    }
}

impl Codec for Concatenated {
    fn name(&self) -> String {
        format!("{}+{}", self.inner.name(), self.outer.name())
    }

    fn n(&self) -> usize {
        self.symbols() * self.inner.n()
    }

    fn k(&self) -> usize {
        self.outer.k()
    }

    fn d(&self) -> usize {
        self.outer.d() * self.inner.d()
    }

    fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        let outer = self.outer.encode(message)?;
        let mut out = Vec::with_capacity(self.n());
        for sym in outer.chunks(self.outer.symbol_bits()) {
            out.extend(self.inner.encode(sym)?);
        }
        Ok(out)
    }

    fn decode(&self, received: &[u8]) -> Result<DecodeOutcome> {
        check_len("received bits", self.n(), received.len())?;
        let sb = self.outer.symbol_bits();
        let mut word = Vec::with_capacity(self.outer.n());
        let mut erased = Vec::with_capacity(self.symbols());
        for block in received.chunks(self.inner.n()) {
            match self.inner.decode(block)? {
                DecodeOutcome::Decoded(m) => {
                    word.extend(m);
                    erased.push(false);
                }
                DecodeOutcome::Erasure | DecodeOutcome::Failure => {
                    word.extend(std::iter::repeat_n(0, sb));
                    erased.push(true);
                }
            }
        }
        self.outer.decode_with_erasures(&word, &erased)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{CodeSpec, ReedMuller, Repetition};
    use super::*;
    use rand::{seq::index::sample, Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn rm_rs_dimensions() {
        let c = CodeSpec::from_name("rm32_6+rs28_22").unwrap().codec().unwrap();
        assert_eq!((c.n(), c.k()), (896, 132));
        assert!((c.k() as f64 / c.n() as f64 - 0.1473).abs() < 5e-5);
    }

    #[test]
    fn incompatible_sizes() {
        let rs = CodeSpec::from_name("rs28_22").unwrap().codec().unwrap();
        assert!(Concatenated::new(rs, Box::new(Repetition::new(3).unwrap())).is_err());
        let rep = Box::new(Repetition::new(3).unwrap());
        assert!(Concatenated::new(rep, Box::new(ReedMuller)).is_err());
    }

    #[test]
    fn survives_erasures_and_errors() {
        // Two blocks get 20 bit errors (erasure or wrong symbol), the rest 7.
        let c = CodeSpec::from_name("rm32_6+rs28_22").unwrap().codec().unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for _ in 0..50 {
            let m: Vec<u8> = (0..132).map(|_| rng.random_range(0..2)).collect();
            let mut r = c.encode(&m).unwrap();
            for b in 0..28 {
                let w = if b < 2 { 20 } else { 7 };
                for i in sample(&mut rng, 32, w) {
                    r[32 * b + i] ^= 1;
                }
            }
            assert_eq!(c.decode(&r).unwrap(), DecodeOutcome::Decoded(m));
        }
    }
}
