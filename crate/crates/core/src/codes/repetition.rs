use super::{check_bits, check_len, Codec, DecodeOutcome};
use crate::{Error, Result};

/// `(n, 1, n)` repetition code with majority decoding. Ties (even `n`)
/// are failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Repetition {
    n: usize,
}

impl Repetition {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("repetition length must be positive"));
        }
        Ok(Self { n })
    }
}

impl Codec for Repetition {
    fn name(&self) -> String {
        format!("rep{}", self.n)
    }

    fn n(&self) -> usize {
        self.n
    }

    fn k(&self) -> usize {
        1
    }

    fn d(&self) -> usize {
        self.n
    }

    fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        check_len("message bits", 1, message.len())?;
        check_bits(message)?;
        Ok(vec![message[0]; self.n])
    }

    fn decode(&self, received: &[u8]) -> Result<DecodeOutcome> {
        check_len("received bits", self.n, received.len())?;
        check_bits(received)?;
        let ones = received.iter().filter(|&&b| b == 1).count();
        Ok(match (2 * ones).cmp(&self.n) {
            std::cmp::Ordering::Greater => DecodeOutcome::Decoded(vec![1]),
            std::cmp::Ordering::Less => DecodeOutcome::Decoded(vec![0]),
            std::cmp::Ordering::Equal => DecodeOutcome::Failure,
        })
    }
}
