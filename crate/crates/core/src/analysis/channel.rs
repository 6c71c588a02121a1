//! Monte Carlo measurement of the symbol channel seen through an inner
//! decoder over a BSC.

use crate::codes::{Codec, DecodeOutcome, ReedMuller, Repetition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Trials per independent random stream.
const CHUNK: u64 = 1 << 16;

/// Counts of decoder outcomes after a BSC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelEstimate {
    pub trials: u64,
    pub erasures: u64,
    pub errors: u64,
}

impl ChannelEstimate {
    pub fn p_era(&self) -> f64 {
        self.erasures as f64 / self.trials as f64
    }

    pub fn p_err(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }

    fn se(p: f64, n: u64) -> f64 {
        (p * (1.0 - p) / n as f64).sqrt()
    }

    pub fn se_era(&self) -> f64 {
        Self::se(self.p_era(), self.trials)
    }

    pub fn se_err(&self) -> f64 {
        Self::se(self.p_err(), self.trials)
    }
}

/// Sends uniformly random messages through `codec` and a BSC(`p`) and
/// counts erasures (including decoder failures) and wrong decisions.
///
/// Trials are split into fixed chunks; chunk `c` draws from the ChaCha20
/// stream `c` under `seed`, so the result does not depend on the thread
/// count.
pub fn codec_channel_mc(codec: &dyn Codec, p: f64, trials: u64, seed: u64) -> ChannelEstimate {
    assert!((0.0..=1.0).contains(&p), "crossover {p} outside [0, 1]");
    let chunks = trials.div_ceil(CHUNK);
    let (erasures, errors) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(trials - c * CHUNK);
            let (mut era, mut err) = (0u64, 0u64);
            let mut msg = vec![0u8; codec.k()];
            for _ in 0..count {
                msg.iter_mut().for_each(|b| *b = rng.random_range(0..2));
                let mut word = codec.encode(&msg).expect("message has the code dimension");
                for b in word.iter_mut() {
                    if rng.random_bool(p) {
                        *b ^= 1;
                    }
                }
                match codec.decode(&word).expect("word has the block length") {
                    DecodeOutcome::Decoded(m) if m == msg => {}
                    DecodeOutcome::Decoded(_) => err += 1,
                    DecodeOutcome::Erasure | DecodeOutcome::Failure => era += 1,
                }
            }
            (era, err)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    ChannelEstimate { trials, erasures, errors }
}

/// Erasure and error rates of the RM(1, 5) minimum-distance decoder.
pub fn rm_channel_mc(p: f64, trials: u64, seed: u64) -> ChannelEstimate {
    codec_channel_mc(&ReedMuller, p, trials, seed)
}

/// Crossover of the BSC seen after majority decoding of an odd-length
/// repetition code over BSC(`p`).
pub fn repetition_crossover(n: u64, p: f64) -> f64 {
    assert!(n % 2 == 1, "majority decoding needs an odd length");
    super::binomial_tail(n, p, n / 2)
}

pub fn repetition_channel_mc(n: usize, p: f64, trials: u64, seed: u64) -> ChannelEstimate {
    codec_channel_mc(&Repetition::new(n).expect("positive length"), p, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_channel() {
        let e = rm_channel_mc(0.0, 10_000, 1);
        assert_eq!((e.erasures, e.errors), (0, 0));
    }

    #[test]
    fn deterministic_given_seed() {
        assert_eq!(rm_channel_mc(0.1, 200_000, 5), rm_channel_mc(0.1, 200_000, 5));
        assert_ne!(rm_channel_mc(0.1, 200_000, 5), rm_channel_mc(0.1, 200_000, 6));
    }

    #[test]
    fn noisier_channel_is_worse() {
        let good = rm_channel_mc(0.06, 100_000, 2);
        let bad = rm_channel_mc(0.5, 100_000, 2);
        assert!(bad.p_era() + bad.p_err() > good.p_era() + good.p_err());
    }

    #[test]
    fn repetition_crossover_formula() {
        let p: f64 = 0.06;
        assert!((repetition_crossover(3, p) - (3.0 * p * p * (1.0 - p) + p.powi(3))).abs() < 1e-16);
        let e = repetition_channel_mc(3, p, 1_000_000, 3);
        assert_eq!(e.erasures, 0);
        assert!((e.p_err() - 0.010368).abs() < 4.0 * e.se_err());
    }
}
