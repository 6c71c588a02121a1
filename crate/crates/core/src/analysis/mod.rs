//! Block-error probabilities, channel Monte Carlo, rate regions and
//! uniqueness statistics.

mod channel;
mod rates;
pub mod report;
mod tails;
mod uniqueness;

pub use channel::{codec_channel_mc, repetition_channel_mc, repetition_crossover, rm_channel_mc, ChannelEstimate};
pub use rates::{
    alpha_grid, avg_crossover, code_rate_pair, cs_region_mgl, fc_region, FcRegion, RatePoint, FINITE_LENGTH_REFERENCE,
};
pub use tails::{binomial_tail, ee_tail, poisson_binomial_tail_dftcf, poisson_binomial_tail_dp, ReliabilityProfile};
pub use uniqueness::{uniqueness, UniquenessStats};
