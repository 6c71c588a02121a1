//! Transform-coding key binding for ring-oscillator (RO) PUF arrays.
//!
//! The crate covers the whole chain from a modeled RO source to a bound
//! secret key and its performance analysis:
//!
//! - [`source`]: synthetic and measured RO datasets, coefficient statistics.
//! - [`transforms`]: orthonormal 2D DCT, Walsh-Hadamard, Haar and KLT.
//! - [`quantize`]: histogram equalization, equiprobable Gaussian quantizer
//!   with Gray labels, the two reliability metrics and bit allocation.
//! - [`codes`]: GF(2^m) arithmetic, repetition, RM(1,5), shortened RS,
//!   binary BCH and two-level concatenation.
//! - [`commit`]: fuzzy commitment enrollment and reconstruction.
//! - [`analysis`]: block-error tails, Poisson-binomial DFT-CF, rate regions,
//!   Monte Carlo inner-channel measurement and uniqueness.
//! - [`hwmodel`]: bit-exact model of the multiplication-free 16x16 DWHT
//!   datapath and the quantizer ROM.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bits;
pub mod codes;
pub mod commit;
mod error;
pub mod hwmodel;
pub mod quantize;
pub mod source;
pub mod special;
pub mod transforms;

mod quadrature;

pub use error::{Error, Result};
