//! Histogram equalization, the equiprobable Gaussian quantizer with Gray
//! labels, and extraction of the binary sequence from an RO array.

mod alloc;
mod metrics;

pub use alloc::{
    allocate_fixed_bsc, allocate_fixed_errors, correctness_threshold, smax, AllocationFile, BitAllocation, Metric,
    DEFAULT_TARGET,
};
pub use metrics::{correctness, hd_metric, transition_matrix, TransitionMatrix, DEFAULT_QUAD_TOL};

use crate::source::CoefficientStats;
use crate::special::normal_quantile;
use crate::transforms::{self, CoefficientArray, TransformKind};
use crate::{Error, Result};
use std::sync::OnceLock;

/// Largest number of bits extracted from a single coefficient.
pub const MAX_BITS: u8 = 8;

/// `K`-bit quantizer with boundaries `b_k = Φ⁻¹(k / 2^K)`, `b_0 = -∞`,
/// `b_{2^K} = +∞`. Interval `k` is `(b_{k-1}, b_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantizer {
    bits: u8,
    boundaries: Vec<f64>,
}

impl Quantizer {
    pub fn new(bits: u8) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&bits) {
            return Err(Error::invalid(format!("bits per coefficient must be in 1..={MAX_BITS}, got {bits}")));
        }
        let levels = 1usize << bits;
        let boundaries = (0..=levels).map(|k| normal_quantile(k as f64 / levels as f64)).collect();
        Ok(Self { bits, boundaries })
    }

    /// Shared instance for `1 <= bits <= 8`.
    pub fn standard(bits: u8) -> &'static Quantizer {
        static CACHE: OnceLock<Vec<Quantizer>> = OnceLock::new();
        let all = CACHE.get_or_init(|| (1..=MAX_BITS).map(|k| Quantizer::new(k).unwrap()).collect());
        &all[bits as usize - 1]
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn levels(&self) -> usize {
        1 << self.bits
    }

    /// `b_0 ..= b_{2^K}`.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Interval index in `1..=2^K`.
    pub fn quantize(&self, t: f64) -> usize {
        let inner = &self.boundaries[1..self.boundaries.len() - 1];
        inner.partition_point(|&b| b < t) + 1
    }
}

/// Quantizes an equalized value with a `bits`-bit quantizer.
pub fn quantize_value(t: f64, bits: u8) -> Result<usize> {
    if !(1..=MAX_BITS).contains(&bits) {
        return Err(Error::invalid(format!("bits per coefficient must be in 1..={MAX_BITS}, got {bits}")));
    }
    Ok(Quantizer::standard(bits).quantize(t))
}

/// Binary-reflected Gray label of interval `k` (1-based), MSB first.
pub fn gray_bits(k: usize, bits: u8) -> Result<Vec<u8>> {
    if bits == 0 || bits > MAX_BITS || k == 0 || k > (1usize << bits) {
        return Err(Error::invalid(format!("interval {k} out of range for {bits} bits")));
    }
    let g = gray_code(k - 1);
    Ok((0..bits).rev().map(|i| ((g >> i) & 1) as u8).collect())
}

pub(crate) fn gray_code(v: usize) -> usize {
    v ^ (v >> 1)
}

/// `T̂_i = (T_i - μ_i) / σ_i`. Coefficients marked unusable map to 0.
pub fn equalize(coeffs: &CoefficientArray, stats: &CoefficientStats) -> Result<CoefficientArray> {
    if stats.len() != coeffs.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} stats", coeffs.len()),
            actual: stats.len().to_string(),
        });
    }
    let values = coeffs
        .values()
        .iter()
        .zip(stats.iter())
        .map(|(&t, s)| {
            if !s.usable {
                Ok(0.0)
            } else if !(s.sigma > 0.0) {
                Err(Error::invalid(format!("coefficient {} has zero deviation", s.index)))
            } else {
                Ok((t - s.mu) / s.sigma)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    CoefficientArray::new(coeffs.rows(), coeffs.cols(), values)
}

/// Runs transform, equalization, quantization and Gray labeling, and
/// concatenates the labels in ascending coefficient index.
pub fn extract_bits(
    array: &[f64],
    rows: usize,
    cols: usize,
    kind: &TransformKind,
    stats: &CoefficientStats,
    alloc: &BitAllocation,
) -> Result<Vec<u8>> {
    if alloc.bits().len() != stats.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("allocation over {} coefficients", stats.len()),
            actual: alloc.bits().len().to_string(),
        });
    }
    for (k, s) in alloc.bits().iter().zip(stats.iter()) {
        if *k > 0 && !s.usable {
            return Err(Error::invalid(format!("allocation uses unusable coefficient {}", s.index)));
        }
    }
    let coeffs = transforms::forward(kind, rows, cols, array)?;
    let eq = equalize(&coeffs, stats)?;
    let mut out = Vec::with_capacity(alloc.total_bits());
    for (&t, &k) in eq.values().iter().zip(alloc.bits()) {
        if k == 0 {
            continue;
        }
        let q = Quantizer::standard(k);
        out.extend(gray_bits(q.quantize(t), k)?);
    }
    Ok(out)
}
