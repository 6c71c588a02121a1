//! Bit allocation under the two reliability metrics.

use super::metrics::{correctness, hd_metric};
use super::MAX_BITS;
use crate::analysis::binomial_tail;
use crate::source::CoefficientStats;
use crate::special::binary_entropy;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Block-error target used for the correctness threshold.
pub const DEFAULT_TARGET: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// Every bit behaves like a BSC with crossover at most `p_b`.
    FixedBsc { p_b: f64 },
    /// At most `c_max` coefficients are in error, each with correctness at
    /// least `p_c_bar`.
    FixedErrors { c_max: usize, p_c_bar: f64 },
}

/// Per-coefficient bit counts `K_i`, ascending coefficient index.
#[derive(Debug, Clone, PartialEq)]
pub struct BitAllocation {
    bits: Vec<u8>,
    metric: Option<Metric>,
}

impl BitAllocation {
    /// Checks `K_1 = 0` and `K_i <= 8`.
    pub fn new(bits: Vec<u8>, metric: Option<Metric>) -> Result<Self> {
        if bits.first().is_some_and(|&k| k != 0) {
            return Err(Error::invalid("the DC coefficient cannot carry bits"));
        }
        if let Some(k) = bits.iter().find(|&&k| k > MAX_BITS) {
            return Err(Error::invalid(format!("{k} bits exceeds the cap of {MAX_BITS}")));
        }
        Ok(Self { bits, metric })
    }

    /// `k` bits on every coefficient but the first.
    pub fn uniform(len: usize, k: u8) -> Self {
        let bits = (0..len).map(|i| if i == 0 { 0 } else { k }).collect();
        Self::new(bits, None).expect("uniform allocation within the cap")
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn metric(&self) -> Option<Metric> {
        self.metric
    }

    /// `N = Σ_{i≥2} K_i`.
    pub fn total_bits(&self) -> usize {
        self.bits.iter().map(|&k| k as usize).sum()
    }

    pub fn max_bits(&self) -> u8 {
        self.bits.iter().copied().max().unwrap_or(0)
    }

    /// Sum of the `c_max` largest `K_i`: the bit errors caused by `c_max`
    /// erroneous coefficients in the worst case.
    pub fn worst_case_errors(&self, c_max: usize) -> usize {
        let mut sorted = self.bits.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        sorted.iter().take(c_max).map(|&k| k as usize).sum()
    }

    /// `e` for a fixed-errors allocation.
    pub fn e(&self) -> Option<usize> {
        match self.metric {
            Some(Metric::FixedErrors { c_max, .. }) => Some(self.worst_case_errors(c_max)),
            _ => None,
        }
    }

    /// `d_min >= 2e + 1`.
    pub fn d_min_required(&self) -> Option<usize> {
        self.e().map(|e| 2 * e + 1)
    }

    pub fn to_file(&self) -> AllocationFile {
        let (metric, p_b, c_max, p_c_bar) = match self.metric {
            Some(Metric::FixedBsc { p_b }) => ("fixed_bsc", Some(p_b), None, None),
            Some(Metric::FixedErrors { c_max, p_c_bar }) => ("fixed_errors", None, Some(c_max), Some(p_c_bar)),
            None => ("explicit", None, None, None),
        };
        AllocationFile {
            metric: metric.to_string(),
            p_b,
            c_max,
            p_c_bar,
            k: self.bits.clone(),
            n: self.total_bits(),
            e: self.e(),
            d_min_required: self.d_min_required(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: AllocationFile = serde_json::from_str(s)?;
        file.into_allocation()
    }

    /// SHA-256 of the compact JSON form; binds helper data to an allocation.
    pub fn digest(&self) -> [u8; 32] {
        let json = serde_json::to_string(&self.to_file()).expect("allocation serializes");
        Sha256::digest(json.as_bytes()).into()
    }
}

/// On-disk allocation record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationFile {
    pub metric: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_c_bar: Option<f64>,
    #[serde(rename = "K")]
    pub k: Vec<u8>,
    #[serde(rename = "N")]
    pub n: usize,
    pub e: Option<usize>,
    pub d_min_required: Option<usize>,
}

impl AllocationFile {
    pub fn into_allocation(self) -> Result<BitAllocation> {
        let metric = match self.metric.as_str() {
            "fixed_bsc" => Some(Metric::FixedBsc {
                p_b: self.p_b.ok_or_else(|| Error::invalid("fixed_bsc allocation without p_b"))?,
            }),
            "fixed_errors" => Some(Metric::FixedErrors {
                c_max: self.c_max.ok_or_else(|| Error::invalid("fixed_errors allocation without c_max"))?,
                p_c_bar: self.p_c_bar.ok_or_else(|| Error::invalid("fixed_errors allocation without p_c_bar"))?,
            }),
            "explicit" => None,
            other => return Err(Error::invalid(format!("unknown metric {other:?}"))),
        };
        let alloc = BitAllocation::new(self.k, metric)?;
        if alloc.total_bits() != self.n {
            return Err(Error::invalid(format!("N = {} but K sums to {}", self.n, alloc.total_bits())));
        }
        if self.e.is_some() && alloc.e() != self.e {
            return Err(Error::invalid(format!("e = {:?} disagrees with K ({:?})", self.e, alloc.e())));
        }
        Ok(alloc)
    }
}

fn largest_k(cap: u8, ok: impl Fn(u8) -> Result<bool>) -> Result<u8> {
    // Both metrics degrade monotonically in K, so the first failure ends
    // the search.
    let mut best = 0;
    for k in 1..=cap {
        if !ok(k)? {
            break;
        }
        best = k;
    }
    Ok(best)
}

fn allocate(stats: &CoefficientStats, cap: u8, ok: impl Fn(u8, f64) -> Result<bool> + Sync) -> Result<Vec<u8>> {
    stats
        .0
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            if i == 0 || !s.usable {
                Ok(0)
            } else if s.sigma_n == 0.0 {
                Ok(cap)
            } else {
                largest_k(cap, |k| ok(k, s.sigma_n))
            }
        })
        .collect()
}

/// `K_i = max{K : D_i(K) <= p_b}`, DC excluded.
pub fn allocate_fixed_bsc(stats: &CoefficientStats, p_b: f64) -> Result<BitAllocation> {
    if !(p_b > 0.0 && p_b < 0.5) {
        return Err(Error::invalid(format!("p_b must be in (0, 0.5), got {p_b}")));
    }
    let bits = allocate(stats, MAX_BITS, |k, s| Ok(hd_metric(k, s)? <= p_b))?;
    BitAllocation::new(bits, Some(Metric::FixedBsc { p_b }))
}

/// `K_i = max{K : P_{c,i}(K) >= P̄_c(c_max)}` with the threshold taken over
/// the `L - 1` bit-carrying coefficients. `force_k` caps every `K_i`.
pub fn allocate_fixed_errors(stats: &CoefficientStats, c_max: usize, force_k: Option<u8>) -> Result<BitAllocation> {
    let cap = force_k.unwrap_or(MAX_BITS);
    if cap > MAX_BITS {
        return Err(Error::invalid(format!("forced K = {cap} exceeds the cap of {MAX_BITS}")));
    }
    let n = stats.len().saturating_sub(1);
    if c_max > n {
        return Err(Error::invalid(format!("c_max = {c_max} exceeds the {n} bit-carrying coefficients")));
    }
    let p_c_bar = correctness_threshold(c_max, n, DEFAULT_TARGET)?;
    let bits = allocate(stats, cap, |k, s| Ok(correctness(k, s)? >= p_c_bar))?;
    BitAllocation::new(bits, Some(Metric::FixedErrors { c_max, p_c_bar }))
}

/// `S_max = (1 - H_b(p_b)) N`.
pub fn smax(p_b: f64, n: usize) -> Result<f64> {
    if !(0.0..=0.5).contains(&p_b) {
        return Err(Error::invalid(format!("p_b must be in [0, 0.5], got {p_b}")));
    }
    Ok((1.0 - binary_entropy(p_b)) * n as f64)
}

/// Smallest `P̄` with `Pr[Bin(n, 1 - P̄) > c_max] <= target`.
pub fn correctness_threshold(c_max: usize, n: usize, target: f64) -> Result<f64> {
    if c_max > n {
        return Err(Error::invalid(format!("c_max = {c_max} exceeds n = {n}")));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid(format!("target must be in (0, 1), got {target}")));
    }
    if c_max == n {
        return Ok(0.0);
    }
    let tail = |p: f64| binomial_tail(n as u64, 1.0 - p, c_max as u64);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
