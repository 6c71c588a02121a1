//! Secret-key versus privacy-leakage rate regions and related summaries.

use super::ReliabilityProfile;
use crate::special::{binary_convolution, binary_entropy};
use crate::{Error, Result};
use serde::Serialize;

/// Secret-key rate and privacy-leakage rate, in bits per source bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub r_s: f64,
    pub r_l: f64,
}

/// Finite-length achievability reference for `(n, P_B) = (255, 1e-9)`,
/// kept for plot overlays.
pub const FINITE_LENGTH_REFERENCE: RatePoint = RatePoint { r_s: 0.691, r_l: 0.309 };

/// Fuzzy-commitment region over BSC(`p`): `R_s <= 1 - H_b(p)`,
/// `R_l >= 1 - R_s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FcRegion {
    pub optimal: RatePoint,
    /// Corner points `(R_s, 1 - R_s)` of the boundary, `R_s` from 0 to the
    /// optimum.
    pub boundary: Vec<RatePoint>,
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::invalid(format!("crossover must be in [0, 0.5], got {p}")));
    }
    Ok(())
}

pub fn fc_region(p: f64, samples: usize) -> Result<FcRegion> {
    check_p(p)?;
    let r_star = 1.0 - binary_entropy(p);
    let optimal = RatePoint { r_s: r_star, r_l: binary_entropy(p) };
    let steps = samples.max(2) - 1;
    let boundary = (0..=steps)
        .map(|i| {
            let r_s = r_star * i as f64 / steps as f64;
            RatePoint { r_s, r_l: 1.0 - r_s }
        })
        .collect();
    Ok(FcRegion { optimal, boundary })
}

/// Boundary of the chosen-secret region over BSC(`p`) traced by BSC(`α`)
/// test channels: `R_s = 1 - H_b(α * p)`, `R_l = H_b(α * p) - H_b(α)`.
pub fn cs_region_mgl(p: f64, alphas: &[f64]) -> Result<Vec<RatePoint>> {
    check_p(p)?;
    alphas
        .iter()
        .map(|&a| {
            if !(0.0..=0.5).contains(&a) {
                return Err(Error::invalid(format!("test-channel crossover must be in [0, 0.5], got {a}")));
            }
            let h = binary_entropy(binary_convolution(a, p));
            Ok(RatePoint { r_s: 1.0 - h, r_l: (h - binary_entropy(a)).max(0.0) })
        })
        .collect()
}

/// Evenly spaced `α` grid on `[0, 0.5]`.
pub fn alpha_grid(points: usize) -> Vec<f64> {
    let steps = points.max(2) - 1;
    (0..=steps).map(|i| 0.5 * i as f64 / steps as f64).collect()
}

/// Rates of a code carrying `k_used` key bits in `n` channel bits.
pub fn code_rate_pair(k_used: usize, n: usize) -> RatePoint {
    let r_s = k_used as f64 / n as f64;
    RatePoint { r_s, r_l: 1.0 - r_s }
}

/// Average crossover over the used coefficients at one bit each,
/// `1 - mean(P_{c,i})`.
pub fn avg_crossover(profile: &ReliabilityProfile) -> Result<f64> {
    if profile.is_empty() {
        return Err(Error::invalid("empty reliability profile"));
    }
    Ok(profile.error_probs().iter().sum::<f64>() / profile.len() as f64)
}
