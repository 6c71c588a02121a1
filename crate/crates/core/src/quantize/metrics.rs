//! Interval-transition probabilities of the equalized Gaussian channel and
//! the two reliability metrics built on them.
//!
//! With `T̂ ~ N(0, 1)` and noise `N̂ ~ N(0, σ_n²)`,
//! `P(j, k) = Pr[T̂ ∈ I_j, T̂ + N̂ ∈ I_k]`. Each entry is the difference of
//! two integrals `F(j, k) = ∫_{I_j} φ(t) Φ((b_k - t) / σ_n) dt`, evaluated by
//! adaptive Gauss-Legendre on `I_j ∩ [-8, 8]`.

use super::{gray_code, Quantizer, MAX_BITS};
use crate::quadrature::integrate;
use crate::special::normal_cdf;
use crate::{Error, Result};

/// Absolute quadrature tolerance per matrix entry.
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

const TRUNCATION: f64 = 8.0;
/// Beyond this many noise deviations `Φ` is 0 or 1 to double precision.
const FLAT: f64 = 9.0;

/// Joint interval probabilities, `2^K x 2^K`, row = enrollment interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    size: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    /// `P(j, k)` with 1-based interval indices.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[(j - 1) * self.size + (k - 1)]
    }

    pub fn trace(&self) -> f64 {
        (1..=self.size).map(|j| self.get(j, j)).sum()
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }
}

struct Channel<'a> {
    q: &'a Quantizer,
    sigma: f64,
    tol: f64,
}

impl Channel<'_> {
    fn interval(&self, j: usize) -> (f64, f64) {
        let b = self.q.boundaries();
        (b[j - 1].max(-TRUNCATION), b[j].min(TRUNCATION))
    }

    fn mass(&self, j: usize) -> f64 {
        let (lo, hi) = self.interval(j);
        if hi <= lo {
            0.0
        } else {
            normal_cdf(hi) - normal_cdf(lo)
        }
    }

    /// `F(j, k)`: enrollment in `I_j`, noisy value at most `b_k`.
    fn below(&self, j: usize, k: usize) -> f64 {
        let b = self.q.boundaries()[k];
        if b == f64::NEG_INFINITY {
            return 0.0;
        }
        if b == f64::INFINITY {
            return self.mass(j);
        }
        let (lo, hi) = self.interval(j);
        if hi <= lo {
            return 0.0;
        }
        let s = self.sigma;
        if b - hi >= FLAT * s {
            return self.mass(j);
        }
        if lo - b >= FLAT * s {
            return 0.0;
        }
        let breaks: Vec<f64> = [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0].iter().map(|m| b + m * s).collect();
        integrate(|t| crate::special::normal_pdf(t) * normal_cdf((b - t) / s), lo, hi, &breaks, self.tol)
    }

    fn entry(&self, j: usize, k: usize) -> f64 {
        (self.below(j, k) - self.below(j, k - 1)).max(0.0)
    }
}

fn check(bits: u8, sigma_n: f64) -> Result<()> {
    if !(1..=MAX_BITS).contains(&bits) {
        return Err(Error::invalid(format!("bits per coefficient must be in 1..={MAX_BITS}, got {bits}")));
    }
    if !(sigma_n >= 0.0) || !sigma_n.is_finite() {
        return Err(Error::invalid(format!("noise deviation must be finite and nonnegative, got {sigma_n}")));
    }
    Ok(())
}

/// Full transition matrix with the given per-entry quadrature tolerance.
pub fn transition_matrix(bits: u8, sigma_n: f64, tol: f64) -> Result<TransitionMatrix> {
    check(bits, sigma_n)?;
    let q = Quantizer::standard(bits);
    let size = q.levels();
    let mut data = vec![0.0; size * size];
    if sigma_n == 0.0 {
        for j in 0..size {
            data[j * size + j] = 1.0 / size as f64;
        }
        return Ok(TransitionMatrix { size, data });
    }
    let ch = Channel { q, sigma: sigma_n, tol };
    for j in 1..=size {
        let below: Vec<f64> = (0..=size).map(|k| ch.below(j, k)).collect();
        for k in 1..=size {
            data[(j - 1) * size + (k - 1)] = (below[k] - below[k - 1]).max(0.0);
        }
    }
    Ok(TransitionMatrix { size, data })
}

/// Average fractional Hamming distance `D(K)` between the Gray labels of
/// the enrollment and noisy intervals.
pub fn hd_metric(bits: u8, sigma_n: f64) -> Result<f64> {
    check(bits, sigma_n)?;
    if sigma_n == 0.0 {
        return Ok(0.0);
    }
    let m = transition_matrix(bits, sigma_n, DEFAULT_QUAD_TOL)?;
    let mut acc = 0.0;
    for j in 1..=m.size() {
        for k in 1..=m.size() {
            if j != k {
                let hd = (gray_code(j - 1) ^ gray_code(k - 1)).count_ones() as f64;
                acc += m.get(j, k) * hd;
            }
        }
    }
    Ok(acc / bits as f64)
}

/// Correctness probability `P_c(K)`: all `K` bits survive, i.e. the trace of
/// the transition matrix.
pub fn correctness(bits: u8, sigma_n: f64) -> Result<f64> {
    check(bits, sigma_n)?;
    if sigma_n == 0.0 {
        return Ok(1.0);
    }
    let ch = Channel { q: Quantizer::standard(bits), sigma: sigma_n, tol: DEFAULT_QUAD_TOL };
    Ok((1..=ch.q.levels()).map(|j| ch.entry(j, j)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn sign_flip(sigma: f64) -> f64 {
        (1.0 / (1.0 + sigma * sigma).sqrt()).acos() / std::f64::consts::PI
    }

    #[test]
    fn zero_noise_is_diagonal() {
        for bits in 1..=4 {
            let m = transition_matrix(bits, 0.0, DEFAULT_QUAD_TOL).unwrap();
            let p = 1.0 / m.size() as f64;
            for j in 1..=m.size() {
                for k in 1..=m.size() {
                    assert_eq!(m.get(j, k), if j == k { p } else { 0.0 });
                }
            }
            assert_eq!(hd_metric(bits, 0.0).unwrap(), 0.0);
            assert_eq!(correctness(bits, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn one_bit_matches_arccos_formula() {
        for &s in &[0.01, 0.1, 0.3, 1.0] {
            let m = transition_matrix(1, s, DEFAULT_QUAD_TOL).unwrap();
            let flip = sign_flip(s);
            assert!((m.get(1, 1) + m.get(2, 2) - (1.0 - flip)).abs() < 1e-11, "s={s}");
            assert!((hd_metric(1, s).unwrap() - flip).abs() < 1e-11);
            assert!((correctness(1, s).unwrap() - (1.0 - flip)).abs() < 1e-11);
            assert!((m.get(1, 2) - m.get(2, 1)).abs() < 1e-12);
        }
        assert!((correctness(1, 0.1).unwrap() - 0.968_28).abs() < 1e-5);
        assert!((hd_metric(1, 0.1).unwrap() - 0.031_72).abs() < 1e-5);
    }

    #[test]
    fn marginals_and_centrosymmetry() {
        for bits in 1..=4u8 {
            for &s in &[0.02, 0.2, 0.7] {
                let m = transition_matrix(bits, s, DEFAULT_QUAD_TOL).unwrap();
                let n = m.size();
                assert!((m.total() - 1.0).abs() < 1e-9);
                for j in 1..=n {
                    let row: f64 = (1..=n).map(|k| m.get(j, k)).sum();
                    assert!((row - 1.0 / n as f64).abs() < 1e-9);
                    for k in 1..=n {
                        assert!((m.get(j, k) - m.get(n + 1 - j, n + 1 - k)).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn noisy_marginal_is_wider_than_enrollment() {
        // Column sums follow N(0, 1 + σ²), so P(j, k) ≠ P(k, j) once K ≥ 2.
        let s: f64 = 0.5;
        let m = transition_matrix(2, s, DEFAULT_QUAD_TOL).unwrap();
        let b1 = Quantizer::standard(2).boundaries()[1];
        let col1: f64 = (1..=4).map(|j| m.get(j, 1)).sum();
        assert!((col1 - normal_cdf(b1 / (1.0 + s * s).sqrt())).abs() < 1e-10);
        assert!((m.get(1, 2) - m.get(2, 1)).abs() > 1e-4);
    }

    #[test]
    fn one_bit_metrics_agree() {
        for &s in &[0.001, 0.05, 0.4, 2.0] {
            let d = hd_metric(1, s).unwrap();
            let pc = correctness(1, s).unwrap();
            assert!((d - (1.0 - pc)).abs() < 1e-9);
        }
    }

    #[test]
    fn monotone_in_noise_and_bits() {
        let grid = [0.005, 0.01, 0.03, 0.1, 0.3];
        for bits in 1..=5u8 {
            let d: Vec<f64> = grid.iter().map(|&s| hd_metric(bits, s).unwrap()).collect();
            assert!(d.windows(2).all(|w| w[0] < w[1]), "D not increasing for K={bits}: {d:?}");
        }
        for &s in &grid {
            let pc: Vec<f64> = (1..=6).map(|k| correctness(k, s).unwrap()).collect();
            assert!(pc.windows(2).all(|w| w[1] < w[0]), "P_c not decreasing at σ={s}: {pc:?}");
            let d: Vec<f64> = (1..=6).map(|k| hd_metric(k, s).unwrap()).collect();
            assert!(d.windows(2).all(|w| w[0] < w[1]), "D not increasing in K at σ={s}: {d:?}");
        }
    }

    #[test]
    fn monte_carlo_cross_check() {
        let samples = 10_000_000usize;
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        for &(bits, s) in &[(2u8, 0.1), (3, 0.05), (1, 0.2)] {
            let q = Quantizer::standard(bits);
            let (mut hd, mut ok) = (0u64, 0u64);
            for _ in 0..samples {
                let t: f64 = StandardNormal.sample(&mut rng);
                let n: f64 = StandardNormal.sample(&mut rng);
                let (a, b) = (q.quantize(t), q.quantize(t + s * n));
                hd += (gray_code(a - 1) ^ gray_code(b - 1)).count_ones() as u64;
                ok += (a == b) as u64;
            }
            let d_mc = hd as f64 / (samples as f64 * bits as f64);
            let d = hd_metric(bits, s).unwrap();
            // Bit-flip counts per sample are at most K, so the per-sample
            // variance of HD/K is at most D.
            let se = (d / samples as f64).sqrt();
            assert!((d_mc - d).abs() < 3.0 * se, "K={bits} σ={s}: mc {d_mc} vs {d}");
            let pc_mc = ok as f64 / samples as f64;
            let pc = correctness(bits, s).unwrap();
            let se = (pc * (1.0 - pc) / samples as f64).sqrt();
            assert!((pc_mc - pc).abs() < 3.0 * se, "K={bits} σ={s}: mc {pc_mc} vs {pc}");
        }
    }
}
