//! Block-error probabilities: binomial, errors-and-erasures trinomial and
//! Poisson-binomial tails.

use crate::special::{ln_binomial, CompensatedSum};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// `x ln y` with the convention `0 ln y = 0`.
fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// `P[X > t]` for `X ~ Bin(n, p)`, summed term by term in the log domain.
pub fn binomial_tail(n: u64, p: f64, t: u64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
    if t >= n || p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    (t + 1..=n)
        .map(|c| (ln_binomial(n, c) + c as f64 * lp + (n - c) as f64 * lq).exp())
        .collect::<CompensatedSum>()
        .value()
        .min(1.0)
}

/// `P[2e + ν >= d]` where `(e, ν, n - e - ν)` is trinomial with symbol
/// probabilities `(p_err, p_era, 1 - p_err - p_era)`.
pub fn ee_tail(n: u64, d: u64, p_err: f64, p_era: f64) -> f64 {
    assert!(p_err >= 0.0 && p_era >= 0.0 && p_err + p_era <= 1.0 + 1e-15, "invalid symbol probabilities");
    if d == 0 {
        return 1.0;
    }
    let p_ok = (1.0 - p_err - p_era).max(0.0);
    let mut acc = CompensatedSum::new();
    for e in 0..=n {
        for v in d.saturating_sub(2 * e)..=(n - e) {
            let rest = n - e - v;
            let (e_f, v_f, r_f) = (e as f64, v as f64, rest as f64);
            if (e > 0 && p_err == 0.0) || (v > 0 && p_era == 0.0) || (rest > 0 && p_ok == 0.0) {
                continue;
            }
            let ln_term =
                ln_binomial(n, e) + ln_binomial(n - e, v) + xlny(e_f, p_err) + xlny(v_f, p_era) + xlny(r_f, p_ok);
            acc.add(ln_term.exp());
        }
    }
    acc.value().min(1.0)
}

/// Per-coefficient error probabilities `q_i = 1 - P_{c,i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityProfile {
    q: Vec<f64>,
}

impl ReliabilityProfile {
    pub fn from_error_probs(q: Vec<f64>) -> Result<Self> {
        if let Some(x) = q.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::invalid(format!("error probability {x} outside [0, 1]")));
        }
        Ok(Self { q })
    }

    pub fn from_correctness(pc: &[f64]) -> Result<Self> {
        if let Some(x) = pc.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::invalid(format!("correctness probability {x} outside [0, 1]")));
        }
        Ok(Self { q: pc.iter().map(|p| 1.0 - p).collect() })
    }

    pub fn homogeneous(n: usize, q: f64) -> Result<Self> {
        Self::from_error_probs(vec![q; n])
    }

    pub fn error_probs(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

/// Removes certain outcomes: `q = 0` terms never err and `q = 1` terms
/// always do. Returns the random part and the shifted threshold, or the
/// tail value when it is already determined.
fn reduce(profile: &ReliabilityProfile, t: usize) -> std::result::Result<(Vec<f64>, usize), f64> {
    let certain = profile.q.iter().filter(|&&q| q == 1.0).count();
    if certain > t {
        return Err(1.0);
    }
    let random: Vec<f64> = profile.q.iter().copied().filter(|&q| q > 0.0 && q < 1.0).collect();
    let t = t - certain;
    if t >= random.len() {
        return Err(0.0);
    }
    Ok((random, t))
}

/// `P[W > t]` for `W = Σ Bernoulli(q_i)` by the DFT of the characteristic
/// function.
///
/// The generating function is evaluated on a circle of radius `r` that
/// exponentially tilts the distribution towards the threshold, so the
/// masses being summed are O(1) after tilting and the inverse DFT resolves
/// probabilities far below machine epsilon. When the mean exceeds the
/// threshold the lower side is summed instead and subtracted from one.
/// Products are accumulated as log-magnitude and phase.
pub fn poisson_binomial_tail_dftcf(profile: &ReliabilityProfile, t: usize) -> f64 {
    let (q, t) = match reduce(profile, t) {
        Ok(v) => v,
        Err(v) => return v,
    };
    let n = q.len();
    let mean: f64 = q.iter().sum();
    let upper = mean < t as f64 + 1.0;
    let target = if upper { t as f64 + 1.0 } else { t as f64 };
    let tilted_mean = |ln_r: f64| -> f64 {
        q.iter()
            .map(|&qi| {
                let a = qi * ln_r.exp();
                a / (1.0 - qi + a)
            })
            .sum()
    };
    let (mut lo, mut hi) = (-200.0f64, 200.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tilted_mean(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ln_r = 0.5 * (lo + hi);
    let r = ln_r.exp();
    let m = n + 1;
    let roots: Vec<Complex64> = (0..m).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)).collect();
    // ln G(r) normalizes the tilted distribution.
    let ln_g0: f64 = q.iter().map(|&qi| (1.0 - qi + qi * r).ln()).sum();
    let h: Vec<Complex64> = roots
        .iter()
        .map(|w| {
            let (mut ln_mag, mut phase) = (0.0, 0.0);
            for &qi in &q {
                let z = Complex64::new(1.0 - qi, 0.0) + w * (qi * r);
                ln_mag += z.norm().ln();
                phase += z.arg();
            }
            Complex64::from_polar((ln_mag - ln_g0).exp(), phase)
        })
        .collect();
    let mass = |j: usize| -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, hk) in h.iter().enumerate() {
            acc += hk * roots[(m - (j * k) % m) % m];
        }
        let tilted = acc / m as f64;
        assert!(tilted.im.abs() <= 1e-12, "imaginary residue {} at j = {j}", tilted.im);
        tilted.re.max(0.0) * (ln_g0 - j as f64 * ln_r).exp()
    };
    if upper {
        (t + 1..=n).map(mass).collect::<CompensatedSum>().value().min(1.0)
    } else {
        (1.0 - (0..=t).map(mass).collect::<CompensatedSum>().value()).clamp(0.0, 1.0)
    }
}

/// `P[W > t]` by direct convolution of the Bernoulli masses, O(n²).
pub fn poisson_binomial_tail_dp(profile: &ReliabilityProfile, t: usize) -> f64 {
    let (q, t) = match reduce(profile, t) {
        Ok(v) => v,
        Err(v) => return v,
    };
    let mut pmf = vec![0.0f64; q.len() + 1];
    pmf[0] = 1.0;
    for (i, &qi) in q.iter().enumerate() {
        for w in (0..=i + 1).rev() {
            let stay = pmf[w] * (1.0 - qi);
            let step = if w > 0 { pmf[w - 1] * qi } else { 0.0 };
            pmf[w] = stay + step;
        }
    }
    pmf[t + 1..].iter().copied().collect::<CompensatedSum>().value().min(1.0)
}
