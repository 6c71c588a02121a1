use crate::bits::hamming;
use crate::{Error, Result};
use serde::Serialize;

/// Fractional Hamming distance statistics over all unordered device pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniquenessStats {
    pub pair_count: usize,
    pub mean: f64,
    /// Population variance over the pairs.
    pub variance: f64,
}

pub fn uniqueness(sequences: &[Vec<u8>]) -> Result<UniquenessStats> {
    if sequences.len() < 2 {
        return Err(Error::invalid("uniqueness needs at least two devices"));
    }
    let n = sequences[0].len();
    if n == 0 {
        return Err(Error::invalid("empty bit sequences"));
    }
    if let Some(s) = sequences.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch { expected: format!("{n} bits"), actual: s.len().to_string() });
    }
    let mut fhd = Vec::with_capacity(sequences.len() * (sequences.len() - 1) / 2);
    for (i, a) in sequences.iter().enumerate() {
        for b in &sequences[i + 1..] {
            fhd.push(hamming(a, b) as f64 / n as f64);
        }
    }
    let m = fhd.len() as f64;
    let mean = fhd.iter().sum::<f64>() / m;
    let variance = fhd.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m;
    Ok(UniquenessStats { pair_count: fhd.len(), mean, variance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = vec![0, 1, 1, 0];
        let u = uniqueness(&[a.clone(), a.clone()]).unwrap();
        assert_eq!((u.pair_count, u.mean, u.variance), (1, 0.0, 0.0));
        let c: Vec<u8> = a.iter().map(|b| 1 - b).collect();
        assert_eq!(uniqueness(&[a.clone(), c.clone()]).unwrap().mean, 1.0);
        let u = uniqueness(&[a.clone(), c, vec![0, 0, 0, 0]]).unwrap();
        assert_eq!(u.pair_count, 3);
        assert!((u.mean - 2.0 / 3.0).abs() < 1e-15);
        assert!(uniqueness(std::slice::from_ref(&a)).is_err());
        assert!(uniqueness(&[a, vec![0]]).is_err());
    }
}
