//! Fuzzy commitment: the helper data is `M = Enc(S) xor X`, and a noisy
//! re-measurement `Y` gives back `S = Dec(M xor Y)`.

use crate::bits::{self, pack_le, unpack_le, xor};
use crate::codes::{CodeSpec, DecodeOutcome};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_KEY_BITS: usize = 128;
pub const HELPER_MAGIC: &[u8; 4] = b"FCS1";
pub const HELPER_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    bits: Vec<u8>,
}

impl SecretKey {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("key bits must be 0 or 1"));
        }
        Ok(Self { bits })
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self { bits: (0..len).map(|_| rng.random_range(0..2)).collect() }
    }

    /// Hex string, most significant bit of each byte first.
    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s.trim()).map_err(|e| Error::invalid(format!("bad hex key: {e}")))?;
        Ok(Self { bits: bits::from_bytes_msb(&bytes) })
    }

    pub fn to_hex(&self) -> String {
        hex::encode(bits::to_bytes_msb(&self.bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Header {
    version: u32,
    code: String,
    n: usize,
    alloc_digest_hex: String,
}

/// Public helper data bound to a code and a bit allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HelperData {
    pub code: String,
    pub alloc_digest: [u8; 32],
    pub payload: Vec<u8>,
}

impl HelperData {
    /// `FCS1`, a JSON header line, then the payload packed little-endian
    /// within bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            version: HELPER_VERSION,
            code: self.code.clone(),
            n: self.payload.len(),
            alloc_digest_hex: hex::encode(self.alloc_digest),
        };
        let mut out = HELPER_MAGIC.to_vec();
        out.extend(serde_json::to_vec(&header).expect("header serializes"));
        out.push(b'\n');
        out.extend(pack_le(&self.payload));
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let rest = data.strip_prefix(HELPER_MAGIC).ok_or_else(|| Error::invalid("missing FCS1 magic"))?;
        let nl = rest.iter().position(|&b| b == b'\n').ok_or_else(|| Error::invalid("unterminated helper header"))?;
        let header: Header = serde_json::from_slice(&rest[..nl])?;
        if header.version != HELPER_VERSION {
            return Err(Error::invalid(format!("unsupported helper version {}", header.version)));
        }
        let digest = hex::decode(&header.alloc_digest_hex)
            .ok()
            .and_then(|d| <[u8; 32]>::try_from(d).ok())
            .ok_or_else(|| Error::invalid("allocation digest must be 32 hex bytes"))?;
        let body = &rest[nl + 1..];
        if body.len() != header.n.div_ceil(8) {
            return Err(Error::invalid(format!(
                "payload has {} bytes, header announces {} bits",
                body.len(),
                header.n
            )));
        }
        let payload = unpack_le(body, header.n)?;
        if body.last().is_some_and(|&b| !header.n.is_multiple_of(8) && b >> (header.n % 8) != 0) {
            return Err(Error::invalid("nonzero padding bits in helper payload"));
        }
        Ok(Self { code: header.code, alloc_digest: digest, payload })
    }
}

fn padded(key: &SecretKey, k: usize) -> Result<Vec<u8>> {
    if key.len() > k {
        return Err(Error::invalid(format!("a {}-bit key does not fit dimension {k}", key.len())));
    }
    let mut m = key.bits().to_vec();
    m.resize(k, 0);
    Ok(m)
}

/// `M = Enc(pad(S)) xor X`; the key is zero-padded at the tail to the code
/// dimension.
pub fn enroll(key: &SecretKey, x: &[u8], code: &CodeSpec, alloc_digest: [u8; 32]) -> Result<HelperData> {
    let codec = code.codec()?;
    if x.len() != codec.n() {
        return Err(Error::DimensionMismatch { expected: format!("{} bits", codec.n()), actual: x.len().to_string() });
    }
    let c = codec.encode(&padded(key, codec.k())?)?;
    Ok(HelperData { code: code.name(), alloc_digest, payload: xor(&c, x) })
}

/// Outcome of reconstruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reconstruction {
    Key(SecretKey),
    Failure,
}

/// `Ŝ = unpad(Dec(M xor Y))`. Helper data for a different code or
/// allocation is refused before decoding; a decoded word with nonzero pad
/// bits is a failure.
pub fn reconstruct(
    helper: &HelperData,
    y: &[u8],
    code: &CodeSpec,
    alloc_digest: [u8; 32],
    key_bits: usize,
) -> Result<Reconstruction> {
    if helper.code != code.name() {
        return Err(Error::HelperMismatch(format!("helper data is for {}, not {}", helper.code, code.name())));
    }
    if helper.alloc_digest != alloc_digest {
        return Err(Error::HelperMismatch("allocation digest differs from enrollment".into()));
    }
    let codec = code.codec()?;
    if helper.payload.len() != codec.n() || y.len() != codec.n() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} bits", codec.n()),
            actual: format!("helper {} / measurement {}", helper.payload.len(), y.len()),
        });
    }
    if key_bits > codec.k() {
        return Err(Error::invalid(format!("a {key_bits}-bit key does not fit dimension {}", codec.k())));
    }
    Ok(match codec.decode(&xor(&helper.payload, y))? {
        DecodeOutcome::Decoded(m) if m[key_bits..].iter().all(|&b| b == 0) => {
            Reconstruction::Key(SecretKey { bits: m[..key_bits].to_vec() })
        }
        _ => Reconstruction::Failure,
    })
}

/// Distribution of the enrollment sequence for the secrecy check.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceDistribution {
    Uniform,
    /// Mass of each `x`, indexed by `x` read as an integer with bit 0 first.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyReport {
    pub keys: usize,
    pub n: usize,
    /// `M | S = s` is uniform on `{0,1}^n` for every `s`.
    pub uniform_given_key: bool,
    /// `M | S = s` does not depend on `s`.
    pub identical_across_keys: bool,
    /// `I(S; M)` in bits for a uniform key.
    pub mutual_information: f64,
}

impl SecrecyReport {
    pub fn leaks(&self) -> bool {
        self.mutual_information > 1e-12 || !self.identical_across_keys
    }
}

fn to_index(bits: &[u8]) -> usize {
    bits.iter().enumerate().map(|(i, &b)| (b as usize) << i).sum()
}

fn entropy(p: impl Iterator<Item = f64>) -> f64 {
    -p.filter(|&x| x > 0.0).map(|x| x * x.log2()).sum::<f64>()
}

/// Enumerates every key and every `x` to obtain the exact distribution of
/// `M` given `S`.
pub fn secrecy_check_exhaustive(code: &CodeSpec, source: &SourceDistribution) -> Result<SecrecyReport> {
    let codec = code.codec()?;
    let (n, k) = (codec.n(), codec.k());
    if n > 20 || k > 16 {
        return Err(Error::invalid(format!("{} is too large for exhaustive enumeration", code.name())));
    }
    let size = 1usize << n;
    let px: Vec<f64> = match source {
        SourceDistribution::Uniform => vec![1.0 / size as f64; size],
        SourceDistribution::Explicit(p) => {
            if p.len() != size || p.iter().any(|&v| v < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "explicit distribution must have {size} nonnegative masses summing to 1"
                )));
            }
            p.clone()
        }
    };
    let keys = 1usize << k;
    let mut conditionals = Vec::with_capacity(keys);
    for s in 0..keys {
        let msg: Vec<u8> = (0..k).map(|i| ((s >> i) & 1) as u8).collect();
        let c = to_index(&codec.encode(&msg)?);
        // P(M = m | S = s) = P_X(m xor c).
        conditionals.push((0..size).map(|m| px[m ^ c]).collect::<Vec<f64>>());
    }
    let uniform = 1.0 / size as f64;
    let uniform_given_key = conditionals.iter().all(|d| d.iter().all(|&p| (p - uniform).abs() < 1e-15));
    let identical_across_keys =
        conditionals.iter().all(|d| d.iter().zip(&conditionals[0]).all(|(a, b)| (a - b).abs() < 1e-15));
    let marginal: Vec<f64> = (0..size).map(|m| conditionals.iter().map(|d| d[m]).sum::<f64>() / keys as f64).collect();
    let h_m = entropy(marginal.into_iter());
    let h_m_s = conditionals.iter().map(|d| entropy(d.iter().copied())).sum::<f64>() / keys as f64;
    Ok(SecrecyReport { keys, n, uniform_given_key, identical_across_keys, mutual_information: (h_m - h_m_s).max(0.0) })
}

/// Largest per-bit total-variation distance between the marginals of
/// `M | S = s1` and `M | S = s2`, estimated from `samples` uniform draws of
/// `x` for each key.
pub fn secrecy_check_sampled(
    code: &CodeSpec,
    s1: &SecretKey,
    s2: &SecretKey,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let codec = code.codec()?;
    let n = codec.n();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut ones = [vec![0u64; n], vec![0u64; n]];
    for (counts, key) in ones.iter_mut().zip([s1, s2]) {
        let c = codec.encode(&padded(key, codec.k())?)?;
        for _ in 0..samples {
            for (count, &cb) in counts.iter_mut().zip(&c) {
                *count += (cb ^ rng.random_range(0..2u8)) as u64;
            }
        }
    }
    let [a, b] = &ones;
    Ok(a.iter().zip(b).map(|(&x, &y)| (x as f64 - y as f64).abs() / samples as f64).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::index::sample;

    const DIGEST: [u8; 32] = [7; 32];

    #[test]
    fn zero_source_gives_codeword() {
        let code = CodeSpec::from_name("rm32_6").unwrap();
        let key = SecretKey::new(vec![1, 0, 1]).unwrap();
        let h = enroll(&key, &[0; 32], &code, DIGEST).unwrap();
        let c = code.codec().unwrap().encode(&[1, 0, 1, 0, 0, 0]).unwrap();
        assert_eq!(h.payload, c);
    }

    #[test]
    fn zero_key_gives_source() {
        let code = CodeSpec::from_name("bch255_131").unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let x: Vec<u8> = (0..255).map(|_| rng.random_range(0..2)).collect();
        let h = enroll(&SecretKey::new(vec![0; 128]).unwrap(), &x, &code, DIGEST).unwrap();
        assert_eq!(h.payload, x);
    }

    #[test]
    fn round_trip_within_radius() {
        let code = CodeSpec::from_name("bch255_131").unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..200 {
            let key = SecretKey::random(128, &mut rng);
            let x: Vec<u8> = (0..255).map(|_| rng.random_range(0..2)).collect();
            let h = enroll(&key, &x, &code, DIGEST).unwrap();
            let mut y = x.clone();
            let w = rng.random_range(0..=18);
            for i in sample(&mut rng, 255, w) {
                y[i] ^= 1;
            }
            assert_eq!(reconstruct(&h, &y, &code, DIGEST, 128).unwrap(), Reconstruction::Key(key));
        }
    }

    #[test]
    fn mismatches_are_refused() {
        let code = CodeSpec::from_name("rep3").unwrap();
        let h = enroll(&SecretKey::new(vec![1]).unwrap(), &[0, 1, 1], &code, DIGEST).unwrap();
        let other = CodeSpec::from_name("rm32_6").unwrap();
        assert!(matches!(reconstruct(&h, &[0; 32], &other, DIGEST, 1), Err(Error::HelperMismatch(_))));
        assert!(matches!(reconstruct(&h, &[0, 1, 1], &code, [0; 32], 1), Err(Error::HelperMismatch(_))));
        assert!(enroll(&SecretKey::new(vec![1, 1]).unwrap(), &[0, 1, 1], &code, DIGEST).is_err());
        assert!(enroll(&SecretKey::new(vec![1]).unwrap(), &[0, 1], &code, DIGEST).is_err());
        let ebch = CodeSpec::from_name("rep3+ebch256_132").unwrap();
        assert!(matches!(enroll(&SecretKey::new(vec![1]).unwrap(), &[0; 768], &ebch, DIGEST), Err(Error::NoCodec(_))));
    }

    #[test]
    fn helper_file_format() {
        let h = HelperData { code: "rep3".into(), alloc_digest: DIGEST, payload: vec![1, 0, 1, 1, 0, 0, 0, 0, 1, 1] };
        let bytes = h.to_bytes();
        assert!(bytes.starts_with(b"FCS1{\"version\":1,\"code\":\"rep3\",\"n\":10,\"alloc_digest_hex\":\"0707"));
        assert_eq!(&bytes[bytes.len() - 2..], &[0b0000_1101, 0b0000_0011]);
        assert_eq!(HelperData::from_bytes(&bytes).unwrap(), h);
        let mut bad = bytes.clone();
        *bad.last_mut().unwrap() |= 0x80;
        assert!(HelperData::from_bytes(&bad).is_err());
        assert!(HelperData::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(HelperData::from_bytes(b"XXXX{}\n").is_err());
    }

    #[test]
    fn nonzero_padding_is_failure() {
        let code = CodeSpec::from_name("rm32_6").unwrap();
        let codec = code.codec().unwrap();
        let c = codec.encode(&[1, 0, 0, 0, 0, 1]).unwrap();
        let h = HelperData { code: code.name(), alloc_digest: DIGEST, payload: c };
        assert_eq!(reconstruct(&h, &[0; 32], &code, DIGEST, 4).unwrap(), Reconstruction::Failure);
        assert!(matches!(reconstruct(&h, &[0; 32], &code, DIGEST, 6).unwrap(), Reconstruction::Key(_)));
    }

    #[test]
    fn key_hex() {
        let k = SecretKey::from_hex("a5").unwrap();
        assert_eq!(k.bits(), &[1, 0, 1, 0, 0, 1, 0, 1]);
        assert_eq!(k.to_hex(), "a5");
        assert!(SecretKey::from_hex("zz").is_err());
    }

    #[test]
    fn repetition_is_perfectly_secret() {
        let r = secrecy_check_exhaustive(&CodeSpec::from_name("rep3").unwrap(), &SourceDistribution::Uniform).unwrap();
        assert_eq!((r.keys, r.n), (2, 3));
        assert!(r.uniform_given_key && r.identical_across_keys && !r.leaks());
        assert_eq!(r.mutual_information, 0.0);
    }

    #[test]
    fn constant_source_leaks() {
        let mut p = vec![0.0; 8];
        p[0] = 1.0;
        let r =
            secrecy_check_exhaustive(&CodeSpec::from_name("rep3").unwrap(), &SourceDistribution::Explicit(p)).unwrap();
        assert!(!r.uniform_given_key && !r.identical_across_keys && r.leaks());
        assert!((r.mutual_information - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oversized_code_rejected() {
        let code = CodeSpec::from_name("rm32_6").unwrap();
        assert!(secrecy_check_exhaustive(&code, &SourceDistribution::Uniform).is_err());
    }

    #[test]
    fn sampled_rm_marginals_agree() {
        let code = CodeSpec::from_name("rm32_6").unwrap();
        let s1 = SecretKey::new(vec![0; 6]).unwrap();
        let s2 = SecretKey::new(vec![1, 1, 0, 1, 0, 1]).unwrap();
        let tv = secrecy_check_sampled(&code, &s1, &s2, 100_000, 4).unwrap();
        assert!(tv < 0.01, "{tv}");
    }
}
