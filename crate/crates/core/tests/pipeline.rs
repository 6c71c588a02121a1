use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use ropuf::bits;
use ropuf::codes::CodeSpec;
use ropuf::commit::{enroll, reconstruct, Reconstruction, SecretKey};
use ropuf::hwmodel::{dwht2d_fixed, quantizer_rom, truncation_bound};
use ropuf::quantize::{
    allocate_fixed_bsc, allocate_fixed_errors, correctness, correctness_threshold, equalize, extract_bits, hd_metric,
    BitAllocation, DEFAULT_TARGET,
};
use ropuf::source::{
    estimate_autocovariance, estimate_stats, synth_dataset, CoefficientStats, ExponentialParams, Sampler, SourceModel,
};
use ropuf::transforms::{self, TransformKind};

fn model(sigma_z2: f64) -> SourceModel {
    SourceModel::exponential(ExponentialParams { sigma_z2, ..ExponentialParams::default() }).unwrap()
}

#[test]
fn sample_covariance_tracks_generator() {
    let m = model(1.0);
    let sampler = Sampler::new(m.clone()).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(50);
    let latents: Vec<Vec<f64>> = (0..10_000).map(|_| sampler.sample_latent(&mut rng)).collect();
    let c = estimate_autocovariance(&latents).unwrap();
    let max_entry = m.covariance.abs().max();
    let dev = (&c - &m.covariance).abs().max();
    assert!(dev < 0.05 * max_entry, "max deviation {dev} vs {max_entry}");
}

#[test]
fn noise_estimate_follows_orthonormal_propagation() {
    let sigma_z2 = 9.0;
    let data = synth_dataset(&model(sigma_z2), 5000, 4, 59).unwrap();
    let stats = estimate_stats(&data, &TransformKind::Dct).unwrap();
    for s in stats.iter() {
        let noise = s.sigma_n * s.sigma;
        assert!((noise / sigma_z2.sqrt() - 1.0).abs() < 0.03, "coefficient {} noise {noise}", s.index);
    }
}

#[test]
fn equalized_coefficients_have_unit_deviation() {
    let data = synth_dataset(&model(1.0), 5000, 2, 192).unwrap();
    let kind = TransformKind::Dwht;
    let stats = estimate_stats(&data, &kind).unwrap();
    let eq: Vec<Vec<f64>> = data
        .devices
        .iter()
        .map(|d| {
            let c = transforms::forward(&kind, 16, 16, &d.measurements[0].values).unwrap();
            equalize(&c, &stats).unwrap().into_values()
        })
        .collect();
    let n = eq.len() as f64;
    for i in 1..256 {
        let mean = eq.iter().map(|v| v[i]).sum::<f64>() / n;
        let sd = (eq.iter().map(|v| (v[i] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd - 1.0).abs() < 0.03, "coefficient {} deviation {sd}", i + 1);
    }
}

#[test]
fn extracted_bits_are_uniform() {
    let kind = TransformKind::Dwht;
    let m = model(1.0);
    let stats = CoefficientStats::from_model(&m, &kind).unwrap();
    let alloc = allocate_fixed_errors(&stats, 19, Some(1)).unwrap();
    // Per-position standard error is 0.0035, keeping the interval at about
    // 5.7 standard errors over 255 positions.
    let devices = 20_000;
    let data = synth_dataset(&m, devices, 1, 285).unwrap();
    let mut ones = vec![0usize; alloc.total_bits()];
    for d in &data.devices {
        let x = extract_bits(&d.measurements[0].values, 16, 16, &kind, &stats, &alloc).unwrap();
        for (c, b) in ones.iter_mut().zip(&x) {
            *c += *b as usize;
        }
    }
    for (pos, &c) in ones.iter().enumerate() {
        let p = c as f64 / devices as f64;
        assert!((0.48..=0.52).contains(&p), "bit {pos} has P(1) = {p}");
    }
}

#[test]
fn fixed_bsc_allocation_meets_its_error_rate() {
    let kind = TransformKind::Dwht;
    let m = model(400.0);
    let stats = CoefficientStats::from_model(&m, &kind).unwrap();
    let p_b = 0.06;
    let alloc = allocate_fixed_bsc(&stats, p_b).unwrap();
    assert!(alloc.total_bits() > 255, "noise level should allow multi-bit coefficients");
    let sampler = Sampler::new(m).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(286);
    let (mut total, mut errors) = (0usize, 0usize);
    while total < 1_000_000 {
        let latent = sampler.sample_latent(&mut rng);
        let x = extract_bits(&latent, 16, 16, &kind, &stats, &alloc).unwrap();
        let y = extract_bits(&sampler.measure(&latent, &mut rng), 16, 16, &kind, &stats, &alloc).unwrap();
        errors += bits::hamming(&x, &y);
        total += x.len();
    }
    let ber = errors as f64 / total as f64;
    let se = (p_b * (1.0 - p_b) / total as f64).sqrt();
    assert!(ber <= p_b + 3.0 * se, "bit error rate {ber} over {total} bits");
    // Expected rate from the per-coefficient metric, bits weighted by K_i.
    let expected: f64 = alloc
        .bits()
        .iter()
        .zip(stats.iter())
        .filter(|(k, _)| **k > 0)
        .map(|(&k, s)| k as f64 * hd_metric(k, s.sigma_n).unwrap())
        .sum::<f64>()
        / alloc.total_bits() as f64;
    assert!((ber - expected).abs() < 4.0 * se, "observed {ber} vs predicted {expected}");
}

#[test]
fn fixed_errors_guarantee_per_coefficient() {
    let kind = TransformKind::Dwht;
    let stats = CoefficientStats::from_model(&model(25.0), &kind).unwrap();
    let threshold = correctness_threshold(19, 255, DEFAULT_TARGET).unwrap();
    let alloc = allocate_fixed_errors(&stats, 19, None).unwrap();
    for (&k, s) in alloc.bits().iter().zip(stats.iter()) {
        if k > 0 {
            assert!(correctness(k, s.sigma_n).unwrap() >= threshold, "coefficient {}", s.index);
        }
        if s.usable && k < 8 {
            assert!(correctness(k + 1, s.sigma_n).unwrap() < threshold, "coefficient {} could take more bits", s.index);
        }
    }
}

fn sigma_for(bits: u8, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if correctness(bits, mid).unwrap() >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn three_tier_allocation_reaches_23_errors() {
    let threshold = correctness_threshold(19, 255, DEFAULT_TARGET).unwrap();
    let s3 = 0.5 * sigma_for(3, threshold);
    let s1 = 0.5 * (sigma_for(1, threshold) + sigma_for(2, threshold));
    assert!(correctness(4, s3).unwrap() < threshold);
    assert!(correctness(2, s1).unwrap() < threshold && correctness(1, s1).unwrap() >= threshold);
    let mut parts = vec![(0.0, 1.0, 0.0)];
    parts.extend([(0.0, 1.0, s3); 2]);
    parts.extend([(0.0, 1.0, s1); 249]);
    parts.extend([(0.0, 1.0, 0.5); 4]);
    let stats = CoefficientStats::from_parts(parts);
    let alloc = allocate_fixed_errors(&stats, 19, None).unwrap();
    assert_eq!((alloc.total_bits(), alloc.e(), alloc.max_bits()), (255, Some(23), 3));
    assert_eq!(alloc.bits().iter().filter(|&&k| k == 0).count(), 5);
}

#[test]
fn forced_single_bits_limit_errors_to_c_max() {
    let stats = CoefficientStats::from_model(&model(1.0), &TransformKind::Dwht).unwrap();
    let alloc = allocate_fixed_errors(&stats, 20, Some(1)).unwrap();
    assert_eq!((alloc.total_bits(), alloc.e()), (255, Some(20)));
}

#[test]
fn zero_noise_extraction_is_deterministic() {
    let kind = TransformKind::Dct;
    let m = model(0.0);
    let stats = CoefficientStats::from_model(&model(1.0), &kind).unwrap();
    let alloc = allocate_fixed_errors(&stats, 19, None).unwrap();
    let data = synth_dataset(&m, 3, 2, 282).unwrap();
    for d in &data.devices {
        let a = extract_bits(&d.measurements[0].values, 16, 16, &kind, &stats, &alloc).unwrap();
        let b = extract_bits(&d.measurements[1].values, 16, 16, &kind, &stats, &alloc).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn helper_is_codeword_offset() {
    let code = CodeSpec::from_name("bch255_131").unwrap();
    let codec = code.codec().unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(411);
    let key = SecretKey::random(128, &mut rng);
    let x: Vec<u8> = (0..255).map(|_| rng.random_range(0..2)).collect();
    let helper = enroll(&key, &x, &code, [7; 32]).unwrap();
    let c = bits::xor(&helper.payload, &x);
    let mut padded = key.bits().to_vec();
    padded.resize(131, 0);
    assert_eq!(codec.encode(&padded).unwrap(), c);
}

#[test]
fn hardware_and_float_single_bits_agree_outside_guard_band() {
    let kind = TransformKind::Dwht;
    let m = model(1.0);
    let stats = CoefficientStats::from_model(&m, &kind).unwrap();
    let alloc = BitAllocation::uniform(256, 1);
    let rom = quantizer_rom(&alloc, &stats).unwrap();
    let guard = truncation_bound(4) + 0.5;
    let sampler = Sampler::new(m).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(616);
    let (mut compared, mut guarded) = (0, 0);
    for _ in 0..2000 {
        let counts: Vec<i64> = sampler.sample_latent(&mut rng).iter().map(|v| v.round() as i64).collect();
        let fixed = dwht2d_fixed(&counts).unwrap();
        let hw = rom.quantize(&fixed.values).unwrap();
        let as_f64: Vec<f64> = counts.iter().map(|&v| v as f64).collect();
        let sw = extract_bits(&as_f64, 16, 16, &kind, &stats, &alloc).unwrap();
        for (j, &(pos, _)) in rom.layout.iter().enumerate() {
            if (fixed.values[pos] - rom.words[j]).abs() as f64 <= guard {
                guarded += 1;
            } else {
                compared += 1;
                assert_eq!(hw[j], sw[j], "coefficient position {pos}");
            }
        }
    }
    assert!(guarded < compared, "{guarded} decisions inside guard band, {compared} outside");
}

#[test]
fn noisy_round_trip_through_full_pipeline() {
    let kind = TransformKind::Dwht;
    let m = model(1.0);
    let stats = CoefficientStats::from_model(&m, &kind).unwrap();
    let alloc = allocate_fixed_errors(&stats, 19, Some(1)).unwrap();
    let code = CodeSpec::from_name("bch255_131").unwrap();
    let sampler = Sampler::new(m).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(421);
    for _ in 0..200 {
        let latent = sampler.sample_latent(&mut rng);
        let x = extract_bits(&latent, 16, 16, &kind, &stats, &alloc).unwrap();
        let key = SecretKey::random(128, &mut rng);
        let helper = enroll(&key, &x, &code, alloc.digest()).unwrap();
        let y = extract_bits(&sampler.measure(&latent, &mut rng), 16, 16, &kind, &stats, &alloc).unwrap();
        assert!(bits::hamming(&x, &y) <= 18);
        assert_eq!(reconstruct(&helper, &y, &code, alloc.digest(), 128).unwrap(), Reconstruction::Key(key));
    }
}
