//! RO-array source model, synthetic and measured datasets, and the
//! per-coefficient statistics that drive quantizer design.
//!
//! Synthetic datasets use ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded from
//! a 64-bit value: each device draws a latent array from `N(mean, C_XX)` and
//! every measurement adds i.i.d. `N(0, σ_z²)` noise per RO. Devices are
//! generated in order, each latent followed by its measurements.

use crate::transforms::{self, TransformKind};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{Read, Write};

/// Gaussian model of one RO array and its measurement noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    pub rows: usize,
    pub cols: usize,
    pub mean: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub noise_variance: f64,
}

/// Parameters of the separable exponential-correlation model
/// `C_XX(a, b) = σ_x² ρ^{|Δrow| + |Δcol|}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialParams {
    pub rows: usize,
    pub cols: usize,
    pub mean: f64,
    pub sigma_x2: f64,
    pub rho: f64,
    pub sigma_z2: f64,
}

impl Default for ExponentialParams {
    fn default() -> Self {
        Self { rows: 16, cols: 16, mean: 0.0, sigma_x2: 1e6, rho: 0.96, sigma_z2: 1.0 }
    }
}

impl SourceModel {
    pub fn new(
        rows: usize,
        cols: usize,
        mean: Vec<f64>,
        covariance: DMatrix<f64>,
        noise_variance: f64,
    ) -> Result<Self> {
        let l = rows * cols;
        if l == 0 {
            return Err(Error::invalid("rows and cols must be positive"));
        }
        if mean.len() != l || covariance.shape() != (l, l) {
            return Err(Error::DimensionMismatch {
                expected: format!("mean of {l} and {l}x{l} covariance"),
                actual: format!("mean of {} and {:?} covariance", mean.len(), covariance.shape()),
            });
        }
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(Error::invalid("noise variance must be finite and nonnegative"));
        }
        let scale = covariance.amax().max(f64::MIN_POSITIVE);
        for i in 0..l {
            for j in 0..i {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { rows, cols, mean, covariance, noise_variance })
    }

    pub fn exponential(p: ExponentialParams) -> Result<Self> {
        if !(0.0..1.0).contains(&p.rho) {
            return Err(Error::invalid(format!("correlation rho = {} must be in [0, 1)", p.rho)));
        }
        if !(p.sigma_x2 > 0.0) {
            return Err(Error::invalid("sigma_x2 must be positive"));
        }
        let l = p.rows * p.cols;
        let cov = DMatrix::from_fn(l, l, |a, b| {
            let (ra, ca) = (a / p.cols, a % p.cols);
            let (rb, cb) = (b / p.cols, b % p.cols);
            let d = ra.abs_diff(rb) + ca.abs_diff(cb);
            p.sigma_x2 * p.rho.powi(d as i32)
        });
        Self::new(p.rows, p.cols, vec![p.mean; l], cov, p.sigma_z2)
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Draws latent arrays and noisy measurements from a [`SourceModel`].
#[derive(Debug, Clone)]
pub struct Sampler {
    model: SourceModel,
    factor: DMatrix<f64>,
}

impl Sampler {
    /// Factors the covariance; rejects matrices with a significantly negative
    /// eigenvalue.
    pub fn new(model: SourceModel) -> Result<Self> {
        let eig = SymmetricEigen::new(model.covariance.clone());
        let top = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
        if let Some((index, &value)) =
            eig.eigenvalues.iter().enumerate().filter(|(_, &v)| v < -1e-10 * top).min_by(|a, b| a.1.total_cmp(b.1))
        {
            return Err(Error::NotPositiveSemidefinite { index, value });
        }
        let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let factor = &eig.eigenvectors * DMatrix::from_diagonal(&roots);
        Ok(Self { model, factor })
    }

    pub fn model(&self) -> &SourceModel {
        &self.model
    }

    pub fn sample_latent<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let l = self.model.len();
        let z = DVector::from_fn(l, |_, _| StandardNormal.sample(rng));
        let x = &self.factor * z;
        x.iter().zip(&self.model.mean).map(|(v, m)| v + m).collect()
    }

    pub fn measure<R: rand::Rng + ?Sized>(&self, latent: &[f64], rng: &mut R) -> Vec<f64> {
        let sd = self.model.noise_variance.sqrt();
        latent
            .iter()
            .map(|&v| {
                let n: f64 = StandardNormal.sample(rng);
                v + sd * n
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub index: u32,
    /// Row-major counter values.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceRecord {
    pub id: u64,
    pub measurements: Vec<Measurement>,
}

impl DeviceRecord {
    /// Per-RO average over all measurements.
    pub fn mean_values(&self) -> Vec<f64> {
        let n = self.measurements.len() as f64;
        let len = self.measurements.first().map_or(0, |m| m.values.len());
        let mut out = vec![0.0; len];
        for m in &self.measurements {
            for (o, v) in out.iter_mut().zip(&m.values) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|o| *o /= n);
        out
    }
}

/// RO counter observations for a population of devices.
#[derive(Debug, Clone, PartialEq)]
pub struct RODataset {
    pub rows: usize,
    pub cols: usize,
    pub devices: Vec<DeviceRecord>,
}

impl RODataset {
    pub fn validate(&self) -> Result<()> {
        if self.devices.is_empty() {
            return Err(Error::invalid("dataset has no devices"));
        }
        let l = self.rows * self.cols;
        for d in &self.devices {
            if d.measurements.is_empty() {
                return Err(Error::invalid(format!("device {} has no measurements", d.id)));
            }
            for m in &d.measurements {
                if m.values.len() != l {
                    return Err(Error::invalid(format!(
                        "device {} measurement {} has {} cells, expected {l}",
                        d.id,
                        m.index,
                        m.values.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Per-device averaged arrays, the input to autocovariance estimation.
    pub fn device_means(&self) -> Vec<Vec<f64>> {
        self.devices.iter().map(DeviceRecord::mean_values).collect()
    }

    /// Writes the dataset CSV (`device,measurement,row,col,count`).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["device", "measurement", "row", "col", "count"]).map_err(csv_io)?;
        for d in &self.devices {
            for m in &d.measurements {
                for (k, v) in m.values.iter().enumerate() {
                    let (r, c) = (k / self.cols, k % self.cols);
                    w.write_record([
                        d.id.to_string(),
                        m.index.to_string(),
                        r.to_string(),
                        c.to_string(),
                        format_count(*v),
                    ])
                    .map_err(csv_io)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn format_count(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Synthesizes a dataset; identical `(model, seed)` give identical output.
pub fn synth_dataset(model: &SourceModel, n_devices: usize, n_measurements: usize, seed: u64) -> Result<RODataset> {
    if n_devices == 0 || n_measurements == 0 {
        return Err(Error::invalid("device and measurement counts must be positive"));
    }
    let sampler = Sampler::new(model.clone())?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let devices = (0..n_devices)
        .map(|id| {
            let latent = sampler.sample_latent(&mut rng);
            let measurements = (0..n_measurements)
                .map(|k| Measurement { index: k as u32, values: sampler.measure(&latent, &mut rng) })
                .collect();
            DeviceRecord { id: id as u64, measurements }
        })
        .collect();
    Ok(RODataset { rows: model.rows, cols: model.cols, devices })
}

/// Reads the dataset CSV. Rows may appear in any order; every
/// `(device, measurement)` must cover each `(row, col)` exactly once.
pub fn ingest_csv<R: Read>(reader: R) -> Result<RODataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
    let expected = ["device", "measurement", "row", "col", "count"];
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "header must be `{}`, found `{}`",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    struct Cell {
        row: usize,
        col: usize,
        count: f64,
        line: u64,
    }
    let mut order: Vec<(u64, u32)> = Vec::new();
    let mut groups: HashMap<(u64, u32), Vec<Cell>> = HashMap::new();
    let (mut max_row, mut max_col) = (0usize, 0usize);
    for rec in rdr.records() {
        let rec =
            rec.map_err(|e| Error::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<&str> {
            rec.get(i).ok_or_else(|| Error::Parse { line, message: format!("missing `{name}`") })
        };
        let int = |i: usize, name: &str| -> Result<u64> {
            let s = field(i, name)?;
            s.parse::<u64>()
                .map_err(|_| Error::Parse { line, message: format!("`{name}` is not a nonnegative integer: {s:?}") })
        };
        let device = int(0, "device")?;
        let meas = u32::try_from(int(1, "measurement")?)
            .map_err(|_| Error::Parse { line, message: "measurement index too large".into() })?;
        let row = int(2, "row")? as usize;
        let col = int(3, "col")? as usize;
        let raw = field(4, "count")?;
        let count: f64 = raw
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::Parse { line, message: format!("count is not numeric: {raw:?}") })?;
        max_row = max_row.max(row);
        max_col = max_col.max(col);
        let key = (device, meas);
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(Cell { row, col, count, line });
    }
    if order.is_empty() {
        return Err(Error::Parse { line: 1, message: "no data rows".into() });
    }
    let (rows, cols) = (max_row + 1, max_col + 1);
    let l = rows * cols;

    let mut devices: Vec<DeviceRecord> = Vec::new();
    let mut device_pos: HashMap<u64, usize> = HashMap::new();
    for key in order {
        let cells = &groups[&key];
        let mut values = vec![f64::NAN; l];
        for cell in cells {
            let k = cell.row * cols + cell.col;
            if !values[k].is_nan() {
                return Err(Error::Parse {
                    line: cell.line,
                    message: format!(
                        "device {} measurement {} repeats cell ({}, {})",
                        key.0, key.1, cell.row, cell.col
                    ),
                });
            }
            values[k] = cell.count;
        }
        if cells.len() != l {
            return Err(Error::invalid(format!(
                "device {} measurement {} has {} cells, expected {rows}x{cols} = {l}",
                key.0,
                key.1,
                cells.len()
            )));
        }
        let idx = *device_pos.entry(key.0).or_insert_with(|| {
            devices.push(DeviceRecord { id: key.0, measurements: Vec::new() });
            devices.len() - 1
        });
        devices[idx].measurements.push(Measurement { index: key.1, values });
    }
    for d in &mut devices {
        d.measurements.sort_by_key(|m| m.index);
    }
    let ds = RODataset { rows, cols, devices };
    ds.validate()?;
    Ok(ds)
}

/// Statistics of one transform coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientStat {
    /// 1-based coefficient index; 1 is DC.
    pub index: usize,
    pub mu: f64,
    pub sigma: f64,
    /// Noise deviation after equalization, in units of `sigma`.
    pub sigma_n: f64,
    pub usable: bool,
}

/// Per-coefficient statistics; serializes as a plain JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientStats(pub Vec<CoefficientStat>);

impl CoefficientStats {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Stat for a 1-based coefficient index.
    pub fn get(&self, index: usize) -> &CoefficientStat {
        &self.0[index - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CoefficientStat> {
        self.0.iter()
    }

    /// Builds stats from `(mu, sigma, sigma_n)` triples; coefficient 1 is
    /// always unusable, as is any with `sigma <= 0`.
    pub fn from_parts(parts: impl IntoIterator<Item = (f64, f64, f64)>) -> Self {
        Self(
            parts
                .into_iter()
                .enumerate()
                .map(|(k, (mu, sigma, sigma_n))| CoefficientStat {
                    index: k + 1,
                    mu,
                    sigma,
                    sigma_n,
                    usable: k > 0 && sigma > 0.0,
                })
                .collect(),
        )
    }

    /// Exact statistics implied by a source model: `μ = A m`,
    /// `σ_i² = (A C_XX Aᵀ)_ii`, `σ̂_n = σ_z / σ_i`.
    pub fn from_model(model: &SourceModel, kind: &TransformKind) -> Result<Self> {
        let a = kind.full_matrix(model.rows, model.cols)?;
        let mu = &a * DVector::from_column_slice(&model.mean);
        let ctt = transforms::transform_covariance(kind, model.rows, model.cols, &model.covariance)?;
        let sz = model.noise_variance.sqrt();
        Ok(Self::from_parts((0..model.len()).map(|i| {
            let s = ctt[(i, i)].max(0.0).sqrt();
            (mu[i], s, if s > 0.0 { sz / s } else { 0.0 })
        })))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let stats: Self = serde_json::from_str(s)?;
        for (k, st) in stats.0.iter().enumerate() {
            if st.index != k + 1 {
                return Err(Error::invalid(format!("stats record {k} has index {}, expected {}", st.index, k + 1)));
            }
            if st.usable && !(st.sigma > 0.0) {
                return Err(Error::invalid(format!("coefficient {} marked usable with sigma {}", st.index, st.sigma)));
            }
            if !(st.sigma_n >= 0.0) {
                return Err(Error::invalid(format!("coefficient {} has negative sigma_n", st.index)));
            }
        }
        Ok(stats)
    }
}

/// Estimates per-coefficient statistics.
///
/// `μ_i` and `σ_i` use the unbiased estimators over per-device averaged
/// transforms. The noise deviation comes from non-overlapping measurement
/// pairs `(0,1), (2,3), …` within each device: `σ_noise² = Σ d² / (2·pairs)`,
/// and `σ̂_{n,i} = σ_noise / σ_i`.
pub fn estimate_stats(dataset: &RODataset, kind: &TransformKind) -> Result<CoefficientStats> {
    dataset.validate()?;
    if dataset.devices.len() < 2 {
        return Err(Error::invalid("statistics need at least 2 devices"));
    }
    let (rows, cols) = (dataset.rows, dataset.cols);
    let l = rows * cols;
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(dataset.devices.len());
    let mut noise_sq = vec![0.0; l];
    let mut pairs = 0usize;
    for d in &dataset.devices {
        let coeffs: Vec<Vec<f64>> = d
            .measurements
            .iter()
            .map(|m| transforms::forward(kind, rows, cols, &m.values).map(|t| t.into_values()))
            .collect::<Result<_>>()?;
        let mut mean = vec![0.0; l];
        for c in &coeffs {
            for (m, v) in mean.iter_mut().zip(c) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= coeffs.len() as f64);
        means.push(mean);
        for pair in coeffs.chunks_exact(2) {
            for (acc, (a, b)) in noise_sq.iter_mut().zip(pair[0].iter().zip(&pair[1])) {
                *acc += (a - b) * (a - b);
            }
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::invalid("noise estimation needs a device with at least 2 measurements"));
    }
    let n = means.len() as f64;
    let mut mu = vec![0.0; l];
    for m in &means {
        for (a, v) in mu.iter_mut().zip(m) {
            *a += v;
        }
    }
    mu.iter_mut().for_each(|a| *a /= n);
    let mut var = vec![0.0; l];
    for m in &means {
        for ((a, v), u) in var.iter_mut().zip(m).zip(&mu) {
            *a += (v - u) * (v - u);
        }
    }
    let scale = mu.iter().chain(var.iter()).fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
    Ok(CoefficientStats::from_parts((0..l).map(|i| {
        let sigma = (var[i] / (n - 1.0)).sqrt();
        // Exactly-constant coefficients can pick up rounding noise.
        let sigma = if sigma > 1e-12 * scale.sqrt() { sigma } else { 0.0 };
        let noise = (noise_sq[i] / (2.0 * pairs as f64)).sqrt();
        (mu[i], sigma, if sigma > 0.0 { noise / sigma } else { 0.0 })
    })))
}

/// Unbiased sample autocovariance of per-device vectors.
pub fn estimate_autocovariance(values: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if values.len() < 2 {
        return Err(Error::invalid("autocovariance needs at least 2 devices"));
    }
    let l = values[0].len();
    if values.iter().any(|v| v.len() != l) {
        return Err(Error::invalid("device vectors differ in length"));
    }
    let n = values.len() as f64;
    let mut mean = vec![0.0; l];
    for v in values {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let centered = DMatrix::from_fn(values.len(), l, |d, i| values[d][i] - mean[i]);
    let mut cov = centered.transpose() * &centered / (n - 1.0);
    for i in 0..l {
        for j in 0..i {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_model(noise: f64) -> SourceModel {
        SourceModel::exponential(ExponentialParams {
            rows: 4,
            cols: 4,
            mean: 100.0,
            sigma_x2: 25.0,
            rho: 0.6,
            sigma_z2: noise,
        })
        .unwrap()
    }

    #[test]
    fn zero_noise_measurements_identical() {
        let ds = synth_dataset(&small_model(0.0), 3, 3, 1).unwrap();
        for d in &ds.devices {
            assert_eq!(d.measurements[0].values, d.measurements[1].values);
            assert_eq!(d.measurements[1].values, d.measurements[2].values);
        }
    }

    #[test]
    fn synth_is_deterministic() {
        let m = small_model(1.0);
        assert_eq!(synth_dataset(&m, 5, 2, 42).unwrap(), synth_dataset(&m, 5, 2, 42).unwrap());
        assert_ne!(synth_dataset(&m, 5, 2, 42).unwrap(), synth_dataset(&m, 5, 2, 43).unwrap());
    }

    #[test]
    fn rejects_indefinite_covariance() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let m = SourceModel::new(1, 2, vec![0.0; 2], cov, 0.0).unwrap();
        match synth_dataset(&m, 2, 1, 0) {
            Err(Error::NotPositiveSemidefinite { value, .. }) => assert!((value + 1.0).abs() < 1e-12),
            other => panic!("expected PSD error, got {other:?}"),
        }
    }

    #[test]
    fn rho_outside_unit_interval_rejected() {
        let p = ExponentialParams { rho: 1.5, ..Default::default() };
        assert!(SourceModel::exponential(p).is_err());
    }

    fn dataset_from(rows: usize, cols: usize, devices: Vec<Vec<Vec<f64>>>) -> RODataset {
        RODataset {
            rows,
            cols,
            devices: devices
                .into_iter()
                .enumerate()
                .map(|(id, ms)| DeviceRecord {
                    id: id as u64,
                    measurements: ms
                        .into_iter()
                        .enumerate()
                        .map(|(k, values)| Measurement { index: k as u32, values })
                        .collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn two_device_stats() {
        // KLT with identity basis keeps values as coefficients.
        let kind = TransformKind::Klt(DMatrix::identity(2, 2));
        let ds = dataset_from(1, 2, vec![vec![vec![5.0, -1.0], vec![5.0, -1.0]], vec![vec![5.0, 1.0], vec![5.0, 1.0]]]);
        let st = estimate_stats(&ds, &kind).unwrap();
        assert!(!st.get(1).usable);
        assert_eq!(st.get(1).sigma, 0.0);
        assert!(st.get(2).mu.abs() < 1e-15);
        assert!((st.get(2).sigma - 2f64.sqrt()).abs() < 1e-12);
        assert!(st.get(2).usable);
    }

    #[test]
    fn paired_difference_noise() {
        // Device 0 measures {9, 11} on coefficient 2; devices 1 and 2 are
        // noise-free and chosen so that sigma_2 = 1 exactly.
        let kind = TransformKind::Klt(DMatrix::identity(2, 2));
        let ds = dataset_from(
            1,
            2,
            vec![vec![vec![0.0, 9.0], vec![0.0, 11.0]], vec![vec![0.0, 11.0]], vec![vec![0.0, 9.0]]],
        );
        let st = estimate_stats(&ds, &kind).unwrap();
        assert!((st.get(2).sigma - 1.0).abs() < 1e-12);
        assert!((st.get(2).sigma_n - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn stats_need_two_devices_and_a_pair() {
        let kind = TransformKind::Klt(DMatrix::identity(2, 2));
        let one = dataset_from(1, 2, vec![vec![vec![0.0, 1.0], vec![0.0, 2.0]]]);
        assert!(estimate_stats(&one, &kind).is_err());
        let no_pairs = dataset_from(1, 2, vec![vec![vec![0.0, 1.0]], vec![vec![0.0, 2.0]]]);
        assert!(estimate_stats(&no_pairs, &kind).is_err());
    }

    #[test]
    fn autocovariance_examples() {
        let z = estimate_autocovariance(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
        let c = estimate_autocovariance(&[vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(c[(0, 0)], 2.0);
        assert!(estimate_autocovariance(&[vec![1.0]]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let ds = synth_dataset(&small_model(2.0), 2, 2, 9).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = ingest_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn csv_well_formed_two_devices() {
        let text = "device,measurement,row,col,count\n0,0,0,0,10\n0,0,0,1,11\n1,0,0,0,12\n1,0,0,1,13.5\n";
        let ds = ingest_csv(text.as_bytes()).unwrap();
        assert_eq!(ds.devices.len(), 2);
        assert_eq!((ds.rows, ds.cols), (1, 2));
        assert_eq!(ds.devices[1].measurements[0].values, vec![12.0, 13.5]);
    }

    #[test]
    fn csv_ragged_device_rejected() {
        let text = "device,measurement,row,col,count\n0,0,0,0,1\n0,0,0,1,1\n0,0,1,0,1\n0,0,1,1,1\n7,0,0,0,1\n7,0,0,1,1\n7,0,1,0,1\n";
        let err = ingest_csv(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("device 7"), "{err}");
    }

    #[test]
    fn csv_diagnostics_carry_line_numbers() {
        let bad_header = "dev,measurement,row,col,count\n";
        assert!(matches!(ingest_csv(bad_header.as_bytes()), Err(Error::Parse { line: 1, .. })));
        let bad_count = "device,measurement,row,col,count\n0,0,0,0,1\n0,0,0,1,abc\n";
        match ingest_csv(bad_count.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stats_json_roundtrip() {
        let st = CoefficientStats::from_parts([(1.0, 2.0, 0.1), (0.5, 1.5, 0.2)]);
        let back = CoefficientStats::from_json(&st.to_json().unwrap()).unwrap();
        assert_eq!(back, st);
        assert!(!back.get(1).usable && back.get(2).usable);
    }

    #[test]
    fn mean_error_shrinks_with_devices() {
        let model = small_model(1.0);
        let kind = TransformKind::Dwht;
        let exact = CoefficientStats::from_model(&model, &kind).unwrap();
        let err = |n: usize| {
            let ds = synth_dataset(&model, n, 2, 2024).unwrap();
            let st = estimate_stats(&ds, &kind).unwrap();
            st.iter().zip(exact.iter()).map(|(a, b)| (a.mu - b.mu).abs() / b.sigma.max(1e-9)).sum::<f64>()
        };
        let (e1, e2, e3) = (err(100), err(1000), err(10000));
        assert!(e1 > e2 && e2 > e3, "{e1} {e2} {e3}");
    }
}
