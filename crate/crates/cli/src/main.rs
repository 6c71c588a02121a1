//! `ropuf`: synthetic RO data, statistics, bit allocation, key binding,
//! analysis reports and hardware-model outputs.

use anyhow::{anyhow, bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use ropuf::analysis::report::{self, PbRow, RateRow, SmaxRow, UniquenessRow};
use ropuf::analysis::{
    alpha_grid, binomial_tail, code_rate_pair, cs_region_mgl, ee_tail, fc_region, poisson_binomial_tail_dftcf,
    poisson_binomial_tail_dp, repetition_crossover, rm_channel_mc, uniqueness, ReliabilityProfile,
    FINITE_LENGTH_REFERENCE,
};
use ropuf::codes::{CodeSpec, REGISTRY};
use ropuf::commit::{enroll, reconstruct, HelperData, Reconstruction, SecretKey, DEFAULT_KEY_BITS};
use ropuf::hwmodel::{self, QuantizerRom};
use ropuf::quantize::{self, BitAllocation};
use ropuf::source::{self, CoefficientStats, ExponentialParams, RODataset, SourceModel};
use ropuf::transforms::{self, TransformKind};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_DECODE: u8 = 3;

#[derive(Parser)]
#[command(name = "ropuf", version, about = "Transform-coding key binding for ring-oscillator PUFs")]
struct Cli {
    /// Seed for every stochastic step; required by stochastic commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a dataset from the exponential-correlation model.
    #[command(after_help = "Example: ropuf gen --devices 100 --measurements 5 --seed 7 --out data.csv")]
    Gen(GenArgs),
    /// Estimate per-coefficient statistics from a dataset.
    #[command(after_help = "Example: ropuf stats --input data.csv --transform dwht --out stats.json")]
    Stats(StatsArgs),
    /// Choose bits per coefficient under a BSC or fixed-errors metric.
    #[command(after_help = "Example: ropuf allocate --stats stats.json --c-max 19 --force-k 1 --out alloc.json")]
    Allocate(AllocateArgs),
    /// Extract bit sequences for every device measurement.
    #[command(after_help = "Example: ropuf extract --input data.csv --stats stats.json --alloc alloc.json")]
    Extract(ExtractArgs),
    /// Bind a key to one measurement and write helper data.
    #[command(
        after_help = "Example: ropuf enroll --input data.csv --stats stats.json --alloc alloc.json --code bch255_131 --seed 1 --out helper.bin"
    )]
    Enroll(EnrollArgs),
    /// Recover the key from helper data and a re-measurement.
    #[command(
        after_help = "Example: ropuf reconstruct --input data.csv --measurement 1 --stats stats.json --alloc alloc.json --code bch255_131 --helper helper.bin"
    )]
    Reconstruct(ReconstructArgs),
    /// Analysis reports.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Hardware-model outputs.
    #[command(subcommand)]
    Hw(Hw),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 16)]
    rows: usize,
    #[arg(long, default_value_t = 16)]
    cols: usize,
    #[arg(long, default_value_t = 100)]
    devices: usize,
    #[arg(long, default_value_t = 2)]
    measurements: usize,
    /// Mean counter value.
    #[arg(long, default_value_t = 0.0)]
    mean: f64,
    /// Latent variance σ_x².
    #[arg(long, default_value_t = 1e6)]
    sigma_x2: f64,
    /// Neighbor correlation ρ in [0, 1).
    #[arg(long, default_value_t = 0.96, allow_hyphen_values = true)]
    rho: f64,
    /// Measurement noise variance σ_z².
    #[arg(long, default_value_t = 1.0)]
    sigma_z2: f64,
}

#[derive(Args, Clone)]
struct TransformArgs {
    /// dct, dwht, dht or klt.
    #[arg(long, default_value = "dwht")]
    transform: String,
    /// KLT basis file written by `stats --transform klt`.
    #[arg(long)]
    basis: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    /// dct, dwht, dht or klt (fitted to the device-mean autocovariance).
    #[arg(long, default_value = "dwht")]
    transform: String,
    /// Where to write the fitted KLT basis.
    #[arg(long)]
    basis_out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("metric").required(true).multiple(false)))]
struct AllocateArgs {
    #[arg(long)]
    stats: PathBuf,
    /// Fixed-BSC metric: target per-bit error probability.
    #[arg(long, group = "metric")]
    p_b: Option<f64>,
    /// Fixed-errors metric: number of coefficient errors to tolerate.
    #[arg(long, group = "metric")]
    c_max: Option<usize>,
    /// Explicit uniform allocation with this many bits per usable coefficient.
    #[arg(long, group = "metric")]
    bits: Option<u8>,
    /// Fixed-errors metric: force every qualifying coefficient to this many bits.
    #[arg(long, requires = "c_max")]
    force_k: Option<u8>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    stats: PathBuf,
    #[arg(long)]
    alloc: PathBuf,
    #[command(flatten)]
    transform: TransformArgs,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct KeyMaterialArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Code name; one of the registry entries.
    #[arg(long, default_value = "bch255_131")]
    code: String,
    /// Device id in the dataset.
    #[arg(long, default_value_t = 0)]
    device: u64,
}

#[derive(Args)]
struct EnrollArgs {
    #[command(flatten)]
    key_material: KeyMaterialArgs,
    #[arg(long, default_value_t = 0)]
    measurement: u32,
    /// Key in hex; drawn from --seed when omitted.
    #[arg(long)]
    key: Option<String>,
    #[arg(long, default_value_t = DEFAULT_KEY_BITS)]
    key_bits: usize,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    key_material: KeyMaterialArgs,
    #[arg(long, default_value_t = 1)]
    measurement: u32,
    #[arg(long)]
    helper: PathBuf,
    #[arg(long, default_value_t = DEFAULT_KEY_BITS)]
    key_bits: usize,
}

#[derive(Subcommand)]
enum Analyze {
    /// Block-error probability of a code.
    #[command(
        after_help = "Examples:\n  ropuf analyze pb --code bch255_131 --profile stats.json --alloc alloc.json\n  ropuf analyze pb --code rep3+ebch256_132 --p 0.06\n  ropuf analyze pb --code rm32_6+rs28_22 --p-err 4.54e-6 --p-era 6.57e-5"
    )]
    Pb(PbArgs),
    /// Key-leakage rate regions and code operating points.
    #[command(after_help = "Example: ropuf analyze rates --p 0.0097 --points 51")]
    Rates(RatesArgs),
    /// Maximum key length over a sweep of bit-error targets.
    #[command(after_help = "Example: ropuf analyze smax --stats stats.json --p-b-min 0.001 --p-b-max 0.1 --steps 50")]
    Smax(SmaxArgs),
    /// Fractional Hamming distances between devices.
    #[command(after_help = "Example: ropuf analyze uniqueness --input data.csv --stats stats.json --alloc alloc.json")]
    Uniqueness(ExtractArgs),
    /// Decorrelation efficiency of every transform.
    #[command(after_help = "Example: ropuf analyze eta --input data.csv")]
    Eta(EtaArgs),
    /// Monte Carlo erasure and error rates of the RM(1,5) inner decoder.
    #[command(after_help = "Example: ropuf analyze rm-mc --p 0.06 --trials 10000000 --seed 1")]
    RmMc(RmMcArgs),
}

#[derive(Args)]
struct PbArgs {
    #[arg(long)]
    code: String,
    /// Stats file; the profile is P_c(K_i) over the used coefficients.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Allocation for --profile; one bit per usable coefficient when omitted.
    #[arg(long, requires = "profile")]
    alloc: Option<PathBuf>,
    /// Number of tolerated errors; the code radius when omitted.
    #[arg(long)]
    t: Option<usize>,
    /// BSC crossover for a binomial evaluation over the code length.
    #[arg(long)]
    p: Option<f64>,
    /// Inner-symbol error probability for errors-and-erasures evaluation.
    #[arg(long, requires = "p_era")]
    p_err: Option<f64>,
    /// Inner-symbol erasure probability.
    #[arg(long, requires = "p_err")]
    p_era: Option<f64>,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 51)]
    points: usize,
}

#[derive(Args)]
struct SmaxArgs {
    #[arg(long)]
    stats: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    p_b_min: f64,
    #[arg(long, default_value_t = 0.1)]
    p_b_max: f64,
    #[arg(long, default_value_t = 50)]
    steps: usize,
}

#[derive(Args)]
struct EtaArgs {
    /// Dataset; the default model covariance is used when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    rows: usize,
    #[arg(long, default_value_t = 16)]
    cols: usize,
    #[arg(long, default_value_t = 0.96)]
    rho: f64,
}

#[derive(Args)]
struct RmMcArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
}

#[derive(Subcommand)]
enum Hw {
    /// Fixed-point 2D Walsh-Hadamard transform of one measurement, or the
    /// address schedule when no input is given.
    #[command(after_help = "Examples:\n  ropuf hw dwht\n  ropuf hw dwht --input data.csv --device 0 --measurement 0")]
    Dwht(HwDwhtArgs),
    /// Quantizer boundary ROM image.
    #[command(after_help = "Example: ropuf hw rom --stats stats.json --alloc alloc.json --out rom.bin")]
    Rom(HwRomArgs),
    /// Counter overflow time and measurement-window check.
    #[command(after_help = "Example: ropuf hw timing --width 16 --freq 500e6 --window 100e-6")]
    Timing(HwTimingArgs),
}

#[derive(Args)]
struct HwDwhtArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    device: u64,
    #[arg(long, default_value_t = 0)]
    measurement: u32,
}

#[derive(Args)]
struct HwRomArgs {
    #[arg(long)]
    stats: PathBuf,
    #[arg(long)]
    alloc: PathBuf,
}

#[derive(Args)]
struct HwTimingArgs {
    #[arg(long, default_value_t = hwmodel::COUNTER_BITS)]
    width: u32,
    #[arg(long, default_value_t = 500e6)]
    freq: f64,
    #[arg(long, default_value_t = 100e-6)]
    window: f64,
}

/// Failure of `reconstruct`, reported with its own exit status.
#[derive(Debug)]
struct DecodeFailure;

impl std::fmt::Display for DecodeFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("key reconstruction failed")
    }
}

impl std::error::Error for DecodeFailure {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn exit_status(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<DecodeFailure>().is_some() {
        return EXIT_DECODE;
    }
    for cause in e.chain() {
        if cause.downcast_ref::<io::Error>().is_some() {
            return EXIT_IO;
        }
        if let Some(ropuf::Error::Io(_)) = cause.downcast_ref::<ropuf::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_VALIDATION
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(cli, a),
        Command::Stats(a) => cmd_stats(cli, a),
        Command::Allocate(a) => cmd_allocate(cli, a),
        Command::Extract(a) => cmd_extract(cli, a),
        Command::Enroll(a) => cmd_enroll(cli, a),
        Command::Reconstruct(a) => cmd_reconstruct(cli, a),
        Command::Analyze(a) => match a {
            Analyze::Pb(a) => cmd_pb(cli, a),
            Analyze::Rates(a) => cmd_rates(cli, a),
            Analyze::Smax(a) => cmd_smax(cli, a),
            Analyze::Uniqueness(a) => cmd_uniqueness(cli, a),
            Analyze::Eta(a) => cmd_eta(cli, a),
            Analyze::RmMc(a) => cmd_rm_mc(cli, a),
        },
        Command::Hw(h) => match h {
            Hw::Dwht(a) => cmd_hw_dwht(cli, a),
            Hw::Rom(a) => cmd_hw_rom(cli, a),
            Hw::Timing(a) => cmd_hw_timing(cli, a),
        },
    }
}

fn require_seed(cli: &Cli) -> anyhow::Result<u64> {
    cli.seed.ok_or_else(|| anyhow!(ropuf::Error::InvalidInput("this command needs --seed".into())))
}

fn output(cli: &Cli) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &cli.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn read_string(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit<T: Serialize>(cli: &Cli, rows: &[T]) -> anyhow::Result<()> {
    let mut w = output(cli)?;
    match cli.format {
        Format::Csv => report::write_csv(&mut w, rows)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn load_dataset(path: &Path) -> anyhow::Result<RODataset> {
    source::ingest_csv(open(path)?).with_context(|| format!("reading dataset {}", path.display()))
}

fn load_stats(path: &Path) -> anyhow::Result<CoefficientStats> {
    CoefficientStats::from_json(&read_string(path)?).with_context(|| format!("reading stats {}", path.display()))
}

fn load_alloc(path: &Path) -> anyhow::Result<BitAllocation> {
    BitAllocation::from_json(&read_string(path)?).with_context(|| format!("reading allocation {}", path.display()))
}

/// KLT basis file: column-major `size x size` matrix, columns are basis
/// vectors.
#[derive(Serialize, Deserialize)]
struct BasisFile {
    size: usize,
    data: Vec<f64>,
}

fn load_transform(args: &TransformArgs) -> anyhow::Result<TransformKind> {
    if args.transform.eq_ignore_ascii_case("klt") {
        let path =
            args.basis.as_ref().ok_or_else(|| anyhow!(ropuf::Error::InvalidInput("klt needs --basis".into())))?;
        let f: BasisFile = serde_json::from_str(&read_string(path)?)?;
        if f.data.len() != f.size * f.size {
            bail!(ropuf::Error::InvalidInput(format!(
                "basis has {} entries, expected {}",
                f.data.len(),
                f.size * f.size
            )));
        }
        return Ok(TransformKind::Klt(DMatrix::from_column_slice(f.size, f.size, &f.data)));
    }
    Ok(TransformKind::parse_fixed(&args.transform)?)
}

fn cmd_gen(cli: &Cli, a: &GenArgs) -> anyhow::Result<()> {
    let seed = require_seed(cli)?;
    let model = SourceModel::exponential(ExponentialParams {
        rows: a.rows,
        cols: a.cols,
        mean: a.mean,
        sigma_x2: a.sigma_x2,
        rho: a.rho,
        sigma_z2: a.sigma_z2,
    })?;
    let data = source::synth_dataset(&model, a.devices, a.measurements, seed)?;
    let mut w = output(cli)?;
    data.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_stats(cli: &Cli, a: &StatsArgs) -> anyhow::Result<()> {
    let data = load_dataset(&a.input)?;
    let kind = if a.transform.eq_ignore_ascii_case("klt") {
        let cov = source::estimate_autocovariance(&data.device_means())?;
        let kind = transforms::klt_fit(&cov)?;
        let path =
            a.basis_out.as_ref().ok_or_else(|| anyhow!(ropuf::Error::InvalidInput("klt needs --basis-out".into())))?;
        if let TransformKind::Klt(b) = &kind {
            let f = BasisFile { size: b.nrows(), data: b.as_slice().to_vec() };
            std::fs::write(path, serde_json::to_string(&f)?).with_context(|| format!("writing {}", path.display()))?;
        }
        kind
    } else {
        TransformKind::parse_fixed(&a.transform)?
    };
    let stats = source::estimate_stats(&data, &kind)?;
    let mut w = output(cli)?;
    writeln!(w, "{}", stats.to_json()?)?;
    w.flush()?;
    Ok(())
}

fn cmd_allocate(cli: &Cli, a: &AllocateArgs) -> anyhow::Result<()> {
    let stats = load_stats(&a.stats)?;
    let alloc = if let Some(p_b) = a.p_b {
        quantize::allocate_fixed_bsc(&stats, p_b)?
    } else if let Some(c_max) = a.c_max {
        quantize::allocate_fixed_errors(&stats, c_max, a.force_k)?
    } else {
        let k = a.bits.expect("metric group is required");
        let bits = stats.iter().map(|s| if s.usable { k } else { 0 }).collect();
        BitAllocation::new(bits, None)?
    };
    eprintln!("N = {} bits, K_max = {}", alloc.total_bits(), alloc.max_bits());
    let mut w = output(cli)?;
    writeln!(w, "{}", alloc.to_json()?)?;
    w.flush()?;
    Ok(())
}

struct Pipeline {
    data: RODataset,
    stats: CoefficientStats,
    alloc: BitAllocation,
    kind: TransformKind,
}

impl Pipeline {
    fn load(a: &PipelineArgs) -> anyhow::Result<Self> {
        Ok(Self {
            data: load_dataset(&a.input)?,
            stats: load_stats(&a.stats)?,
            alloc: load_alloc(&a.alloc)?,
            kind: load_transform(&a.transform)?,
        })
    }

    fn bits(&self, values: &[f64]) -> anyhow::Result<Vec<u8>> {
        Ok(quantize::extract_bits(values, self.data.rows, self.data.cols, &self.kind, &self.stats, &self.alloc)?)
    }

    fn measurement(&self, device: u64, index: u32) -> anyhow::Result<Vec<u8>> {
        let d = self
            .data
            .devices
            .iter()
            .find(|d| d.id == device)
            .ok_or_else(|| anyhow!(ropuf::Error::InvalidInput(format!("no device {device} in dataset"))))?;
        let m = d.measurements.iter().find(|m| m.index == index).ok_or_else(|| {
            anyhow!(ropuf::Error::InvalidInput(format!("device {device} has no measurement {index}")))
        })?;
        self.bits(&m.values)
    }
}

#[derive(Serialize)]
struct BitsRow {
    device: u64,
    measurement: u32,
    bits: String,
}

fn cmd_extract(cli: &Cli, a: &ExtractArgs) -> anyhow::Result<()> {
    let p = Pipeline::load(&a.pipeline)?;
    let mut rows = Vec::new();
    for d in &p.data.devices {
        for m in &d.measurements {
            rows.push(BitsRow {
                device: d.id,
                measurement: m.index,
                bits: ropuf::bits::to_string(&p.bits(&m.values)?),
            });
        }
    }
    emit(cli, &rows)
}

fn cmd_enroll(cli: &Cli, a: &EnrollArgs) -> anyhow::Result<()> {
    let km = &a.key_material;
    let p = Pipeline::load(&km.pipeline)?;
    let code = CodeSpec::from_name(&km.code)?;
    let key = match &a.key {
        Some(h) => SecretKey::from_hex(h)?,
        None => SecretKey::random(a.key_bits, &mut ChaCha20Rng::seed_from_u64(require_seed(cli)?)),
    };
    let x = p.measurement(km.device, a.measurement)?;
    let helper = enroll(&key, &x, &code, p.alloc.digest())?;
    let mut w = output(cli)?;
    w.write_all(&helper.to_bytes())?;
    w.flush()?;
    if cli.out.is_some() {
        println!("{}", key.to_hex());
    } else {
        eprintln!("key {}", key.to_hex());
    }
    Ok(())
}

fn cmd_reconstruct(cli: &Cli, a: &ReconstructArgs) -> anyhow::Result<()> {
    let km = &a.key_material;
    let p = Pipeline::load(&km.pipeline)?;
    let code = CodeSpec::from_name(&km.code)?;
    let raw = std::fs::read(&a.helper).with_context(|| format!("reading {}", a.helper.display()))?;
    let helper = HelperData::from_bytes(&raw)?;
    let y = p.measurement(km.device, a.measurement)?;
    match reconstruct(&helper, &y, &code, p.alloc.digest(), a.key_bits)? {
        Reconstruction::Key(key) => {
            let mut w = output(cli)?;
            writeln!(w, "{}", key.to_hex())?;
            w.flush()?;
            Ok(())
        }
        Reconstruction::Failure => Err(DecodeFailure.into()),
    }
}

fn cmd_pb(cli: &Cli, a: &PbArgs) -> anyhow::Result<()> {
    let code = CodeSpec::from_name(&a.code)?;
    let (n_code, _, _) = code.params();
    let t = a.t.unwrap_or_else(|| code.radius());
    let mut rows = Vec::new();
    if let Some(path) = &a.profile {
        let stats = load_stats(path)?;
        let bits: Vec<u8> = match &a.alloc {
            Some(p) => load_alloc(p)?.bits().to_vec(),
            None => stats.iter().map(|s| s.usable as u8).collect(),
        };
        let pc = bits
            .iter()
            .zip(stats.iter())
            .filter(|(k, _)| **k > 0)
            .map(|(&k, s)| quantize::correctness(k, s.sigma_n))
            .collect::<ropuf::Result<Vec<f64>>>()?;
        let profile = ReliabilityProfile::from_correctness(&pc)?;
        let params = format!("code={};profile={}", code.name(), path.display());
        rows.push(PbRow {
            method: "dftcf".into(),
            n: profile.len(),
            t,
            params: params.clone(),
            p_b: poisson_binomial_tail_dftcf(&profile, t),
        });
        rows.push(PbRow {
            method: "dp".into(),
            n: profile.len(),
            t,
            params,
            p_b: poisson_binomial_tail_dp(&profile, t),
        });
    }
    if let Some(p) = a.p {
        if !(0.0..=1.0).contains(&p) {
            bail!(ropuf::Error::InvalidInput(format!("crossover must be in [0, 1], got {p}")));
        }
        // A repetition inner code turns BSC(p) into a BSC seen by the outer code.
        let (n, t, q) = match &code {
            CodeSpec::Concatenated { outer, inner } => match inner.as_ref() {
                CodeSpec::Repetition(r) => {
                    (outer.params().0, a.t.unwrap_or_else(|| outer.radius()), repetition_crossover(*r as u64, p))
                }
                _ => bail!(ropuf::Error::InvalidInput("--p needs a repetition inner code; use --p-err/--p-era".into())),
            },
            _ => (n_code, t, p),
        };
        rows.push(PbRow {
            method: "binomial".into(),
            n,
            t,
            params: format!("code={};p={p};channel_p={q}", code.name()),
            p_b: binomial_tail(n as u64, q, t as u64),
        });
    }
    if let (Some(p_err), Some(p_era)) = (a.p_err, a.p_era) {
        let outer = match &code {
            CodeSpec::Concatenated { outer, .. } => outer.as_ref(),
            other => other,
        };
        let (n_bits, _, d) = outer.params();
        let n = n_bits / outer.symbol_bits();
        rows.push(PbRow {
            method: "errors_erasures".into(),
            n,
            t: d,
            params: format!("code={};p_err={p_err};p_era={p_era}", code.name()),
            p_b: ee_tail(n as u64, d as u64, p_err, p_era),
        });
    }
    if rows.is_empty() {
        bail!(ropuf::Error::InvalidInput("give --profile, --p or --p-err/--p-era".into()));
    }
    emit(cli, &rows)
}

fn cmd_rates(cli: &Cli, a: &RatesArgs) -> anyhow::Result<()> {
    let alphas = alpha_grid(a.points);
    let cs = cs_region_mgl(a.p, &alphas)?;
    let fc = fc_region(a.p, a.points)?;
    let mut rows: Vec<RateRow> = alphas
        .iter()
        .zip(&cs)
        .map(|(&alpha, pt)| RateRow { source: "chosen_secret".into(), alpha: Some(alpha), r_s: pt.r_s, r_l: pt.r_l })
        .collect();
    rows.extend(fc.boundary.iter().map(|pt| RateRow {
        source: "fuzzy_commitment".into(),
        alpha: None,
        r_s: pt.r_s,
        r_l: pt.r_l,
    }));
    rows.push(RateRow { source: "fc_optimal".into(), alpha: None, r_s: fc.optimal.r_s, r_l: fc.optimal.r_l });
    rows.push(RateRow {
        source: "finite_length".into(),
        alpha: None,
        r_s: FINITE_LENGTH_REFERENCE.r_s,
        r_l: FINITE_LENGTH_REFERENCE.r_l,
    });
    for name in REGISTRY {
        let spec = CodeSpec::from_name(name)?;
        let (n, k, _) = spec.params();
        let pt = code_rate_pair(k, n);
        rows.push(RateRow { source: format!("code:{name}"), alpha: None, r_s: pt.r_s, r_l: pt.r_l });
    }
    emit(cli, &rows)
}

fn cmd_smax(cli: &Cli, a: &SmaxArgs) -> anyhow::Result<()> {
    if !(a.p_b_min > 0.0 && a.p_b_min <= a.p_b_max && a.p_b_max <= 0.5) || a.steps == 0 {
        bail!(ropuf::Error::InvalidInput("need 0 < p_b_min <= p_b_max <= 0.5 and steps > 0".into()));
    }
    let stats = load_stats(&a.stats)?;
    let grid: Vec<f64> = (0..=a.steps)
        .map(|i| {
            let f = i as f64 / a.steps as f64;
            a.p_b_min * (a.p_b_max / a.p_b_min).powf(f)
        })
        .collect();
    let rows = grid
        .par_iter()
        .map(|&p_b| {
            let n = quantize::allocate_fixed_bsc(&stats, p_b)?.total_bits();
            Ok(SmaxRow { p_b, n, s_max: quantize::smax(p_b, n)? })
        })
        .collect::<ropuf::Result<Vec<_>>>()?;
    emit(cli, &rows)
}

fn cmd_uniqueness(cli: &Cli, a: &ExtractArgs) -> anyhow::Result<()> {
    let p = Pipeline::load(&a.pipeline)?;
    let seqs = p.data.devices.iter().map(|d| p.bits(&d.measurements[0].values)).collect::<anyhow::Result<Vec<_>>>()?;
    let u = uniqueness(&seqs)?;
    emit(cli, &[UniquenessRow { pair_count: u.pair_count, mean: u.mean, variance: u.variance }])
}

#[derive(Serialize)]
struct EtaRow {
    transform: &'static str,
    eta: f64,
}

fn cmd_eta(cli: &Cli, a: &EtaArgs) -> anyhow::Result<()> {
    let (rows, cols, cov) = match &a.input {
        Some(path) => {
            let data = load_dataset(path)?;
            (data.rows, data.cols, source::estimate_autocovariance(&data.device_means())?)
        }
        None => {
            let m = SourceModel::exponential(ExponentialParams {
                rows: a.rows,
                cols: a.cols,
                rho: a.rho,
                ..ExponentialParams::default()
            })?;
            (m.rows, m.cols, m.covariance)
        }
    };
    let kinds = [TransformKind::Dct, TransformKind::Dwht, TransformKind::Dht, transforms::klt_fit(&cov)?];
    let out = kinds
        .iter()
        .map(|k| {
            let ctt = transforms::transform_covariance(k, rows, cols, &cov)?;
            Ok(EtaRow { transform: k.name(), eta: transforms::decorrelation_efficiency(&ctt, &cov)? })
        })
        .collect::<ropuf::Result<Vec<_>>>()?;
    emit(cli, &out)
}

#[derive(Serialize)]
struct RmMcRow {
    p: f64,
    trials: u64,
    p_era: f64,
    se_era: f64,
    p_err: f64,
    se_err: f64,
}

fn cmd_rm_mc(cli: &Cli, a: &RmMcArgs) -> anyhow::Result<()> {
    let seed = require_seed(cli)?;
    if !(0.0..=1.0).contains(&a.p) || a.trials == 0 {
        bail!(ropuf::Error::InvalidInput("need p in [0, 1] and trials > 0".into()));
    }
    let e = rm_channel_mc(a.p, a.trials, seed);
    emit(
        cli,
        &[RmMcRow {
            p: a.p,
            trials: e.trials,
            p_era: e.p_era(),
            se_era: e.se_era(),
            p_err: e.p_err(),
            se_err: e.se_err(),
        }],
    )
}

#[derive(Serialize)]
struct ScheduleRow {
    pass: usize,
    a0: u8,
    a1: u8,
    a2: u8,
    a3: u8,
}

#[derive(Serialize)]
struct FixedCoeffRow {
    index: usize,
    fixed: i64,
    exact: f64,
}

fn cmd_hw_dwht(cli: &Cli, a: &HwDwhtArgs) -> anyhow::Result<()> {
    let Some(path) = &a.input else {
        let rows: Vec<ScheduleRow> = hwmodel::schedule()
            .into_iter()
            .enumerate()
            .flat_map(|(pass, quads)| {
                quads.into_iter().map(move |q| ScheduleRow { pass, a0: q[0], a1: q[1], a2: q[2], a3: q[3] })
            })
            .collect();
        return emit(cli, &rows);
    };
    let data = load_dataset(path)?;
    if (data.rows, data.cols) != (hwmodel::SIDE, hwmodel::SIDE) {
        bail!(ropuf::Error::InvalidInput(format!(
            "hardware model needs a 16x16 array, got {}x{}",
            data.rows, data.cols
        )));
    }
    let m = data
        .devices
        .iter()
        .find(|d| d.id == a.device)
        .and_then(|d| d.measurements.iter().find(|m| m.index == a.measurement))
        .ok_or_else(|| anyhow!(ropuf::Error::InvalidInput("device or measurement not found".into())))?;
    let counts: Vec<i64> = m.values.iter().map(|v| v.round() as i64).collect();
    let fixed = hwmodel::dwht2d_fixed(&counts)?;
    let float: Vec<f64> = counts.iter().map(|&v| v as f64).collect();
    let exact = transforms::forward(&TransformKind::Dwht, 16, 16, &float)?;
    eprintln!("widest sum {} bits, widest stored value {} bits", fixed.max_sum_bits, fixed.max_stored_bits);
    let rows: Vec<FixedCoeffRow> = fixed
        .values
        .iter()
        .zip(exact.values())
        .enumerate()
        .map(|(i, (&f, &e))| FixedCoeffRow { index: i + 1, fixed: f, exact: e })
        .collect();
    emit(cli, &rows)
}

fn cmd_hw_rom(cli: &Cli, a: &HwRomArgs) -> anyhow::Result<()> {
    let rom: QuantizerRom = hwmodel::quantizer_rom(&load_alloc(&a.alloc)?, &load_stats(&a.stats)?)?;
    eprintln!("{} words of {} bits, {} bytes", rom.words.len(), rom.word_bits, rom.total_bytes());
    let mut w = output(cli)?;
    rom.write_image(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TimingRow {
    width: u32,
    freq_hz: f64,
    t_min_s: f64,
    window_s: f64,
    window_ok: bool,
}

fn cmd_hw_timing(cli: &Cli, a: &HwTimingArgs) -> anyhow::Result<()> {
    let t_min = hwmodel::counter_overload_time(a.width, a.freq)?;
    let ok = hwmodel::counter_window_ok(a.width, a.freq, a.window)?;
    emit(cli, &[TimingRow { width: a.width, freq_hz: a.freq, t_min_s: t_min, window_s: a.window, window_ok: ok }])
}
