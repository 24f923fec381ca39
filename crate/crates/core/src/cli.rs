//! `pcbrs` command line: `sample`, `stats`, `bench` and `loss-check`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error, 3 check failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::bench::{self, CascadeSpec};
use crate::error::Error;
use crate::geometry::PointCloud;
use crate::gradcheck::{self, GradCheckConfig};
use crate::grid::{CylGridConfig, RhoMax};
use crate::io;
use crate::losses::{self, LossInputs, UncertaintyParams, Weighting};
use crate::sampling::{self, Method};
use crate::stats::{self, DEFAULT_EDGES};
use crate::synth::{generate_long_tail, SynthConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "pcbrs",
    version,
    about = "LiDAR point cloud downsampling: RS, PCB-RS and FPS"
)]
pub struct Cli {
    /// Worker threads for non-timed workloads (multi-seed statistics).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Downsample a scan and write the result with a provenance sidecar.
    Sample(SampleArgs),
    /// Distance histograms and RS vs PCB-RS uniformity.
    Stats(StatsArgs),
    /// Time RS, PCB-RS and FPS on downsampling cascades.
    Bench(BenchArgs),
    /// Verify the analytic loss gradients against finite differences.
    LossCheck(LossCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rs,
    PcbRs,
    Fps,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rs => Method::Rs,
            MethodArg::PcbRs => Method::PcbRs,
            MethodArg::Fps => Method::Fps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

/// `key=value` list for the synthetic generator, e.g. `n=100000,k=2,rho_max=80`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthSpec {
    pub n_points: Option<usize>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub z_min: Option<f64>,
    pub z_max: Option<f64>,
    pub density_exponent: Option<f64>,
    pub seed: Option<u64>,
}

impl FromStr for SynthSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut spec = SynthSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            let bad = |_| format!("invalid value for {key}: {value:?}");
            match key.trim() {
                "n" | "n_points" => {
                    spec.n_points = Some(value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?)
                }
                "rho_min" => {
                    spec.rho_min = Some(
                        value
                            .parse()
                            .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?,
                    )
                }
                "rho_max" => {
                    spec.rho_max = Some(
                        value
                            .parse()
                            .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?,
                    )
                }
                "z_min" => {
                    spec.z_min = Some(
                        value
                            .parse()
                            .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?,
                    )
                }
                "z_max" => {
                    spec.z_max = Some(
                        value
                            .parse()
                            .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?,
                    )
                }
                "k" | "density_exponent" => {
                    spec.density_exponent = Some(
                        value
                            .parse()
                            .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?,
                    )
                }
                "seed" => spec.seed = Some(value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?),
                other => return Err(format!("unknown synth key {other:?}")),
            }
        }
        Ok(spec)
    }
}

impl SynthSpec {
    pub fn resolve(&self, default_seed: u64, default_n: usize) -> SynthConfig {
        let d = SynthConfig::default();
        SynthConfig {
            n_points: self.n_points.unwrap_or(default_n),
            rho_min: self.rho_min.unwrap_or(d.rho_min),
            rho_max: self.rho_max.unwrap_or(d.rho_max),
            z_min: self.z_min.unwrap_or(d.z_min),
            z_max: self.z_max.unwrap_or(d.z_max),
            density_exponent: self.density_exponent.unwrap_or(d.density_exponent),
            seed: self.seed.unwrap_or(default_seed),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// KITTI-style `.bin` scan.
    #[arg(long = "in", value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// `.label` file paired with `--in`.
    #[arg(long, value_name = "PATH", requires = "input")]
    pub labels: Option<PathBuf>,
    /// Generate a synthetic long-tail scan instead: keys n, rho_min, rho_max,
    /// z_min, z_max, k, seed.
    #[arg(long, value_name = "KEY=VALUE,...", conflicts_with = "input")]
    pub synth: Option<SynthSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution(pub usize, pub usize, pub usize);

impl FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(['x', 'X', '*']).collect();
        let parsed: Result<Vec<usize>, _> = parts.iter().map(|p| p.trim().parse::<usize>()).collect();
        match parsed.as_deref() {
            Ok([r, p, z]) if *r > 0 && *p > 0 && *z > 0 => Ok(Resolution(*r, *p, *z)),
            _ => Err(format!("expected RxPxZ with positive integers, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Radial x angular x height cell counts.
    #[arg(long, default_value = "64x64x16")]
    pub grid: Resolution,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub rho_min: f64,
    /// Outer radius in meters, or `max` for the cloud's farthest point.
    #[arg(long, default_value = "max")]
    pub rho_max: String,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    pub z_min: f64,
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    pub z_max: f64,
    /// Discard points outside the crop range instead of clamping them.
    #[arg(long)]
    pub drop_out_of_range: bool,
}

impl GridArgs {
    fn config(&self) -> Result<CylGridConfig, CliError> {
        let Resolution(r, p, z) = self.grid;
        let cfg = CylGridConfig {
            n_radial: r,
            n_angular: p,
            n_height: z,
            rho_min: self.rho_min,
            rho_max: self
                .rho_max
                .parse::<RhoMax>()
                .map_err(|e| CliError::Usage(e.to_string()))?,
            z_min: self.z_min,
            z_max: self.z_max,
            drop_out_of_range: self.drop_out_of_range,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SizeArgs {
    /// Number of points to keep.
    #[arg(long, conflicts_with = "ratio")]
    pub m: Option<usize>,
    /// Share of points to keep, in (0, 1]; resolves to round(ratio * N).
    #[arg(long)]
    pub ratio: Option<f64>,
}

impl SizeArgs {
    fn resolve(&self, n: usize) -> Result<Option<usize>, CliError> {
        match (self.m, self.ratio) {
            (Some(m), None) => Ok(Some(m)),
            (None, Some(r)) if r > 0.0 && r <= 1.0 => Ok(Some((r * n as f64).round() as usize)),
            (None, Some(r)) => Err(CliError::Usage(format!("--ratio must lie in (0, 1], got {r}"))),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[command(flatten)]
    pub size: SizeArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Seed for every random choice; a random one is drawn and recorded if absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// FPS start point.
    #[arg(long, default_value_t = 0)]
    pub start_index: usize,
    /// Output `.bin`; labels go next to it as `.label`, provenance as `.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Band edges in meters; the last band is open-ended.
    #[arg(long, value_delimiter = ',')]
    pub edges: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Compare RS and PCB-RS over several seeds instead of printing the source histogram.
    #[arg(long)]
    pub compare: bool,
    #[command(flatten)]
    pub size: SizeArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Number of seeds for --compare.
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Table4,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Cascade set to run.
    #[arg(long, value_enum, default_value = "table4")]
    pub preset: Preset,
    /// A single custom cascade, e.g. 4096,1024,256; overrides --preset.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 11)]
    pub repeats: usize,
    /// Independent measurements per cell; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<MethodArg>>,
    /// Use PCB-RS at every stage rather than only the first.
    #[arg(long)]
    pub pcb_all_stages: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LossCheckArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
    CheckFailed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(e) => e.exit_code(),
            CliError::CheckFailed(_) => EXIT_CHECK_FAILED,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "{e}"),
            CliError::CheckFailed(m) => write!(f, "check failed: {m}"),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Loaded {
    cloud: PointCloud,
    provenance: serde_json::Value,
}

fn resolve_seed(seed: Option<u64>) -> (u64, &'static str) {
    match seed {
        Some(s) => (s, "flag"),
        None => {
            let s = rand::random::<u64>();
            eprintln!("seed: {s}");
            (s, "random")
        }
    }
}

fn load_source(src: &SourceArgs, seed: u64, default_n: Option<usize>) -> Result<Loaded, CliError> {
    match (&src.input, &src.synth, default_n) {
        (Some(path), None, _) => {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let mut cloud = io::decode_kitti_bin(&bytes, path)?;
            let mut provenance = json!({
                "kind": "file",
                "path": path,
                "sha256": sha256_hex(&bytes),
                "n_points": cloud.len(),
            });
            if let Some(label_path) = &src.labels {
                let lb = std::fs::read(label_path).map_err(|e| Error::io(label_path, e))?;
                // full records, so instance ids survive into the output
                let labels = io::decode_label_records(&lb, label_path)?;
                cloud = cloud.with_labels(labels)?;
                provenance["labels_path"] = json!(label_path);
                provenance["labels_sha256"] = json!(sha256_hex(&lb));
            }
            Ok(Loaded { cloud, provenance })
        }
        (None, Some(spec), _) => synth_source(spec.resolve(seed, SynthConfig::default().n_points)),
        (None, None, Some(n)) => synth_source(SynthSpec::default().resolve(seed, n)),
        (None, None, None) => Err(CliError::Usage("one of --in or --synth is required".into())),
        (Some(_), Some(_), _) => Err(CliError::Usage("--in and --synth are mutually exclusive".into())),
    }
}

fn synth_source(cfg: SynthConfig) -> Result<Loaded, CliError> {
    let cloud = generate_long_tail(&cfg)?;
    let provenance = json!({
        "kind": "synth",
        "config": cfg,
        "sha256": sha256_hex(&io::encode_kitti_bin(&cloud)),
        "n_points": cloud.len(),
    });
    Ok(Loaded { cloud, provenance })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => io::write_atomic(path, text.as_bytes())?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn label_path(out: &Path) -> PathBuf {
    out.with_extension("label")
}

pub fn cmd_sample(args: &SampleArgs) -> Result<(), CliError> {
    let grid = args.grid.config()?;
    let (seed, seed_source) = resolve_seed(args.seed);
    let loaded = load_source(&args.source, seed, None)?;
    let n = loaded.cloud.len();
    let m = args
        .size
        .resolve(n)?
        .ok_or_else(|| CliError::Usage("one of --m or --ratio is required".into()))?;
    let method = Method::from(args.method);
    let result = sampling::sample(method, &loaded.cloud, &grid, m, seed, args.start_index)?;
    let sampled = loaded.cloud.gather(&result.indices);

    let bin_bytes = io::encode_kitti_bin(&sampled);
    let label_bytes = sampled.labels().map(io::encode_labels);
    let mut sidecar = json!({
        "tool": "pcbrs",
        "version": env!("CARGO_PKG_VERSION"),
        "method": method,
        "seed": seed,
        "seed_source": seed_source,
        "m": m,
        "ratio": args.size.ratio,
        "n_input": n,
        "duplicated": result.duplicated,
        "grid": grid,
        "input": loaded.provenance,
        "output": {
            "bin": args.out,
            "sha256": sha256_hex(&bin_bytes),
        },
    });
    if method == Method::Fps {
        sidecar["start_index"] = json!(args.start_index);
    }
    if let Some(lb) = &label_bytes {
        sidecar["output"]["label"] = json!(label_path(&args.out));
        sidecar["output"]["label_sha256"] = json!(sha256_hex(lb));
    }
    let sidecar = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");

    io::write_atomic(&args.out, &bin_bytes)?;
    if let Some(lb) = &label_bytes {
        io::write_atomic(&label_path(&args.out), lb)?;
    }
    io::write_atomic(&sidecar_path(&args.out), sidecar.as_bytes())?;
    eprintln!("{} -> {} points ({method}, seed {seed})", n, result.len());
    Ok(())
}

fn comparison_csv(cmp: &stats::MethodComparison) -> String {
    let mut s = String::from("method,band_lo_m,band_hi_m,mean_count,fraction,cv_bins\n");
    let hi = |e: f64| if e.is_finite() { e.to_string() } else { "inf".into() };
    for (i, r) in cmp.source.rows().iter().enumerate() {
        let _ = writeln!(
            s,
            "source,{},{},{},{},",
            r.band_lo_m,
            hi(cmp.source.edges[i + 1]),
            r.count,
            r.fraction
        );
    }
    for rep in [&cmp.rs, &cmp.pcb_rs] {
        for b in 0..rep.band_fractions.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                rep.method.name(),
                rep.edges[b],
                hi(rep.edges[b + 1]),
                rep.mean_counts[b],
                rep.band_fractions[b],
                rep.cv_bins
            );
        }
    }
    s
}

pub fn cmd_stats(args: &StatsArgs) -> Result<(), CliError> {
    let edges = args.edges.clone().unwrap_or_else(|| DEFAULT_EDGES.to_vec());
    stats::normalize_edges(&edges).map_err(|e| CliError::Usage(e.to_string()))?;
    let (seed, _) = resolve_seed(args.seed);
    let loaded = load_source(&args.source, seed, None)?;
    let text = if args.compare {
        let grid = args.grid.config()?;
        let m = args
            .size
            .resolve(loaded.cloud.len())?
            .ok_or_else(|| CliError::Usage("--compare needs --m or --ratio".into()))?;
        if args.seeds == 0 {
            return Err(CliError::Usage("--seeds must be >= 1".into()));
        }
        let seeds: Vec<u64> = (0..args.seeds as u64).map(|i| seed.wrapping_add(i)).collect();
        let cmp = stats::compare_methods(&loaded.cloud, &grid, m, &seeds, &edges)?;
        match args.format {
            Format::Json => serde_json::to_string_pretty(&cmp).expect("comparison serializes") + "\n",
            _ => comparison_csv(&cmp),
        }
    } else {
        let h = stats::distance_histogram(&loaded.cloud, &edges)?;
        match args.format {
            Format::Json => h.to_json() + "\n",
            _ => h.to_csv(),
        }
    };
    emit(&args.out, &text)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let grid = args.grid.config()?;
    let (seed, _) = resolve_seed(args.seed);
    let methods: Vec<Method> = args
        .methods
        .as_ref()
        .map_or_else(|| Method::ALL.to_vec(), |v| v.iter().map(|&m| m.into()).collect());
    let mut specs = match &args.sizes {
        Some(sizes) => vec![CascadeSpec::new(sizes.clone(), args.repeats)],
        None => match args.preset {
            Preset::Table4 => CascadeSpec::table4(),
        },
    };
    for spec in &mut specs {
        spec.repeats = args.repeats;
        spec.methods = methods.clone();
        spec.pcb_first_only = !args.pcb_all_stages;
        spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let n0 = specs.iter().map(|s| s.sizes[0]).max().unwrap_or(0);
    let loaded = load_source(&args.source, seed, Some(n0))?;
    let table = bench::run_all(&specs, &loaded.cloud, &grid, seed, args.runs)?;
    let text = match args.format {
        Format::Csv => table.to_csv(),
        Format::Json => serde_json::to_string_pretty(&table).expect("table serializes") + "\n",
        Format::Text => table.to_text(),
    };
    emit(&args.out, &text)
}

fn loss_report_text(seed: u64) -> Result<String, CliError> {
    use rand::Rng;
    let mut rng = crate::rng::stream(seed, crate::rng::STREAM_LOSS_CHECK.wrapping_add(1));
    let c = 4;
    let mut logits = || (0..c).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>();
    let inputs = LossInputs {
        p_pcb: losses::ClassDistribution::softmax(&logits())?,
        p_rs: losses::ClassDistribution::softmax(&logits())?,
        target: losses::ClassTarget::new(0, c)?,
        weights: losses::ClassWeights::uniform(c),
    };
    let mut s = String::new();
    for weighting in [
        Weighting::Fixed { alpha: 10.0 },
        Weighting::Fixed { alpha: 15.0 },
        Weighting::Uncertainty(UncertaintyParams::new(1.0, 1.0)?),
    ] {
        let r = losses::loss_report(&inputs, weighting)?;
        let name = match weighting {
            Weighting::Fixed { alpha } => format!("fixed alpha={alpha}"),
            Weighting::Uncertainty(p) => format!("uncertainty s1={} s2={}", p.sigma1, p.sigma2),
        };
        let _ = writeln!(
            s,
            "{name:<28} l_wce={:.6} l_scl={:.6} l_total={:.6} dsigma=({}, {})",
            r.l_wce,
            r.l_scl,
            r.l_total,
            r.grads.sigma1.map_or("-".into(), |v| format!("{v:.6}")),
            r.grads.sigma2.map_or("-".into(), |v| format!("{v:.6}")),
        );
    }
    Ok(s)
}

pub fn cmd_loss_check(args: &LossCheckArgs) -> Result<(), CliError> {
    if args.trials == 0 || !(args.step > 0.0) || !(args.tol > 0.0) {
        return Err(CliError::Usage("--trials, --step and --tol must be positive".into()));
    }
    let cfg = GradCheckConfig {
        trials: args.trials,
        seed: args.seed,
        step: args.step,
        tolerance: args.tol,
        ..Default::default()
    };
    let report = gradcheck::run(&cfg)?;
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        _ => {
            let mut s = loss_report_text(args.seed)?;
            s.push('\n');
            let _ = writeln!(
                s,
                "{:<30} {:>7} {:>9} {:>8} {:>14}  status",
                "check", "trials", "compared", "skipped", "max_rel_err"
            );
            for r in &report.rows {
                let _ = writeln!(
                    s,
                    "{:<30} {:>7} {:>9} {:>8} {:>14.3e}  {}",
                    r.name,
                    r.trials,
                    r.compared,
                    r.skipped,
                    r.max_rel_error,
                    if r.passed { "ok" } else { "FAIL" }
                );
            }
            s
        }
    };
    emit(&None, &text)?;
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .rows
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name.as_str())
            .collect();
        Err(CliError::CheckFailed(failed.join(", ")))
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        // a second call in the same process would fail; the first pool wins
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Bench(a) => cmd_bench(a),
        Command::LossCheck(a) => cmd_loss_check(a),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
