//! Wall-clock comparison of RS, PCB-RS and FPS on downsampling cascades.
//!
//! A cascade such as `4096 -> 1024 -> 256` is executed `repeats` times per
//! method; the measured quantity is the total time of those repeats. Each
//! measurement is preceded by one discarded warm-up cascade, and the whole
//! measurement is repeated `runs` times to report a median and its spread.
//! Everything runs on the calling thread.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::grid::CylGridConfig;
use crate::sampling::{farthest_point_sample, pcb_random_sample, random_sample, Method, SampleResult};

/// A run is flagged unstable when its median absolute deviation exceeds this
/// share of the median.
pub const UNSTABLE_MAD_RATIO: f64 = 0.2;

/// Minimum untimed warm-up before each measurement.
pub const WARMUP: Duration = Duration::from_millis(20);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CascadeSpec {
    /// Point counts, strictly decreasing; the first entry is the input size.
    pub sizes: Vec<usize>,
    pub repeats: usize,
    pub methods: Vec<Method>,
    /// PCB-RS rows use PCB-RS only for the first stage and RS afterwards.
    pub pcb_first_only: bool,
}

impl CascadeSpec {
    pub fn new(sizes: Vec<usize>, repeats: usize) -> Self {
        CascadeSpec {
            sizes,
            repeats,
            methods: Method::ALL.to_vec(),
            pcb_first_only: true,
        }
    }

    /// The four cascades 4096→1024, …→256, …→64, …→16, each repeated 11 times.
    pub fn table4() -> Vec<CascadeSpec> {
        let full = [4096, 1024, 256, 64, 16];
        (2..=full.len())
            .map(|d| CascadeSpec::new(full[..d].to_vec(), 11))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < 2 {
            return Err(Error::invalid("a cascade needs at least two sizes"));
        }
        if self.sizes.windows(2).any(|w| w[1] >= w[0]) || self.sizes[self.sizes.len() - 1] == 0 {
            return Err(Error::invalid(format!(
                "cascade sizes must be strictly decreasing and positive: {:?}",
                self.sizes
            )));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be >= 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("no method to benchmark"));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        let sizes: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        format!("({})x{}", sizes.join("->"), self.repeats)
    }
}

fn stage(method: Method, cloud: &PointCloud, grid: &CylGridConfig, m: usize, seed: u64) -> Result<SampleResult> {
    match method {
        Method::Rs => random_sample(cloud.len(), m, seed),
        Method::PcbRs => pcb_random_sample(cloud, grid, m, seed),
        Method::Fps => farthest_point_sample(cloud, m, 0),
    }
}

fn cascade_once(
    spec: &CascadeSpec,
    method: Method,
    input: &PointCloud,
    grid: &CylGridConfig,
    seed: u64,
) -> Result<PointCloud> {
    let mut owned: Option<PointCloud> = None;
    for (depth, &m) in spec.sizes[1..].iter().enumerate() {
        let cur = owned.as_ref().unwrap_or(input);
        let method = if method == Method::PcbRs && spec.pcb_first_only && depth > 0 {
            Method::Rs
        } else {
            method
        };
        let picked = stage(method, cur, grid, m, seed.wrapping_add(depth as u64))?;
        owned = Some(cur.gather(&picked.indices));
    }
    Ok(owned.expect("at least one stage"))
}

/// Trims `cloud` to the cascade's input size with a seeded random subset.
/// Not part of any measured region.
pub fn prepare_input(spec: &CascadeSpec, cloud: &PointCloud, seed: u64) -> Result<PointCloud> {
    spec.validate()?;
    let n0 = spec.sizes[0];
    if cloud.len() < n0 {
        return Err(Error::invalid(format!(
            "cascade starts at {n0} points but the cloud has only {}",
            cloud.len()
        )));
    }
    if cloud.len() == n0 {
        return Ok(cloud.clone());
    }
    Ok(cloud.gather(&random_sample(cloud.len(), n0, seed)?.indices))
}

/// Total seconds to run the cascade `spec.repeats` times with `method`, after
/// discarded warm-up cascades lasting at least [`WARMUP`].
pub fn time_cascade(
    spec: &CascadeSpec,
    method: Method,
    input: &PointCloud,
    grid: &CylGridConfig,
    seed: u64,
) -> Result<f64> {
    spec.validate()?;
    if input.len() != spec.sizes[0] {
        return Err(Error::invalid("cascade input has the wrong size; see prepare_input"));
    }
    let warm = Instant::now();
    while warm.elapsed() < WARMUP {
        std::hint::black_box(cascade_once(spec, method, input, grid, seed)?);
    }
    let start = Instant::now();
    for rep in 0..spec.repeats {
        let out = cascade_once(spec, method, input, grid, seed.wrapping_add(1000 * (rep as u64 + 1)))?;
        std::hint::black_box(out);
    }
    Ok(start.elapsed().as_secs_f64())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodTiming {
    pub method: Method,
    pub runs_s: Vec<f64>,
    pub median_s: f64,
    pub mad_s: f64,
    pub unstable: bool,
}

impl MethodTiming {
    pub fn from_runs(method: Method, runs_s: Vec<f64>) -> Self {
        let median_s = median(&runs_s);
        let deviations: Vec<f64> = runs_s.iter().map(|t| (t - median_s).abs()).collect();
        let mad_s = median(&deviations);
        MethodTiming {
            method,
            runs_s,
            median_s,
            mad_s,
            unstable: mad_s > UNSTABLE_MAD_RATIO * median_s,
        }
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeTiming {
    pub label: String,
    pub spec: CascadeSpec,
    pub methods: Vec<MethodTiming>,
}

impl CascadeTiming {
    pub fn get(&self, method: Method) -> Option<&MethodTiming> {
        self.methods.iter().find(|m| m.method == method)
    }
}

/// Times every method of `spec` over `runs` independent measurements.
pub fn run_cascade(
    spec: &CascadeSpec,
    cloud: &PointCloud,
    grid: &CylGridConfig,
    seed: u64,
    runs: usize,
) -> Result<CascadeTiming> {
    let mut table = run_all(std::slice::from_ref(spec), cloud, grid, seed, runs)?;
    Ok(table.rows.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTable {
    pub rows: Vec<CascadeTiming>,
}

impl BenchTable {
    fn methods(&self) -> Vec<Method> {
        let mut out: Vec<Method> = Vec::new();
        for m in self.rows.iter().flat_map(|r| r.methods.iter().map(|t| t.method)) {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out
    }

    /// Aligned text table of median seconds; unstable cells carry a `*`.
    pub fn to_text(&self) -> String {
        let methods = self.methods();
        let width = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(0)
            .max("cascade".len());
        let mut s = format!("{:<width$}", "cascade");
        for m in &methods {
            let _ = write!(s, "  {:>12}", m.name());
        }
        s.push('\n');
        for row in &self.rows {
            let _ = write!(s, "{:<width$}", row.label);
            for m in &methods {
                let cell = row.get(*m).map_or_else(
                    || "-".to_string(),
                    |t| format!("{:.5}{}", t.median_s, if t.unstable { "*" } else { "" }),
                );
                let _ = write!(s, "  {cell:>12}");
            }
            s.push('\n');
        }
        if self.rows.iter().any(|r| r.methods.iter().any(|t| t.unstable)) {
            s.push_str("* median absolute deviation above 20% of the median\n");
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("cascade,method,repeats,runs,median_s,mad_s,unstable\n");
        for row in &self.rows {
            for t in &row.methods {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    row.label,
                    t.method.name(),
                    row.spec.repeats,
                    t.runs_s.len(),
                    t.median_s,
                    t.mad_s,
                    t.unstable
                );
            }
        }
        s
    }
}

/// Times every cascade in `specs` over `runs` independent measurements.
///
/// Measurements are taken round-robin (every cascade and method once per
/// round) so slow phases of the host hit all of them alike.
pub fn run_all(
    specs: &[CascadeSpec],
    cloud: &PointCloud,
    grid: &CylGridConfig,
    seed: u64,
    runs: usize,
) -> Result<BenchTable> {
    if runs == 0 {
        return Err(Error::invalid("runs must be >= 1"));
    }
    let inputs = specs
        .iter()
        .map(|spec| prepare_input(spec, cloud, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut times: Vec<Vec<Vec<f64>>> = specs
        .iter()
        .map(|s| vec![Vec::with_capacity(runs); s.methods.len()])
        .collect();
    for _ in 0..runs {
        for ((spec, input), per_method) in specs.iter().zip(&inputs).zip(&mut times) {
            for (&method, t) in spec.methods.iter().zip(per_method.iter_mut()) {
                t.push(time_cascade(spec, method, input, grid, seed)?);
            }
        }
    }
    let rows = specs
        .iter()
        .zip(times)
        .map(|(spec, per_method)| CascadeTiming {
            label: spec.label(),
            spec: spec.clone(),
            methods: spec
                .methods
                .iter()
                .zip(per_method)
                .map(|(&m, runs_s)| MethodTiming::from_runs(m, runs_s))
                .collect(),
        })
        .collect();
    Ok(BenchTable { rows })
}
