//! Distance distributions and per-cell uniformity of sampled clouds.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::grid::{build_bins, BinIndexing, CylGridConfig};
use crate::sampling::{pcb_random_sample_binned, random_sample, Method, SampleResult};

/// Range band boundaries in meters; the last band is open-ended.
pub const DEFAULT_EDGES: [f64; 6] = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0];

/// Point counts per planar-distance band. Bands are `[edges[i], edges[i+1])`;
/// the last upper edge is `+∞`. Points closer than the first edge are counted
/// in the first band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub fractions: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct HistogramRow {
    pub band_lo_m: f64,
    /// `None` for the open-ended last band.
    pub band_hi_m: Option<f64>,
    pub count: u64,
    pub fraction: f64,
}

/// Validates user edges and appends `+∞` when the list ends finite.
pub fn normalize_edges(edges: &[f64]) -> Result<Vec<f64>> {
    if edges.is_empty() {
        return Err(Error::invalid("at least one band edge is required"));
    }
    if edges[0].is_nan() || edges[0] < 0.0 || edges[0].is_infinite() {
        return Err(Error::invalid("the first band edge must be finite and >= 0"));
    }
    if edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid(format!(
            "band edges must be strictly increasing: {edges:?}"
        )));
    }
    let mut out = edges.to_vec();
    if out.last().is_some_and(|e| e.is_finite()) {
        out.push(f64::INFINITY);
    }
    if out.len() < 2 {
        return Err(Error::invalid("band edges define no band"));
    }
    Ok(out)
}

impl RangeHistogram {
    pub fn from_ranges(ranges: impl IntoIterator<Item = f64>, edges: &[f64]) -> Result<Self> {
        let edges = normalize_edges(edges)?;
        let mut counts = vec![0u64; edges.len() - 1];
        for r in ranges {
            // edges[1..] is sorted: the band is the number of upper edges <= r
            let band = edges[1..].partition_point(|&e| e <= r).min(counts.len() - 1);
            counts[band] += 1;
        }
        Ok(Self::from_counts(edges, counts))
    }

    fn from_counts(edges: Vec<f64>, counts: Vec<u64>) -> Self {
        let total: u64 = counts.iter().sum();
        let fractions = counts
            .iter()
            .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
            .collect();
        RangeHistogram {
            edges,
            counts,
            fractions,
        }
    }

    pub fn n_bands(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn rows(&self) -> Vec<HistogramRow> {
        (0..self.n_bands())
            .map(|i| HistogramRow {
                band_lo_m: self.edges[i],
                band_hi_m: Some(self.edges[i + 1]).filter(|e| e.is_finite()),
                count: self.counts[i],
                fraction: self.fractions[i],
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("band_lo_m,band_hi_m,count,fraction\n");
        for r in self.rows() {
            let hi = r.band_hi_m.map_or_else(|| "inf".to_string(), |v| v.to_string());
            s.push_str(&format!("{},{},{},{}\n", r.band_lo_m, hi, r.count, r.fraction));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows()).expect("rows serialize")
    }
}

/// Histogram of planar distance over the whole cloud.
pub fn distance_histogram(cloud: &PointCloud, edges: &[f64]) -> Result<RangeHistogram> {
    RangeHistogram::from_ranges(cloud.ranges(), edges)
}

/// Histogram of planar distance over the sampled points (duplicates counted).
pub fn sample_histogram(ranges: &[f64], sample: &SampleResult, edges: &[f64]) -> Result<RangeHistogram> {
    RangeHistogram::from_ranges(sample.indices.iter().map(|&i| ranges[i]), edges)
}

/// Coefficient of variation (population std / mean) of sampled-point counts
/// over the bins occupied in the source cloud.
pub fn cv_bins(bins: &BinIndexing, sample: &SampleResult) -> f64 {
    let mut slot = std::collections::HashMap::with_capacity(bins.n_occupied());
    for (k, b) in bins.occupied.iter().enumerate() {
        slot.insert(b.bin, k);
    }
    let mut counts = vec![0f64; bins.n_occupied()];
    for &i in &sample.indices {
        if let Some(b) = bins.bin_of_point[i] {
            counts[slot[&b]] += 1.0;
        }
    }
    coefficient_of_variation(&counts)
}

pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Share of the source points beyond `threshold_m` that survive sampling.
pub fn retained_fraction(ranges: &[f64], sample: &SampleResult, threshold_m: f64) -> f64 {
    let source = ranges.iter().filter(|&&r| r > threshold_m).count();
    if source == 0 {
        return 0.0;
    }
    let kept = sample.indices.iter().filter(|&&i| ranges[i] > threshold_m).count();
    kept as f64 / source as f64
}

/// Pearson statistic of observed counts against expected fractions. Bands with
/// zero expectation are skipped.
pub fn chi_square(observed: &[u64], expected_fractions: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(expected_fractions)
        .filter(|(_, &f)| f > 0.0)
        .map(|(&o, &f)| {
            let e = f * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedUniformity {
    pub seed: u64,
    pub cv_bins: f64,
    pub histogram: RangeHistogram,
}

/// Uniformity of one sampling method averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityReport {
    pub method: Method,
    pub cv_bins: f64,
    pub edges: Vec<f64>,
    pub mean_counts: Vec<f64>,
    pub band_fractions: Vec<f64>,
    pub per_seed: Vec<SeedUniformity>,
}

impl UniformityReport {
    fn from_seeds(method: Method, per_seed: Vec<SeedUniformity>) -> Self {
        let n = per_seed.len() as f64;
        let bands = per_seed[0].histogram.n_bands();
        let mut mean_counts = vec![0.0; bands];
        let mut band_fractions = vec![0.0; bands];
        for s in &per_seed {
            for b in 0..bands {
                mean_counts[b] += s.histogram.counts[b] as f64 / n;
                band_fractions[b] += s.histogram.fractions[b] / n;
            }
        }
        UniformityReport {
            method,
            cv_bins: per_seed.iter().map(|s| s.cv_bins).sum::<f64>() / n,
            edges: per_seed[0].histogram.edges.clone(),
            mean_counts,
            band_fractions,
            per_seed,
        }
    }

    /// Largest over smallest non-zero band fraction; 1 means perfectly flat.
    pub fn max_min_ratio(&self) -> f64 {
        let nonzero = self.band_fractions.iter().copied().filter(|&f| f > 0.0);
        let (lo, hi) = nonzero.fold((f64::INFINITY, 0.0f64), |(lo, hi), f| (lo.min(f), hi.max(f)));
        hi / lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodComparison {
    pub m: usize,
    pub grid: CylGridConfig,
    pub source: RangeHistogram,
    pub rs: UniformityReport,
    pub pcb_rs: UniformityReport,
}

/// Samples `cloud` with RS and PCB-RS once per seed and reports per-band
/// fractions and bin uniformity for both. Seeds run in parallel.
pub fn compare_methods(
    cloud: &PointCloud,
    cfg: &CylGridConfig,
    m: usize,
    seeds: &[u64],
    edges: &[f64],
) -> Result<MethodComparison> {
    if seeds.is_empty() {
        return Err(Error::invalid("at least one seed is required"));
    }
    let edges = normalize_edges(edges)?;
    let bins = build_bins(cloud, cfg)?;
    let ranges = cloud.ranges();
    let run = |method: Method| -> Result<UniformityReport> {
        let per_seed = seeds
            .par_iter()
            .map(|&seed| {
                let sample = match method {
                    Method::PcbRs => pcb_random_sample_binned(&bins, m, seed)?,
                    _ => random_sample(cloud.len(), m, seed)?,
                };
                Ok(SeedUniformity {
                    seed,
                    cv_bins: cv_bins(&bins, &sample),
                    histogram: sample_histogram(&ranges, &sample, &edges)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(UniformityReport::from_seeds(method, per_seed))
    };
    Ok(MethodComparison {
        m,
        grid: *cfg,
        source: RangeHistogram::from_ranges(ranges.iter().copied(), &edges)?,
        rs: run(Method::Rs)?,
        pcb_rs: run(Method::PcbRs)?,
    })
}
