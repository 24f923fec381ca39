//! Random sampling (RS), polar cylinder balanced random sampling (PCB-RS) and
//! farthest point sampling (FPS).
//!
//! All three return indices into the source cloud so that labels, intensity
//! and any other per-point attribute can be gathered alongside the points.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::grid::{build_bins, BinIndexing, CylGridConfig};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "rs")]
    Rs,
    #[serde(rename = "pcb-rs")]
    PcbRs,
    #[serde(rename = "fps")]
    Fps,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Rs, Method::PcbRs, Method::Fps];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rs => "RS",
            Method::PcbRs => "PCB-RS",
            Method::Fps => "FPS",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "rs" => Ok(Method::Rs),
            "pcb-rs" | "pcbrs" | "pcb" => Ok(Method::PcbRs),
            "fps" => Ok(Method::Fps),
            _ => Err(Error::invalid(format!("unknown sampling method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleResult {
    pub indices: Vec<usize>,
    pub method: Method,
    /// Seed the result was drawn with. FPS is deterministic and records its
    /// start index here instead.
    pub seed: u64,
    /// True iff some index appears more than once.
    pub duplicated: bool,
}

impl SampleResult {
    fn new(indices: Vec<usize>, method: Method, seed: u64, n_points: usize) -> Self {
        let duplicated = if indices.len() > n_points {
            true
        } else {
            let mut seen = vec![false; n_points];
            indices.iter().any(|&i| std::mem::replace(&mut seen[i], true))
        };
        SampleResult {
            indices,
            method,
            seed,
            duplicated,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Shuffle the point indices and keep the first `m`. When `n_points < m` every
/// point is kept once and the remainder is drawn uniformly with replacement.
pub fn random_sample(n_points: usize, m: usize, seed: u64) -> Result<SampleResult> {
    if n_points == 0 || m == 0 {
        return Err(Error::invalid(format!(
            "random sampling needs n >= 1 and m >= 1, got n={n_points}, m={m}"
        )));
    }
    let mut rng = rng::stream(seed, rng::STREAM_RS);
    let mut indices: Vec<usize> = (0..n_points).collect();
    rng::partial_shuffle(&mut indices, m, &mut rng);
    if m <= n_points {
        indices.truncate(m);
    } else {
        indices.extend((n_points..m).map(|_| rng.random_range(0..n_points)));
    }
    Ok(SampleResult::new(indices, Method::Rs, seed, n_points))
}

/// Per-bin sample counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotaPlan {
    /// `(bin id, quota)` for every bin handed to the allocator.
    pub per_bin: Vec<(usize, usize)>,
    /// Points available in each bin, aligned with `per_bin`.
    pub capacities: Vec<usize>,
}

impl QuotaPlan {
    pub fn quotas(&self) -> impl Iterator<Item = usize> + '_ {
        self.per_bin.iter().map(|&(_, q)| q)
    }

    pub fn total(&self) -> usize {
        self.quotas().sum()
    }

    /// Samples that have to be drawn with replacement because the bins hold
    /// fewer points than requested.
    pub fn shortfall(&self) -> usize {
        self.per_bin
            .iter()
            .zip(&self.capacities)
            .map(|(&(_, q), &c)| q.saturating_sub(c))
            .sum()
    }
}

/// Water-filling allocation of `m` samples over bins holding `counts[i]` points.
///
/// A common level `L` is raised until `Σ min(counts[i], L)` reaches `m`; the
/// remaining `r` samples go one each to the first `r` bins (by position) that
/// still have spare points. Bin ids in the plan are positions in `counts`.
///
/// If the bins hold fewer than `m` points in total, every bin is taken whole
/// and the shortfall is spread the same way (level first, then lowest
/// positions) over non-empty bins as extra quota to be drawn with replacement.
pub fn allocate_quotas(counts: &[usize], m: usize) -> Result<QuotaPlan> {
    if counts.is_empty() {
        return Err(Error::invalid("quota allocation needs at least one bin"));
    }
    if m == 0 {
        return Err(Error::invalid("quota allocation needs m >= 1"));
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::invalid("all bins are empty"));
    }

    let quotas = if total >= m {
        water_fill(counts, m)
    } else {
        let nonempty: Vec<usize> = counts.iter().map(|&c| if c > 0 { usize::MAX } else { 0 }).collect();
        let extra = water_fill(&nonempty, m - total);
        counts.iter().zip(extra).map(|(&c, e)| c + e).collect()
    };

    Ok(QuotaPlan {
        per_bin: quotas.into_iter().enumerate().collect(),
        capacities: counts.to_vec(),
    })
}

/// Requires `Σ caps ≥ m`.
fn water_fill(caps: &[usize], m: usize) -> Vec<usize> {
    let mut sorted = caps.to_vec();
    sorted.sort_unstable();
    let k = sorted.len();
    let mut level = 0usize;
    let mut rem = m;
    for (j, &cap) in sorted.iter().enumerate() {
        let active = k - j;
        let cost = (cap - level).saturating_mul(active);
        if cost <= rem {
            rem -= cost;
            level = cap;
        } else {
            level += rem / active;
            rem %= active;
            break;
        }
    }
    caps.iter()
        .map(|&cap| {
            if cap > level && rem > 0 {
                rem -= 1;
                level + 1
            } else {
                cap.min(level)
            }
        })
        .collect()
}

/// Seeded order in which PCB-RS presents its occupied bins to
/// [`allocate_quotas`]; entry `j` is the position (in ascending-bin order) of
/// the `j`-th bin handed over.
///
/// When there are more occupied bins than remaining samples, the allocator's
/// positional tie-break decides which bins receive the extra point. A random
/// order keeps that choice unbiased in space; ascending flat ids would hand it
/// to the innermost rings.
pub fn remainder_order(k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..k).collect();
    rng::shuffle(&mut order, &mut rng::stream(seed, rng::STREAM_PCB_ORDER));
    order
}

/// Quota plan PCB-RS uses for a given partition, with flat bin ids and in
/// ascending bin order.
pub fn pcb_quota_plan(bins: &BinIndexing, m: usize, seed: u64) -> Result<QuotaPlan> {
    let order = remainder_order(bins.n_occupied(), seed);
    let counts: Vec<usize> = order.iter().map(|&k| bins.occupied[k].len()).collect();
    let plan = allocate_quotas(&counts, m)?;
    let mut quotas = vec![0; bins.n_occupied()];
    for (&k, (_, q)) in order.iter().zip(plan.per_bin) {
        quotas[k] = q;
    }
    Ok(QuotaPlan {
        per_bin: bins.occupied.iter().map(|b| b.bin).zip(quotas).collect(),
        capacities: bins.counts(),
    })
}

/// PCB-RS: partition into polar cylindrical cells, allocate balanced
/// per-cell quotas, randomly sample inside each cell and shuffle the union.
pub fn pcb_random_sample(cloud: &PointCloud, cfg: &CylGridConfig, m: usize, seed: u64) -> Result<SampleResult> {
    let bins = build_bins(cloud, cfg)?;
    pcb_random_sample_binned(&bins, m, seed)
}

/// PCB-RS over an existing partition.
pub fn pcb_random_sample_binned(bins: &BinIndexing, m: usize, seed: u64) -> Result<SampleResult> {
    if m == 0 {
        return Err(Error::invalid("PCB-RS needs m >= 1"));
    }
    let plan = pcb_quota_plan(bins, m, seed)?;
    let mut indices = Vec::with_capacity(m);
    let mut scratch = Vec::new();
    for (k, &(id, quota)) in plan.per_bin.iter().enumerate() {
        if quota == 0 {
            continue;
        }
        let mut rng = rng::stream(seed, rng::STREAM_BIN_BASE + id as u64);
        let points = bins.points(k);
        let n = points.len();
        let take = quota.min(n);
        scratch.clear();
        scratch.extend_from_slice(points);
        rng::partial_shuffle(&mut scratch, take, &mut rng);
        indices.extend_from_slice(&scratch[..take]);
        indices.extend((take..quota).map(|_| points[rng.random_range(0..n)]));
    }
    rng::shuffle(&mut indices, &mut rng::stream(seed, rng::STREAM_PCB_SHUFFLE));
    Ok(SampleResult::new(indices, Method::PcbRs, seed, bins.bin_of_point.len()))
}

/// Selected indices together with each pick's distance to the nearest point
/// selected before it (infinite for the start point).
#[derive(Debug, Clone, PartialEq)]
pub struct FpsTrace {
    pub indices: Vec<usize>,
    pub min_distances: Vec<f64>,
}

fn squared_distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Greedy farthest point sampling in O(N·M), ties broken by smallest index.
pub fn farthest_point_trace(cloud: &PointCloud, m: usize, start_index: usize) -> Result<FpsTrace> {
    let n = cloud.len();
    if n == 0 {
        return Err(Error::invalid("FPS needs a non-empty cloud"));
    }
    if m == 0 || m > n {
        return Err(Error::invalid(format!("FPS needs 1 <= m <= N, got m={m}, N={n}")));
    }
    if start_index >= n {
        return Err(Error::invalid(format!(
            "FPS start index {start_index} out of range for N={n}"
        )));
    }
    let pts = cloud.xyz();
    // nearest selected squared distance; -inf marks already selected points
    let mut nearest = vec![f64::INFINITY; n];
    let mut indices = Vec::with_capacity(m);
    let mut min_distances = Vec::with_capacity(m);
    let mut current = start_index;
    let mut current_d = f64::INFINITY;
    loop {
        indices.push(current);
        min_distances.push(current_d.sqrt());
        nearest[current] = f64::NEG_INFINITY;
        if indices.len() == m {
            break;
        }
        let anchor = &pts[current];
        let mut best = usize::MAX;
        let mut best_d = f64::NEG_INFINITY;
        for (i, (d, p)) in nearest.iter_mut().zip(pts).enumerate() {
            if *d == f64::NEG_INFINITY {
                continue;
            }
            let nd = squared_distance(anchor, p);
            if nd < *d {
                *d = nd;
            }
            if *d > best_d {
                best_d = *d;
                best = i;
            }
        }
        current = best;
        current_d = best_d;
    }
    Ok(FpsTrace { indices, min_distances })
}

pub fn farthest_point_sample(cloud: &PointCloud, m: usize, start_index: usize) -> Result<SampleResult> {
    let trace = farthest_point_trace(cloud, m, start_index)?;
    Ok(SampleResult::new(
        trace.indices,
        Method::Fps,
        start_index as u64,
        cloud.len(),
    ))
}

/// Dispatches on `method`. FPS ignores `seed` and starts from `start_index`.
pub fn sample(
    method: Method,
    cloud: &PointCloud,
    cfg: &CylGridConfig,
    m: usize,
    seed: u64,
    start_index: usize,
) -> Result<SampleResult> {
    match method {
        Method::Rs => random_sample(cloud.len(), m, seed),
        Method::PcbRs => pcb_random_sample(cloud, cfg, m, seed),
        Method::Fps => farthest_point_sample(cloud, m, start_index),
    }
}
