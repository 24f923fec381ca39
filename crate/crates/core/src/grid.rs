//! Polar cylindrical partition of a point cloud.
//!
//! The ground plane around the sensor is split into `n_radial` rings of equal
//! width, `n_angular` equal azimuth sectors and `n_height` equal height slabs.
//! Rings have constant width, so a cell's footprint grows linearly with its
//! distance from the sensor.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{to_polar, PointCloud, PolarPoint};

/// Upper radial bound of the grid. Serialized as a number or the string `"max"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoMax {
    Fixed(f64),
    /// Resolved per cloud to the largest observed radius.
    DataMax,
}

impl Serialize for RhoMax {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RhoMax::Fixed(v) => s.serialize_f64(*v),
            RhoMax::DataMax => s.serialize_str("max"),
        }
    }
}

impl<'de> Deserialize<'de> for RhoMax {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(RhoMax::Fixed(v)),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl fmt::Display for RhoMax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoMax::Fixed(v) => write!(f, "{v}"),
            RhoMax::DataMax => f.write_str("max"),
        }
    }
}

impl FromStr for RhoMax {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("max") {
            return Ok(RhoMax::DataMax);
        }
        s.parse::<f64>()
            .map(RhoMax::Fixed)
            .map_err(|_| Error::invalid(format!("rho_max must be a number or \"max\", got {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylGridConfig {
    pub n_radial: usize,
    pub n_angular: usize,
    pub n_height: usize,
    pub rho_min: f64,
    pub rho_max: RhoMax,
    pub z_min: f64,
    pub z_max: f64,
    /// Discard points outside the crop box instead of clamping them to the
    /// boundary cells.
    #[serde(default)]
    pub drop_out_of_range: bool,
}

impl Default for CylGridConfig {
    fn default() -> Self {
        Self::semantic_kitti()
    }
}

impl CylGridConfig {
    /// 64×64×16 grid, ρ ∈ [3, max], z ∈ [-3.0, 1.5].
    pub fn semantic_kitti() -> Self {
        CylGridConfig {
            n_radial: 64,
            n_angular: 64,
            n_height: 16,
            rho_min: 3.0,
            rho_max: RhoMax::DataMax,
            z_min: -3.0,
            z_max: 1.5,
            drop_out_of_range: false,
        }
    }

    /// 64×64×16 grid, ρ ∈ [3, 80], z ∈ [-3.0, 3.0].
    pub fn semantic_poss() -> Self {
        CylGridConfig {
            rho_max: RhoMax::Fixed(80.0),
            z_max: 3.0,
            ..Self::semantic_kitti()
        }
    }

    /// A single cell covering everything.
    pub fn single_cell() -> Self {
        CylGridConfig {
            n_radial: 1,
            n_angular: 1,
            n_height: 1,
            ..Self::semantic_kitti()
        }
    }

    pub fn with_resolution(mut self, n_radial: usize, n_angular: usize, n_height: usize) -> Self {
        self.n_radial = n_radial;
        self.n_angular = n_angular;
        self.n_height = n_height;
        self
    }

    pub fn n_bins(&self) -> usize {
        self.n_radial * self.n_angular * self.n_height
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_radial == 0 || self.n_angular == 0 || self.n_height == 0 {
            return Err(Error::invalid(format!(
                "grid resolution must be positive, got {}x{}x{}",
                self.n_radial, self.n_angular, self.n_height
            )));
        }
        self.n_radial
            .checked_mul(self.n_angular)
            .and_then(|v| v.checked_mul(self.n_height))
            .filter(|&v| v <= u32::MAX as usize)
            .ok_or_else(|| Error::invalid("grid has too many cells"))?;
        if !self.rho_min.is_finite() || !self.z_min.is_finite() || !self.z_max.is_finite() {
            return Err(Error::invalid("grid range bounds must be finite"));
        }
        if let RhoMax::Fixed(max) = self.rho_max {
            if !max.is_finite() {
                return Err(Error::invalid("rho_max must be finite"));
            }
            if self.rho_min >= max {
                return Err(Error::invalid(format!(
                    "rho_min ({}) must be below rho_max ({max})",
                    self.rho_min
                )));
            }
        }
        if self.z_min >= self.z_max {
            return Err(Error::invalid(format!(
                "z_min ({}) must be below z_max ({})",
                self.z_min, self.z_max
            )));
        }
        Ok(())
    }

    fn resolve_rho_max(&self, points: &[PolarPoint]) -> Result<f64> {
        let max = match self.rho_max {
            RhoMax::Fixed(v) => v,
            RhoMax::DataMax => points.iter().map(|p| p.rho).fold(f64::NEG_INFINITY, f64::max),
        };
        if self.rho_min >= max {
            return Err(Error::invalid(format!(
                "rho_min ({}) must be below the resolved rho_max ({max})",
                self.rho_min
            )));
        }
        Ok(max)
    }

    /// Planar area of one cell in radial ring `ring`, given the resolved outer radius.
    pub fn cell_footprint_area(&self, ring: usize, rho_max: f64) -> f64 {
        let width = (rho_max - self.rho_min) / self.n_radial as f64;
        let inner = self.rho_min + ring as f64 * width;
        let outer = inner + width;
        0.5 * (TAU / self.n_angular as f64) * (outer * outer - inner * inner)
    }

    /// Decomposes a flat bin id into `(radial, angular, height)`.
    pub fn unflatten(&self, bin: usize) -> (usize, usize, usize) {
        let height = bin % self.n_height;
        let rest = bin / self.n_height;
        (rest / self.n_angular, rest % self.n_angular, height)
    }

    pub fn flatten(&self, radial: usize, angular: usize, height: usize) -> usize {
        (radial * self.n_angular + angular) * self.n_height + height
    }
}

impl fmt::Display for CylGridConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{}x{} rho=[{}, {}] z=[{}, {}]",
            self.n_radial, self.n_angular, self.n_height, self.rho_min, self.rho_max, self.z_min, self.z_max
        )
    }
}

/// One occupied cell; its points are `BinIndexing::members[span]`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupiedBin {
    pub bin: usize,
    pub span: Range<usize>,
}

impl OccupiedBin {
    pub fn len(&self) -> usize {
        self.span.len()
    }

    pub fn is_empty(&self) -> bool {
        self.span.is_empty()
    }
}

/// Result of assigning every point to a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BinIndexing {
    /// Flat bin id per point; `None` only for points dropped by the crop box.
    pub bin_of_point: Vec<Option<usize>>,
    /// Occupied bins in ascending id order.
    pub occupied: Vec<OccupiedBin>,
    /// Assigned point indices grouped by bin.
    pub members: Vec<usize>,
    /// Outer radius the grid was built with.
    pub rho_max: f64,
}

impl BinIndexing {
    /// Number of occupied bins (K).
    pub fn n_occupied(&self) -> usize {
        self.occupied.len()
    }

    /// Points of the `k`-th occupied bin, ascending.
    pub fn points(&self, k: usize) -> &[usize] {
        &self.members[self.occupied[k].span.clone()]
    }

    pub fn counts(&self) -> Vec<usize> {
        self.occupied.iter().map(OccupiedBin::len).collect()
    }

    pub fn n_assigned(&self) -> usize {
        self.members.len()
    }
}

fn cell(value: f64, lo: f64, width: f64, n: usize) -> usize {
    let idx = ((value - lo) / width).floor();
    if idx <= 0.0 {
        0
    } else {
        (idx as usize).min(n - 1)
    }
}

/// Partitions `cloud` into polar cylindrical cells.
pub fn build_bins(cloud: &PointCloud, cfg: &CylGridConfig) -> Result<BinIndexing> {
    if cloud.is_empty() {
        return Err(Error::invalid("cannot partition an empty cloud"));
    }
    build_bins_polar(&to_polar(cloud)?, cfg)
}

/// Same as [`build_bins`] over points already converted to polar form.
pub fn build_bins_polar(points: &[PolarPoint], cfg: &CylGridConfig) -> Result<BinIndexing> {
    if points.is_empty() {
        return Err(Error::invalid("cannot partition an empty cloud"));
    }
    cfg.validate()?;
    let rho_max = cfg.resolve_rho_max(points)?;
    let d_rho = (rho_max - cfg.rho_min) / cfg.n_radial as f64;
    let d_theta = TAU / cfg.n_angular as f64;
    let d_z = (cfg.z_max - cfg.z_min) / cfg.n_height as f64;

    let bin_of_point: Vec<Option<usize>> = points
        .iter()
        .map(|p| {
            if cfg.drop_out_of_range && (p.rho < cfg.rho_min || p.rho > rho_max || p.z < cfg.z_min || p.z > cfg.z_max) {
                return None;
            }
            let radial = cell(p.rho, cfg.rho_min, d_rho, cfg.n_radial);
            // θ = π lands on index P and wraps into the last sector
            let angular = cell(p.theta, -PI, d_theta, cfg.n_angular);
            let height = cell(p.z, cfg.z_min, d_z, cfg.n_height);
            Some(cfg.flatten(radial, angular, height))
        })
        .collect();

    // counting sort keeps point indices ascending within each bin
    let mut start = vec![0u32; cfg.n_bins() + 1];
    for &b in bin_of_point.iter().flatten() {
        start[b + 1] += 1;
    }
    let mut occupied = Vec::new();
    for bin in 0..cfg.n_bins() {
        let count = start[bin + 1];
        start[bin + 1] += start[bin];
        if count > 0 {
            occupied.push(OccupiedBin {
                bin,
                span: start[bin] as usize..start[bin + 1] as usize,
            });
        }
    }
    let mut members = vec![0usize; start[cfg.n_bins()] as usize];
    for (i, b) in bin_of_point.iter().enumerate() {
        if let Some(b) = *b {
            members[start[b] as usize] = i;
            start[b] += 1;
        }
    }
    if occupied.is_empty() {
        return Err(Error::invalid("no point lies inside the grid's crop range"));
    }

    Ok(BinIndexing {
        bin_of_point,
        occupied,
        members,
        rho_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring_cloud(rhos: &[f64]) -> PointCloud {
        PointCloud::new(rhos.iter().map(|&r| [r, 0.0, 0.0]).collect()).unwrap()
    }

    #[test]
    fn single_cell_holds_everything() {
        let cloud = PointCloud::new(vec![[1.0, 2.0, 3.0], [-50.0, 0.1, -9.0], [0.0, 0.0, 0.0]]).unwrap();
        let bins = build_bins(&cloud, &CylGridConfig::single_cell()).unwrap();
        assert_eq!(bins.n_occupied(), 1);
        assert_eq!(bins.occupied[0].bin, 0);
        assert_eq!(bins.points(0), &[0, 1, 2]);
    }

    #[test]
    fn four_point_radial_example() {
        let cfg = CylGridConfig {
            rho_max: RhoMax::Fixed(43.0),
            ..CylGridConfig::single_cell().with_resolution(4, 1, 1)
        };
        let bins = build_bins(&ring_cloud(&[3.0, 10.0, 20.0, 40.0]), &cfg).unwrap();
        assert_eq!(bins.bin_of_point, vec![Some(0), Some(0), Some(1), Some(3)]);
        assert_eq!(bins.n_occupied(), 3);
    }

    #[test]
    fn kitti_preset_values() {
        let cfg = CylGridConfig::semantic_kitti();
        assert_eq!((cfg.n_radial, cfg.n_angular, cfg.n_height), (64, 64, 16));
        assert_eq!(cfg.rho_min, 3.0);
        assert_eq!(cfg.rho_max, RhoMax::DataMax);
        assert_eq!((cfg.z_min, cfg.z_max), (-3.0, 1.5));
        let poss = CylGridConfig::semantic_poss();
        assert_eq!(poss.rho_max, RhoMax::Fixed(80.0));
        assert_eq!((poss.z_min, poss.z_max), (-3.0, 3.0));
    }

    #[test]
    fn data_max_resolves_to_cloud() {
        let cfg = CylGridConfig::semantic_kitti().with_resolution(4, 1, 1);
        let bins = build_bins(&ring_cloud(&[3.0, 5.0, 11.0]), &cfg).unwrap();
        assert_eq!(bins.rho_max, 11.0);
        // 11 is exactly the outer edge and clamps into the last ring
        assert_eq!(bins.bin_of_point[2], Some(3));
    }

    #[test]
    fn azimuth_pi_wraps_into_last_sector() {
        let cfg = CylGridConfig::single_cell().with_resolution(1, 8, 1);
        let cloud = PointCloud::new(vec![[-5.0, 0.0, 0.0], [-5.0, -1e-12, 0.0], [5.0, 0.0, 0.0]]).unwrap();
        let bins = build_bins(&cloud, &cfg).unwrap();
        assert_eq!(bins.bin_of_point[0], Some(7));
        assert_eq!(bins.bin_of_point[1], Some(0));
        assert_eq!(bins.bin_of_point[2], Some(4));
    }

    #[test]
    fn out_of_range_clamped_by_default() {
        let cfg = CylGridConfig {
            rho_max: RhoMax::Fixed(10.0),
            ..CylGridConfig::semantic_kitti().with_resolution(2, 1, 2)
        };
        let cloud = PointCloud::new(vec![[1.0, 0.0, -10.0], [50.0, 0.0, 10.0]]).unwrap();
        let bins = build_bins(&cloud, &cfg).unwrap();
        assert_eq!(
            bins.bin_of_point,
            vec![Some(cfg.flatten(0, 0, 0)), Some(cfg.flatten(1, 0, 1))]
        );

        let dropping = CylGridConfig {
            drop_out_of_range: true,
            ..cfg
        };
        let cloud = PointCloud::new(vec![[1.0, 0.0, 0.0], [5.0, 0.0, 0.0], [50.0, 0.0, 0.0]]).unwrap();
        let bins = build_bins(&cloud, &dropping).unwrap();
        assert_eq!(bins.bin_of_point, vec![None, Some(cfg.flatten(0, 0, 1)), None]);
        assert_eq!(bins.n_assigned(), 1);
    }

    #[test]
    fn errors() {
        assert!(build_bins(&PointCloud::default(), &CylGridConfig::default()).is_err());
        let cfg = CylGridConfig::semantic_kitti();
        // every point closer than rho_min: resolved max (2) is below rho_min (3)
        assert!(build_bins(&ring_cloud(&[1.0, 2.0]), &cfg).is_err());
        let bad = CylGridConfig::semantic_kitti().with_resolution(0, 4, 4);
        assert!(build_bins(&ring_cloud(&[5.0]), &bad).is_err());
        let bad = CylGridConfig {
            z_min: 2.0,
            z_max: 1.0,
            ..CylGridConfig::semantic_kitti()
        };
        assert!(build_bins(&ring_cloud(&[5.0]), &bad).is_err());
    }

    #[test]
    fn cells_grow_with_distance() {
        let cfg = CylGridConfig::semantic_poss();
        for ring in 0..cfg.n_radial - 1 {
            assert!(cfg.cell_footprint_area(ring + 1, 80.0) > cfg.cell_footprint_area(ring, 80.0));
        }
    }

    #[test]
    fn rho_max_parse_and_serde() {
        assert_eq!("max".parse::<RhoMax>().unwrap(), RhoMax::DataMax);
        assert_eq!("80".parse::<RhoMax>().unwrap(), RhoMax::Fixed(80.0));
        assert!("far".parse::<RhoMax>().is_err());
        let cfg = CylGridConfig::semantic_kitti();
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"rho_max\":\"max\""));
        assert_eq!(serde_json::from_str::<CylGridConfig>(&json).unwrap(), cfg);
        let poss = CylGridConfig::semantic_poss();
        let back: CylGridConfig = serde_json::from_str(&serde_json::to_string(&poss).unwrap()).unwrap();
        assert_eq!(back, poss);
    }

    fn arb_cloud() -> impl Strategy<Value = PointCloud> {
        prop::collection::vec((-80.0f64..80.0, -80.0f64..80.0, -5.0f64..3.0), 1..300)
            .prop_map(|v| PointCloud::new(v.into_iter().map(|(x, y, z)| [x, y, z]).collect()).unwrap())
    }

    fn arb_cfg() -> impl Strategy<Value = CylGridConfig> {
        (1usize..12, 1usize..12, 1usize..6, prop::bool::ANY).prop_map(|(r, p, z, fixed)| CylGridConfig {
            rho_min: 0.0,
            rho_max: if fixed { RhoMax::Fixed(60.0) } else { RhoMax::DataMax },
            ..CylGridConfig::semantic_kitti().with_resolution(r, p, z)
        })
    }

    proptest! {
        #[test]
        fn partition_is_exact(cloud in arb_cloud(), cfg in arb_cfg()) {
            let bins = build_bins(&cloud, &cfg).unwrap();
            let mut all: Vec<usize> = bins.members.clone();
            prop_assert_eq!(all.len(), cloud.len());
            all.sort_unstable();
            prop_assert!(all.iter().copied().eq(0..cloud.len()));
            let mut distinct: Vec<usize> = bins.bin_of_point.iter().map(|b| b.unwrap()).collect();
            distinct.sort_unstable();
            distinct.dedup();
            prop_assert_eq!(distinct.len(), bins.n_occupied());
            for (k, b) in bins.occupied.iter().enumerate() {
                prop_assert!(b.bin < cfg.n_bins());
                prop_assert!(bins.points(k).windows(2).all(|w| w[0] < w[1]));
                for &i in bins.points(k) {
                    prop_assert_eq!(bins.bin_of_point[i], Some(b.bin));
                }
            }
        }

        #[test]
        fn radial_monotone(cloud in arb_cloud(), cfg in arb_cfg()) {
            let bins = build_bins(&cloud, &cfg).unwrap();
            let polar = to_polar(&cloud).unwrap();
            for i in 0..cloud.len() {
                for j in 0..cloud.len() {
                    let (ri, ai, hi) = cfg.unflatten(bins.bin_of_point[i].unwrap());
                    let (rj, aj, hj) = cfg.unflatten(bins.bin_of_point[j].unwrap());
                    if ai == aj && hi == hj && polar[i].rho <= polar[j].rho {
                        prop_assert!(ri <= rj);
                    }
                }
            }
        }
    }
}
