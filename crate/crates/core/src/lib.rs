//! Point cloud downsampling for rotating LiDAR scans.
//!
//! Three samplers share one index-based interface:
//!
//! * [`sampling::random_sample`]: uniform random subset (RS).
//! * [`sampling::pcb_random_sample`]: polar cylinder balanced random sampling
//!   (PCB-RS). Points are partitioned into cylindrical cells around the sensor,
//!   every cell receives a near-equal share of the sample budget, and cells are
//!   sampled independently. Far, sparse regions keep a larger share of their
//!   points than under RS.
//! * [`sampling::farthest_point_sample`]: greedy farthest point sampling (FPS).
//!
//! Around them sit the loss functions used to train with both samplers
//! ([`losses`], checked by [`gradcheck`]), range statistics ([`stats`]), scan
//! I/O and a synthetic scan generator ([`io`], [`synth`]) and a timing harness
//! ([`bench`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons also reject NaN

pub mod bench;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod gradcheck;
pub mod grid;
pub mod io;
pub mod losses;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{to_polar, PointCloud, PolarPoint};
pub use grid::{build_bins, BinIndexing, CylGridConfig, RhoMax};
pub use sampling::{
    allocate_quotas, farthest_point_sample, pcb_random_sample, random_sample, Method, QuotaPlan, SampleResult,
};
pub use synth::{generate_long_tail, SynthConfig};
