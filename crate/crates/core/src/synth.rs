//! Synthetic scans whose point density falls off with distance from the sensor.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_points: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    /// `k` in the radial density `p(ρ) ∝ ρ^-k`.
    pub density_exponent: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_points: 122_880,
            rho_min: 3.0,
            rho_max: 80.0,
            z_min: -3.0,
            z_max: 1.5,
            density_exponent: 2.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.rho_min,
            self.rho_max,
            self.z_min,
            self.z_max,
            self.density_exponent,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("synthetic scan parameters must be finite"));
        }
        if self.rho_min <= 0.0 || self.rho_min >= self.rho_max {
            return Err(Error::invalid(format!(
                "need 0 < rho_min < rho_max, got [{}, {}]",
                self.rho_min, self.rho_max
            )));
        }
        if self.z_min > self.z_max {
            return Err(Error::invalid("z_min must not exceed z_max"));
        }
        if self.density_exponent <= 0.0 {
            return Err(Error::invalid("density_exponent must be positive"));
        }
        Ok(())
    }

    /// Inverse CDF of the truncated power-law radius distribution.
    pub fn radius_quantile(&self, u: f64) -> f64 {
        let (a, b) = (self.rho_min, self.rho_max);
        let e = 1.0 - self.density_exponent;
        if e.abs() < 1e-12 {
            a * (b / a).powf(u)
        } else {
            let (pa, pb) = (a.powf(e), b.powf(e));
            (pa + u * (pb - pa)).powf(1.0 / e).clamp(a, b)
        }
    }
}

/// Generates `cfg.n_points` points: power-law radius, uniform azimuth in
/// `[-π, π)`, uniform height and a uniform intensity in `[0, 1)`.
pub fn generate_long_tail(cfg: &SynthConfig) -> Result<PointCloud> {
    cfg.validate()?;
    let mut rng = rng::stream(cfg.seed, rng::STREAM_SYNTH);
    let mut xyz = Vec::with_capacity(cfg.n_points);
    let mut intensity = Vec::with_capacity(cfg.n_points);
    for _ in 0..cfg.n_points {
        let rho = cfg.radius_quantile(rng.random::<f64>());
        let theta = rng.random_range(-PI..PI);
        let z = if cfg.z_min < cfg.z_max {
            rng.random_range(cfg.z_min..cfg.z_max)
        } else {
            cfg.z_min
        };
        xyz.push([rho * theta.cos(), rho * theta.sin(), z]);
        intensity.push(rng.random::<f32>());
    }
    PointCloud::new(xyz)?.with_intensity(intensity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let cfg = SynthConfig {
            n_points: 5000,
            seed: 17,
            ..Default::default()
        };
        let a = generate_long_tail(&cfg).unwrap();
        assert_eq!(a, generate_long_tail(&cfg).unwrap());
        assert_eq!(a.len(), 5000);
        for (p, r) in a.xyz().iter().zip(a.ranges()) {
            assert!(r >= cfg.rho_min - 1e-9 && r <= cfg.rho_max + 1e-9);
            assert!(p[2] >= cfg.z_min && p[2] < cfg.z_max);
        }
        let other = generate_long_tail(&SynthConfig { seed: 18, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn quantile_endpoints() {
        for k in [0.5, 1.0, 2.0, 3.5] {
            let cfg = SynthConfig {
                density_exponent: k,
                ..Default::default()
            };
            assert!((cfg.radius_quantile(0.0) - 3.0).abs() < 1e-9);
            assert!((cfg.radius_quantile(1.0) - 80.0).abs() < 1e-9);
            let mid = cfg.radius_quantile(0.5);
            assert!(mid > 3.0 && mid < 80.0);
        }
    }

    #[test]
    fn invalid_configs() {
        let base = SynthConfig::default();
        assert!(generate_long_tail(&SynthConfig { rho_min: 0.0, ..base }).is_err());
        assert!(generate_long_tail(&SynthConfig { rho_max: 2.0, ..base }).is_err());
        assert!(generate_long_tail(&SynthConfig {
            density_exponent: 0.0,
            ..base
        })
        .is_err());
        assert!(generate_long_tail(&SynthConfig { z_min: 5.0, ..base }).is_err());
    }
}
