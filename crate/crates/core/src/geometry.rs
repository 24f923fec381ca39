//! Point container and Cartesian to polar conversion.

use crate::error::{Error, Result};

/// Columnar point cloud. Coordinates are stored as `[x, y, z]` rows; optional
/// per-point attributes are kept in parallel arrays of the same length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    xyz: Vec<[f64; 3]>,
    intensity: Option<Vec<f32>>,
    labels: Option<Vec<u32>>,
}

impl PointCloud {
    /// Builds a cloud from coordinates, rejecting any non-finite value.
    pub fn new(xyz: Vec<[f64; 3]>) -> Result<Self> {
        if let Some(i) = xyz.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid(format!("point {i} has a non-finite coordinate")));
        }
        Ok(Self {
            xyz,
            intensity: None,
            labels: None,
        })
    }

    pub fn with_intensity(mut self, intensity: Vec<f32>) -> Result<Self> {
        if intensity.len() != self.len() {
            return Err(Error::invalid(format!(
                "intensity length {} does not match point count {}",
                intensity.len(),
                self.len()
            )));
        }
        if let Some(i) = intensity.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("point {i} has a non-finite intensity")));
        }
        self.intensity = Some(intensity);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::invalid(format!(
                "label count {} does not match point count {}",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.xyz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xyz.is_empty()
    }

    pub fn xyz(&self) -> &[[f64; 3]] {
        &self.xyz
    }

    pub fn intensity(&self) -> Option<&[f32]> {
        self.intensity.as_deref()
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    /// Gathers the listed points (and every attribute) into a new cloud.
    /// Indices may repeat. Panics if an index is out of range.
    pub fn gather(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            xyz: indices.iter().map(|&i| self.xyz[i]).collect(),
            intensity: self.intensity.as_ref().map(|v| indices.iter().map(|&i| v[i]).collect()),
            labels: self.labels.as_ref().map(|v| indices.iter().map(|&i| v[i]).collect()),
        }
    }

    /// Planar distance of every point to the sensor axis.
    pub fn ranges(&self) -> Vec<f64> {
        self.xyz.iter().map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt()).collect()
    }
}

/// A point in cylindrical coordinates around the sensor's vertical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    /// Planar radius `sqrt(x² + y²)`, meters.
    pub rho: f64,
    /// Azimuth `atan2(y, x)` in `[-π, π]`; the origin maps to 0.
    pub theta: f64,
    pub z: f64,
}

impl PolarPoint {
    pub fn from_cartesian(p: [f64; 3]) -> Self {
        let [x, y, z] = p;
        // Rust's atan2(0, 0) is already 0; negative zero would give ±π.
        let theta = if x == 0.0 && y == 0.0 { 0.0 } else { y.atan2(x) };
        PolarPoint {
            rho: (x * x + y * y).sqrt(),
            theta,
            z,
        }
    }

    pub fn to_cartesian(self) -> [f64; 3] {
        [self.rho * self.theta.cos(), self.rho * self.theta.sin(), self.z]
    }
}

/// Converts every point of the cloud to polar form.
pub fn to_polar(cloud: &PointCloud) -> Result<Vec<PolarPoint>> {
    cloud
        .xyz
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if p.iter().all(|v| v.is_finite()) {
                Ok(PolarPoint::from_cartesian(p))
            } else {
                Err(Error::invalid(format!("point {i} has a non-finite coordinate")))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn axis_aligned_point() {
        let p = PolarPoint::from_cartesian([1.0, 0.0, 0.5]);
        assert_eq!(
            p,
            PolarPoint {
                rho: 1.0,
                theta: 0.0,
                z: 0.5
            }
        );
    }

    #[test]
    fn origin_has_zero_azimuth() {
        for origin in [[0.0, 0.0, 0.0], [-0.0, -0.0, 0.0], [0.0, -0.0, 2.0]] {
            let p = PolarPoint::from_cartesian(origin);
            assert_eq!(p.rho, 0.0);
            assert_eq!(p.theta, 0.0);
        }
    }

    #[test]
    fn three_four_five() {
        let p = PolarPoint::from_cartesian([-3.0, 4.0, 1.0]);
        assert_eq!(p.rho, 5.0);
        // acos(-3/5) is the same angle in the upper half-plane
        assert!((p.theta - (-0.6f64).acos()).abs() < 1e-12);
        assert!((p.theta - 2.2143).abs() < 1e-4);
        assert_eq!(p.z, 1.0);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(PointCloud::new(vec![[0.0, f64::NAN, 0.0]]).is_err());
        assert!(PointCloud::new(vec![[f64::INFINITY, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn attribute_lengths_checked() {
        let c = PointCloud::new(vec![[0.0; 3]; 3]).unwrap();
        assert!(c.clone().with_labels(vec![1, 2]).is_err());
        assert!(c.clone().with_intensity(vec![0.5; 4]).is_err());
        assert!(c.with_labels(vec![1, 2, 3]).is_ok());
    }

    #[test]
    fn gather_follows_attributes() {
        let c = PointCloud::new(vec![[0.0; 3], [1.0; 3], [2.0; 3]])
            .unwrap()
            .with_intensity(vec![0.0, 0.1, 0.2])
            .unwrap()
            .with_labels(vec![7, 8, 9])
            .unwrap();
        let g = c.gather(&[2, 0, 2]);
        assert_eq!(g.xyz(), &[[2.0; 3], [0.0; 3], [2.0; 3]]);
        assert_eq!(g.intensity().unwrap(), &[0.2, 0.0, 0.2]);
        assert_eq!(g.labels().unwrap(), &[9, 7, 9]);
    }

    proptest! {
        #[test]
        fn round_trip(x in -1000.0f64..1000.0, y in -1000.0f64..1000.0, z in -1000.0f64..1000.0) {
            let back = PolarPoint::from_cartesian([x, y, z]).to_cartesian();
            prop_assert!((back[0] - x).abs() < 1e-9);
            prop_assert!((back[1] - y).abs() < 1e-9);
            prop_assert_eq!(back[2], z);
        }

        #[test]
        fn theta_in_range(x in -1e3f64..1e3, y in -1e3f64..1e3) {
            let p = PolarPoint::from_cartesian([x, y, 0.0]);
            prop_assert!(p.theta >= -std::f64::consts::PI && p.theta <= std::f64::consts::PI);
        }

        #[test]
        fn rho_monotone_under_scaling(x in -100.0f64..100.0, y in -100.0f64..100.0, s in 1.0f64..10.0) {
            let a = PolarPoint::from_cartesian([x, y, 0.0]).rho;
            let b = PolarPoint::from_cartesian([x * s, y * s, 0.0]).rho;
            prop_assert!(a <= b);
        }
    }
}
