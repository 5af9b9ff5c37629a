use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluation points for transform comparisons.
///
/// Half-line grids live in `(−1, 0)`; disk grids are complex points of
/// modulus at most `r < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    HalfLine { points: Vec<f64> },
    Disk { points: Vec<Complex64>, radius: f64 },
}

pub const DEFAULT_GRID_POINTS: usize = 16;

impl GridSpec {
    pub fn half_line(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("grid is empty".into()));
        }
        if let Some(z) = points.iter().find(|z| !(**z > -1.0 && **z < 0.0)) {
            return Err(Error::Domain(format!("grid point {z} is outside (-1, 0)")));
        }
        Ok(GridSpec::HalfLine { points })
    }

    /// `m` equally spaced points in `[−a, −b]`, `0 < b < a < 1`.
    pub fn linspace(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(0.0 < b && b < a && a < 1.0) || m == 0 {
            return Err(Error::Domain(format!("bad grid interval [-{a}, -{b}] with {m} points")));
        }
        let pts = if m == 1 {
            vec![-(a + b) / 2.0]
        } else {
            (0..m)
                .map(|i| -a + (a - b) * i as f64 / (m - 1) as f64)
                .collect()
        };
        Self::half_line(pts)
    }

    /// 16 points in `[−0.45, −0.05]`.
    pub fn default_half_line() -> Self {
        Self::with_points(DEFAULT_GRID_POINTS).expect("default grid is valid")
    }

    /// `m` points over the default interval.
    pub fn with_points(m: usize) -> Result<Self> {
        Self::linspace(0.45, 0.05, m)
    }

    pub fn disk(points: Vec<Complex64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::Domain(format!("disk radius {radius} must lie in (0, 1)")));
        }
        if let Some(z) = points.iter().find(|z| z.norm() > radius) {
            return Err(Error::Domain(format!("grid point {z} exceeds radius {radius}")));
        }
        Ok(GridSpec::Disk { points, radius })
    }

    /// Points on concentric circles of radii `r·j/rings`, `j = 0..=rings`.
    pub fn polar_disk(radius: f64, rings: usize, spokes: usize) -> Result<Self> {
        let mut pts = vec![Complex64::new(0.0, 0.0)];
        for j in 1..=rings {
            let r = radius * j as f64 / rings as f64;
            for k in 0..spokes {
                let a = 2.0 * std::f64::consts::PI * k as f64 / spokes as f64;
                pts.push(Complex64::from_polar(r, a));
            }
        }
        Self::disk(pts, radius)
    }

    pub fn real_points(&self) -> Result<&[f64]> {
        match self {
            GridSpec::HalfLine { points } => Ok(points),
            GridSpec::Disk { .. } => Err(Error::Domain("expected a half-line grid".into())),
        }
    }

    pub fn complex_points(&self) -> Vec<Complex64> {
        match self {
            GridSpec::HalfLine { points } => points.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            GridSpec::Disk { points, .. } => points.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            GridSpec::HalfLine { points } => points.len(),
            GridSpec::Disk { points, .. } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let g = GridSpec::default_half_line();
        let p = g.real_points().unwrap();
        assert_eq!(p.len(), 16);
        assert!((p[0] + 0.45).abs() < 1e-15 && (p[15] + 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(GridSpec::half_line(vec![-0.5, 0.1]).is_err());
        assert!(GridSpec::half_line(vec![-1.0]).is_err());
        assert!(GridSpec::linspace(0.2, 0.3, 4).is_err());
        assert!(GridSpec::disk(vec![Complex64::new(0.3, 0.0)], 0.25).is_err());
        assert_eq!(GridSpec::polar_disk(0.25, 2, 8).unwrap().len(), 17);
    }
}
