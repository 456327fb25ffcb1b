//! Volumes of unit balls and unit spheres.

use std::f64::consts::PI;

/// `v_p` and `sigma_p` for one dimension `p`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DimensionalConstants {
    pub p: usize,
    /// Volume of the p-dimensional unit sphere `S^p`.
    pub sigma_p: f64,
    /// Volume of the p-dimensional unit ball.
    pub v_p: f64,
}

impl DimensionalConstants {
    pub fn new(p: usize) -> Self {
        Self { p, sigma_p: sphere_volume(p), v_p: ball_volume(p) }
    }

    /// `v_p * sigma_p - 2 (2 pi)^p / p!`, which vanishes identically.
    pub fn identity_residual(&self) -> f64 {
        let rhs = 2.0 * (2.0 * PI).powi(self.p as i32) / factorial(self.p);
        self.v_p * self.sigma_p - rhs
    }
}

/// Volume of the unit ball in R^p, via v_p = (2 pi / p) v_{p-2}.
pub fn ball_volume(p: usize) -> f64 {
    match p {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / p as f64 * ball_volume(p - 2),
    }
}

/// Volume of the unit sphere S^p in R^{p+1}; sigma_p = (p + 1) v_{p+1}.
pub fn sphere_volume(p: usize) -> f64 {
    (p + 1) as f64 * ball_volume(p + 1)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Constant gauge on Gr(1, R^m) whose cosine transform is 1: sigma_{m-1} / (2 v_{m-1}).
pub fn unit_cosine_preimage(m: usize) -> f64 {
    assert!(m >= 1);
    sphere_volume(m - 1) / (2.0 * ball_volume(m - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert!((ball_volume(2) - PI).abs() < 1e-15);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((sphere_volume(1) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert_eq!(sphere_volume(0), 2.0);
    }

    #[test]
    fn unit_preimage_matches_low_dimensions() {
        assert_eq!(unit_cosine_preimage(1), 1.0);
        assert!((unit_cosine_preimage(2) - PI / 2.0).abs() < 1e-15);
        assert!((unit_cosine_preimage(3) - 2.0).abs() < 1e-14);
    }
}
