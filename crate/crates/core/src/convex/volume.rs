use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::body::ConvexBody;
use super::mixed::mixed_volume;
use crate::constants::ball_volume;
use crate::error::{Error, Result};
use crate::linalg::matrix_from_rows;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeMethod {
    Analytic,
    MembershipGrid,
    MonteCarlo,
}

/// Knobs for the numerical volume routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeOptions {
    /// Cells per axis (grid) or number of points (Monte Carlo).
    pub resolution: usize,
    /// Size of the direction set used by the membership test.
    pub directions: usize,
    pub seed: u64,
}

impl Default for VolumeOptions {
    fn default() -> Self {
        Self { resolution: 0, directions: 512, seed: 0x5eed }
    }
}

impl VolumeOptions {
    pub fn with_resolution(resolution: usize) -> Self {
        Self { resolution, ..Self::default() }
    }

    fn grid_resolution(&self, n: usize) -> usize {
        if self.resolution > 0 {
            return self.resolution;
        }
        match n {
            1 | 2 => 400,
            3 => 80,
            _ => 24,
        }
    }
}

/// n-dimensional volume by the requested method; `resolution` is cells per
/// axis for the grid and the point count for Monte Carlo (0 = default).
pub fn volume(body: &ConvexBody, method: VolumeMethod, resolution: usize) -> Result<f64> {
    volume_with(body, method, &VolumeOptions::with_resolution(resolution))
}

pub fn volume_with(body: &ConvexBody, method: VolumeMethod, opts: &VolumeOptions) -> Result<f64> {
    body.validate()?;
    let n = body.dim();
    if !(1..=4).contains(&n) {
        return Err(Error::Unsupported(format!("ambient dimension {n}")));
    }
    match method {
        VolumeMethod::Analytic => analytic_volume(body),
        VolumeMethod::MembershipGrid => Ok(membership_grid_volume(body, opts)),
        VolumeMethod::MonteCarlo => Ok(monte_carlo_volume(body, opts)),
    }
}

/// Closed forms: ellipsoid, ball, segment, zonotope, and sums that stay in
/// one of those classes.
pub fn analytic_volume(body: &ConvexBody) -> Result<f64> {
    let n = body.dim();
    match body {
        ConvexBody::Ellipsoid { q } => {
            let det = matrix_from_rows(q).determinant().max(0.0);
            Ok(ball_volume(n) * det.sqrt())
        }
        ConvexBody::Ball { r, .. } => Ok(ball_volume(n) * r.powi(n as i32)),
        _ => {
            if let Some(gens) = body.zonotope_generators() {
                return Ok(zonotope_volume(&gens, n));
            }
            if let Some(r) = body.ball_radius() {
                return Ok(ball_volume(n) * r.powi(n as i32));
            }
            Err(Error::AnalyticUnavailable(describe(body)))
        }
    }
}

/// Volume without approximation: closed form when available, otherwise
/// V(K, ..., K) through the mixed-volume kernels.
pub fn exact_volume(body: &ConvexBody) -> Result<f64> {
    match analytic_volume(body) {
        Ok(v) => Ok(v),
        Err(Error::AnalyticUnavailable(_)) => mixed_volume(&vec![body.clone(); body.dim()]),
        Err(e) => Err(e),
    }
}

/// 2^n * sum over n-subsets of generators of |det|.
pub fn zonotope_volume(gens: &[DVector<f64>], n: usize) -> f64 {
    let mut total = 0.0;
    let mut idx: Vec<usize> = (0..n).collect();
    if gens.len() < n {
        return 0.0;
    }
    loop {
        let cols: Vec<DVector<f64>> = idx.iter().map(|&i| gens[i].clone()).collect();
        total += nalgebra::DMatrix::from_columns(&cols).determinant().abs();
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return total * 2f64.powi(n as i32);
            }
            i -= 1;
            if idx[i] < gens.len() - n + i {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn describe(body: &ConvexBody) -> String {
    match body {
        ConvexBody::MinkowskiSum { parts } => format!("minkowski sum of {} parts", parts.len()),
        other => format!("{:?}", std::mem::discriminant(other)),
    }
}

/// Direction set for the membership test: uniform angles on S^1,
/// a Fibonacci lattice on S^2, fixed-seed Gaussian directions on S^3.
pub fn direction_grid(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0xd1ec7);
            (0..count)
                .map(|_| {
                    let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.into_iter().map(|x| x / norm).collect()
                })
                .collect()
        }
    }
}

struct Membership {
    dirs: Vec<Vec<f64>>,
    support: Vec<f64>,
}

impl Membership {
    fn new(body: &ConvexBody, count: usize) -> Self {
        let dirs = direction_grid(body.dim(), count);
        let support = dirs.iter().map(|u| body.support(u)).collect();
        Self { dirs, support }
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.dirs
            .iter()
            .zip(&self.support)
            .all(|(u, h)| u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() <= *h)
    }
}

fn bounding_box(body: &ConvexBody) -> Vec<f64> {
    let n = body.dim();
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            body.support(&e)
        })
        .collect()
}

/// Counts cell centres of a regular grid over the bounding box that pass the
/// support-function membership test. The finite direction set only
/// approximates the constraint set, so the body is slightly over-covered.
pub fn membership_grid_volume(body: &ConvexBody, opts: &VolumeOptions) -> f64 {
    let n = body.dim();
    if n == 1 {
        return 2.0 * body.support(&[1.0]);
    }
    let half = bounding_box(body);
    if half.iter().any(|&h| h <= 0.0) {
        return 0.0;
    }
    let res = opts.grid_resolution(n);
    let test = Membership::new(body, opts.directions);
    let cell: Vec<f64> = half.iter().map(|h| 2.0 * h / res as f64).collect();
    let cell_volume: f64 = cell.iter().product();
    let total_cells = res.pow(n as u32);
    let mut x = vec![0.0; n];
    let mut count = 0usize;
    for idx in 0..total_cells {
        let mut rem = idx;
        for d in 0..n {
            let i = rem % res;
            rem /= res;
            x[d] = -half[d] + (i as f64 + 0.5) * cell[d];
        }
        if test.contains(&x) {
            count += 1;
        }
    }
    count as f64 * cell_volume
}

pub fn monte_carlo_volume(body: &ConvexBody, opts: &VolumeOptions) -> f64 {
    let n = body.dim();
    if n == 1 {
        return 2.0 * body.support(&[1.0]);
    }
    let half = bounding_box(body);
    if half.iter().any(|&h| h <= 0.0) {
        return 0.0;
    }
    let samples = if opts.resolution > 0 { opts.resolution } else { 200_000 };
    let test = Membership::new(body, opts.directions);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = vec![0.0; n];
    let mut count = 0usize;
    for _ in 0..samples {
        for d in 0..n {
            x[d] = rng.random_range(-half[d]..half[d]);
        }
        if test.contains(&x) {
            count += 1;
        }
    }
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    box_volume * count as f64 / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_examples() {
        let disk = ConvexBody::ball(2, 1.0);
        assert!((volume(&disk, VolumeMethod::Analytic, 0).unwrap() - PI).abs() < 1e-15);
        let square = ConvexBody::zonotope(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!((volume(&square, VolumeMethod::Analytic, 0).unwrap() - 4.0).abs() < 1e-15);
        let e = ConvexBody::diagonal_ellipsoid(&[4.0, 9.0]).unwrap();
        assert!((volume(&e, VolumeMethod::Analytic, 0).unwrap() - 6.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn mixed_sum_has_no_closed_form() {
        let s = ConvexBody::sum(vec![
            (1.0, ConvexBody::ball(2, 1.0)),
            (1.0, ConvexBody::segment(&[1.0, 0.0])),
        ]);
        assert_eq!(analytic_volume(&s).unwrap_err().tag(), "analytic-unavailable");
        // disk + segment [-1,1]: pi + 2 * 2 * 1
        assert!((exact_volume(&s).unwrap() - (PI + 4.0)).abs() < 1e-9);
    }

    #[test]
    fn degenerate_bodies_have_zero_volume() {
        let flat = ConvexBody::diagonal_ellipsoid(&[1.0, 0.0]).unwrap();
        assert_eq!(volume(&flat, VolumeMethod::Analytic, 0).unwrap(), 0.0);
        assert_eq!(volume(&flat, VolumeMethod::MembershipGrid, 50).unwrap(), 0.0);
        let seg = ConvexBody::segment(&[1.0, 1.0]);
        assert_eq!(volume(&seg, VolumeMethod::Analytic, 0).unwrap(), 0.0);
    }

    #[test]
    fn numerical_routes_approximate_the_disk() {
        let disk = ConvexBody::ball(2, 1.0);
        let grid = volume(&disk, VolumeMethod::MembershipGrid, 400).unwrap();
        assert!((grid - PI).abs() / PI < 1e-2, "{grid}");
        let mc = volume(&disk, VolumeMethod::MonteCarlo, 200_000).unwrap();
        assert!((mc - PI).abs() / PI < 1e-2, "{mc}");
        let ball3 = ConvexBody::ball(3, 1.0);
        let grid3 = volume(&ball3, VolumeMethod::MembershipGrid, 60).unwrap();
        assert!((grid3 - 4.0 * PI / 3.0).abs() / (4.0 * PI / 3.0) < 2e-2, "{grid3}");
    }
}
