//! Empirical zero counting: draw unit-norm functions from each space and
//! count their isolated common zeros.

mod count;

use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use count::{count_zeros_1d, count_zeros_2d, Count1d, Count2d, Grid2};

use crate::error::{Error, Result};
use crate::geometry::{Factor, FunctionSpace};

/// Uniform point on the unit sphere of the space (standard Gaussian, normalized).
pub fn sample_unit<R: Rng + ?Sized>(space: &FunctionSpace, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(space.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-300 {
            return v / n;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub grid_1d: usize,
    pub grid_torus: usize,
    pub grid_sphere: (usize, usize),
    pub max_newton_iters: usize,
    /// Largest tolerated fraction of suspect samples.
    pub suspect_limit: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { grid_1d: 4096, grid_torus: 256, grid_sphere: (192, 384), max_newton_iters: 30, suspect_limit: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub count: usize,
    pub suspect: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCountEstimate {
    pub samples: usize,
    pub mean: f64,
    pub stderr: f64,
    pub seed: u64,
    pub histogram: BTreeMap<usize, usize>,
    pub suspect_samples: usize,
    #[serde(skip)]
    pub records: Vec<SampleRecord>,
}

impl ZeroCountEstimate {
    /// `index,count,suspect` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,count,suspect\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{}\n", r.index, r.count, r.suspect));
        }
        out
    }
}

enum Counter {
    Circle { grid: usize },
    /// Each space depends on one circle factor, all distinct.
    Separable { grid: usize, factor_of: Vec<usize> },
    Surface { coarse: count::GridCache, fine: count::GridCache, iters: usize },
}

impl Counter {
    fn new(spaces: &[FunctionSpace], opts: &EstimateOptions) -> Result<Self> {
        let manifold = spaces[0].manifold();
        let factors = manifold.factors();
        if factors == [Factor::Circle] {
            return Ok(Counter::Circle { grid: opts.grid_1d });
        }
        if factors.iter().all(|f| *f == Factor::Circle) {
            let supports: Vec<Vec<usize>> = spaces.iter().map(|s| s.support()).collect();
            let mut factor_of: Vec<usize> = Vec::new();
            for s in &supports {
                if let [j] = s.as_slice() {
                    factor_of.push(*j);
                }
            }
            let mut distinct = factor_of.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if factor_of.len() == spaces.len() && distinct.len() == spaces.len() {
                return Ok(Counter::Separable { grid: opts.grid_1d, factor_of });
            }
        }
        if manifold.dim() != 2 {
            return Err(Error::Unsupported(format!(
                "zero counting on {} (only circles, separable tori and surfaces)",
                manifold.descriptor()
            )));
        }
        let (rows, cols) = match factors {
            [Factor::Sphere2] => opts.grid_sphere,
            _ => (opts.grid_torus, opts.grid_torus),
        };
        let coarse = count::GridCache::new(spaces, Grid2::new(manifold, rows, cols)?);
        let fine = count::GridCache::new(spaces, Grid2::new(manifold, 2 * rows, 2 * cols)?);
        Ok(Counter::Surface { coarse, fine, iters: opts.max_newton_iters })
    }

    fn count(&self, spaces: &[FunctionSpace], coefs: &[DVector<f64>]) -> (usize, bool) {
        match self {
            Counter::Circle { grid } => {
                let r = count_zeros_1d(|t| restricted(&spaces[0], &coefs[0], 0, t), *grid);
                (r.count, r.suspect)
            }
            Counter::Separable { grid, factor_of } => {
                let mut total = 1;
                let mut suspect = false;
                for ((s, c), &j) in spaces.iter().zip(coefs).zip(factor_of) {
                    let r = count_zeros_1d(|t| restricted(s, c, j, t), *grid);
                    total *= r.count;
                    suspect |= r.suspect;
                }
                (total, suspect)
            }
            Counter::Surface { coarse, fine, iters } => {
                let a = coarse.count(spaces, coefs, *iters);
                let b = fine.count(spaces, coefs, *iters);
                (a.count, a.suspect || b.suspect || a.count != b.count)
            }
        }
    }
}

/// `sum_i c_i f_i` along circle factor `j`, other angles at 0.
fn restricted(space: &FunctionSpace, c: &DVector<f64>, j: usize, t: f64) -> f64 {
    let m = space.manifold();
    let mut chart = vec![0.0; m.dim()];
    chart[j] = t;
    let p = m.point(&chart).expect("chart length");
    space.values(&p).dot(c)
}

/// Mean number of isolated common zeros over `samples` independent draws.
/// Draw `i` uses the ChaCha stream `(seed, i)`.
pub fn estimate(spaces: &[FunctionSpace], samples: usize, seed: u64, opts: &EstimateOptions) -> Result<ZeroCountEstimate> {
    let Some(first) = spaces.first() else {
        return Err(Error::InvalidInput("no function spaces".into()));
    };
    let manifold = first.manifold();
    if spaces.len() != manifold.dim() {
        return Err(Error::DimensionMismatch { expected: manifold.dim(), got: spaces.len() });
    }
    if spaces.iter().any(|s| s.manifold().factors() != manifold.factors()) {
        return Err(Error::InvalidInput("spaces live on different manifolds".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    let counter = Counter::new(spaces, opts)?;
    let records: Vec<SampleRecord> = (0..samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            let coefs: Vec<DVector<f64>> = spaces.iter().map(|s| sample_unit(s, &mut rng)).collect();
            let (count, suspect) = counter.count(spaces, &coefs);
            SampleRecord { index, count, suspect }
        })
        .collect();
    let suspect_samples = records.iter().filter(|r| r.suspect).count();
    let rate = suspect_samples as f64 / samples as f64;
    if rate > opts.suspect_limit {
        return Err(Error::UnreliableOracle { rate, limit: opts.suspect_limit });
    }
    let good: Vec<f64> = records.iter().filter(|r| !r.suspect).map(|r| r.count as f64).collect();
    let n = good.len() as f64;
    let mean = good.iter().sum::<f64>() / n;
    let var = if good.len() > 1 { good.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let mut histogram = BTreeMap::new();
    for r in records.iter().filter(|r| !r.suspect) {
        *histogram.entry(r.count).or_insert(0) += 1;
    }
    Ok(ZeroCountEstimate { samples, mean, stderr: (var / n).sqrt(), seed, histogram, suspect_samples, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{parse_spaces, Manifold};
    use std::f64::consts::PI;

    #[test]
    fn unit_samples() {
        let m = Manifold::circle();
        let s = &parse_spaces(&m, "linear").unwrap()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let first = sample_unit(s, &mut rng);
        let mut rng2 = ChaCha8Rng::seed_from_u64(11);
        assert_eq!(first, sample_unit(s, &mut rng2));
        let n = 10_000;
        let mut angles: Vec<f64> = (0..n)
            .map(|_| {
                let v = sample_unit(s, &mut rng);
                assert!((v.norm() - 1.0).abs() < 1e-12);
                (v[1].atan2(v[0]) + PI) / (2.0 * PI)
            })
            .collect();
        angles.sort_by(f64::total_cmp);
        let d = angles
            .iter()
            .enumerate()
            .map(|(i, a)| ((i + 1) as f64 / n as f64 - a).abs().max((a - i as f64 / n as f64).abs()))
            .fold(0.0, f64::max);
        // Kolmogorov critical value at p = 0.01
        assert!(d < 1.628 / (n as f64).sqrt(), "D = {d}");
    }

    #[test]
    fn deterministic_cases_are_point_masses() {
        let opts = EstimateOptions::default();
        let t2 = Manifold::torus(2);
        let e = estimate(&parse_spaces(&t2, "linear, linear").unwrap(), 50, 3, &opts).unwrap();
        assert_eq!((e.mean, e.stderr, e.suspect_samples), (4.0, 0.0, 0));
        assert_eq!(e.histogram.len(), 1);
        let c = Manifold::circle();
        let e = estimate(&parse_spaces(&c, "eig 9").unwrap(), 200, 5, &opts).unwrap();
        assert_eq!((e.mean, e.stderr), (6.0, 0.0));
        let e2 = estimate(&parse_spaces(&c, "eig 9").unwrap(), 200, 5, &opts).unwrap();
        assert_eq!(e, e2);
    }

    #[test]
    fn sphere_linear_is_two() {
        let s2 = Manifold::sphere2();
        let e = estimate(&parse_spaces(&s2, "linear, linear").unwrap(), 20, 1, &EstimateOptions::default()).unwrap();
        assert_eq!((e.mean, e.suspect_samples), (2.0, 0));
    }

    #[test]
    fn wrong_space_count() {
        let t2 = Manifold::torus(2);
        assert!(matches!(
            estimate(&parse_spaces(&t2, "linear").unwrap(), 5, 1, &EstimateOptions::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
