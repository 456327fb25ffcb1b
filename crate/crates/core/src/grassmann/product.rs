use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::dk_mixed;
use super::measure::NormalMeasure1;
use crate::constants::factorial;
use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::linalg::orthonormalize_columns;

const CHUNK: usize = 8192;

/// A bounded convex k-dimensional region in R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    /// `origin + sum s_j edges[j]`, `s` in [0, 1]^k.
    Parallelotope { origin: Vec<f64>, edges: Vec<Vec<f64>> },
    /// Convex polygon in R^2, vertices in order.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Region {
    /// Centered unit square in R^2.
    pub fn unit_square() -> Self {
        Region::Parallelotope { origin: vec![-0.5, -0.5], edges: vec![vec![1.0, 0.0], vec![0.0, 1.0]] }
    }

    /// Segment `[origin, origin + edge]`.
    pub fn segment(origin: Vec<f64>, edge: Vec<f64>) -> Self {
        Region::Parallelotope { origin, edges: vec![edge] }
    }

    pub fn ambient(&self) -> usize {
        match self {
            Region::Parallelotope { origin, .. } => origin.len(),
            Region::Polygon { .. } => 2,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Parallelotope { edges, .. } => edges.len(),
            Region::Polygon { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Region::Parallelotope { origin, edges } => {
                if edges.is_empty() || origin.is_empty() {
                    return Err(Error::EmptyRegion("parallelotope without edges".into()));
                }
                if edges.len() > origin.len() {
                    return Err(Error::EmptyRegion(format!("{} edges in R^{}", edges.len(), origin.len())));
                }
                if let Some(e) = edges.iter().find(|e| e.len() != origin.len()) {
                    return Err(Error::DimensionMismatch { expected: origin.len(), got: e.len() });
                }
                if origin.iter().chain(edges.iter().flatten()).any(|x| !x.is_finite()) {
                    return Err(Error::EmptyRegion("non-finite coordinates".into()));
                }
                Ok(())
            }
            Region::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::EmptyRegion("polygon needs at least 3 vertices".into()));
                }
                if vertices.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::EmptyRegion("non-finite coordinates".into()));
                }
                let n = vertices.len();
                let mut sign = 0.0;
                for i in 0..n {
                    let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
                    let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                    if cross.abs() < 1e-15 {
                        continue;
                    }
                    if sign == 0.0 {
                        sign = cross.signum();
                    } else if cross.signum() != sign {
                        return Err(Error::InvalidInput("polygon is not convex".into()));
                    }
                }
                Ok(())
            }
        }
    }

    /// k-dimensional volume.
    pub fn volume(&self) -> f64 {
        match self {
            Region::Parallelotope { edges, .. } => {
                let m = DMatrix::from_columns(&edges.iter().map(|e| DVector::from_column_slice(e)).collect::<Vec<_>>());
                (m.transpose() * &m).determinant().max(0.0).sqrt()
            }
            Region::Polygon { vertices } => {
                let n = vertices.len();
                let twice: f64 = (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        a[0] * b[1] - a[1] * b[0]
                    })
                    .sum();
                0.5 * twice.abs()
            }
        }
    }

    /// Orthonormal basis (columns) of the affine hull's direction space.
    pub fn carrier_frame(&self) -> Option<DMatrix<f64>> {
        match self {
            Region::Parallelotope { edges, .. } => {
                orthonormalize_columns(&edges.iter().map(|e| DVector::from_column_slice(e)).collect::<Vec<_>>())
            }
            Region::Polygon { .. } => Some(DMatrix::identity(2, 2)),
        }
    }

    fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            Region::Parallelotope { origin, edges } => (0..1usize << edges.len())
                .map(|mask| {
                    let mut p = origin.clone();
                    for (j, e) in edges.iter().enumerate() {
                        if mask >> j & 1 == 1 {
                            p.iter_mut().zip(e).for_each(|(a, b)| *a += b);
                        }
                    }
                    p
                })
                .collect(),
            Region::Polygon { vertices } => vertices.iter().map(|v| v.to_vec()).collect(),
        }
    }

    /// Center and radius of a ball containing the region.
    pub fn bounding_ball(&self) -> (Vec<f64>, f64) {
        let verts = self.vertices();
        let n = self.ambient();
        let mut c = vec![0.0; n];
        for v in &verts {
            c.iter_mut().zip(v).for_each(|(a, b)| *a += b / verts.len() as f64);
        }
        let r = verts
            .iter()
            .map(|v| v.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        (c, r)
    }
}

enum Hit {
    Yes,
    No,
    Degenerate,
}

/// Solves the k x k system in place (row-major `a`, k <= 6); `None` when
/// the rows are numerically dependent.
fn solve_small(a: &mut [f64], b: &mut [f64], k: usize) -> Option<()> {
    let scale: f64 = (0..k).map(|i| (0..k).map(|j| a[i * k + j].powi(2)).sum::<f64>().sqrt()).product();
    let mut det = 1.0;
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))?;
        if piv != col {
            for j in 0..k {
                a.swap(piv * k + j, col * k + j);
            }
            b.swap(piv, col);
        }
        let p = a[col * k + col];
        det *= p;
        if p == 0.0 {
            return None;
        }
        for i in col + 1..k {
            let f = a[i * k + col] / p;
            for j in col..k {
                a[i * k + j] -= f * a[col * k + j];
            }
            b[i] -= f * b[col];
        }
    }
    if det.abs() <= 1e-12 * scale {
        return None;
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        for j in i + 1..k {
            s -= a[i * k + j] * b[j];
        }
        b[i] = s / a[i * k + i];
    }
    Some(())
}

struct HitTester {
    region: Region,
    k: usize,
    n: usize,
}

impl HitTester {
    /// `normals` holds k unit normals of length n, row after row.
    fn test(&self, normals: &[f64], ts: &[f64]) -> Hit {
        let (k, n) = (self.k, self.n);
        let mut a = [0.0f64; 36];
        let mut b = [0.0f64; 6];
        match &self.region {
            Region::Parallelotope { origin, edges } => {
                for i in 0..k {
                    let u = &normals[i * n..(i + 1) * n];
                    for (j, e) in edges.iter().enumerate() {
                        a[i * k + j] = u.iter().zip(e).map(|(x, y)| x * y).sum();
                    }
                    b[i] = ts[i] - u.iter().zip(origin).map(|(x, y)| x * y).sum::<f64>();
                }
                if solve_small(&mut a[..k * k], &mut b[..k], k).is_none() {
                    return Hit::Degenerate;
                }
                if b[..k].iter().all(|s| (0.0..=1.0).contains(s)) {
                    Hit::Yes
                } else {
                    Hit::No
                }
            }
            Region::Polygon { vertices } => {
                a[..4].copy_from_slice(&normals[..4]);
                b[..2].copy_from_slice(&ts[..2]);
                if solve_small(&mut a[..4], &mut b[..2], 2).is_none() {
                    return Hit::Degenerate;
                }
                let m = vertices.len();
                let mut sign = 0.0;
                for i in 0..m {
                    let (p, q) = (vertices[i], vertices[(i + 1) % m]);
                    let cross = (q[0] - p[0]) * (b[1] - p[1]) - (q[1] - p[1]) * (b[0] - p[0]);
                    if cross == 0.0 {
                        continue;
                    }
                    if sign == 0.0 {
                        sign = cross.signum();
                    } else if cross.signum() != sign {
                        return Hit::No;
                    }
                }
                Hit::Yes
            }
        }
    }
}

/// Monte Carlo value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Draws whose hyperplanes were numerically dependent; counted as misses.
    pub degenerate: usize,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0, samples: 0, degenerate: 0 }
    }
}

#[derive(Default, Clone, Copy)]
struct ChunkStats {
    sum: f64,
    sumsq: f64,
    degenerate: usize,
}

/// `(mu_1 ... mu_k)(T_region)`: the product measure of k-tuples of affine
/// hyperplanes whose common intersection meets the k-dimensional region.
///
/// Hyperplanes are drawn from `|mu_i| x dt`, with `t` restricted to those
/// meeting the region's bounding ball, so each tuple carries the weight
/// `prod_i sign_i |mu_i| 2R`. Chunks of draws use ChaCha streams keyed by
/// (seed, chunk index), so the result does not depend on the thread count.
pub fn density_product_mc(factors: &[NormalMeasure1], region: &Region, samples: usize, seed: u64) -> Result<McEstimate> {
    region.validate()?;
    let (k, n) = (region.dim(), region.ambient());
    if factors.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: factors.len() });
    }
    if let Some(f) = factors.iter().find(|f| f.ambient() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: f.ambient() });
    }
    if k > 6 {
        return Err(Error::Unsupported(format!("products of {k} factors")));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    let (center, radius) = region.bounding_ball();
    if region.volume() <= 1e-14 * radius.powi(k as i32).max(f64::MIN_POSITIVE) || radius == 0.0 {
        return Ok(McEstimate { value: 0.0, stderr: 0.0, samples, degenerate: 0 });
    }
    let masses: Vec<f64> = factors.iter().map(|f| f.total_mass()).collect();
    if masses.iter().any(|&m| m == 0.0) {
        return Ok(McEstimate { value: 0.0, stderr: 0.0, samples, degenerate: 0 });
    }
    let scale: f64 = masses.iter().map(|m| m * 2.0 * radius).product();
    let tester = HitTester { region: region.clone(), k, n };

    let chunks = samples.div_ceil(CHUNK);
    let stats: Vec<ChunkStats> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut normals = vec![0.0; k * n];
            let mut ts = vec![0.0; k];
            let mut st = ChunkStats::default();
            for _ in 0..count {
                let mut sign = 1.0;
                for (i, f) in factors.iter().enumerate() {
                    let u = &mut normals[i * n..(i + 1) * n];
                    sign *= f.sample_into(&mut rng, u);
                    let uc: f64 = u.iter().zip(&center).map(|(a, b)| a * b).sum();
                    ts[i] = uc + radius * (2.0 * rng.random::<f64>() - 1.0);
                }
                match tester.test(&normals, &ts) {
                    Hit::Yes => {
                        st.sum += sign;
                        st.sumsq += 1.0;
                    }
                    Hit::No => {}
                    Hit::Degenerate => st.degenerate += 1,
                }
            }
            st
        })
        .collect();
    let total = stats.iter().fold(ChunkStats::default(), |a, b| ChunkStats {
        sum: a.sum + b.sum,
        sumsq: a.sumsq + b.sumsq,
        degenerate: a.degenerate + b.degenerate,
    });
    let nf = samples as f64;
    let mean = total.sum / nf;
    let var = if samples > 1 { (total.sumsq / nf - mean * mean).max(0.0) * nf / (nf - 1.0) } else { 0.0 };
    Ok(McEstimate { value: scale * mean, stderr: scale * (var / nf).sqrt(), samples, degenerate: total.degenerate })
}

/// Outcome of a numerical identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    pub samples: usize,
    pub relative_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

impl IdentityReport {
    pub fn new(identity: &str, lhs: f64, rhs: f64, stderr: f64, samples: usize, tol: f64) -> Self {
        let diff = (lhs - rhs).abs();
        let relative_deviation = if rhs != 0.0 { diff / rhs.abs() } else { diff };
        Self {
            identity: identity.to_string(),
            lhs,
            rhs,
            stderr,
            samples,
            relative_deviation,
            tol,
            pass: relative_deviation <= tol,
        }
    }
}

/// Compares `d_1(A_1) ... d_1(A_k)` on the region (Monte Carlo) with
/// `k! d_k(A_1, ..., A_k)` on the region (mixed volume of projections).
pub fn verify_product_identity(
    bodies: &[ConvexBody],
    region: &Region,
    samples: usize,
    seed: u64,
    tol: f64,
    bandwidth: usize,
) -> Result<IdentityReport> {
    region.validate()?;
    let k = bodies.len();
    if k != region.dim() {
        return Err(Error::DimensionMismatch { expected: region.dim(), got: k });
    }
    let carrier = region.carrier_frame().ok_or_else(|| Error::EmptyRegion("region has dependent edges".into()))?;
    let rhs = factorial(k) * dk_mixed(bodies)?.gauge_at(&carrier)? * region.volume();
    if k == 1 {
        let Region::Parallelotope { edges, .. } = region else { unreachable!("polygons are 2-dimensional") };
        let lhs = bodies[0].width(&edges[0]);
        return Ok(IdentityReport::new("product", lhs, rhs, 0.0, 0, tol));
    }
    let factors = bodies.iter().map(|b| NormalMeasure1::of_body(b, bandwidth)).collect::<Result<Vec<_>>>()?;
    let est = density_product_mc(&factors, region, samples, seed)?;
    Ok(IdentityReport::new("product", est.value, rhs, est.stderr, samples, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn region_basics() {
        let sq = Region::unit_square();
        assert_eq!(sq.volume(), 1.0);
        let (c, r) = sq.bounding_ball();
        assert!(c.iter().all(|x| x.abs() < 1e-15));
        assert!((r - 0.5f64.sqrt()).abs() < 1e-15);
        let tri = Region::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] };
        assert_eq!(tri.volume(), 0.5);
        let bad = Region::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0]] };
        assert!(matches!(bad.validate(), Err(Error::EmptyRegion(_))));
    }

    #[test]
    fn disk_on_segment_is_twice_length() {
        let m = NormalMeasure1::of_body(&ConvexBody::ball(2, 1.0), 16).unwrap();
        let est = density_product_mc(&[m], &Region::segment(vec![0.0, 0.0], vec![0.0, 1.5]), 200_000, 1).unwrap();
        assert!((est.value - 3.0).abs() < 4.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn orthogonal_segments_give_area() {
        let a = NormalMeasure1::of_body(&ConvexBody::segment(&[0.5, 0.0]), 16).unwrap();
        let b = NormalMeasure1::of_body(&ConvexBody::segment(&[0.0, 0.5]), 16).unwrap();
        let est = density_product_mc(&[a, b], &Region::unit_square(), 100_000, 2).unwrap();
        assert!((est.value - 1.0).abs() < 4.0 * est.stderr + 1e-12, "{est:?}");
    }

    #[test]
    fn disk_disk_polygon() {
        let m = NormalMeasure1::of_body(&ConvexBody::ball(2, 1.0), 16).unwrap();
        let tri = Region::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] };
        let est = density_product_mc(&[m.clone(), m], &tri, 200_000, 5).unwrap();
        assert!((est.value - PI).abs() < 4.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn reproducible_and_degenerate_region() {
        let m = NormalMeasure1::of_body(&ConvexBody::ball(2, 1.0), 16).unwrap();
        let a = density_product_mc(&[m.clone(), m.clone()], &Region::unit_square(), 20_000, 9).unwrap();
        let b = density_product_mc(&[m.clone(), m.clone()], &Region::unit_square(), 20_000, 9).unwrap();
        assert_eq!(a, b);
        let flat = Region::Parallelotope { origin: vec![0.0, 0.0], edges: vec![vec![1.0, 0.0], vec![2.0, 0.0]] };
        assert_eq!(density_product_mc(&[m.clone(), m], &flat, 100, 1).unwrap().value, 0.0);
    }

    #[test]
    fn k1_identity_is_exact() {
        let body = ConvexBody::diagonal_ellipsoid(&[4.0, 1.0]).unwrap();
        let r = verify_product_identity(&[body], &Region::segment(vec![0.0, 0.0], vec![0.3, 0.7]), 10, 1, 1e-12, 32).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
