use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::harmonics::Harmonic;
use super::measure::NormalMeasure1;
use super::product::{density_product_mc, IdentityReport, McEstimate, Region};
use super::transform::inverse_cosine_transform_of;
use crate::constants::{sphere_volume, unit_cosine_preimage};
use crate::convex::{projection_volume, ConvexBody};
use crate::error::{Error, Result};
use crate::linalg::{check_orthonormal, orthogonal_complement};
use crate::quadrature::{gauss_legendre_on, SphereRule};

const CHUNK: usize = 8192;

/// Both sides of a deterministic identity and their relative residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

fn smooth_shape(body: &ConvexBody) -> Result<DMatrix<f64>> {
    body.validate()?;
    let n = body.dim();
    if n != 2 && n != 3 {
        return Err(Error::Unsupported(format!("identity checks in R^{n}")));
    }
    body.smooth_shape().ok_or_else(|| Error::NotSmooth("support function of a body that is not a positive-definite ellipsoid".into()))
}

/// `T_1^{-1} s_A` on Gr(1, V) with the Haar probability measure.
fn width_preimage(body: &ConvexBody, bandwidth: usize) -> Result<Harmonic> {
    inverse_cosine_transform_of(body.dim(), bandwidth, |u| body.width(u))
}

/// `int_{S^{n-1}} T^{-1} h_A(x) V_{n-1}(pi_{x-perp} A) dx` against `(n/2) V_n(A)`,
/// with `T^{-1} h_A = T_1^{-1} s_A / (2 sigma_{n-1})`.
pub fn alesker_identity(body: &ConvexBody, bandwidth: usize) -> Result<ResidualReport> {
    let q = smooth_shape(body)?;
    let n = body.dim();
    let phi = width_preimage(body, bandwidth)?;
    let bridge = 1.0 / (2.0 * sphere_volume(n - 1));
    let det = q.determinant();
    let qinv = q.clone().try_inverse().ok_or_else(|| Error::NotSmooth("singular shape matrix".into()))?;
    let shadow = |x: &DVector<f64>| -> f64 {
        if n == 2 {
            let y = DVector::from_vec(vec![-x[1], x[0]]);
            2.0 * y.dot(&(&q * &y)).sqrt()
        } else {
            PI * (det * x.dot(&(&qinv * x))).sqrt()
        }
    };
    let rule = SphereRule::standard(n, 2);
    let lhs = rule.integrate(|x| bridge * phi.eval_vec(x) * shadow(x));
    let vol = crate::constants::ball_volume(n) * det.sqrt();
    let rhs = n as f64 / 2.0 * vol;
    Ok(ResidualReport { lhs, rhs, residual: (lhs - rhs).abs() / vol })
}

pub fn alesker_identity_residual(body: &ConvexBody, bandwidth: usize) -> Result<f64> {
    Ok(alesker_identity(body, bandwidth)?.residual)
}

/// `int_{Gr(1,V)} T_1^{-1} s_A(H) cos(H, D) V_{k-1}(pi_{H-perp cap D} A) dH`
/// against `k V_k(pi_D A)`, for a k-subspace D given by orthonormal columns.
pub fn haar2_check(body: &ConvexBody, d: &DMatrix<f64>, bandwidth: usize) -> Result<ResidualReport> {
    smooth_shape(body)?;
    let n = body.dim();
    if d.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: d.nrows() });
    }
    let k = d.ncols();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("subspace of dimension {k} in R^{n}")));
    }
    check_orthonormal(d)?;
    let phi = width_preimage(body, bandwidth)?;
    let integrand = |u: &DVector<f64>| -> f64 {
        let p = d.tr_mul(u);
        let c = p.norm();
        if c < 1e-15 {
            return 0.0;
        }
        let brightness = if k == 1 {
            1.0
        } else {
            let inner = orthogonal_complement(&[p], k);
            projection_volume(body, &(d * inner)).expect("orthonormal frame")
        };
        phi.eval_vec(u) * c * brightness
    };
    let lhs = if n == 2 {
        // arcs between the zeros of cos(H, D) when k = 1
        let a0 = d[(1, 0)].atan2(d[(0, 0)]) + PI / 2.0;
        let nodes = 4 * bandwidth + 64;
        let mut acc = 0.0;
        for arc in 0..2 {
            let start = a0 + arc as f64 * PI;
            let (ts, ws) = gauss_legendre_on(nodes, start, start + PI);
            for (t, w) in ts.iter().zip(&ws) {
                acc += w * integrand(&DVector::from_vec(vec![t.cos(), t.sin()]));
            }
        }
        acc / (2.0 * PI)
    } else {
        let axis = match k {
            1 => Vector3::new(d[(0, 0)], d[(1, 0)], d[(2, 0)]),
            2 => {
                let a = Vector3::new(d[(0, 0)], d[(1, 0)], d[(2, 0)]);
                let b = Vector3::new(d[(0, 1)], d[(1, 1)], d[(2, 1)]);
                a.cross(&b)
            }
            _ => Vector3::z(),
        };
        let level = bandwidth.div_ceil(8).max(2);
        let rule = SphereRule::sphere2(48 * level, 96 * level, &axis);
        rule.integrate(integrand) / (4.0 * PI)
    };
    let rhs = k as f64 * projection_volume(body, d)?;
    Ok(ResidualReport { lhs, rhs, residual: (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE) })
}

fn check_tangent_edges(tangent_dims: &[usize], edges: &[Vec<f64>]) -> Result<usize> {
    if tangent_dims.is_empty() || tangent_dims.contains(&0) {
        return Err(Error::InvalidInput("tangent dimensions must be positive".into()));
    }
    if tangent_dims.len() > 6 {
        return Err(Error::Unsupported(format!("{} sphere factors", tangent_dims.len())));
    }
    let total: usize = tangent_dims.iter().sum();
    if edges.len() != tangent_dims.len() {
        return Err(Error::DimensionMismatch { expected: tangent_dims.len(), got: edges.len() });
    }
    if let Some(e) = edges.iter().find(|e| e.len() != total) {
        return Err(Error::DimensionMismatch { expected: total, got: e.len() });
    }
    Ok(total)
}

fn is_degenerate(edges: &[Vec<f64>]) -> bool {
    let cols: Vec<DVector<f64>> = edges.iter().map(|e| DVector::from_column_slice(e)).collect();
    let m = DMatrix::from_columns(&cols);
    let gram = m.transpose() * &m;
    let scale: f64 = cols.iter().map(|c| c.norm_squared()).product();
    scale == 0.0 || gram.determinant() <= 1e-24 * scale
}

/// Crofton density of the product of unit spheres `S^{m_1-1} x ... x S^{m_n-1}`
/// on the parallelotope spanned by `edges` in `T = T_1 + ... + T_n`:
/// `prod_j (sigma_{m_j-1} / sigma_{m_j}) E |det <theta_ij, w_j>|` with
/// `w_j` uniform on the unit sphere of `T_j`.
pub fn omega_mc(tangent_dims: &[usize], edges: &[Vec<f64>], samples: usize, seed: u64) -> Result<McEstimate> {
    check_tangent_edges(tangent_dims, edges)?;
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    if is_degenerate(edges) {
        return Ok(McEstimate { value: 0.0, stderr: 0.0, samples, degenerate: 0 });
    }
    let n = tangent_dims.len();
    let offsets: Vec<usize> = tangent_dims.iter().scan(0, |acc, m| {
        let o = *acc;
        *acc += m;
        Some(o)
    }).collect();
    let scale: f64 = tangent_dims.iter().map(|&m| sphere_volume(m - 1) / sphere_volume(m)).product();
    let chunks = samples.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut a = DMatrix::<f64>::zeros(n, n);
            let mut w = vec![0.0; tangent_dims.iter().copied().max().unwrap_or(1)];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                for (j, &m) in tangent_dims.iter().enumerate() {
                    let mut r2: f64 = 0.0;
                    while r2 < 1e-300 {
                        r2 = 0.0;
                        for x in w[..m].iter_mut() {
                            *x = StandardNormal.sample(&mut rng);
                            r2 += *x * *x;
                        }
                    }
                    let r = r2.sqrt();
                    for (i, e) in edges.iter().enumerate() {
                        a[(i, j)] = (0..m).map(|l| e[offsets[j] + l] * w[l]).sum::<f64>() / r;
                    }
                }
                let v = a.determinant().abs();
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = samples as f64;
    let mean = s / nf;
    let var = if samples > 1 { (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0) } else { 0.0 };
    Ok(McEstimate { value: scale * mean, stderr: scale * (var / nf).sqrt(), samples, degenerate: 0 })
}

/// Normal measures whose 1-densities are `xi -> |pi_j xi|` on `T`.
pub fn pullback_factors(tangent_dims: &[usize]) -> Vec<NormalMeasure1> {
    let total: usize = tangent_dims.iter().sum();
    let mut offset = 0;
    tangent_dims
        .iter()
        .map(|&m| {
            let mut frame = DMatrix::zeros(total, m);
            for l in 0..m {
                frame[(offset + l, l)] = 1.0;
            }
            offset += m;
            NormalMeasure1::pullback_uniform(frame, unit_cosine_preimage(m))
        })
        .collect()
}

/// `omega_mc` against `pi^{-n} (vol_{1,1} ... vol_{1,n})(Theta)`, the latter by
/// hyperplane sampling.
pub fn verify_crofton_product(
    tangent_dims: &[usize],
    edges: &[Vec<f64>],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<IdentityReport> {
    let total = check_tangent_edges(tangent_dims, edges)?;
    let n = tangent_dims.len();
    let omega = omega_mc(tangent_dims, edges, samples, seed)?;
    let region = Region::Parallelotope { origin: vec![0.0; total], edges: edges.to_vec() };
    let product = density_product_mc(&pullback_factors(tangent_dims), &region, samples, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let norm = PI.powi(n as i32);
    let rhs = product.value / norm;
    let stderr = (omega.stderr.powi(2) + (product.stderr / norm).powi(2)).sqrt();
    let mut report = IdentityReport::new("crofton-product", omega.value, rhs, stderr, samples, tol);
    if omega.value == 0.0 && rhs == 0.0 {
        report.pass = true;
    }
    Ok(report)
}
