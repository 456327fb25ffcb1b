//! Band-limited expansions of functions on S^1 (Fourier) and S^2 (real
//! spherical harmonics), the two settings where the cosine transform on
//! Gr(1, V) is diagonal.

use std::f64::consts::PI;

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_on, trapezoid_circle, SphereRule};

/// f(theta) = sum_k a_k cos(k theta) + b_k sin(k theta), k = 0..=bandwidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn zeros(bandwidth: usize) -> Self {
        Self { cos: vec![0.0; bandwidth + 1], sin: vec![0.0; bandwidth + 1] }
    }

    pub fn constant(c: f64) -> Self {
        Self { cos: vec![c], sin: vec![0.0] }
    }

    pub fn bandwidth(&self) -> usize {
        self.cos.len().saturating_sub(1)
    }

    /// Value at the unit vector (c, s) = (cos theta, sin theta), by the
    /// complex-power recurrence.
    pub fn eval_unit(&self, c: f64, s: f64) -> f64 {
        let (mut ck, mut sk) = (1.0, 0.0);
        let mut acc = 0.0;
        for k in 0..self.cos.len() {
            if k > 0 {
                let nc = ck * c - sk * s;
                sk = sk * c + ck * s;
                ck = nc;
            }
            acc += self.cos[k] * ck + self.sin.get(k).copied().unwrap_or(0.0) * sk;
        }
        acc
    }

    pub fn eval_angle(&self, theta: f64) -> f64 {
        let mut s = 0.0;
        for k in 0..self.cos.len() {
            let (sn, cs) = (k as f64 * theta).sin_cos();
            s += self.cos[k] * cs + self.sin.get(k).copied().unwrap_or(0.0) * sn;
        }
        s
    }

    /// Coefficients of `f` up to `bandwidth` by the trapezoid rule on `8 * (bandwidth + 1)` points.
    pub fn project(bandwidth: usize, f: impl Fn(f64) -> f64) -> Self {
        let (angles, h) = trapezoid_circle(8 * (bandwidth + 1));
        let values: Vec<f64> = angles.iter().map(|&t| f(t)).collect();
        let mut out = Self::zeros(bandwidth);
        for k in 0..=bandwidth {
            let (mut a, mut b) = (0.0, 0.0);
            for (t, v) in angles.iter().zip(&values) {
                let (sn, cs) = (k as f64 * t).sin_cos();
                a += v * cs;
                b += v * sn;
            }
            let norm = if k == 0 { 1.0 / (2.0 * PI) } else { 1.0 / PI };
            out.cos[k] = a * h * norm;
            out.sin[k] = if k == 0 { 0.0 } else { b * h * norm };
        }
        out
    }

    /// Mean over the circle.
    pub fn mean(&self) -> f64 {
        self.cos.first().copied().unwrap_or(0.0)
    }
}

/// Real, fully normalized spherical harmonics (int Y_lm^2 dOmega = 1),
/// coefficient of Y_lm stored at `l*l + l + m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShExpansion {
    pub lmax: usize,
    pub coeffs: Vec<f64>,
}

impl ShExpansion {
    pub fn zeros(lmax: usize) -> Self {
        Self { lmax, coeffs: vec![0.0; (lmax + 1) * (lmax + 1)] }
    }

    pub fn constant(c: f64) -> Self {
        Self { lmax: 0, coeffs: vec![c * (4.0 * PI).sqrt()] }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        let lmax = (coeffs.len() as f64).sqrt() as usize;
        if lmax * lmax != coeffs.len() || lmax == 0 {
            return Err(Error::InvalidInput(format!(
                "{} spherical-harmonic coefficients is not a perfect square",
                coeffs.len()
            )));
        }
        Ok(Self { lmax: lmax - 1, coeffs })
    }

    pub fn index(l: usize, m: i64) -> usize {
        ((l * l + l) as i64 + m) as usize
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        self.coeffs[Self::index(l, m)]
    }

    pub fn eval(&self, u: &Vector3<f64>) -> f64 {
        let y = real_sph_harm(self.lmax, u);
        y.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }

    /// Coefficients up to degree `lmax` by Gauss–Legendre x trapezoid quadrature.
    pub fn project(lmax: usize, f: impl Fn(&Vector3<f64>) -> f64) -> Self {
        let rule = SphereRule::sphere2_exact(2 * lmax + 8, 4 * lmax + 8);
        let mut out = Self::zeros(lmax);
        for (node, w) in rule.nodes.iter().zip(&rule.weights) {
            let u = Vector3::new(node[0], node[1], node[2]);
            let v = f(&u) * w;
            for (c, y) in out.coeffs.iter_mut().zip(real_sph_harm(lmax, &u)) {
                *c += v * y;
            }
        }
        out
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0] / (4.0 * PI).sqrt()
    }
}

/// Values of all real spherical harmonics Y_lm, l <= lmax, at unit vector `u`,
/// ordered by `l*l + l + m`.
pub fn real_sph_harm(lmax: usize, u: &Vector3<f64>) -> Vec<f64> {
    let (x, y, z) = (u.x, u.y, u.z);
    let size = (lmax + 1) * (lmax + 1);
    let mut out = vec![0.0; size];
    // (x + i y)^m carries the sin^m(theta) e^{i m phi} factor.
    let mut re = 1.0;
    let mut im = 0.0;
    // p_mm without the sin^m factor.
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            let (nr, ni) = (re * x - im * y, re * y + im * x);
            re = nr;
            im = ni;
        }
        let mut p_prev2 = 0.0;
        let mut p_prev = pmm;
        for l in m..=lmax {
            let p = if l == m {
                pmm
            } else if l == m + 1 {
                ((2 * m + 3) as f64).sqrt() * z * pmm
            } else {
                let lf = l as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
                a * (z * p_prev - b * p_prev2)
            };
            if l > m {
                p_prev2 = p_prev;
                p_prev = p;
            }
            let base = l * l + l;
            if m == 0 {
                out[base] = p;
            } else {
                out[base + m] = std::f64::consts::SQRT_2 * p * re;
                out[base - m] = std::f64::consts::SQRT_2 * p * im;
            }
        }
    }
    out
}

/// A band-limited function on the unit sphere of R^2 or R^3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Harmonic {
    Circle(FourierSeries),
    Sphere(ShExpansion),
}

impl Harmonic {
    pub fn dim(&self) -> usize {
        match self {
            Harmonic::Circle(_) => 2,
            Harmonic::Sphere(_) => 3,
        }
    }

    pub fn bandwidth(&self) -> usize {
        match self {
            Harmonic::Circle(f) => f.bandwidth(),
            Harmonic::Sphere(s) => s.lmax,
        }
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        match dim {
            2 => Ok(Harmonic::Circle(FourierSeries::constant(c))),
            3 => Ok(Harmonic::Sphere(ShExpansion::constant(c))),
            d => Err(Error::Unsupported(format!("harmonic expansions on S^{}", d - 1))),
        }
    }

    /// Project `f` (a function of a unit vector) onto degrees <= `bandwidth`.
    pub fn project(dim: usize, bandwidth: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        match dim {
            2 => Ok(Harmonic::Circle(FourierSeries::project(bandwidth, |t| f(&[t.cos(), t.sin()])))),
            3 => Ok(Harmonic::Sphere(ShExpansion::project(bandwidth, |u| f(&[u.x, u.y, u.z])))),
            d => Err(Error::Unsupported(format!("harmonic expansions on S^{}", d - 1))),
        }
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            Harmonic::Circle(f) => {
                let r = (u[0] * u[0] + u[1] * u[1]).sqrt();
                f.eval_unit(u[0] / r, u[1] / r)
            }
            Harmonic::Sphere(s) => s.eval(&Vector3::new(u[0], u[1], u[2])),
        }
    }

    pub fn eval_vec(&self, u: &DVector<f64>) -> f64 {
        self.eval(u.as_slice())
    }

    /// Mean with respect to the probability measure on the sphere.
    pub fn mean(&self) -> f64 {
        match self {
            Harmonic::Circle(f) => f.mean(),
            Harmonic::Sphere(s) => s.mean(),
        }
    }

    /// Largest absolute coefficient at an odd degree.
    pub fn odd_part(&self) -> f64 {
        match self {
            Harmonic::Circle(f) => (1..f.cos.len())
                .step_by(2)
                .map(|k| f.cos[k].abs().max(f.sin[k].abs()))
                .fold(0.0, f64::max),
            Harmonic::Sphere(s) => (1..=s.lmax)
                .step_by(2)
                .flat_map(|l| (l * l..(l + 1) * (l + 1)).map(|i| s.coeffs[i].abs()))
                .fold(0.0, f64::max),
        }
    }

    pub fn coefficient_scale(&self) -> f64 {
        match self {
            Harmonic::Circle(f) => f.cos.iter().chain(&f.sin).fold(0.0f64, |a, b| a.max(b.abs())),
            Harmonic::Sphere(s) => s.coeffs.iter().fold(0.0f64, |a, b| a.max(b.abs())),
        }
    }

    /// Multiply the degree-d block by `mult(d)`.
    pub fn map_degrees(&self, mult: impl Fn(usize) -> f64) -> Self {
        match self {
            Harmonic::Circle(f) => Harmonic::Circle(FourierSeries {
                cos: f.cos.iter().enumerate().map(|(k, c)| c * mult(k)).collect(),
                sin: f.sin.iter().enumerate().map(|(k, c)| c * mult(k)).collect(),
            }),
            Harmonic::Sphere(s) => {
                let mut out = s.clone();
                for l in 0..=s.lmax {
                    let m = mult(l);
                    for i in l * l..(l + 1) * (l + 1) {
                        out.coeffs[i] *= m;
                    }
                }
                Harmonic::Sphere(out)
            }
        }
    }

    /// Sum of two expansions of the same kind (padded to the larger bandwidth).
    pub fn add(&self, other: &Harmonic) -> Result<Harmonic> {
        match (self, other) {
            (Harmonic::Circle(a), Harmonic::Circle(b)) => {
                let n = a.cos.len().max(b.cos.len());
                let get = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
                Ok(Harmonic::Circle(FourierSeries {
                    cos: (0..n).map(|i| get(&a.cos, i) + get(&b.cos, i)).collect(),
                    sin: (0..n).map(|i| get(&a.sin, i) + get(&b.sin, i)).collect(),
                }))
            }
            (Harmonic::Sphere(a), Harmonic::Sphere(b)) => {
                let lmax = a.lmax.max(b.lmax);
                let n = (lmax + 1) * (lmax + 1);
                let get = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
                Ok(Harmonic::Sphere(ShExpansion {
                    lmax,
                    coeffs: (0..n).map(|i| get(&a.coeffs, i) + get(&b.coeffs, i)).collect(),
                }))
            }
            _ => Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() }),
        }
    }

    /// Dense grid of (direction, quadrature weight) pairs on the sphere with
    /// weights normalized to total mass 1.
    pub(crate) fn probability_grid(dim: usize) -> Vec<(Vec<f64>, f64)> {
        match dim {
            2 => {
                let (angles, _) = trapezoid_circle(4096);
                let w = 1.0 / angles.len() as f64;
                angles.iter().map(|t| (vec![t.cos(), t.sin()], w)).collect()
            }
            _ => {
                let (ts, wt) = gauss_legendre_on(160, 0.0, PI);
                let (phis, h) = trapezoid_circle(320);
                let mut out = Vec::with_capacity(ts.len() * phis.len());
                for (t, w) in ts.iter().zip(&wt) {
                    let (s, c) = t.sin_cos();
                    for p in &phis {
                        out.push((vec![s * p.cos(), s * p.sin(), c], w * s * h / (4.0 * PI)));
                    }
                }
                out
            }
        }
    }
}
