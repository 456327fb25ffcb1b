//! Gauss–Legendre, periodic trapezoid and product rules on S^1, S^2, S^3.

use std::f64::consts::PI;

use nalgebra::{DVector, Matrix3, Vector3};

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = ((i as f64 + 0.75) / (n as f64 + 0.5) * PI).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (x.iter().map(|t| mid + half * t).collect(), w.iter().map(|v| v * half).collect())
}

pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Equispaced nodes on [0, 2 pi) with weight 2 pi / n each.
pub fn trapezoid_circle(n: usize) -> (Vec<f64>, f64) {
    let h = 2.0 * PI / n as f64;
    ((0..n).map(|i| i as f64 * h).collect(), h)
}

/// Quadrature on a unit sphere S^{d-1} in R^d, unnormalized surface measure.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dim: usize,
    pub nodes: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Trapezoid on S^1 starting at angle `offset`.
    pub fn circle(n: usize, offset: f64) -> Self {
        let (angles, h) = trapezoid_circle(n);
        let nodes = angles
            .iter()
            .map(|t| DVector::from_vec(vec![(t + offset).cos(), (t + offset).sin()]))
            .collect();
        Self { dim: 2, nodes, weights: vec![h; n] }
    }

    /// Gauss–Legendre in the polar angle (split at the equator) times a
    /// trapezoid in azimuth; the pole is rotated onto `axis`.
    ///
    /// Integrands of the form g(theta) * k(phi) with kinks or square-root
    /// behaviour in z = cos(theta) stay smooth in (theta, phi), which is why
    /// the polar rule runs in theta rather than z.
    pub fn sphere2(n_theta: usize, n_phi: usize, axis: &Vector3<f64>) -> Self {
        let rot = frame_with_pole(axis);
        let half = n_theta.div_ceil(2).max(1);
        let (t1, w1) = gauss_legendre_on(half, 0.0, PI / 2.0);
        let (t2, w2) = gauss_legendre_on(half, PI / 2.0, PI);
        let thetas: Vec<(f64, f64)> = t1.into_iter().zip(w1).chain(t2.into_iter().zip(w2)).collect();
        let (phis, h) = trapezoid_circle(n_phi);
        let mut nodes = Vec::with_capacity(thetas.len() * n_phi);
        let mut weights = Vec::with_capacity(thetas.len() * n_phi);
        for &(th, wt) in &thetas {
            let (s, c) = th.sin_cos();
            for &ph in &phis {
                let local = Vector3::new(s * ph.cos(), s * ph.sin(), c);
                let v = rot * local;
                nodes.push(DVector::from_column_slice(v.as_slice()));
                weights.push(wt * s * h);
            }
        }
        Self { dim: 3, nodes, weights }
    }

    /// Gauss–Legendre in z = cos(theta) times a trapezoid in azimuth: exact
    /// for spherical polynomials of degree < min(2 n_z, n_phi).
    pub fn sphere2_exact(n_z: usize, n_phi: usize) -> Self {
        let (zs, wz) = gauss_legendre(n_z);
        let (phis, h) = trapezoid_circle(n_phi);
        let mut nodes = Vec::with_capacity(n_z * n_phi);
        let mut weights = Vec::with_capacity(n_z * n_phi);
        for (z, w) in zs.iter().zip(&wz) {
            let s = (1.0 - z * z).max(0.0).sqrt();
            for ph in &phis {
                nodes.push(DVector::from_vec(vec![s * ph.cos(), s * ph.sin(), *z]));
                weights.push(w * h);
            }
        }
        Self { dim: 3, nodes, weights }
    }

    /// S^3 via u = (sqrt(1-t) e^{i a}, sqrt(t) e^{i b}); the surface measure is dt da db / 2.
    pub fn sphere3(n_t: usize, n_angle: usize) -> Self {
        let (ts, wt) = gauss_legendre_on(n_t, 0.0, 1.0);
        let (angles, h) = trapezoid_circle(n_angle);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (t, w) in ts.iter().zip(&wt) {
            let (r1, r2) = ((1.0 - t).sqrt(), t.sqrt());
            for a in &angles {
                for b in &angles {
                    nodes.push(DVector::from_vec(vec![r1 * a.cos(), r1 * a.sin(), r2 * b.cos(), r2 * b.sin()]));
                    weights.push(0.5 * w * h * h);
                }
            }
        }
        Self { dim: 4, nodes, weights }
    }

    /// Default rule on S^{d-1} with resolution scaled by `level` (1 = default).
    pub fn standard(dim: usize, level: usize) -> Self {
        let level = level.max(1);
        match dim {
            2 => Self::circle(256 * level, 0.0),
            3 => Self::sphere2(48 * level, 96 * level, &Vector3::z()),
            4 => Self::sphere3(24 * level, 48 * level),
            _ => panic!("sphere rule for dimension {dim} not supported"),
        }
    }

    pub fn integrate(&self, mut f: impl FnMut(&DVector<f64>) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Rotation whose third column is `axis` (normalized).
pub fn frame_with_pole(axis: &Vector3<f64>) -> Matrix3<f64> {
    let z = axis.normalize();
    let helper = if z.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let x = (helper - z * z.dot(&helper)).normalize();
    let y = z.cross(&x);
    Matrix3::from_columns(&[x, y, z])
}
