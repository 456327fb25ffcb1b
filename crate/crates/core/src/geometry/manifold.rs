use std::f64::consts::PI;

use nalgebra::DVector;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, trapezoid_circle};

/// One factor of a product manifold, embedded as a unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Circle,
    Sphere2,
}

impl Factor {
    pub fn dim(self) -> usize {
        match self {
            Factor::Circle => 1,
            Factor::Sphere2 => 2,
        }
    }

    pub fn ambient(self) -> usize {
        self.dim() + 1
    }

    pub fn volume(self) -> f64 {
        match self {
            Factor::Circle => 2.0 * PI,
            Factor::Sphere2 => 4.0 * PI,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Factor::Circle => "s1",
            Factor::Sphere2 => "s2",
        }
    }
}

/// Quadrature sizes: trapezoid nodes per circle, Gauss–Legendre nodes in
/// z = cos(theta) and trapezoid nodes in azimuth per 2-sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSizes {
    pub circle: usize,
    pub sphere_z: usize,
    pub sphere_phi: usize,
}

impl Default for QuadratureSizes {
    fn default() -> Self {
        Self { circle: 64, sphere_z: 50, sphere_phi: 100 }
    }
}

/// A point given by chart coordinates (angle per circle, (theta, phi) per
/// sphere) and its position in the ambient product of Euclidean spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub chart: Vec<f64>,
    pub ambient: DVector<f64>,
}

/// Product of circles and round 2-spheres, each of radius 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    factors: Vec<Factor>,
    quadrature: QuadratureSizes,
}

impl Manifold {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("manifold needs at least one factor".into()));
        }
        Ok(Self { factors, quadrature: QuadratureSizes::default() })
    }

    pub fn circle() -> Self {
        Self { factors: vec![Factor::Circle], quadrature: QuadratureSizes::default() }
    }

    pub fn torus(n: usize) -> Self {
        Self { factors: vec![Factor::Circle; n.max(1)], quadrature: QuadratureSizes::default() }
    }

    pub fn sphere2() -> Self {
        Self { factors: vec![Factor::Sphere2], quadrature: QuadratureSizes::default() }
    }

    /// Accepts `circle`, `s1`, `torus<n>`, `t<n>`, `s2`, `sphere`, and
    /// products such as `s1xs2`.
    pub fn parse(descriptor: &str) -> Result<Self> {
        let d = descriptor.trim().to_ascii_lowercase();
        let unknown = || {
            Error::InvalidInput(format!(
                "unknown manifold '{descriptor}'; supported: circle, s1, torus<n>, t<n>, s2, sphere, products like s1xs2"
            ))
        };
        match d.as_str() {
            "circle" | "s1" => return Ok(Self::circle()),
            "s2" | "sphere" => return Ok(Self::sphere2()),
            _ => {}
        }
        for prefix in ["torus", "t"] {
            if let Some(rest) = d.strip_prefix(prefix) {
                if let Ok(n) = rest.parse::<usize>() {
                    if (1..=6).contains(&n) {
                        return Ok(Self::torus(n));
                    }
                    return Err(Error::Unsupported(format!("torus of dimension {n}")));
                }
            }
        }
        if d.contains('x') {
            let factors = d
                .split('x')
                .map(|p| match p {
                    "s1" | "circle" => Ok(Factor::Circle),
                    "s2" | "sphere" => Ok(Factor::Sphere2),
                    _ => Err(unknown()),
                })
                .collect::<Result<Vec<_>>>()?;
            return Self::new(factors);
        }
        Err(unknown())
    }

    pub fn descriptor(&self) -> String {
        if self.factors.iter().all(|f| *f == Factor::Circle) {
            return match self.factors.len() {
                1 => "circle".into(),
                n => format!("torus{n}"),
            };
        }
        if self.factors == [Factor::Sphere2] {
            return "s2".into();
        }
        self.factors.iter().map(|f| f.name()).collect::<Vec<_>>().join("x")
    }

    pub fn with_quadrature(mut self, sizes: QuadratureSizes) -> Self {
        self.quadrature = sizes;
        self
    }

    pub fn quadrature_sizes(&self) -> QuadratureSizes {
        self.quadrature
    }

    /// Same manifold with every quadrature size doubled.
    pub fn refined(&self) -> Self {
        let q = self.quadrature;
        self.clone()
            .with_quadrature(QuadratureSizes { circle: 2 * q.circle, sphere_z: 2 * q.sphere_z, sphere_phi: 2 * q.sphere_phi })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).sum()
    }

    pub fn ambient_dim(&self) -> usize {
        self.factors.iter().map(|f| f.ambient()).sum()
    }

    pub fn volume(&self) -> f64 {
        self.factors.iter().map(|f| f.volume()).product()
    }

    /// Offsets of each factor's block in ambient coordinates.
    pub fn ambient_offsets(&self) -> Vec<usize> {
        self.offsets(|f| f.ambient())
    }

    /// Offsets of each factor's block in chart (and tangent) coordinates.
    pub fn chart_offsets(&self) -> Vec<usize> {
        self.offsets(|f| f.dim())
    }

    fn offsets(&self, size: impl Fn(Factor) -> usize) -> Vec<usize> {
        let mut acc = 0;
        self.factors
            .iter()
            .map(|f| {
                let o = acc;
                acc += size(*f);
                o
            })
            .collect()
    }

    pub fn point(&self, chart: &[f64]) -> Result<Point> {
        if chart.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: chart.len() });
        }
        let mut ambient = Vec::with_capacity(self.ambient_dim());
        let mut c = 0;
        for f in &self.factors {
            match f {
                Factor::Circle => {
                    ambient.extend([chart[c].cos(), chart[c].sin()]);
                    c += 1;
                }
                Factor::Sphere2 => {
                    let (st, ct) = chart[c].sin_cos();
                    let (sp, cp) = chart[c + 1].sin_cos();
                    ambient.extend([st * cp, st * sp, ct]);
                    c += 2;
                }
            }
        }
        Ok(Point { chart: chart.to_vec(), ambient: DVector::from_vec(ambient) })
    }

    /// Nearest point of the manifold to an ambient vector (blockwise normalization).
    pub fn retract(&self, x: &DVector<f64>) -> Point {
        let mut ambient = x.clone();
        let mut chart = Vec::with_capacity(self.dim());
        for (f, o) in self.factors.iter().zip(self.ambient_offsets()) {
            let k = f.ambient();
            let mut block = ambient.rows_mut(o, k);
            let n = block.norm();
            if n > 0.0 {
                block /= n;
            } else {
                block.fill(0.0);
                block[0] = 1.0;
            }
            match f {
                Factor::Circle => chart.push(block[1].atan2(block[0])),
                Factor::Sphere2 => {
                    chart.push(block[2].clamp(-1.0, 1.0).acos());
                    chart.push(block[1].atan2(block[0]));
                }
            }
        }
        Point { chart, ambient }
    }

    /// Orthonormal tangent basis at `p` as columns of an ambient x n matrix,
    /// block diagonal over the factors.
    pub fn tangent_frame(&self, p: &Point) -> DMatrix<f64> {
        let mut frame = DMatrix::zeros(self.ambient_dim(), self.dim());
        let (mut a, mut c) = (0, 0);
        for f in &self.factors {
            let x = p.ambient.rows(a, f.ambient());
            match f {
                Factor::Circle => {
                    frame[(a, c)] = -x[1];
                    frame[(a + 1, c)] = x[0];
                }
                Factor::Sphere2 => {
                    let helper = if x[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
                    let d: f64 = (0..3).map(|i| helper[i] * x[i]).sum();
                    let mut e1: Vec<f64> = (0..3).map(|i| helper[i] - d * x[i]).collect();
                    let n = e1.iter().map(|v| v * v).sum::<f64>().sqrt();
                    e1.iter_mut().for_each(|v| *v /= n);
                    let e2 = [x[1] * e1[2] - x[2] * e1[1], x[2] * e1[0] - x[0] * e1[2], x[0] * e1[1] - x[1] * e1[0]];
                    for i in 0..3 {
                        frame[(a + i, c)] = e1[i];
                        frame[(a + i, c + 1)] = e2[i];
                    }
                }
            }
            a += f.ambient();
            c += f.dim();
        }
        frame
    }

    /// Partial derivatives of the embedding with respect to chart coordinates
    /// (ambient x n).
    pub fn chart_jacobian(&self, p: &Point) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.ambient_dim(), self.dim());
        let (mut a, mut c) = (0, 0);
        for f in &self.factors {
            match f {
                Factor::Circle => {
                    let t = p.chart[c];
                    jac[(a, c)] = -t.sin();
                    jac[(a + 1, c)] = t.cos();
                }
                Factor::Sphere2 => {
                    let (st, ct) = p.chart[c].sin_cos();
                    let (sp, cp) = p.chart[c + 1].sin_cos();
                    jac[(a, c)] = ct * cp;
                    jac[(a + 1, c)] = ct * sp;
                    jac[(a + 2, c)] = -st;
                    jac[(a, c + 1)] = -st * sp;
                    jac[(a + 1, c + 1)] = st * cp;
                }
            }
            a += f.ambient();
            c += f.dim();
        }
        jac
    }

    /// Product quadrature: (point, Riemannian volume weight) pairs.
    pub fn nodes(&self) -> Vec<(Point, f64)> {
        let rules: Vec<Vec<(Vec<f64>, f64)>> = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::Circle => {
                    let (ts, h) = trapezoid_circle(self.quadrature.circle);
                    ts.into_iter().map(|t| (vec![t], h)).collect()
                }
                Factor::Sphere2 => {
                    let (zs, wz) = gauss_legendre(self.quadrature.sphere_z);
                    let (ps, h) = trapezoid_circle(self.quadrature.sphere_phi);
                    let mut out = Vec::with_capacity(zs.len() * ps.len());
                    for (z, w) in zs.iter().zip(&wz) {
                        for p in &ps {
                            out.push((vec![z.clamp(-1.0, 1.0).acos(), *p], w * h));
                        }
                    }
                    out
                }
            })
            .collect();
        let mut combos: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
        for rule in &rules {
            let mut next = Vec::with_capacity(combos.len() * rule.len());
            for (chart, w) in &combos {
                for (c, v) in rule {
                    let mut ch = chart.clone();
                    ch.extend(c);
                    next.push((ch, w * v));
                }
            }
            combos = next;
        }
        combos
            .into_iter()
            .map(|(chart, w)| (self.point(&chart).expect("chart length matches"), w))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_volumes() {
        for (m, v) in [
            (Manifold::circle(), 2.0 * PI),
            (Manifold::torus(2), 4.0 * PI * PI),
            (Manifold::sphere2(), 4.0 * PI),
            (Manifold::parse("s1xs2").unwrap(), 8.0 * PI * PI),
        ] {
            let total: f64 = m.nodes().iter().map(|(_, w)| w).sum();
            assert!((total - v).abs() < 1e-8 * v, "{}", m.descriptor());
            assert!((m.volume() - v).abs() < 1e-12 * v);
        }
    }

    #[test]
    fn descriptors_round_trip() {
        for d in ["circle", "torus2", "torus3", "s2", "s1xs2"] {
            assert_eq!(Manifold::parse(d).unwrap().descriptor(), d);
        }
        assert_eq!(Manifold::parse("T3").unwrap().dim(), 3);
        assert!(matches!(Manifold::parse("klein"), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn frames_are_orthonormal_and_tangent() {
        let m = Manifold::parse("s1xs2").unwrap();
        for chart in [[0.3, 0.0, 0.0], [1.0, 1.2, -2.0], [2.0, PI, 0.5]] {
            let p = m.point(&chart).unwrap();
            let f = m.tangent_frame(&p);
            assert!((f.transpose() * &f - DMatrix::identity(3, 3)).amax() < 1e-14);
            // tangent to each factor sphere
            assert!(f.column(0).rows(0, 2).dot(&p.ambient.rows(0, 2)).abs() < 1e-14);
            for c in 1..3 {
                assert!(f.column(c).rows(2, 3).dot(&p.ambient.rows(2, 3)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn retract_inverts_point() {
        let m = Manifold::parse("s1xs2").unwrap();
        let p = m.point(&[0.4, 1.1, -0.7]).unwrap();
        let q = m.retract(&(&p.ambient * 1.0));
        assert!((q.ambient - &p.ambient).amax() < 1e-15);
        assert!(q.chart.iter().zip(&p.chart).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}
