use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::harmonics::Harmonic;
use super::transform::{cosine_transform, inverse_cosine_transform_of};
use crate::constants::{ball_volume, sphere_volume};
use crate::convex::body::Atom;
use crate::convex::ConvexBody;
use crate::error::{Error, Result};

/// `E |<u, e>|` for u uniform on S^{m-1}, i.e. `T_1 1` on Gr(1, R^m).
pub(crate) fn mean_abs_cos(m: usize) -> f64 {
    2.0 * ball_volume(m - 1) / sphere_volume(m - 1)
}

#[derive(Debug, Clone)]
enum Law {
    Uniform,
    Density { f: Harmonic, envelope: f64 },
}

/// A nonnegative piece `mass * law` pushed into V through `frame`, with a sign.
#[derive(Debug, Clone)]
struct Component {
    frame: DMatrix<f64>,
    law: Law,
    mass: f64,
    sign: f64,
}

/// Even signed measure on normal directions of affine hyperplanes in V.
///
/// The hyperplane measure is `measure(du) x dt` on `{x : <u, x> = t}`; its
/// 1-density is `xi -> int |<u, xi>| measure(du)`, which is `T_1` of the
/// measure's density against the Haar probability on Gr(1, V).
#[derive(Debug, Clone)]
pub struct NormalMeasure1 {
    ambient: usize,
    components: Vec<Component>,
    sources: Vec<(DMatrix<f64>, Harmonic)>,
}

impl NormalMeasure1 {
    pub fn zero(ambient: usize) -> Self {
        Self { ambient, components: Vec::new(), sources: Vec::new() }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Uniform density `c` on the unit sphere of the span of `frame`'s
    /// orthonormal columns. With `c = sigma_{m-1} / (2 v_{m-1})` its 1-density
    /// is `xi -> |pi xi|`.
    pub fn pullback_uniform(frame: DMatrix<f64>, c: f64) -> Self {
        let ambient = frame.nrows();
        let mut out = Self::zero(ambient);
        if c != 0.0 {
            out.components.push(Component { frame, law: Law::Uniform, mass: c.abs(), sign: c.signum() });
        }
        out
    }

    /// Point mass at the line through `normal`.
    pub fn atom(normal: &[f64], mass: f64) -> Self {
        let v = DVector::from_column_slice(normal);
        let n = v.norm();
        let frame = DMatrix::from_columns(&[v / n]);
        Self::pullback_uniform(frame, mass)
    }

    /// Density `f` (against the Haar probability on Gr(1, V)), Jordan split.
    pub fn from_harmonic(f: Harmonic) -> Self {
        let dim = f.dim();
        let frame = DMatrix::identity(dim, dim);
        let mut out = Self::zero(dim);
        out.sources.push((frame.clone(), f.clone()));
        let c0 = f.mean();
        let deviation = f.map_degrees(|d| if d == 0 { 0.0 } else { 1.0 }).coefficient_scale();
        if deviation <= 1e-14 * c0.abs() {
            if c0 != 0.0 {
                out.components.push(Component { frame, law: Law::Uniform, mass: c0.abs(), sign: c0.signum() });
            }
            return out;
        }
        let (mut pos, mut neg, mut max_pos, mut max_neg) = (0.0, 0.0, 0.0f64, 0.0f64);
        for (u, w) in Harmonic::probability_grid(dim) {
            let v = f.eval(&u);
            if v > 0.0 {
                pos += w * v;
                max_pos = max_pos.max(v);
            } else {
                neg -= w * v;
                max_neg = max_neg.max(-v);
            }
        }
        if neg <= 1e-12 * pos {
            let envelope = 1.05 * max_pos;
            out.components.push(Component { frame, law: Law::Density { f, envelope }, mass: c0, sign: 1.0 });
            return out;
        }
        if pos > 0.0 {
            out.components.push(Component {
                frame: frame.clone(),
                law: Law::Density { f: f.clone(), envelope: 1.05 * max_pos },
                mass: pos,
                sign: 1.0,
            });
        }
        if neg > 0.0 {
            out.components.push(Component {
                frame,
                law: Law::Density { f, envelope: 1.05 * max_neg },
                mass: neg,
                sign: -1.0,
            });
        }
        out
    }

    /// Measure whose 1-density is `d_1(body)`: segments become atoms, the
    /// smooth remainder goes through the inverse cosine transform (dims 2, 3).
    pub fn of_body(body: &ConvexBody, bandwidth: usize) -> Result<Self> {
        body.validate()?;
        let n = body.dim();
        let mut out = Self::zero(n);
        let mut smooth: Vec<(f64, DMatrix<f64>)> = Vec::new();
        for (c, atom) in body.atoms() {
            match atom {
                Atom::Point => {}
                Atom::Segment(v) => {
                    let len = v.norm();
                    if len > 0.0 && c > 0.0 {
                        out = out.plus(Self::atom(v.as_slice(), 2.0 * len * c));
                    }
                }
                Atom::Ellipsoid { q, .. } => smooth.push((c, q)),
            }
        }
        if !smooth.is_empty() {
            if n != 2 && n != 3 {
                return Err(Error::Unsupported(format!("smooth normal measures in R^{n}")));
            }
            let f = inverse_cosine_transform_of(n, bandwidth, |u| {
                smooth
                    .iter()
                    .map(|(c, q)| {
                        let mut s = 0.0;
                        for i in 0..n {
                            for j in 0..n {
                                s += u[i] * q[(i, j)] * u[j];
                            }
                        }
                        2.0 * c * s.max(0.0).sqrt()
                    })
                    .sum()
            })?;
            out = out.plus(Self::from_harmonic(f));
        }
        Ok(out)
    }

    pub fn plus(mut self, other: Self) -> Self {
        self.components.extend(other.components);
        self.sources.extend(other.sources);
        self
    }

    /// Total variation.
    pub fn total_mass(&self) -> f64 {
        self.components.iter().map(|c| c.mass).sum()
    }

    /// The associated 1-density at `xi`: `int |<u, xi>| d measure(u)`.
    pub fn t1_at(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.ambient {
            return Err(Error::DimensionMismatch { expected: self.ambient, got: xi.len() });
        }
        let x = DVector::from_column_slice(xi);
        let mut total = 0.0;
        for c in &self.components {
            if let Law::Uniform = c.law {
                let p = c.frame.tr_mul(&x);
                total += c.sign * c.mass * p.norm() * mean_abs_cos(c.frame.ncols());
            }
        }
        for (frame, f) in &self.sources {
            let p = frame.tr_mul(&x);
            let r = p.norm();
            if r > 0.0 {
                total += cosine_transform(f)?.eval((p / r).as_slice()) * r;
            }
        }
        Ok(total)
    }

    /// Draws a unit normal into `out` from `|measure| / total_mass`; returns its sign.
    pub(crate) fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> f64 {
        let total = self.total_mass();
        let mut pick = rng.random::<f64>() * total;
        let mut chosen = self.components.last().expect("nonzero measure");
        for c in &self.components {
            if pick < c.mass {
                chosen = c;
                break;
            }
            pick -= c.mass;
        }
        let m = chosen.frame.ncols();
        let mut u = [0.0f64; 8];
        let u = &mut u[..m];
        loop {
            let mut r2 = 0.0;
            for x in u.iter_mut() {
                *x = rng.sample(StandardNormal);
                r2 += *x * *x;
            }
            if r2 < 1e-300 {
                continue;
            }
            let r = r2.sqrt();
            u.iter_mut().for_each(|x| *x /= r);
            match &chosen.law {
                Law::Uniform => break,
                Law::Density { f, envelope } => {
                    let v = chosen.sign * f.eval(u);
                    if v > 0.0 && rng.random::<f64>() * envelope < v {
                        break;
                    }
                }
            }
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..m).map(|j| chosen.frame[(i, j)] * u[j]).sum();
        }
        chosen.sign
    }
}
