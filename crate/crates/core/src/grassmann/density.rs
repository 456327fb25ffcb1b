use nalgebra::{DMatrix, DVector};

use super::harmonics::Harmonic;
use crate::convex::{projected_mixed_volume, ConvexBody};
use crate::error::{Error, Result};
use crate::linalg::orthonormalize_columns;

/// Gauge function on Gr(k, V).
#[derive(Debug, Clone)]
pub enum Gauge {
    /// Constant gauge (a multiple of the Euclidean k-volume).
    Constant(f64),
    /// Degree-1 gauge given by an even harmonic expansion.
    Harmonic(Harmonic),
    /// Width function s_A(H) = V_1(pi_H A).
    Width(ConvexBody),
    /// H -> V_k(pi_H A_1, ..., pi_H A_k).
    ProjectedMixedVolume(Vec<ConvexBody>),
}

/// Translation-invariant k-density `delta(xi_1 ^ .. ^ xi_k) = gauge(H) vol_k(xi)`.
#[derive(Debug, Clone)]
pub struct GaugeDensity {
    pub degree: usize,
    pub ambient: usize,
    pub gauge: Gauge,
}

impl GaugeDensity {
    pub fn constant(degree: usize, ambient: usize, c: f64) -> Self {
        Self { degree, ambient, gauge: Gauge::Constant(c) }
    }

    pub fn harmonic(h: Harmonic) -> Self {
        Self { degree: 1, ambient: h.dim(), gauge: Gauge::Harmonic(h) }
    }

    /// Gauge at span of the orthonormal columns of `frame` (n x k).
    pub fn gauge_at(&self, frame: &DMatrix<f64>) -> Result<f64> {
        if frame.ncols() != self.degree || frame.nrows() != self.ambient {
            return Err(Error::DimensionMismatch { expected: self.degree, got: frame.ncols() });
        }
        match &self.gauge {
            Gauge::Constant(c) => Ok(*c),
            Gauge::Harmonic(h) => Ok(h.eval(frame.column(0).as_slice())),
            Gauge::Width(body) => Ok(body.width(frame.column(0).as_slice())),
            Gauge::ProjectedMixedVolume(bodies) => projected_mixed_volume(bodies, frame),
        }
    }

    /// Degree-1 convenience: gauge of the line through `u` (any nonzero vector).
    pub fn gauge_at_direction(&self, u: &[f64]) -> Result<f64> {
        let v = DVector::from_column_slice(u);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidInput("zero direction".into()));
        }
        self.gauge_at(&DMatrix::from_columns(&[v / norm]))
    }

    /// Value on the k-vector xi_1 ^ .. ^ xi_k; zero if the vectors are dependent.
    pub fn evaluate(&self, vectors: &[DVector<f64>]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(Error::DimensionMismatch { expected: self.degree, got: vectors.len() });
        }
        let m = DMatrix::from_columns(vectors);
        let vol = (m.transpose() * &m).determinant().max(0.0).sqrt();
        if vol == 0.0 {
            return Ok(0.0);
        }
        let Some(frame) = orthonormalize_columns(vectors) else { return Ok(0.0) };
        Ok(self.gauge_at(&frame)? * vol)
    }

    /// Even harmonic expansion of a degree-1 gauge (dims 2 and 3).
    pub fn to_harmonic(&self, bandwidth: usize) -> Result<Harmonic> {
        if self.degree != 1 {
            return Err(Error::Unsupported("harmonic expansion of a k-density with k > 1".into()));
        }
        match &self.gauge {
            Gauge::Harmonic(h) => Ok(h.clone()),
            Gauge::Constant(c) => Harmonic::constant(self.ambient, *c),
            _ => Harmonic::project(self.ambient, bandwidth, |u| {
                self.gauge_at_direction(u).expect("degree-1 gauge evaluates")
            }),
        }
    }
}

/// d_1(A): gauge = width of A.
pub fn d1(body: &ConvexBody) -> GaugeDensity {
    GaugeDensity { degree: 1, ambient: body.dim(), gauge: Gauge::Width(body.clone()) }
}

/// d_k(A_1, ..., A_k): gauge = mixed k-volume of the projections.
pub fn dk_mixed(bodies: &[ConvexBody]) -> Result<GaugeDensity> {
    let Some(first) = bodies.first() else {
        return Err(Error::InvalidInput("dk_mixed needs at least one body".into()));
    };
    let n = first.dim();
    if let Some(b) = bodies.iter().find(|b| b.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: b.dim() });
    }
    if bodies.len() > n {
        return Err(Error::InvalidInput(format!("{} bodies in R^{n}", bodies.len())));
    }
    Ok(GaugeDensity { degree: bodies.len(), ambient: n, gauge: Gauge::ProjectedMixedVolume(bodies.to_vec()) })
}
