use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matrix_from_rows, rows_from_matrix};

/// A compact convex body, centrally symmetric about the origin, described
/// by its support function.
///
/// JSON form (`type` tag, snake case):
///
/// ```json
/// {"type":"ellipsoid","Q":[[4,0],[0,1]]}
/// {"type":"segment","v":[1,0]}
/// {"type":"ball","dim":3,"r":1.0}
/// {"type":"zonotope","generators":[[1,0],[0,1]]}
/// {"type":"minkowski_sum","parts":[{"coef":1.0,"body":{"type":"ball","dim":2,"r":1.0}}]}
/// ```
///
/// A segment `v` is the body `[-v, v]`; a zonotope is the Minkowski sum of
/// the segments `[-g, g]` over its generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConvexBody {
    Ellipsoid {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
    },
    Segment {
        v: Vec<f64>,
    },
    Ball {
        dim: usize,
        r: f64,
    },
    Zonotope {
        generators: Vec<Vec<f64>>,
    },
    MinkowskiSum {
        parts: Vec<SumPart>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumPart {
    pub coef: f64,
    pub body: ConvexBody,
}

/// Elementary summand produced by expanding a body multilinearly.
#[derive(Debug, Clone)]
pub(crate) enum Atom {
    Point,
    Segment(DVector<f64>),
    /// Ellipsoid with shape matrix of rank >= 2.
    Ellipsoid { q: DMatrix<f64>, full_rank: bool },
}

const PSD_TOL: f64 = 1e-10;

impl ConvexBody {
    pub fn ellipsoid(q: DMatrix<f64>) -> Result<Self> {
        let body = ConvexBody::Ellipsoid { q: rows_from_matrix(&q) };
        body.validate()?;
        Ok(body)
    }

    pub fn diagonal_ellipsoid(diag: &[f64]) -> Result<Self> {
        Self::ellipsoid(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn segment(v: &[f64]) -> Self {
        ConvexBody::Segment { v: v.to_vec() }
    }

    pub fn ball(dim: usize, r: f64) -> Self {
        ConvexBody::Ball { dim, r }
    }

    pub fn zonotope(generators: Vec<Vec<f64>>) -> Self {
        ConvexBody::Zonotope { generators }
    }

    pub fn sum(parts: Vec<(f64, ConvexBody)>) -> Self {
        ConvexBody::MinkowskiSum {
            parts: parts.into_iter().map(|(coef, body)| SumPart { coef, body }).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let body: ConvexBody =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("body json: {e}")))?;
        body.validate()?;
        Ok(body)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bodies serialize")
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ellipsoid { q } => q.len(),
            ConvexBody::Segment { v } => v.len(),
            ConvexBody::Ball { dim, .. } => *dim,
            ConvexBody::Zonotope { generators } => generators.first().map_or(0, |g| g.len()),
            ConvexBody::MinkowskiSum { parts } => parts.first().map_or(0, |p| p.body.dim()),
        }
    }

    /// Structural checks: consistent dimensions, symmetric PSD shape
    /// matrices, nonnegative radii and coefficients.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::InvalidInput("body of dimension 0".into()));
        }
        match self {
            ConvexBody::Ellipsoid { q } => {
                if q.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidInput("shape matrix is not square".into()));
                }
                let m = matrix_from_rows(q);
                let scale = m.amax().max(1.0);
                if (&m - m.transpose()).amax() > PSD_TOL * scale {
                    return Err(Error::InvalidInput("shape matrix is not symmetric".into()));
                }
                let eig = SymmetricEigen::new(m).eigenvalues;
                if eig.min() < -PSD_TOL * scale {
                    return Err(Error::InvalidInput(format!(
                        "shape matrix is not PSD (min eigenvalue {:.3e})",
                        eig.min()
                    )));
                }
            }
            ConvexBody::Segment { .. } => {}
            ConvexBody::Ball { r, .. } => {
                if *r < 0.0 || !r.is_finite() {
                    return Err(Error::InvalidInput(format!("ball radius {r}")));
                }
            }
            ConvexBody::Zonotope { generators } => {
                if generators.iter().any(|g| g.len() != n) {
                    return Err(Error::DimensionMismatch { expected: n, got: 0 });
                }
            }
            ConvexBody::MinkowskiSum { parts } => {
                for p in parts {
                    if p.coef < 0.0 || !p.coef.is_finite() {
                        return Err(Error::InvalidInput(format!("negative sum coefficient {}", p.coef)));
                    }
                    if p.body.dim() != n {
                        return Err(Error::DimensionMismatch { expected: n, got: p.body.dim() });
                    }
                    p.body.validate()?;
                }
            }
        }
        Ok(())
    }

    /// h(u) = max over the body of <x, u>.
    pub fn support(&self, u: &[f64]) -> f64 {
        match self {
            ConvexBody::Ellipsoid { q } => {
                let mut s = 0.0;
                for (i, row) in q.iter().enumerate() {
                    for (j, qij) in row.iter().enumerate() {
                        s += u[i] * qij * u[j];
                    }
                }
                s.max(0.0).sqrt()
            }
            ConvexBody::Segment { v } => dot(u, v).abs(),
            ConvexBody::Ball { r, .. } => r * norm(u),
            ConvexBody::Zonotope { generators } => generators.iter().map(|g| dot(u, g).abs()).sum(),
            ConvexBody::MinkowskiSum { parts } => parts.iter().map(|p| p.coef * p.body.support(u)).sum(),
        }
    }

    /// Width in direction `u` (unit or not): h(u) + h(-u) = 2 h(u).
    pub fn width(&self, u: &[f64]) -> f64 {
        2.0 * self.support(u)
    }

    /// Orthogonal projection onto span of the (orthonormal) columns of `frame`,
    /// expressed in frame coordinates.
    pub fn project(&self, frame: &DMatrix<f64>) -> ConvexBody {
        let k = frame.ncols();
        let proj = |v: &[f64]| -> Vec<f64> {
            let v = DVector::from_column_slice(v);
            (frame.transpose() * v).iter().copied().collect()
        };
        match self {
            ConvexBody::Ellipsoid { q } => {
                let m = matrix_from_rows(q);
                let p = frame.transpose() * m * frame;
                let p = (&p + p.transpose()) * 0.5;
                ConvexBody::Ellipsoid { q: rows_from_matrix(&p) }
            }
            ConvexBody::Segment { v } => ConvexBody::Segment { v: proj(v) },
            ConvexBody::Ball { r, .. } => ConvexBody::Ball { dim: k, r: *r },
            ConvexBody::Zonotope { generators } => {
                ConvexBody::Zonotope { generators: generators.iter().map(|g| proj(g)).collect() }
            }
            ConvexBody::MinkowskiSum { parts } => ConvexBody::MinkowskiSum {
                parts: parts.iter().map(|p| SumPart { coef: p.coef, body: p.body.project(frame) }).collect(),
            },
        }
    }

    /// Image under a linear map `l` (rows = new coordinates).
    pub fn transform(&self, l: &DMatrix<f64>) -> ConvexBody {
        let map = |v: &[f64]| -> Vec<f64> { (l * DVector::from_column_slice(v)).iter().copied().collect() };
        match self {
            ConvexBody::Ellipsoid { q } => {
                let m = l * matrix_from_rows(q) * l.transpose();
                let m = (&m + m.transpose()) * 0.5;
                ConvexBody::Ellipsoid { q: rows_from_matrix(&m) }
            }
            ConvexBody::Segment { v } => ConvexBody::Segment { v: map(v) },
            ConvexBody::Ball { dim, r } => {
                let m = l * l.transpose() * (r * r);
                let _ = dim;
                ConvexBody::Ellipsoid { q: rows_from_matrix(&m) }
            }
            ConvexBody::Zonotope { generators } => {
                ConvexBody::Zonotope { generators: generators.iter().map(|g| map(g)).collect() }
            }
            ConvexBody::MinkowskiSum { parts } => ConvexBody::MinkowskiSum {
                parts: parts.iter().map(|p| SumPart { coef: p.coef, body: p.body.transform(l) }).collect(),
            },
        }
    }

    /// Multilinear expansion into elementary summands with nonnegative weights.
    pub(crate) fn atoms(&self) -> Vec<(f64, Atom)> {
        let n = self.dim();
        match self {
            ConvexBody::Ellipsoid { q } => vec![(1.0, classify_ellipsoid(matrix_from_rows(q)))],
            ConvexBody::Segment { v } => vec![(1.0, Atom::Segment(DVector::from_column_slice(v)))],
            ConvexBody::Ball { r, .. } => {
                if *r == 0.0 {
                    vec![(1.0, Atom::Point)]
                } else if n == 1 {
                    vec![(1.0, Atom::Segment(DVector::from_element(1, *r)))]
                } else {
                    vec![(1.0, Atom::Ellipsoid { q: DMatrix::identity(n, n) * (r * r), full_rank: true })]
                }
            }
            ConvexBody::Zonotope { generators } => generators
                .iter()
                .map(|g| (1.0, Atom::Segment(DVector::from_column_slice(g))))
                .collect(),
            ConvexBody::MinkowskiSum { parts } => parts
                .iter()
                .filter(|p| p.coef > 0.0)
                .flat_map(|p| p.body.atoms().into_iter().map(move |(c, a)| (c * p.coef, a)))
                .collect(),
        }
    }

    /// Every summand is a segment (the body is a zonotope).
    pub fn is_zonotope(&self) -> bool {
        match self {
            ConvexBody::Segment { .. } | ConvexBody::Zonotope { .. } => true,
            ConvexBody::MinkowskiSum { parts } => parts.iter().all(|p| p.body.is_zonotope()),
            _ => false,
        }
    }

    /// Generators of a zonotope body (scaled by sum coefficients).
    pub fn zonotope_generators(&self) -> Option<Vec<DVector<f64>>> {
        match self {
            ConvexBody::Segment { v } => Some(vec![DVector::from_column_slice(v)]),
            ConvexBody::Zonotope { generators } => {
                Some(generators.iter().map(|g| DVector::from_column_slice(g)).collect())
            }
            ConvexBody::MinkowskiSum { parts } => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.body.zonotope_generators()?.into_iter().map(|g| g * p.coef));
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Radius if the body is a ball or a sum of balls.
    pub fn ball_radius(&self) -> Option<f64> {
        match self {
            ConvexBody::Ball { r, .. } => Some(*r),
            ConvexBody::MinkowskiSum { parts } => {
                parts.iter().map(|p| p.body.ball_radius().map(|r| r * p.coef)).sum()
            }
            _ => None,
        }
    }

    /// The body is an n-dimensional ellipsoid with positive-definite shape.
    pub fn smooth_shape(&self) -> Option<DMatrix<f64>> {
        match self {
            ConvexBody::Ellipsoid { q } => {
                let m = matrix_from_rows(q);
                let eig = SymmetricEigen::new(m.clone()).eigenvalues;
                (eig.min() > 1e-12 * eig.max().max(1e-300)).then_some(m)
            }
            ConvexBody::Ball { dim, r } if *r > 0.0 => Some(DMatrix::identity(*dim, *dim) * (r * r)),
            _ => None,
        }
    }
}

pub(crate) fn classify_ellipsoid(q: DMatrix<f64>) -> Atom {
    let n = q.nrows();
    let eig = SymmetricEigen::new(q.clone());
    let max = eig.eigenvalues.amax();
    if max <= 0.0 {
        return Atom::Point;
    }
    let tol = 1e-10 * max;
    let rank = eig.eigenvalues.iter().filter(|&&l| l > tol).count();
    match rank {
        0 => Atom::Point,
        1 => {
            let (idx, lam) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty");
            Atom::Segment(eig.eigenvectors.column(idx) * lam.sqrt())
        }
        r => Atom::Ellipsoid { q, full_rank: r == n },
    }
}

impl Atom {
    pub(crate) fn project(&self, frame: &DMatrix<f64>) -> Atom {
        match self {
            Atom::Point => Atom::Point,
            Atom::Segment(v) => Atom::Segment(frame.transpose() * v),
            Atom::Ellipsoid { q, .. } => {
                let p = frame.transpose() * q * frame;
                classify_ellipsoid((&p + p.transpose()) * 0.5)
            }
        }
    }

    pub(crate) fn to_body(&self, n: usize) -> ConvexBody {
        match self {
            Atom::Point => ConvexBody::Ball { dim: n, r: 0.0 },
            Atom::Segment(v) => ConvexBody::Segment { v: v.iter().copied().collect() },
            Atom::Ellipsoid { q, .. } => ConvexBody::Ellipsoid { q: rows_from_matrix(q) },
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
