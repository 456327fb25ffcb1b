use nalgebra::DMatrix;
use serde::Serialize;

use super::body::ConvexBody;
use super::mixed::mixed_volume;
use super::volume::exact_volume;
use crate::constants::ball_volume;
use crate::error::{Error, Result};
use crate::linalg::{check_orthonormal, matrix_from_rows};

/// k-volume of the orthogonal projection of `body` onto the span of the
/// orthonormal columns of `frame` (n x k).
pub fn projection_volume(body: &ConvexBody, frame: &DMatrix<f64>) -> Result<f64> {
    let n = body.dim();
    if frame.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: frame.nrows() });
    }
    let k = frame.ncols();
    if k > n {
        return Err(Error::InvalidInput(format!("subspace dimension {k} exceeds {n}")));
    }
    check_orthonormal(frame)?;
    if k == 0 {
        return Ok(1.0);
    }
    if let ConvexBody::Ellipsoid { q } = body {
        let m = frame.transpose() * matrix_from_rows(q) * frame;
        return Ok(ball_volume(k) * m.determinant().max(0.0).sqrt());
    }
    exact_volume(&body.project(frame))
}

/// Mixed k-volume of the projections of `bodies` onto span(frame).
pub fn projected_mixed_volume(bodies: &[ConvexBody], frame: &DMatrix<f64>) -> Result<f64> {
    let k = frame.ncols();
    if bodies.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: bodies.len() });
    }
    if let Some(b) = bodies.iter().find(|b| b.dim() != frame.nrows()) {
        return Err(Error::DimensionMismatch { expected: frame.nrows(), got: b.dim() });
    }
    check_orthonormal(frame)?;
    let projected: Vec<ConvexBody> = bodies.iter().map(|b| b.project(frame)).collect();
    mixed_volume(&projected)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlexandrovFenchelReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// V(A_1..A_n)^2 against V(A_1..A_{n-2}, A_{n-1}, A_{n-1}) * V(A_1..A_{n-2}, A_n, A_n).
pub fn check_alexandrov_fenchel(bodies: &[ConvexBody], tol: f64) -> Result<AlexandrovFenchelReport> {
    let n = bodies.len();
    if n < 2 {
        return Err(Error::InvalidInput("Alexandrov–Fenchel needs at least two bodies".into()));
    }
    let v = mixed_volume(bodies)?;
    let mut first = bodies.to_vec();
    first[n - 1] = bodies[n - 2].clone();
    let mut second = bodies.to_vec();
    second[n - 2] = bodies[n - 1].clone();
    let rhs = mixed_volume(&first)? * mixed_volume(&second)?;
    let lhs = v * v;
    Ok(AlexandrovFenchelReport { lhs, rhs, holds: lhs >= rhs - tol * (1.0 + rhs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormalize_columns;
    use nalgebra::DVector;
    use std::f64::consts::PI;

    fn frame(cols: &[&[f64]]) -> DMatrix<f64> {
        let v: Vec<DVector<f64>> = cols.iter().map(|c| DVector::from_column_slice(c)).collect();
        orthonormalize_columns(&v).unwrap()
    }

    #[test]
    fn ball_projects_to_disk() {
        let f = frame(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]);
        let v = projection_volume(&ConvexBody::ball(3, 1.0), &f).unwrap();
        assert!((v - PI).abs() < 1e-12);
    }

    #[test]
    fn segment_projection() {
        let t: f64 = 1.1;
        let f = frame(&[&[t.cos(), t.sin()]]);
        let v = projection_volume(&ConvexBody::segment(&[1.0, 0.0]), &f).unwrap();
        assert!((v - 2.0 * t.cos().abs()).abs() < 1e-12);
        let plane = frame(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert_eq!(projection_volume(&ConvexBody::segment(&[1.0, 1.0, 1.0]), &plane).unwrap(), 0.0);
    }

    #[test]
    fn bad_frame_is_rejected() {
        let f = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let err = projection_volume(&ConvexBody::ball(2, 1.0), &f).unwrap_err();
        assert_eq!(err.tag(), "bad-frame");
    }

    #[test]
    fn af_equality_and_degenerate_cases() {
        let disk = ConvexBody::ball(2, 1.0);
        let r = check_alexandrov_fenchel(&[disk.clone(), disk.clone()], 1e-9).unwrap();
        assert!((r.lhs - PI * PI).abs() < 1e-10 && (r.rhs - PI * PI).abs() < 1e-10 && r.holds);
        let seg = ConvexBody::segment(&[1.0, 0.0]);
        let r = check_alexandrov_fenchel(&[disk, seg], 1e-9).unwrap();
        assert_eq!(r.rhs, 0.0);
        assert!(r.holds);
    }
}
