use nalgebra::{DMatrix, DVector};

use super::manifold::Point;
use super::space::FunctionSpace;
use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::linalg::rows_from_matrix;

/// Data of one function space at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGeometry {
    pub theta: DVector<f64>,
    /// Pullback metric in the orthonormal tangent frame.
    pub metric: DMatrix<f64>,
    pub ellipsoid: ConvexBody,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointGeometry {
    pub point: Point,
    pub frame: DMatrix<f64>,
    pub spaces: Vec<SpaceGeometry>,
}

fn theta_from(values: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let norm = values.norm();
    if !(norm >= 1e-14) {
        return Err(Error::ValueConditionViolated { node: 0, norm });
    }
    Ok((values / norm, norm))
}

/// `phi(x) / |phi(x)|` in the coordinates of the orthonormal basis.
pub fn theta(space: &FunctionSpace, p: &Point) -> Result<DVector<f64>> {
    Ok(theta_from(&space.values(p))?.0)
}

fn metric_at(space: &FunctionSpace, p: &Point, frame: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (vals, jac) = space.evaluate(p);
    let (theta, norm) = theta_from(&vals)?;
    let j = jac * frame;
    let m = theta.len();
    let proj = DMatrix::identity(m, m) - &theta * theta.transpose();
    let dtheta = proj * j / norm;
    let g = dtheta.transpose() * &dtheta;
    Ok((theta, (&g + g.transpose()) * 0.5))
}

/// `G_ab = <d theta(e_a), d theta(e_b)>` in the manifold's orthonormal tangent frame.
pub fn pullback_metric(space: &FunctionSpace, p: &Point) -> Result<DMatrix<f64>> {
    let frame = space.manifold().tangent_frame(p);
    Ok(metric_at(space, p, &frame)?.1)
}

/// Ellipsoid with shape matrix `G` (support `sqrt(xi^T G xi)`) in frame coordinates.
pub fn f_ellipsoid(space: &FunctionSpace, p: &Point) -> Result<ConvexBody> {
    Ok(ellipsoid_of(&pullback_metric(space, p)?))
}

pub(crate) fn ellipsoid_of(g: &DMatrix<f64>) -> ConvexBody {
    ConvexBody::Ellipsoid { q: rows_from_matrix(g) }
}

/// Theta, metric and ellipsoid of every space at `p`, sharing one frame.
pub fn point_geometry(spaces: &[FunctionSpace], p: &Point) -> Result<PointGeometry> {
    let Some(first) = spaces.first() else {
        return Err(Error::InvalidInput("no function spaces".into()));
    };
    let frame = first.manifold().tangent_frame(p);
    let spaces = spaces
        .iter()
        .map(|s| {
            let (theta, metric) = metric_at(s, p, &frame)?;
            let ellipsoid = ellipsoid_of(&metric);
            Ok(SpaceGeometry { theta, metric, ellipsoid })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PointGeometry { point: p.clone(), frame, spaces })
}

/// Largest deviation between analytic chart derivatives of the basis and
/// central differences with step `h`, relative to `max(|analytic|, 1)`.
pub fn finite_difference_audit(space: &FunctionSpace, p: &Point, h: f64) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::InvalidInput(format!("step {h} outside [1e-7, 1e-3]")));
    }
    let manifold = space.manifold();
    let (_, jac) = space.evaluate(p);
    let analytic = jac * manifold.chart_jacobian(p);
    let mut worst: f64 = 0.0;
    for a in 0..manifold.dim() {
        let mut plus = p.chart.clone();
        let mut minus = p.chart.clone();
        plus[a] += h;
        minus[a] -= h;
        let fp = space.values(&manifold.point(&plus)?);
        let fm = space.values(&manifold.point(&minus)?);
        for i in 0..space.dim() {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            let an = analytic[(i, a)];
            worst = worst.max((fd - an).abs() / an.abs().max(1.0));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Manifold, InnerProduct};

    #[test]
    fn circle_linear_theta_and_metric() {
        let m = Manifold::circle();
        let s = FunctionSpace::parse(&m, "linear", 0).unwrap();
        let p = m.point(&[1.3]).unwrap();
        let t = theta(&s, &p).unwrap();
        assert!((t[0] - 1.3f64.cos()).abs() < 1e-14 && (t[1] - 1.3f64.sin()).abs() < 1e-14);
        assert!((pullback_metric(&s, &p).unwrap()[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_frequency_k_metric() {
        let m = Manifold::circle();
        let s = FunctionSpace::parse(&m, "eig 9", 0).unwrap();
        for t in [0.1, 2.0, 4.0] {
            let g = pullback_metric(&s, &m.point(&[t]).unwrap()).unwrap();
            assert!((g[(0, 0)] - 9.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_harmonics_metric_is_isotropic() {
        let m = Manifold::sphere2();
        for l in 1..=4usize {
            let lambda = (l * (l + 1)) as f64;
            let s = FunctionSpace::parse(&m, &format!("eig {lambda}"), 0).unwrap();
            for chart in [[0.3, 0.2], [1.5, -2.0], [2.9, 1.0]] {
                let p = m.point(&chart).unwrap();
                let g = pullback_metric(&s, &p).unwrap();
                assert!((g.clone() - DMatrix::identity(2, 2) * (lambda / 2.0)).amax() < 1e-9, "l={l} {g}");
                assert!(finite_difference_audit(&s, &p, 1e-5).unwrap() < 1e-6);
            }
        }
    }

    #[test]
    fn degree_one_theta_is_position() {
        let m = Manifold::sphere2();
        let s = FunctionSpace::parse(&m, "linear", 0).unwrap();
        let p = m.point(&[0.8, 2.1]).unwrap();
        let t = theta(&s, &p).unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-14);
        // basis is (x, y, z) times a common constant
        assert!((t - &p.ambient).amax() < 1e-12);
    }

    #[test]
    fn constant_space() {
        let m = Manifold::torus(2);
        let s = FunctionSpace::parse(&m, "const", 0).unwrap();
        let p = m.point(&[0.2, 0.3]).unwrap();
        assert!((theta(&s, &p).unwrap()[0] - 1.0).abs() < 1e-15);
        assert_eq!(pullback_metric(&s, &p).unwrap().amax(), 0.0);
        assert_eq!(finite_difference_audit(&s, &p, 1e-5).unwrap(), 0.0);
        assert!(matches!(f_ellipsoid(&s, &p).unwrap(), ConvexBody::Ellipsoid { .. }));
    }

    #[test]
    fn trig_audit_and_scaling() {
        let m = Manifold::torus(2);
        let s = FunctionSpace::parse(&m, "custom cos[2 1] sin[2 1] cos[0 3]", 0).unwrap();
        let p = m.point(&[0.4, 5.0]).unwrap();
        assert!(finite_difference_audit(&s, &p, 1e-5).unwrap() < 1e-8);
        let scaled = s.orthonormalize(&InnerProduct::Given(DMatrix::identity(3, 3) * 9.0)).unwrap();
        let g1 = pullback_metric(&s, &p).unwrap();
        let g2 = pullback_metric(&scaled, &p).unwrap();
        assert!((g1 - g2).amax() < 1e-10);
    }

    #[test]
    fn vanishing_values_are_reported() {
        let m = Manifold::circle();
        let s = FunctionSpace::parse(&m, "custom sin[1]", 0).unwrap();
        let p = m.point(&[0.0]).unwrap();
        assert!(matches!(theta(&s, &p), Err(Error::ValueConditionViolated { .. })));
    }
}
