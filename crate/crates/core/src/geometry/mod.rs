//! Manifolds (circles, flat tori, the round 2-sphere and their products),
//! Euclidean function spaces on them, theta maps and pullback metrics.

mod manifold;
mod point;
mod poly;
mod space;

pub use manifold::{Factor, Manifold, Point, QuadratureSizes};
pub use point::{f_ellipsoid, finite_difference_audit, point_geometry, pullback_metric, theta, PointGeometry, SpaceGeometry};
pub use poly::{spherical_harmonic_polys, Poly3};
pub use space::{parse_spaces, BasisFunction, FactorAtom, FunctionSpace, InnerProduct};
