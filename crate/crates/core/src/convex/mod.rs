//! Centrally symmetric convex bodies: support functions, volumes,
//! projections and mixed volumes.

pub(crate) mod body;
mod mixed;
mod projection;
mod volume;

pub use body::{ConvexBody, SumPart};
pub use mixed::{mixed_volume, mixed_volume_polarized};
pub use projection::{check_alexandrov_fenchel, projected_mixed_volume, projection_volume, AlexandrovFenchelReport};
pub use volume::{
    analytic_volume, direction_grid, exact_volume, volume, volume_with, zonotope_volume, VolumeMethod,
    VolumeOptions,
};

/// Support function, as a free function.
pub fn support(body: &ConvexBody, u: &[f64]) -> f64 {
    body.support(u)
}
