//! Average numbers of common zeros of random functions via mixed volumes of
//! Finsler ellipsoids, with the Crofton-type density identities behind it
//! and Monte Carlo oracles for both.
//!
//! Modules:
//! * [`convex`]: support functions, volumes, mixed volumes.
//! * [`grassmann`]: cosine transform on Gr(1, V), normal measures, products
//!   of 1-densities and the identity checks built on them.
//! * [`geometry`]: manifolds, function spaces, theta maps, pullback metrics.
//! * [`predictor`]: the mixed-volume prediction and derived closed forms.
//! * [`montecarlo`]: empirical zero counting.

pub mod constants;
pub mod convex;
pub mod error;
pub mod geometry;
pub mod grassmann;
pub mod linalg;
pub mod montecarlo;
pub mod predictor;
pub mod quadrature;

pub use error::{Error, Result};
