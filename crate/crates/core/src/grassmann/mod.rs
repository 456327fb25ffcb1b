//! Gauge densities on Grassmannians, the cosine transform on Gr(1, V),
//! normal measures and Monte Carlo checks of the density identities.

mod density;
mod harmonics;
mod identities;
mod measure;
mod product;
mod transform;

pub use density::{d1, dk_mixed, Gauge, GaugeDensity};
pub use harmonics::{real_sph_harm, FourierSeries, Harmonic, ShExpansion};
pub use identities::{
    alesker_identity, alesker_identity_residual, haar2_check, omega_mc, pullback_factors, verify_crofton_product,
    ResidualReport,
};
pub use measure::NormalMeasure1;
pub use product::{density_product_mc, verify_product_identity, IdentityReport, McEstimate, Region};
pub use transform::{cosine_transform, inverse_cosine_transform, inverse_cosine_transform_of, multiplier};
