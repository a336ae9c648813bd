//! Read-channel densities, mutual information and raw bit error rate.

mod ber;
mod density;
mod grid;
mod hermite;
mod mi;
mod mixture;

pub use ber::{raw_ber, GrayMap};
pub use density::{
    build_conditional_pdfs, C2cSamples, DensityModel, ReadChannel, DEFAULT_C2C_SAMPLES,
    MAX_CLIPPED_MASS,
};
pub use grid::{LevelPDFs, VoltageGrid};
pub use hermite::{hermite_rule, QuadratureRule, MAX_HERMITE_ORDER};
pub use mi::{mutual_information_gh, mutual_information_grid};
pub use mixture::{GaussianMixtureModel, LEVEL_PRIOR};

/// Quadrature order used when none is specified.
pub const DEFAULT_HERMITE_ORDER: usize = 32;
