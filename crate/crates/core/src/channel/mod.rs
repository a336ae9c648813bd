//! Ground-truth channel constants, degradation laws and per-cell noise.

mod degradation;
mod noise;
mod params;

pub use degradation::{
    prog_error_pmf, retention_stats, trap_density, wearout_lambda, ChannelState,
    DegradedNoiseParams, Parity, ParityTag, PeMatrix, RetentionStats,
};
pub use noise::{sample_cell_noise, CellWrite};
pub use params::{C2cParams, ChannelModel, ChannelParams, NoiseComponents, PeCoefficient};
