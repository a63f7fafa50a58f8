//! Deterministic equivalents, channel estimation, Monte-Carlo validation and
//! phase optimization for a multi-user MISO downlink assisted by several
//! distributed reconfigurable intelligent surfaces (RISs).
//!
//! The numerical core is generic over the real scalar type through
//! [`Real`] (implemented for `f64` and `f32`); the `*64` aliases below name
//! the double-precision instantiations used by the experiment runner.
//!
//! Module overview:
//! - [`geometry`]: placement, path loss, Rician factors and channel statistics;
//! - [`channels`]: realizations, RIS phase profiles, aggregate channels;
//! - [`estimation`]: MMSE-DFT and direct-estimation protocols, overhead;
//! - [`detequiv`]: closed-form SINR and net sum-rate;
//! - [`montecarlo`]: the finite-size oracle;
//! - [`optimizer`]: projected gradient ascent and a genetic algorithm.

pub mod channels;
pub mod detequiv;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod linalg;
pub mod montecarlo;
pub mod optimizer;
pub mod scalar;

pub use channels::{PhaseProfile, StreamTag};
pub use detequiv::{PowerConfig, SinrReport};
pub use error::{Result, RisError};
pub use estimation::{Protocol, SubphaseMode, TrainingConfig};
pub use geometry::{ChannelStatistics, Fading, GeometryConfig, PathLossConfig, SystemDims};
pub use montecarlo::{McConfig, McSinrReport};
pub use optimizer::{GaConfig, PgaConfig, PgaInit};
pub use scalar::Real;

/// Double-precision channel statistics.
pub type ChannelStatistics64 = ChannelStatistics<f64>;
/// Double-precision phase profile.
pub type PhaseProfile64 = PhaseProfile<f64>;
/// Double-precision deterministic-equivalent report.
pub type SinrReport64 = SinrReport<f64>;
/// Double-precision Monte-Carlo report.
pub type McSinrReport64 = McSinrReport<f64>;
/// Double-precision deterministic-equivalent model.
pub type DetEqModel64 = detequiv::DetEqModel<f64>;
/// Single-precision channel statistics.
pub type ChannelStatistics32 = ChannelStatistics<f32>;
/// Single-precision phase profile.
pub type PhaseProfile32 = PhaseProfile<f32>;
