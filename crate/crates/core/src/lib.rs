//! Coverage probability and area spectral efficiency of UAV base-station
//! networks with distance-dependent LoS/NLoS air-to-ground links.
//!
//! Two independent engines compute the same quantities:
//!
//! * [`analysis`] evaluates the closed integral expressions for the serving
//!   distance densities, the interference Laplace transform and the
//!   hovering (lower) / teleporting (upper) coverage bounds by adaptive
//!   quadrature;
//! * [`montecarlo`] simulates the Poisson deployment directly and is used to
//!   cross-check the first.
//!
//! [`experiments`] runs density sweeps over both and writes CSV.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod montecarlo;
pub mod quadrature;
pub mod units;

pub use analysis::{AseResult, Bound, CoverageModel, CoverageResult, NetworkConfig, UpperBoundForm};
pub use channel::{LinkState, LosModel, PathLossParams, Preset};
pub use error::{Error, Result};
pub use quadrature::QuadratureSpec;
