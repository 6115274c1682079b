//! Secrecy-rate analysis for two-way untrusted amplify-and-forward relaying
//! with a multi-antenna friendly jammer.
//!
//! The crate covers the per-realization signal model ([`sinr`]), power
//! allocation ([`opa`]), closed-form and simulated ergodic secrecy sum rates
//! ([`essr`]), the high-SNR expansion ([`asymptotic`]) and the special
//! functions these rely on ([`special`]).
//!
//! All gains are normalized, `γ = ρ·|h|²`, so the noise power never appears.

pub mod asymptotic;
pub mod channel;
mod error;
pub mod essr;
pub mod model;
pub mod opa;
mod precise;
pub mod quad;
pub mod sinr;
pub mod special;

pub use error::{Error, Result};

pub use asymptotic::{essr_asymptotic, slope_offset, AsymptoticResult};
pub use channel::{ChannelRealization, SeededSampler};
pub use essr::{
    essr_closed, essr_montecarlo, ClampConvention, EssrEstimate, EssrMethod, KernelBackend,
    McOptions,
};
pub use model::{
    gains_from_geometry, regime_check, ChannelGains, NetworkConfig, NodePositions, RegimeReport,
    RegimeThresholds,
};
pub use opa::{PowerAllocation, Strategy};
pub use sinr::{SecrecyObjective, SinrMode, SinrTriple};
pub use special::EiApproxParams;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
