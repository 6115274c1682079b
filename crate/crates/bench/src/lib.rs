//! Shared fixtures for the benchmarks.

use secrecy_sim_core::channel::{sample, SeededSampler};
use secrecy_sim_core::{gains_from_geometry, ChannelRealization, NetworkConfig, NodePositions};

/// Reference layout at `rho_db` with the given array sizes.
pub fn network(n_bs: u32, n_fj: u32, rho_db: f64) -> NetworkConfig {
    let g = gains_from_geometry(&NodePositions::REFERENCE, 2.0).expect("reference layout");
    NetworkConfig {
        n_bs,
        n_fj,
        ..NetworkConfig::default()
    }
    .with_gains(g)
    .with_rho_db(rho_db)
}

/// `n` fixed realizations of `cfg`.
pub fn realizations(cfg: &NetworkConfig, n: u64) -> Vec<ChannelRealization> {
    let s = SeededSampler::new(42);
    (0..n).map(|t| sample(cfg, &s, t)).collect()
}
