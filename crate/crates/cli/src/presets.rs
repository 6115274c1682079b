//! Ready-made sweeps behind the `fig2`, `fig3` and `fig4` datasets.

use anyhow::{bail, Result};
use secrecy_sim_core::essr::EssrMethod;
use secrecy_sim_core::{gains_from_geometry, NetworkConfig, NodePositions, Strategy};

use crate::sweep::{range, SweepKind, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
}

impl std::str::FromStr for Preset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig2" => Preset::Fig2,
            "fig3" => Preset::Fig3,
            "fig4" => Preset::Fig4,
            _ => bail!("unknown preset '{s}' (fig2, fig3, fig4)"),
        })
    }
}

/// Gains of the reference layout: BS and MU at unit distance, FJ at 0.5.
pub fn reference_network(n_bs: u32, n_fj: u32) -> NetworkConfig {
    let g = gains_from_geometry(&NodePositions::REFERENCE, 2.0).expect("reference layout");
    NetworkConfig {
        n_bs,
        n_fj,
        ..NetworkConfig::default()
    }
    .with_gains(g)
}

/// ESSR vs SNR for OPA, EPA and the jammer-free system, `N_BS = 64`, `N_FJ = 1`.
pub fn fig2(trials: u64, seed: u64) -> Vec<(NetworkConfig, SweepSpec)> {
    let spec = SweepSpec {
        kind: SweepKind::SnrDb,
        values: range(0.0, 50.0, 1.0).expect("static range"),
        strategies: vec![Strategy::OpaNumeric, Strategy::Epa, Strategy::WoFjOpa],
        methods: vec![EssrMethod::MonteCarlo],
        trials,
        seed,
        ..SweepSpec::default()
    };
    vec![(reference_network(64, 1), spec)]
}

/// Closed form, asymptote and large-array Monte Carlo for
/// `N_BS = 256`, `N_FJ ∈ {4, 8, 16}`.
pub fn fig3(trials: u64, seed: u64) -> Vec<(NetworkConfig, SweepSpec)> {
    [4, 8, 16]
        .into_iter()
        .map(|nf| {
            let spec = SweepSpec {
                kind: SweepKind::SnrDb,
                values: range(0.0, 50.0, 2.5).expect("static range"),
                strategies: vec![Strategy::OpaLsma],
                methods: vec![
                    EssrMethod::MonteCarlo,
                    EssrMethod::ClosedForm,
                    EssrMethod::Asymptotic,
                ],
                trials,
                seed,
                lsma_sinr: true,
                ..SweepSpec::default()
            };
            (reference_network(256, nf), spec)
        })
        .collect()
}

/// ESSR vs FJ distance at 20 dB for `N_BS ∈ {64, 256}`, `N_FJ ∈ {1, …, 16}`.
pub fn fig4(trials: u64, seed: u64) -> Vec<(NetworkConfig, SweepSpec)> {
    let mut runs = Vec::new();
    for nb in [64, 256] {
        for nf in [1, 2, 4, 8, 16] {
            let spec = SweepSpec {
                kind: SweepKind::FjDistance,
                values: range(0.1, 1.0, 0.1).expect("static range"),
                strategies: vec![Strategy::OpaNumeric],
                methods: vec![EssrMethod::MonteCarlo],
                trials,
                seed,
                ..SweepSpec::default()
            };
            runs.push((reference_network(nb, nf).with_rho_db(20.0), spec));
        }
    }
    runs
}

pub fn runs(p: Preset, trials: u64, seed: u64) -> Vec<(NetworkConfig, SweepSpec)> {
    match p {
        Preset::Fig2 => fig2(trials, seed),
        Preset::Fig3 => fig3(trials, seed),
        Preset::Fig4 => fig4(trials, seed),
    }
}
