//! TOML run configuration.
//!
//! ```toml
//! [network]
//! n_bs = 64
//! n_fj = 1
//! rho_db = 20.0
//! fj_distance = 0.5   # or mu_br / mu_mr / mu_fr directly
//!
//! [sweep]
//! kind = "snr-db"
//! start = 0.0
//! stop = 40.0
//! step = 1.0
//! strategies = ["opa-numeric", "epa"]
//! methods = ["monte-carlo"]
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use secrecy_sim_core::essr::EssrMethod;
use secrecy_sim_core::{
    gains_from_geometry, ClampConvention, NetworkConfig, NodePositions, Strategy,
};
use serde::Deserialize;

use crate::sweep::SweepSpec;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub n_bs: Option<u32>,
    pub n_fj: Option<u32>,
    pub mu_br: Option<f64>,
    pub mu_mr: Option<f64>,
    pub mu_fr: Option<f64>,
    /// Derive all three gains from the reference layout instead.
    pub fj_distance: Option<f64>,
    pub rho_db: Option<f64>,
    pub alpha: Option<f64>,
    pub epsilon_relay: Option<f64>,
    pub epsilon_users: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub kind: Option<String>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub strategies: Option<Vec<String>>,
    pub methods: Option<Vec<String>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub lsma_sinr: Option<bool>,
    pub convention: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn network(&self) -> Result<NetworkConfig> {
        let n = &self.network;
        let mut cfg = NetworkConfig::default();
        if let Some(v) = n.n_bs {
            cfg.n_bs = v;
        }
        if let Some(v) = n.n_fj {
            cfg.n_fj = v;
        }
        if let Some(v) = n.alpha {
            cfg.alpha = v;
        }
        if let Some(d) = n.fj_distance {
            if n.mu_br.is_some() || n.mu_mr.is_some() || n.mu_fr.is_some() {
                bail!("give either fj_distance or explicit mu_* gains, not both");
            }
            let g = gains_from_geometry(&NodePositions::with_fj_distance(d), cfg.alpha)?;
            cfg = cfg.with_gains(g);
        }
        if let Some(v) = n.mu_br {
            cfg.mu_br = v;
        }
        if let Some(v) = n.mu_mr {
            cfg.mu_mr = v;
        }
        if let Some(v) = n.mu_fr {
            cfg.mu_fr = v;
        }
        if let Some(v) = n.rho_db {
            cfg = cfg.with_rho_db(v);
        }
        if let Some(v) = n.epsilon_relay {
            cfg.epsilon_relay = v;
        }
        if let Some(v) = n.epsilon_users {
            cfg.epsilon_users = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sweep settings layered over `base`; missing keys keep `base`'s values.
    pub fn sweep_over(&self, mut base: SweepSpec) -> Result<SweepSpec> {
        let s = &self.sweep;
        if let Some(k) = &s.kind {
            base.kind = k.parse()?;
        }
        match (&s.values, s.start, s.stop, s.step) {
            (Some(v), None, None, None) => base.values = v.clone(),
            (None, Some(a), Some(b), Some(h)) => base.values = crate::sweep::range(a, b, h)?,
            (None, None, None, None) => {}
            _ => bail!("sweep needs either `values` or all of start/stop/step"),
        }
        if let Some(v) = &s.strategies {
            base.strategies = parse_list::<Strategy>(v)?;
        }
        if let Some(v) = &s.methods {
            base.methods = parse_list::<EssrMethod>(v)?;
        }
        if let Some(v) = s.trials {
            base.trials = v;
        }
        if let Some(v) = s.seed {
            base.seed = v;
        }
        if let Some(v) = s.lsma_sinr {
            base.lsma_sinr = v;
        }
        if let Some(v) = &s.convention {
            base.convention = parse_convention(v)?;
        }
        Ok(base)
    }
}

pub fn parse_list<T>(items: &[String]) -> Result<Vec<T>>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    items
        .iter()
        .map(|s| s.trim().parse::<T>().map_err(|e| anyhow::anyhow!("{e}")))
        .collect()
}

pub fn parse_convention(s: &str) -> Result<ClampConvention> {
    match s {
        "average-then-clamp" => Ok(ClampConvention::AverageThenClamp),
        "clamp-then-average" => Ok(ClampConvention::ClampThenAverage),
        _ => bail!("unknown clamp convention '{s}'"),
    }
}
