//! Per-realization SINRs and the secrecy objective `Φ(λ)`.

use crate::channel::ChannelRealization;
use crate::model::NetworkConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrTriple {
    pub gamma_bs: f64,
    pub gamma_mu: f64,
    pub gamma_r: f64,
}

impl SinrTriple {
    /// `(1+γ_BS)(1+γ_MU)/(1+γ_R)`
    pub fn phi(&self) -> f64 {
        (1.0 + self.gamma_bs) * (1.0 + self.gamma_mu) / (1.0 + self.gamma_r)
    }

    /// `ln(1+γ_BS) + ln(1+γ_MU) - ln(1+γ_R)`, the natural-log form of `ln Φ`.
    pub fn ln_phi(&self) -> f64 {
        self.gamma_bs.ln_1p() + self.gamma_mu.ln_1p() - self.gamma_r.ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyObjective {
    pub phi: f64,
    /// `max(0, ½·log₂ Φ)` in bits/s/Hz
    pub rs: f64,
}

impl SecrecyObjective {
    pub fn from_ln_phi(ln_phi: f64) -> Self {
        Self {
            phi: ln_phi.exp(),
            rs: (0.5 * ln_phi / std::f64::consts::LN_2).max(0.0),
        }
    }
}

/// Which SINR expressions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinrMode {
    /// Full finite-gain expressions.
    #[default]
    Exact,
    /// Large-array limits under `λ = γ_fr/γ_br`: `γ_MU = γ_mr/2`, `γ_R = 1`.
    Lsma,
}

/// Relay amplification `G`, from `G² = ρ/(λγ_br + (1-λ)γ_mr + γ_fr + 1)`.
pub fn relay_gain(ch: &ChannelRealization, lambda: f64, rho: f64) -> f64 {
    let den = lambda * ch.gamma_br + (1.0 - lambda) * ch.gamma_mr + ch.gamma_fr + 1.0;
    (rho / den).sqrt()
}

pub fn sinrs(
    ch: &ChannelRealization,
    lambda: f64,
    eps_users: f64,
    eps_relay: f64,
) -> Result<SinrTriple> {
    let relay_den = ch.gamma_fr + eps_relay;
    if relay_den == 0.0 {
        return Err(Error::RelaySinrSingular);
    }
    Ok(sinrs_unchecked(ch, lambda, eps_users, relay_den))
}

#[inline]
fn sinrs_unchecked(
    ch: &ChannelRealization,
    lambda: f64,
    eps_users: f64,
    relay_den: f64,
) -> SinrTriple {
    let (br, mr, fr) = (ch.gamma_br, ch.gamma_mr, ch.gamma_fr);
    let l = lambda;
    let prod = br * mr;
    let gamma_bs = (1.0 - l) * prod / ((1.0 + l) * br + (1.0 - l) * mr + fr + eps_users);
    let gamma_mu = l * prod / (l * br + (2.0 - l) * mr + fr + eps_users);
    let gamma_r = (l * br + (1.0 - l) * mr) / relay_den;
    SinrTriple {
        gamma_bs,
        gamma_mu,
        gamma_r,
    }
}

/// Large-array SINRs. `γ_BS` is floored at zero once `γ_fr ≥ γ_br`.
pub fn lsma_sinrs(ch: &ChannelRealization) -> SinrTriple {
    let ratio = ch.gamma_fr / ch.gamma_br;
    let gamma_bs = (ch.gamma_mr * (1.0 - ratio) / (1.0 + 2.0 * ratio)).max(0.0);
    SinrTriple {
        gamma_bs,
        gamma_mu: 0.5 * ch.gamma_mr,
        gamma_r: 1.0,
    }
}

/// Objective evaluator bound to one realization and one ε convention.
///
/// Hot loops (grid search, bisection) call [`PhiEval::ln_phi`] directly.
#[derive(Debug, Clone, Copy)]
pub struct PhiEval {
    ch: ChannelRealization,
    eps_users: f64,
    relay_den: f64,
}

impl PhiEval {
    pub fn new(ch: ChannelRealization, eps_users: f64, eps_relay: f64) -> Result<Self> {
        let relay_den = ch.gamma_fr + eps_relay;
        if relay_den == 0.0 {
            return Err(Error::RelaySinrSingular);
        }
        Ok(Self {
            ch,
            eps_users,
            relay_den,
        })
    }

    pub fn for_config(ch: ChannelRealization, cfg: &NetworkConfig) -> Result<Self> {
        Self::new(ch, cfg.epsilon_users, cfg.epsilon_relay)
    }

    pub fn sinrs(&self, lambda: f64) -> SinrTriple {
        sinrs_unchecked(&self.ch, lambda, self.eps_users, self.relay_den)
    }

    pub fn ln_phi(&self, lambda: f64) -> f64 {
        self.sinrs(lambda).ln_phi()
    }

    pub fn channel(&self) -> &ChannelRealization {
        &self.ch
    }
}

pub fn phi(ch: &ChannelRealization, lambda: f64, cfg: &NetworkConfig) -> Result<SecrecyObjective> {
    let s = sinrs(ch, lambda, cfg.epsilon_users, cfg.epsilon_relay)?;
    Ok(SecrecyObjective::from_ln_phi(s.ln_phi()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ch(br: f64, mr: f64, fr: f64) -> ChannelRealization {
        ChannelRealization::new(br, mr, fr)
    }

    #[test]
    fn relay_gain_examples() {
        assert_relative_eq!(relay_gain(&ch(1.0, 1.0, 0.0), 0.5, 1.0).powi(2), 0.5);
        assert_relative_eq!(
            relay_gain(&ch(5.0, 0.0, 0.0), 1e-12, 1.0).powi(2),
            1.0,
            epsilon = 1e-10
        );
        let g2 = relay_gain(&ch(100.0, 10.0, 40.0), 0.3, 1.0).powi(2);
        // independent: 1/(0.3·100 + 0.7·10 + 40 + 1)
        assert_relative_eq!(g2, 1.0 / 78.0, max_relative = 1e-15);
    }

    #[test]
    fn symmetric_point_equal_sinrs() {
        let g = 7.0;
        let s = sinrs(&ch(g, g, 0.0), 0.5, 1.0, 1.0).unwrap();
        let expect = (g * g / 2.0) / (2.0 * g + 1.0);
        assert_relative_eq!(s.gamma_bs, expect, max_relative = 1e-15);
        assert_relative_eq!(s.gamma_mu, expect, max_relative = 1e-15);
    }

    #[test]
    fn jamming_swamps_everything() {
        let s = sinrs(&ch(100.0, 10.0, 1e15), 0.4, 1.0, 0.0).unwrap();
        assert!(s.gamma_bs < 1e-11 && s.gamma_mu < 1e-11 && s.gamma_r < 1e-11);
    }

    #[test]
    fn relay_sinr_example() {
        let s = sinrs(&ch(1000.0, 20.0, 100.0), 0.3, 1.0, 0.0).unwrap();
        let independent = (0.3 * 1000.0 + 0.7 * 20.0) / 100.0;
        assert_relative_eq!(s.gamma_r, 3.14, max_relative = 1e-14);
        assert_relative_eq!(s.gamma_r, independent, max_relative = 1e-15);
    }

    #[test]
    fn singular_relay_rejected() {
        assert_eq!(
            sinrs(&ch(1.0, 1.0, 0.0), 0.5, 1.0, 0.0),
            Err(Error::RelaySinrSingular)
        );
        assert!(sinrs(&ch(1.0, 1.0, 0.0), 0.5, 1.0, 1.0).is_ok());
    }

    #[test]
    fn zero_gains_give_unit_phi() {
        let cfg = NetworkConfig {
            epsilon_relay: 1.0,
            ..NetworkConfig::default()
        };
        let o = phi(&ch(0.0, 0.0, 0.0), 0.5, &cfg).unwrap();
        assert_eq!(o.phi, 1.0);
        assert_eq!(o.rs, 0.0);
    }

    #[test]
    fn clamp_when_relay_dominates() {
        let cfg = NetworkConfig {
            epsilon_relay: 1.0,
            ..NetworkConfig::default()
        };
        // tiny user SINRs, large relay SINR
        let o = phi(&ch(1e6, 1e-3, 0.0), 0.9, &cfg).unwrap();
        assert!(o.phi < 1.0);
        assert_eq!(o.rs, 0.0);
    }

    #[test]
    fn lsma_objective_form() {
        let c = ch(1e4, 300.0, 1e3);
        let s = lsma_sinrs(&c);
        let expected = (1.0 + s.gamma_bs) * (1.0 + 150.0) / 2.0;
        assert_relative_eq!(s.phi(), expected, max_relative = 1e-14);
        assert_relative_eq!(s.gamma_bs, 300.0 * 0.9 / 1.2, max_relative = 1e-14);
    }

    #[test]
    fn monotonicity_in_lambda() {
        let c = ch(500.0, 30.0, 60.0);
        let grid: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        let s: Vec<SinrTriple> = grid
            .iter()
            .map(|&l| sinrs(&c, l, 1.0, 0.0).unwrap())
            .collect();
        for w in s.windows(2) {
            assert!(w[1].gamma_bs < w[0].gamma_bs);
            assert!(w[1].gamma_mu > w[0].gamma_mu);
            assert!(w[1].gamma_r > w[0].gamma_r);
        }
        let more_jam = sinrs(&ch(500.0, 30.0, 90.0), 0.3, 1.0, 0.0).unwrap();
        assert!(more_jam.gamma_r < s[299].gamma_r);
    }
}
