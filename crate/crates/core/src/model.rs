//! Network configuration, node geometry and regime guards.

use crate::{Error, Result};

/// Planar coordinates of the four nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodePositions {
    pub bs: [f64; 2],
    pub mu: [f64; 2],
    pub relay: [f64; 2],
    pub fj: [f64; 2],
}

impl NodePositions {
    /// BS at (-1, 0), MU at (1, 0), relay at the origin, FJ at (0.3, 0.4).
    pub const REFERENCE: NodePositions = NodePositions {
        bs: [-1.0, 0.0],
        mu: [1.0, 0.0],
        relay: [0.0, 0.0],
        fj: [0.3, 0.4],
    };

    /// Unit vector from the relay towards the reference FJ position.
    pub const FJ_DIRECTION: [f64; 2] = [0.6, 0.8];

    /// Reference layout with the jammer moved to distance `d` from the relay
    /// along [`Self::FJ_DIRECTION`].
    pub fn with_fj_distance(d: f64) -> Self {
        let mut p = Self::REFERENCE;
        p.fj = [
            p.relay[0] + d * Self::FJ_DIRECTION[0],
            p.relay[1] + d * Self::FJ_DIRECTION[1],
        ];
        p
    }

    fn named(&self) -> [(&'static str, [f64; 2]); 4] {
        [
            ("bs", self.bs),
            ("mu", self.mu),
            ("relay", self.relay),
            ("fj", self.fj),
        ]
    }

    /// Rejects layouts where two nodes share a position.
    pub fn validate(&self) -> Result<()> {
        let nodes = self.named();
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if dist(nodes[i].1, nodes[j].1) <= 0.0 {
                    return Err(Error::DegenerateGeometry(format!(
                        "{} and {} coincide",
                        nodes[i].0, nodes[j].0
                    )));
                }
            }
        }
        Ok(())
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Per-branch average channel gains towards the relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGains {
    pub mu_br: f64,
    pub mu_mr: f64,
    pub mu_fr: f64,
}

/// Distance-dependent path loss `d^-alpha` from each node to the relay.
pub fn gains_from_geometry(pos: &NodePositions, alpha: f64) -> Result<ChannelGains> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let gain = |name: &str, p: [f64; 2]| {
        let d = dist(p, pos.relay);
        if d > 0.0 {
            Ok(d.powf(-alpha))
        } else {
            Err(Error::DegenerateGeometry(format!(
                "{name} sits on the relay"
            )))
        }
    };
    Ok(ChannelGains {
        mu_br: gain("bs", pos.bs)?,
        mu_mr: gain("mu", pos.mu)?,
        mu_fr: gain("fj", pos.fj)?,
    })
}

/// Static description of the network for one operating point.
///
/// `n_fj = 0` is the no-jammer system; `mu_fr` is then ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    pub n_bs: u32,
    pub n_fj: u32,
    pub mu_br: f64,
    pub mu_mr: f64,
    pub mu_fr: f64,
    /// Transmit SNR `P/σ²`, linear.
    pub rho: f64,
    pub alpha: f64,
    pub epsilon_relay: f64,
    pub epsilon_users: f64,
}

impl Default for NetworkConfig {
    /// Reference gains (1, 1, 4), 64 BS antennas, one jammer antenna, 0 dB.
    fn default() -> Self {
        Self {
            n_bs: 64,
            n_fj: 1,
            mu_br: 1.0,
            mu_mr: 1.0,
            mu_fr: 4.0,
            rho: 1.0,
            alpha: 2.0,
            epsilon_relay: 0.0,
            epsilon_users: 1.0,
        }
    }
}

impl NetworkConfig {
    pub fn new(n_bs: u32, n_fj: u32, gains: ChannelGains, rho: f64) -> Result<Self> {
        let cfg = Self {
            n_bs,
            n_fj,
            mu_br: gains.mu_br,
            mu_mr: gains.mu_mr,
            mu_fr: gains.mu_fr,
            rho,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if self.n_bs < 1 {
            return bad("n_bs must be at least 1");
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad("rho must be positive");
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.mu_br) || !positive(self.mu_mr) {
            return bad("channel gains must be positive");
        }
        if self.n_fj > 0 && !positive(self.mu_fr) {
            return bad("mu_fr must be positive when a jammer is present");
        }
        if !(self.alpha > 0.0) {
            return bad("alpha must be positive");
        }
        for (name, e) in [
            ("epsilon_relay", self.epsilon_relay),
            ("epsilon_users", self.epsilon_users),
        ] {
            if e != 0.0 && e != 1.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be 0 or 1, got {e}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_rho_db(mut self, rho_db: f64) -> Self {
        self.rho = db_to_linear(rho_db);
        self
    }

    pub fn with_gains(mut self, g: ChannelGains) -> Self {
        self.mu_br = g.mu_br;
        self.mu_mr = g.mu_mr;
        self.mu_fr = g.mu_fr;
        self
    }

    pub fn rho_db(&self) -> f64 {
        10.0 * self.rho.log10()
    }

    pub fn has_jammer(&self) -> bool {
        self.n_fj > 0
    }

    /// Per-branch mean `γ̄_br = ρ·μ_br`.
    pub fn mean_br(&self) -> f64 {
        self.rho * self.mu_br
    }

    pub fn mean_mr(&self) -> f64 {
        self.rho * self.mu_mr
    }

    /// Zero without a jammer.
    pub fn mean_fr(&self) -> f64 {
        if self.has_jammer() {
            self.rho * self.mu_fr
        } else {
            0.0
        }
    }

    /// Per-branch gain ratio `r = μ_fr/μ_br`.
    pub fn gain_ratio(&self) -> f64 {
        if self.has_jammer() {
            self.mu_fr / self.mu_br
        } else {
            0.0
        }
    }

    /// `ϱ = 1 + r`.
    pub fn varrho(&self) -> f64 {
        1.0 + self.gain_ratio()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Factors standing in for "≫" in the asymptotic assumptions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub lsma: f64,
    pub high_mr: f64,
    pub jammer: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            lsma: 10.0,
            high_mr: 10.0,
            jammer: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeRatios {
    /// `N_BS·γ̄_br / γ̄_mr`
    pub lsma: f64,
    /// `γ̄_mr`
    pub high_mr: f64,
    /// `N_FJ·γ̄_fr / γ̄_mr`
    pub jammer: f64,
    /// `N_FJ·γ̄_fr / (N_BS·γ̄_br)`, must stay below 1
    pub feasible: f64,
}

/// Advisory flags; never blocks a computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub lsma_ok: bool,
    pub high_mr_ok: bool,
    pub jammer_dominant_ok: bool,
    pub lambda_feasible_ok: bool,
    pub ratios: RegimeRatios,
}

impl RegimeReport {
    pub fn all_ok(&self) -> bool {
        self.lsma_ok && self.high_mr_ok && self.jammer_dominant_ok && self.lambda_feasible_ok
    }

    /// Compact `name=0|1` list, stable for CSV output.
    pub fn flags_string(&self) -> String {
        let b = |x: bool| if x { 1 } else { 0 };
        format!(
            "lsma={};high_mr={};jammer={};feasible={}",
            b(self.lsma_ok),
            b(self.high_mr_ok),
            b(self.jammer_dominant_ok),
            b(self.lambda_feasible_ok)
        )
    }
}

pub fn regime_check(cfg: &NetworkConfig, th: RegimeThresholds) -> RegimeReport {
    let nb = f64::from(cfg.n_bs);
    let nf = f64::from(cfg.n_fj);
    let ratios = RegimeRatios {
        lsma: nb * cfg.mean_br() / cfg.mean_mr(),
        high_mr: cfg.mean_mr(),
        jammer: nf * cfg.mean_fr() / cfg.mean_mr(),
        feasible: nf * cfg.mean_fr() / (nb * cfg.mean_br()),
    };
    RegimeReport {
        lsma_ok: ratios.lsma >= th.lsma,
        high_mr_ok: ratios.high_mr >= th.high_mr,
        jammer_dominant_ok: ratios.jammer >= th.jammer,
        lambda_feasible_ok: ratios.feasible < 1.0,
        ratios,
    }
}
