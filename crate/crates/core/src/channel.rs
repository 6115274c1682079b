//! Rayleigh fading draws and the law of the jammer-to-BS gain ratio.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use crate::model::NetworkConfig;
use crate::{Error, Result};

/// Instantaneous normalized gains for one fading state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    /// `ρ·‖h_br‖²`
    pub gamma_br: f64,
    /// `ρ·|h_mr|²`
    pub gamma_mr: f64,
    /// `ρ·‖h_fr‖²`, zero without a jammer
    pub gamma_fr: f64,
}

impl ChannelRealization {
    pub fn new(gamma_br: f64, gamma_mr: f64, gamma_fr: f64) -> Self {
        Self {
            gamma_br,
            gamma_mr,
            gamma_fr,
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self::new(self.gamma_br * c, self.gamma_mr * c, self.gamma_fr * c)
    }

    /// Same realization with the jammer switched off.
    pub fn without_jammer(self) -> Self {
        Self {
            gamma_fr: 0.0,
            ..self
        }
    }
}

/// Counter-based sampler: trial `t` always reads ChaCha stream `t` under the
/// same key, so draws do not depend on scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededSampler {
    pub seed: u64,
}

impl SeededSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn rng_for(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }
}

/// Sum of `n` unit-mean exponentials built from normal pairs, i.e. Gamma(n, 1).
fn unit_gamma<R: Rng>(rng: &mut R, n: u32) -> f64 {
    let mut acc = 0.0;
    for _ in 0..n {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        acc += 0.5 * (x * x + y * y);
    }
    acc
}

/// Unit-power draws `(‖h_br‖², |h_mr|², ‖h_fr‖²)` before the gain scaling.
pub fn sample_unit(n_bs: u32, n_fj: u32, sampler: &SeededSampler, trial: u64) -> [f64; 3] {
    let mut rng = sampler.rng_for(trial);
    let br = unit_gamma(&mut rng, n_bs);
    let mr = unit_gamma(&mut rng, 1);
    let fr = unit_gamma(&mut rng, n_fj);
    [br, mr, fr]
}

pub fn sample(cfg: &NetworkConfig, sampler: &SeededSampler, trial: u64) -> ChannelRealization {
    let [br, mr, fr] = sample_unit(cfg.n_bs, cfg.n_fj, sampler, trial);
    ChannelRealization::new(cfg.mean_br() * br, cfg.mean_mr() * mr, cfg.mean_fr() * fr)
}

/// Log of the normalizing constant `Γ(N)/(Γ(N_FJ)Γ(N_BS))·r^N_BS`.
pub(crate) fn ln_ratio_constant(n_bs: u32, n_fj: u32, r: f64) -> f64 {
    let (nb, nf) = (f64::from(n_bs), f64::from(n_fj));
    ln_gamma(nb + nf) - ln_gamma(nf) - ln_gamma(nb) + nb * r.ln()
}

/// Density of `γ_fr/γ_br` at `x`, with `r = μ_fr/μ_br`.
pub fn gamma_ratio_pdf(x: f64, cfg: &NetworkConfig) -> Result<f64> {
    if !cfg.has_jammer() {
        return Err(Error::NoJammer);
    }
    Ok(ratio_pdf(x, cfg.n_bs, cfg.n_fj, cfg.gain_ratio()))
}

pub(crate) fn ratio_pdf(x: f64, n_bs: u32, n_fj: u32, r: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let nf = f64::from(n_fj);
    let n = f64::from(n_bs + n_fj);
    if x == 0.0 {
        return if n_fj == 1 {
            ln_ratio_constant(n_bs, n_fj, r).exp() / r.powf(n)
        } else {
            0.0
        };
    }
    (ln_ratio_constant(n_bs, n_fj, r) + (nf - 1.0) * x.ln() - n * (x + r).ln()).exp()
}
