//! Ergodic secrecy sum rate: seeded Monte Carlo, the closed form built from
//! `I1 + I2 - I3`, and a quadrature oracle for `I1`.

use std::f64::consts::LN_2;
use std::fmt;

use rayon::prelude::*;

use crate::channel::{ratio_pdf, sample, SeededSampler};
use crate::model::NetworkConfig;
use crate::opa::{allocate, Strategy, DEFAULT_TOL};
use crate::sinr::lsma_sinrs;
use crate::special::{e1_scaled, EiApproxParams};
use crate::{precise, quad, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EssrMethod {
    MonteCarlo,
    ClosedForm,
    Asymptotic,
    Quadrature,
}

impl EssrMethod {
    pub fn name(self) -> &'static str {
        match self {
            EssrMethod::MonteCarlo => "monte-carlo",
            EssrMethod::ClosedForm => "closed-form",
            EssrMethod::Asymptotic => "asymptotic",
            EssrMethod::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for EssrMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EssrMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        match norm.to_ascii_lowercase().as_str() {
            "montecarlo" | "mc" => Ok(EssrMethod::MonteCarlo),
            "closedform" | "closed" => Ok(EssrMethod::ClosedForm),
            "asymptotic" | "asym" => Ok(EssrMethod::Asymptotic),
            "quadrature" => Ok(EssrMethod::Quadrature),
            _ => Err(Error::InvalidConfig(format!("unknown method '{s}'"))),
        }
    }
}

/// An ESSR value in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssrEstimate {
    pub value: f64,
    pub method: EssrMethod,
    /// 95% normal half-width; zero for deterministic methods.
    pub ci_halfwidth: f64,
    /// Zero for deterministic methods.
    pub trials: u64,
}

impl EssrEstimate {
    pub fn exact(value: f64, method: EssrMethod) -> Self {
        Self {
            value,
            method,
            ci_halfwidth: 0.0,
            trials: 0,
        }
    }
}

/// Where the `[·]⁺` goes relative to the expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClampConvention {
    /// `[E{I_BS + I_MU - I_R}]⁺`, matching the `I1 + I2 - I3` split.
    #[default]
    AverageThenClamp,
    /// `E{[I_BS + I_MU - I_R]⁺}`
    ClampThenAverage,
}

impl ClampConvention {
    pub fn name(self) -> &'static str {
        match self {
            ClampConvention::AverageThenClamp => "average-then-clamp",
            ClampConvention::ClampThenAverage => "clamp-then-average",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub trials: u64,
    pub seed: u64,
    /// Use the large-array SINRs (`γ_R = 1`) instead of the exact ones.
    pub lsma_sinr: bool,
    pub convention: ClampConvention,
    /// Tolerance handed to numeric power allocation.
    pub tol: f64,
    /// Fan chunks out to the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 1,
            lsma_sinr: false,
            convention: ClampConvention::default(),
            tol: DEFAULT_TOL,
            parallel: true,
        }
    }
}

pub const MIN_TRIALS: u64 = 1_000;
const CHUNK: u64 = 1024;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, o: &Kahan) {
        self.add(o.sum);
        self.add(o.comp);
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Per-chunk accumulators: secrecy rate, its square, and the three log terms.
#[derive(Debug, Clone, Copy, Default)]
struct Partial {
    rate: Kahan,
    rate_sq: Kahan,
    bs: Kahan,
    mu: Kahan,
    relay: Kahan,
}

impl Partial {
    fn merge(mut self, o: &Partial) -> Partial {
        self.rate.merge(&o.rate);
        self.rate_sq.merge(&o.rate_sq);
        self.bs.merge(&o.bs);
        self.mu.merge(&o.mu);
        self.relay.merge(&o.relay);
        self
    }
}

/// Fixed-shape pairwise reduction, independent of how chunks were scheduled.
fn tree_sum(parts: &[Partial]) -> Partial {
    match parts.len() {
        0 => Partial::default(),
        1 => parts[0],
        n => tree_sum(&parts[..n / 2]).merge(&tree_sum(&parts[n / 2..])),
    }
}

/// Sample means of the natural-log rate terms behind a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanTerms {
    /// `E{ln(1+γ_BS)}`
    pub i_bs: f64,
    /// `E{ln(1+γ_MU)}`
    pub i_mu: f64,
    /// `E{ln(1+γ_R)}`
    pub i_relay: f64,
}

fn run_chunk(
    cfg: &NetworkConfig,
    strategy: Strategy,
    opts: &McOptions,
    sampler: &SeededSampler,
    chunk: u64,
) -> Result<Partial> {
    let mut p = Partial::default();
    let start = chunk * CHUNK;
    let end = (start + CHUNK).min(opts.trials);
    for trial in start..end {
        let ch = sample(cfg, sampler, trial);
        let s = if opts.lsma_sinr {
            let ch = if strategy == Strategy::WoFjOpa {
                ch.without_jammer()
            } else {
                ch
            };
            lsma_sinrs(&ch)
        } else {
            let (pa, eval) = allocate(strategy, &ch, cfg, opts.tol)?;
            eval.sinrs(pa.lambda)
        };
        let (a, b, c) = (s.gamma_bs.ln_1p(), s.gamma_mu.ln_1p(), s.gamma_r.ln_1p());
        let mut rate = (a + b - c) / (2.0 * LN_2);
        if opts.convention == ClampConvention::ClampThenAverage {
            rate = rate.max(0.0);
        }
        p.rate.add(rate);
        p.rate_sq.add(rate * rate);
        p.bs.add(a);
        p.mu.add(b);
        p.relay.add(c);
    }
    Ok(p)
}

/// Monte Carlo ESSR plus the mean log terms it was built from.
pub fn essr_montecarlo_detailed(
    cfg: &NetworkConfig,
    strategy: Strategy,
    opts: &McOptions,
) -> Result<(EssrEstimate, MeanTerms)> {
    cfg.validate()?;
    if opts.trials < MIN_TRIALS {
        return Err(Error::InvalidConfig(format!(
            "at least {MIN_TRIALS} trials required, got {}",
            opts.trials
        )));
    }
    let sampler = SeededSampler::new(opts.seed);
    let chunks = opts.trials.div_ceil(CHUNK);
    let parts: Vec<Partial> = if opts.parallel {
        (0..chunks)
            .into_par_iter()
            .map(|k| run_chunk(cfg, strategy, opts, &sampler, k))
            .collect::<Result<_>>()?
    } else {
        (0..chunks)
            .map(|k| run_chunk(cfg, strategy, opts, &sampler, k))
            .collect::<Result<_>>()?
    };
    let total = tree_sum(&parts);
    let n = opts.trials as f64;
    let mean = total.rate.value() / n;
    let var = ((total.rate_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0);
    let est = EssrEstimate {
        value: mean.max(0.0),
        method: EssrMethod::MonteCarlo,
        ci_halfwidth: 1.96 * (var / n).sqrt(),
        trials: opts.trials,
    };
    let terms = MeanTerms {
        i_bs: total.bs.value() / n,
        i_mu: total.mu.value() / n,
        i_relay: total.relay.value() / n,
    };
    Ok((est, terms))
}

pub fn essr_montecarlo(
    cfg: &NetworkConfig,
    strategy: Strategy,
    opts: &McOptions,
) -> Result<EssrEstimate> {
    essr_montecarlo_detailed(cfg, strategy, opts).map(|(e, _)| e)
}

/// Sample mean and 95% half-width of `ln(1+γ_R)` with `λ = γ_fr/γ_br`
/// plugged into the exact relay SINR.
pub fn relay_term_montecarlo(cfg: &NetworkConfig, trials: u64, seed: u64) -> Result<(f64, f64)> {
    cfg.validate()?;
    if !cfg.has_jammer() {
        return Err(Error::NoJammer);
    }
    let sampler = SeededSampler::new(seed);
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut p = Partial::default();
            for t in k * CHUNK..((k + 1) * CHUNK).min(trials) {
                let ch = sample(cfg, &sampler, t);
                let lambda = (ch.gamma_fr / ch.gamma_br).min(1.0);
                let num = lambda * ch.gamma_br + (1.0 - lambda) * ch.gamma_mr;
                let v = (num / (ch.gamma_fr + cfg.epsilon_relay)).ln_1p();
                p.rate.add(v);
                p.rate_sq.add(v * v);
            }
            p
        })
        .collect();
    let total = tree_sum(&parts);
    let n = trials as f64;
    let mean = total.rate.value() / n;
    let var = ((total.rate_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, 1.96 * (var / n).sqrt()))
}

// ---------------------------------------------------------------------------
// Closed form

/// How `e^c·E1(c)` is expanded into exponentials inside `I1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum KernelBackend {
    /// Trapezoid rule on `∫_0^∞ e^(-ct)/(1+t) dt` in `ln t`; accurate to
    /// about machine precision for every `c` that occurs.
    #[default]
    Exact,
    /// The separable angle-grid approximation of `Ei`.
    EiApprox(EiApproxParams),
}

/// Nodes `(w, s)` with `e^c·E1(c) ≈ Σ w·e^(-s·c)` for `c ≥ 1/γ̄`.
pub fn kernel_nodes(backend: &KernelBackend, gbar: f64) -> Vec<(f64, f64)> {
    match backend {
        KernelBackend::Exact => {
            // analytic in |Im y| < π/2 and bounded there, so h = 1/4 puts
            // the discretization error near e^(-π²/h) ≈ 1e-17
            let h = 0.25;
            let (lo, hi) = (-36.0, (80.0 * gbar).ln().max(5.0));
            let n = ((hi - lo) / h).ceil() as usize;
            (0..=n)
                .map(|k| {
                    let t = (lo + k as f64 * h).exp();
                    (h * t / (1.0 + t), t)
                })
                .collect()
        }
        KernelBackend::EiApprox(p) => {
            let pre = p.prefactor();
            p.terms()
                .map(|(sb, bp, bq)| (pre * sb, 4.0 * bp * bq - 1.0))
                .collect()
        }
    }
}

/// `I1 = E{ln(1 + γ_mr(1-R)/(1+2R))}` in nats, `R = γ_fr/γ_br`.
///
/// Without a jammer this is the `R = 0` limit `e^(1/γ̄)·E1(1/γ̄)`.
pub fn i1_closed(cfg: &NetworkConfig, backend: &KernelBackend) -> Result<f64> {
    cfg.validate()?;
    let gbar = cfg.mean_mr();
    if !cfg.has_jammer() {
        return Ok(e1_scaled(1.0 / gbar));
    }
    let nodes = kernel_nodes(backend, gbar);
    let v = precise::i1(cfg.n_bs, cfg.n_fj, cfg.gain_ratio(), gbar, &nodes)?;
    if !v.is_finite() {
        return Err(Error::Overflow(
            "I1 sum; retry with a wider working precision",
        ));
    }
    Ok(v)
}

/// `I2 = E{ln(1 + γ_mr/2)} = e^(2/γ̄)·E1(2/γ̄)` in nats.
pub fn i2_closed(gamma_mr_bar: f64) -> f64 {
    e1_scaled(2.0 / gamma_mr_bar)
}

/// `∫_0^∞ ln(1 + x/2)·e^(-x/γ̄)/γ̄ dx` by adaptive quadrature.
pub fn i2_quadrature(gamma_mr_bar: f64) -> Result<f64> {
    let g = gamma_mr_bar;
    quad::integrate_to_inf(|x| (0.5 * x).ln_1p() * (-x / g).exp() / g, 0.0, 1e-14)
}

/// `E{ln(1 + γ_R)}` with `γ_R = 1`.
pub fn i3_closed() -> f64 {
    LN_2
}

/// The three natural-log components behind [`essr_closed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedTerms {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

impl ClosedTerms {
    pub fn essr_bits(&self) -> f64 {
        ((self.i1 + self.i2 - self.i3) / (2.0 * LN_2)).max(0.0)
    }
}

pub fn closed_terms(cfg: &NetworkConfig, backend: &KernelBackend) -> Result<ClosedTerms> {
    Ok(ClosedTerms {
        i1: i1_closed(cfg, backend)?,
        i2: i2_closed(cfg.mean_mr()),
        i3: i3_closed(),
    })
}

pub fn essr_closed(cfg: &NetworkConfig, backend: &KernelBackend) -> Result<EssrEstimate> {
    let t = closed_terms(cfg, backend)?;
    Ok(EssrEstimate::exact(t.essr_bits(), EssrMethod::ClosedForm))
}

// ---------------------------------------------------------------------------
// Quadrature oracle

fn ratio_breaks(cfg: &NetworkConfig) -> Vec<f64> {
    let (nb, nf, r) = (f64::from(cfg.n_bs), f64::from(cfg.n_fj), cfg.gain_ratio());
    let m = if cfg.n_bs > 1 {
        nf * r / (nb - 1.0)
    } else {
        nf * r
    };
    let mut b = vec![0.0];
    b.extend(
        [0.25, 0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|k| k * m)
            .filter(|&x| x < 1.0),
    );
    b.push(1.0);
    b
}

/// `P(γ_BS > γ)` for `γ_BS = γ_mr(1-R)/(1+2R)` floored at zero.
fn survival(cfg: &NetworkConfig, gamma: f64, breaks: &[f64]) -> Result<f64> {
    let gbar = cfg.mean_mr();
    let (nb, nf, r) = (cfg.n_bs, cfg.n_fj, cfg.gain_ratio());
    let mut s = 0.0;
    for w in breaks.windows(2) {
        s += quad::integrate(
            |z| {
                if z >= 1.0 {
                    return 0.0;
                }
                ratio_pdf(z, nb, nf, r) * (-gamma * (1.0 + 2.0 * z) / ((1.0 - z) * gbar)).exp()
            },
            w[0],
            w[1],
            1e-13,
        )?;
    }
    Ok(s)
}

/// Distribution function of the large-array `γ_BS`. At zero it equals
/// `P(R ≥ 1)`, negligible whenever the array dominates the jammer.
pub fn i1_cdf(cfg: &NetworkConfig, gamma: f64) -> Result<f64> {
    if !cfg.has_jammer() {
        return Err(Error::NoJammer);
    }
    Ok(1.0 - survival(cfg, gamma, &ratio_breaks(cfg))?)
}

/// `I1` from `∫_0^∞ P(γ_BS > γ)/(1+γ) dγ`, each survival value itself a
/// quadrature over the ratio density. Target: 1e-8 absolute.
pub fn i1_quadrature(cfg: &NetworkConfig) -> Result<f64> {
    cfg.validate()?;
    if !cfg.has_jammer() {
        return Err(Error::NoJammer);
    }
    let breaks = ratio_breaks(cfg);
    let gbar = cfg.mean_mr();
    let f = |g: f64| survival(cfg, g, &breaks).map(|s| s / (1.0 + g));
    // capture the first inner failure instead of swallowing it
    let mut err = None;
    let mut g = |x: f64| match f(x) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    let a = quad::integrate(&mut g, 0.0, 1.0, 2e-9)?;
    let b = quad::integrate(&mut g, 1.0, gbar.max(2.0), 2e-9)?;
    let c = quad::integrate_to_inf(&mut g, gbar.max(2.0), 2e-9)?;
    match err {
        Some(e) => Err(e),
        None => Ok(a + b + c),
    }
}
