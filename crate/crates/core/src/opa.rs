//! Power allocation between the BS and the MU.

use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelRealization;
use crate::model::NetworkConfig;
use crate::sinr::PhiEval;
use crate::{Error, Result};

/// Lower clamp for `λ`; the upper clamp is `1 - LAMBDA_MIN`.
pub const LAMBDA_MIN: f64 = 1e-6;

/// Default tolerance on `λ` for the numeric maximizer.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Large-`γ_br` stationary point of `Φ`.
    OpaClosed,
    /// `λ = γ_fr/γ_br`.
    OpaLsma,
    /// Numeric maximizer of `Φ`.
    OpaNumeric,
    /// `λ = 1/2`, jammer on.
    Epa,
    /// Numeric maximizer with the jammer off and `ε_relay = 1`.
    WoFjOpa,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::OpaClosed,
        Strategy::OpaLsma,
        Strategy::OpaNumeric,
        Strategy::Epa,
        Strategy::WoFjOpa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::OpaClosed => "opa-closed",
            Strategy::OpaLsma => "opa-lsma",
            Strategy::OpaNumeric => "opa-numeric",
            Strategy::Epa => "epa",
            Strategy::WoFjOpa => "wofj-opa",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == key || st.name().replace('-', "") == key)
            .ok_or_else(|| format!("unknown strategy '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    pub lambda: f64,
    pub strategy: Strategy,
    /// The unconstrained answer fell outside `[LAMBDA_MIN, 1-LAMBDA_MIN]`.
    pub clipped: bool,
}

fn clamp(lambda: f64, strategy: Strategy) -> PowerAllocation {
    let hi = 1.0 - LAMBDA_MIN;
    let clipped = !(lambda > LAMBDA_MIN && lambda < hi);
    PowerAllocation {
        lambda: lambda.clamp(LAMBDA_MIN, hi),
        strategy,
        clipped,
    }
}

/// Closed-form allocation valid when `γ_br ≫ γ_mr`:
///
/// `λ* = (-2γ_mr - γ_fr + γ_mr·√(2γ_mr² + 3γ_mr γ_fr - 2γ_mr + γ_fr² - γ_fr)) / (γ_br γ_mr)`
///
/// It is the exact maximizer only as `γ_br → ∞` with `λγ_br` held fixed;
/// for finite `λ*` it overshoots (see `tests::closed_form_overshoot`).
pub fn opa_closed(ch: &ChannelRealization) -> Result<PowerAllocation> {
    let (br, mr, fr) = (ch.gamma_br, ch.gamma_mr, ch.gamma_fr);
    if !(br > 0.0 && mr > 0.0) {
        return Err(Error::OutsideValidity(
            "needs positive gamma_br and gamma_mr".into(),
        ));
    }
    let radicand = 2.0 * mr * mr + 3.0 * mr * fr - 2.0 * mr + fr * fr - fr;
    if radicand < 0.0 {
        return Err(Error::OutsideValidity(format!(
            "negative radicand {radicand:.3e}"
        )));
    }
    let lambda = (-2.0 * mr - fr + mr * radicand.sqrt()) / (br * mr);
    Ok(clamp(lambda, Strategy::OpaClosed))
}

pub fn opa_lsma(ch: &ChannelRealization) -> Result<PowerAllocation> {
    if !(ch.gamma_br > 0.0) {
        return Err(Error::OutsideValidity("gamma_br must be positive".into()));
    }
    Ok(clamp(ch.gamma_fr / ch.gamma_br, Strategy::OpaLsma))
}

/// Central-difference slope of `ln Φ`, step scaled to stay inside `(0,1)`.
pub fn ln_phi_slope(eval: &PhiEval, lambda: f64) -> f64 {
    let h = 1e-4 * lambda.min(1.0 - lambda);
    (eval.ln_phi(lambda + h) - eval.ln_phi(lambda - h)) / (2.0 * h)
}

const PROBES: usize = 24;

/// Maximizes `ln Φ` on the clamped interval; returns `(λ, at_boundary)`.
///
/// Bisection on the sign of the slope, after checking on a probe grid that
/// the sign pattern is `+…+−…−`. Anything else goes to golden-section around
/// the best probe.
pub fn maximize(eval: &PhiEval, tol: f64) -> (f64, bool) {
    let lo = LAMBDA_MIN;
    let hi = 1.0 - LAMBDA_MIN;
    // probes log-spaced near 0 (optima sit near γ_fr/γ_br), then linear
    let probes: Vec<f64> = (0..PROBES)
        .map(|k| {
            let t = k as f64 / (PROBES - 1) as f64;
            if t < 0.5 {
                lo * (0.5 / lo).powf(2.0 * t)
            } else {
                0.5 + (hi - 0.5) * (2.0 * t - 1.0)
            }
        })
        .collect();
    let signs: Vec<bool> = probes
        .iter()
        .map(|&l| ln_phi_slope(eval, l) > 0.0)
        .collect();
    let first_down = signs.iter().position(|&s| !s).unwrap_or(PROBES);
    let monotone = signs[first_down..].iter().all(|&s| !s);

    if monotone {
        if first_down == 0 {
            return (lo, true);
        }
        if first_down == PROBES {
            return (hi, true);
        }
        let (mut a, mut b) = (probes[first_down - 1], probes[first_down]);
        let stop = (tol * 1e-4).max(1e-15);
        for _ in 0..200 {
            if b - a <= stop * a.max(1e-3) {
                break;
            }
            let m = 0.5 * (a + b);
            if ln_phi_slope(eval, m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        return (0.5 * (a + b), false);
    }

    let best = (0..PROBES)
        .max_by(|&i, &j| eval.ln_phi(probes[i]).total_cmp(&eval.ln_phi(probes[j])))
        .expect("probes non-empty");
    let a = probes[best.saturating_sub(1)];
    let b = probes[(best + 1).min(PROBES - 1)];
    let l = golden_max(|x| eval.ln_phi(x), a, b, tol * 1e-2);
    let at_edge = l <= lo * (1.0 + 1e-9) || l >= hi * (1.0 - 1e-12);
    (l, at_edge)
}

/// Golden-section search for a maximum on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub fn opa_numeric(
    ch: &ChannelRealization,
    cfg: &NetworkConfig,
    tol: f64,
) -> Result<PowerAllocation> {
    let eval = PhiEval::for_config(*ch, cfg)?;
    let (lambda, clipped) = maximize(&eval, tol);
    Ok(PowerAllocation {
        lambda,
        strategy: Strategy::OpaNumeric,
        clipped,
    })
}

/// Index and abscissa of the largest value on `λ_i = i/(steps+1)`,
/// `i = 1..=steps`. Ties go to the smaller `λ`.
pub fn grid_argmax<F: Fn(f64) -> f64>(f: F, steps: usize) -> (usize, f64) {
    assert!(steps >= 1, "grid needs at least one point");
    let h = 1.0 / (steps as f64 + 1.0);
    let mut best = (1, h, f(h));
    for i in 2..=steps {
        let l = i as f64 * h;
        let v = f(l);
        if v > best.2 {
            best = (i, l, v);
        }
    }
    (best.0, best.1)
}

/// Brute-force maximizer on a uniform grid of `steps ≥ 100` points.
pub fn opa_grid_oracle(
    ch: &ChannelRealization,
    cfg: &NetworkConfig,
    steps: usize,
) -> Result<PowerAllocation> {
    if steps < 100 {
        return Err(Error::InvalidConfig(format!(
            "grid oracle needs >= 100 steps, got {steps}"
        )));
    }
    let eval = PhiEval::for_config(*ch, cfg)?;
    let (i, lambda) = grid_argmax(|l| eval.ln_phi(l), steps);
    Ok(PowerAllocation {
        lambda,
        strategy: Strategy::OpaNumeric,
        clipped: i == 1 || i == steps,
    })
}

/// Picks `λ` for `strategy` and returns the evaluator the rate must be
/// computed with (WoFJ switches the jammer off and uses `ε_relay = 1`).
pub fn allocate(
    strategy: Strategy,
    ch: &ChannelRealization,
    cfg: &NetworkConfig,
    tol: f64,
) -> Result<(PowerAllocation, PhiEval)> {
    match strategy {
        Strategy::WoFjOpa => {
            let off = ch.without_jammer();
            let eval = PhiEval::new(off, cfg.epsilon_users, 1.0)?;
            let (lambda, clipped) = maximize(&eval, tol);
            Ok((
                PowerAllocation {
                    lambda,
                    strategy,
                    clipped,
                },
                eval,
            ))
        }
        _ => {
            let eval = PhiEval::for_config(*ch, cfg)?;
            let pa = match strategy {
                Strategy::OpaClosed => match opa_closed(ch) {
                    Ok(pa) => pa,
                    Err(Error::OutsideValidity(_)) => {
                        let (lambda, clipped) = maximize(&eval, tol);
                        PowerAllocation {
                            lambda,
                            strategy: Strategy::OpaNumeric,
                            clipped,
                        }
                    }
                    Err(e) => return Err(e),
                },
                Strategy::OpaLsma => opa_lsma(ch)?,
                Strategy::OpaNumeric => {
                    let (lambda, clipped) = maximize(&eval, tol);
                    PowerAllocation {
                        lambda,
                        strategy,
                        clipped,
                    }
                }
                Strategy::Epa => PowerAllocation {
                    lambda: 0.5,
                    strategy,
                    clipped: false,
                },
                Strategy::WoFjOpa => unreachable!(),
            };
            Ok((pa, eval))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample, SeededSampler};
    use approx::assert_relative_eq;

    fn ch(br: f64, mr: f64, fr: f64) -> ChannelRealization {
        ChannelRealization::new(br, mr, fr)
    }

    fn cfg() -> NetworkConfig {
        NetworkConfig::default()
    }

    /// Independent transcription of the closed form, straight from the formula.
    fn closed_reference(br: f64, mr: f64, fr: f64) -> f64 {
        let root = (2.0 * mr.powi(2) + 3.0 * mr * fr - 2.0 * mr + fr.powi(2) - fr).sqrt();
        (-2.0 * mr - fr + mr * root) / (br * mr)
    }

    #[test]
    fn closed_form_value() {
        let pa = opa_closed(&ch(1000.0, 20.0, 100.0)).unwrap();
        assert!((pa.lambda - 0.1221).abs() < 5e-5, "{}", pa.lambda);
        assert_relative_eq!(
            pa.lambda,
            closed_reference(1000.0, 20.0, 100.0),
            max_relative = 1e-14
        );
        assert!(!pa.clipped);
    }

    #[test]
    fn closed_form_overshoot() {
        // The closed form drops the λ-dependence of γ_BS; at this point the
        // true maximizer is 0.084 and Φ loses about 4%.
        let c = ch(1000.0, 20.0, 100.0);
        let closed = opa_closed(&c).unwrap().lambda;
        let grid = opa_grid_oracle(&c, &cfg(), 10_000).unwrap().lambda;
        assert!((grid - 0.0840).abs() < 2e-4, "{grid}");
        let eval = PhiEval::for_config(c, &cfg()).unwrap();
        let ratio = (eval.ln_phi(closed) - eval.ln_phi(grid)).exp();
        assert!(ratio > 0.95 && ratio < 0.97, "{ratio}");
    }

    #[test]
    fn closed_form_tends_to_ratio() {
        let pa = opa_closed(&ch(1e6, 1e3, 1e5)).unwrap();
        assert!((pa.lambda - 0.1).abs() < 0.005, "{}", pa.lambda);
        let far = opa_closed(&ch(1e10, 1e5, 1e9)).unwrap();
        assert!((far.lambda - 0.1).abs() < 1e-4, "{}", far.lambda);
    }

    #[test]
    fn closed_form_boundary_clamps() {
        let pa = opa_closed(&ch(100.0, 2.0, 0.0)).unwrap();
        assert_eq!(pa.lambda, LAMBDA_MIN);
        assert!(pa.clipped);
    }

    #[test]
    fn closed_form_negative_radicand() {
        let r = opa_closed(&ch(100.0, 0.5, 0.1));
        assert!(matches!(r, Err(Error::OutsideValidity(_))));
    }

    #[test]
    fn lsma_examples() {
        let pa = opa_lsma(&ch(1000.0, 5.0, 100.0)).unwrap();
        assert_relative_eq!(pa.lambda, 0.1);
        let pa = opa_lsma(&ch(1000.0, 5.0, 0.0)).unwrap();
        assert_eq!(pa.lambda, LAMBDA_MIN);
        assert!(pa.clipped);
        assert!(opa_lsma(&ch(2.0, 1.0, 3.0)).unwrap().clipped);
        assert!(opa_lsma(&ch(0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn lsma_is_scale_free() {
        let c = ch(734.0, 12.0, 55.0);
        for s in [1e-3, 2.0, 1e5] {
            assert_relative_eq!(
                opa_lsma(&c.scaled(s)).unwrap().lambda,
                opa_lsma(&c).unwrap().lambda,
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn lsma_mean_plug_in() {
        // N_FJ·μ_fr/(N_BS·μ_br) = 4/64; E[Γ(1)/Γ(64)] = 1/63, so the per-draw
        // average should sit at 4/63 ≈ 0.0635, within 2% of 0.0625.
        let c = NetworkConfig {
            n_bs: 64,
            n_fj: 1,
            mu_fr: 4.0,
            ..cfg()
        };
        let s = SeededSampler::new(1);
        let n = 100_000;
        let mean = (0..n)
            .map(|t| opa_lsma(&sample(&c, &s, t)).unwrap().lambda)
            .sum::<f64>()
            / n as f64;
        assert!((mean / 0.0625 - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn grid_picks_middle_of_three() {
        let (i, l) = grid_argmax(|x| -(x - 0.5).powi(2), 3);
        assert_eq!(i, 2);
        assert_relative_eq!(l, 0.5);
    }

    #[test]
    fn grid_ties_go_left() {
        let (i, _) = grid_argmax(|_| 1.0, 10);
        assert_eq!(i, 1);
    }

    #[test]
    fn grid_oracle_needs_resolution() {
        assert!(opa_grid_oracle(&ch(10.0, 1.0, 1.0), &cfg(), 50).is_err());
    }

    #[test]
    fn grid_oracle_boundary_when_jammer_huge() {
        let c = ch(10.0, 5.0, 1e6);
        let pa = opa_grid_oracle(&c, &cfg(), 1000).unwrap();
        // every SINR is crushed, and γ_R grows with λ, so λ → 0 wins
        assert_eq!(pa.lambda, 1.0 / 1001.0);
        assert!(pa.clipped);
        let num = opa_numeric(&c, &cfg(), 1e-9).unwrap();
        assert!(num.clipped);
        assert_eq!(num.lambda, LAMBDA_MIN);
    }

    #[test]
    fn numeric_beats_the_grid() {
        let c = NetworkConfig {
            n_bs: 64,
            n_fj: 1,
            ..cfg()
        }
        .with_rho_db(20.0);
        let s = SeededSampler::new(17);
        for t in 0..200 {
            let r = sample(&c, &s, t);
            let eval = PhiEval::for_config(r, &c).unwrap();
            let num = opa_numeric(&r, &c, 1e-10).unwrap();
            let best = eval.ln_phi(num.lambda);
            for i in 1..1000 {
                let v = eval.ln_phi(i as f64 / 1000.0);
                assert!(
                    best >= v - 1e-12 * v.abs().max(1.0),
                    "trial {t} λ={}",
                    i as f64 / 1e3
                );
            }
            assert!(best >= eval.ln_phi(0.5) - 1e-12);
            if let Ok(pa) = opa_closed(&r) {
                assert!(best >= eval.ln_phi(pa.lambda) - 1e-12);
            }
        }
    }

    #[test]
    fn numeric_matches_grid_at_example_point() {
        let c = ch(1000.0, 20.0, 100.0);
        let num = opa_numeric(&c, &cfg(), 1e-9).unwrap();
        let grid = opa_grid_oracle(&c, &cfg(), 10_000).unwrap();
        assert!((num.lambda - grid.lambda).abs() <= 1.0 / 10_001.0);
    }

    #[test]
    fn numeric_symmetric_degenerate() {
        let c = ch(50.0, 50.0, 0.0);
        let cfg = NetworkConfig {
            epsilon_relay: 1.0,
            ..cfg()
        };
        let num = opa_numeric(&c, &cfg, 1e-9).unwrap();
        let grid = opa_grid_oracle(&c, &cfg, 10_000).unwrap();
        assert!((num.lambda - grid.lambda).abs() <= 1.0 / 10_001.0 + 1e-9);
    }

    #[test]
    fn stationary_when_interior() {
        let c = NetworkConfig {
            n_bs: 64,
            n_fj: 2,
            ..cfg()
        }
        .with_rho_db(25.0);
        let s = SeededSampler::new(4);
        let tol = 1e-8;
        for t in 0..200 {
            let r = sample(&c, &s, t);
            let pa = opa_numeric(&r, &c, tol).unwrap();
            if !pa.clipped {
                let eval = PhiEval::for_config(r, &c).unwrap();
                let d = ln_phi_slope(&eval, pa.lambda);
                assert!(
                    d.abs() <= 10.0 * tol,
                    "trial {t}: slope {d} at {}",
                    pa.lambda
                );
            }
        }
    }

    #[test]
    fn phi_is_single_peaked() {
        let c = NetworkConfig {
            n_bs: 16,
            n_fj: 2,
            ..cfg()
        }
        .with_rho_db(15.0);
        let s = SeededSampler::new(8);
        for t in 0..300 {
            let eval = PhiEval::for_config(sample(&c, &s, t), &c).unwrap();
            let v: Vec<f64> = (1..1000).map(|i| eval.ln_phi(i as f64 / 1000.0)).collect();
            let peaks = v.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count();
            assert!(peaks <= 1, "trial {t} has {peaks} local maxima");
        }
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let x = golden_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn wofj_turns_jammer_off() {
        let c = ch(200.0, 30.0, 500.0);
        let (pa, eval) = allocate(Strategy::WoFjOpa, &c, &cfg(), 1e-9).unwrap();
        assert_eq!(eval.channel().gamma_fr, 0.0);
        assert_eq!(pa.strategy, Strategy::WoFjOpa);
        let (epa, _) = allocate(Strategy::Epa, &c, &cfg(), 1e-9).unwrap();
        assert_eq!(epa.lambda, 0.5);
    }

    #[test]
    fn closed_falls_back_outside_regime() {
        let c = ch(100.0, 0.5, 0.1);
        let (pa, _) = allocate(Strategy::OpaClosed, &c, &cfg(), 1e-9).unwrap();
        assert_eq!(pa.strategy, Strategy::OpaNumeric);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert_eq!(
            "OpaNumeric".parse::<Strategy>().unwrap(),
            Strategy::OpaNumeric
        );
        assert!("bogus".parse::<Strategy>().is_err());
    }
}
