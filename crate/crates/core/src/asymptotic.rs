//! High-SNR behaviour: `R̄ ≈ S_∞(log₂ρ - L_∞)` with `S_∞ = 1`.
//!
//! The large-array `γ_BS` factors as `γ_mr·(1-R)/(1+2R)`, so
//! `E{ln γ_BS} = I11 + I12 - I13` with `I11 = E{ln γ_mr}`,
//! `I12 = E{ln(1-R)}` and `I13 = E{ln(1+2R)}`.

use std::f64::consts::LN_2;

use crate::channel::gamma_ratio_pdf;
use crate::essr::{EssrEstimate, EssrMethod};
use crate::model::NetworkConfig;
use crate::{precise, quad, Error, Result, EULER_GAMMA};

/// Slope and offset of the high-SNR line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticResult {
    /// bits/s/Hz per 3 dB
    pub slope: f64,
    /// in 3 dB units
    pub offset: f64,
}

impl AsymptoticResult {
    /// `slope·(log₂ρ - offset)`, unclamped.
    pub fn essr_at(&self, rho: f64) -> f64 {
        self.slope * (rho.log2() - self.offset)
    }
}

/// `E{ln γ_mr} = ln γ̄_mr - C`, C the Euler–Mascheroni constant.
pub fn i11(gamma_mr_bar: f64) -> f64 {
    gamma_mr_bar.ln() - EULER_GAMMA
}

/// `E{ln(1 - R)}` over `R < 1`, negative. Zero in the no-jammer limit.
pub fn i12(cfg: &NetworkConfig) -> Result<f64> {
    cfg.validate()?;
    if !cfg.has_jammer() {
        return Ok(0.0);
    }
    let v = precise::i12(cfg.n_bs, cfg.n_fj, cfg.gain_ratio())?;
    if !v.is_finite() || v > 0.0 {
        return Err(Error::BranchHandling(format!("I12 assembled to {v}")));
    }
    Ok(v)
}

/// `E{ln(1 + 2R)}`, positive. Zero in the no-jammer limit.
pub fn i13(cfg: &NetworkConfig) -> Result<f64> {
    cfg.validate()?;
    if !cfg.has_jammer() {
        return Ok(0.0);
    }
    let v = precise::i13(cfg.n_bs, cfg.n_fj, cfg.gain_ratio())?;
    if !v.is_finite() || v < 0.0 {
        return Err(Error::BranchHandling(format!("I13 assembled to {v}")));
    }
    Ok(v)
}

fn ratio_scale(cfg: &NetworkConfig) -> f64 {
    let m = f64::from(cfg.n_fj) * cfg.gain_ratio() / f64::from(cfg.n_bs.max(2) - 1);
    m.min(0.5)
}

/// `∫_0^1 ln(1-x)·f_R(x) dx` by adaptive quadrature over the ratio density.
pub fn i12_quadrature(cfg: &NetworkConfig) -> Result<f64> {
    let f = |x: f64| (-x).ln_1p() * gamma_ratio_pdf(x, cfg).unwrap_or(0.0);
    if !cfg.has_jammer() {
        return Err(Error::NoJammer);
    }
    let m = ratio_scale(cfg);
    Ok(quad::integrate(f, 0.0, m, 1e-14)? + quad::integrate(f, m, 1.0, 1e-14)?)
}

/// `∫_0^∞ ln(1+2x)·f_R(x) dx` by adaptive quadrature over the ratio density.
pub fn i13_quadrature(cfg: &NetworkConfig) -> Result<f64> {
    let f = |x: f64| (2.0 * x).ln_1p() * gamma_ratio_pdf(x, cfg).unwrap_or(0.0);
    if !cfg.has_jammer() {
        return Err(Error::NoJammer);
    }
    let m = ratio_scale(cfg);
    Ok(quad::integrate(f, 0.0, m, 1e-14)?
        + quad::integrate(f, m, 1.0, 1e-14)?
        + quad::integrate_to_inf(f, 1.0, 1e-14)?)
}

/// `(2·I11 + I12 - I13 - 2 ln 2)/(2 ln 2)`, unclamped.
pub fn essr_asymptotic_raw(cfg: &NetworkConfig) -> Result<f64> {
    let (a, b, c) = (i11(cfg.mean_mr()), i12(cfg)?, i13(cfg)?);
    Ok((2.0 * a + b - c - 2.0 * LN_2) / (2.0 * LN_2))
}

/// The high-SNR ESSR, floored at zero like every other estimate.
pub fn essr_asymptotic(cfg: &NetworkConfig) -> Result<EssrEstimate> {
    Ok(EssrEstimate::exact(
        essr_asymptotic_raw(cfg)?.max(0.0),
        EssrMethod::Asymptotic,
    ))
}

/// `S_∞ = 1` and `L_∞ = -log₂μ_mr - I12/(2 ln 2) + I13/(2 ln 2) + C/ln 2 + 1`.
pub fn slope_offset(cfg: &NetworkConfig) -> Result<AsymptoticResult> {
    let (b, c) = (i12(cfg)?, i13(cfg)?);
    let offset = -cfg.mu_mr.log2() - b / (2.0 * LN_2) + c / (2.0 * LN_2) + EULER_GAMMA / LN_2 + 1.0;
    Ok(AsymptoticResult { slope: 1.0, offset })
}

/// Offset with `I12 ≈ -N_FJ·r/(N_BS-1)` and `I13 ≈ 2·N_FJ·r/(N_BS-1)`:
/// `-log₂μ_mr + 3·N_FJ·r/(2(N_BS-1) ln 2) + C/ln 2 + 1`.
pub fn power_offset_simplified(cfg: &NetworkConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.n_bs < 2 {
        return Err(Error::OffsetNeedsTwoBs);
    }
    let jam = 3.0 * f64::from(cfg.n_fj) * cfg.gain_ratio() / (2.0 * f64::from(cfg.n_bs - 1) * LN_2);
    Ok(-cfg.mu_mr.log2() + jam + EULER_GAMMA / LN_2 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::essr::{essr_closed, KernelBackend};
    use approx::assert_relative_eq;

    fn cfg(n_bs: u32, n_fj: u32, varrho: f64) -> NetworkConfig {
        NetworkConfig {
            n_bs,
            n_fj,
            mu_br: 1.0,
            mu_fr: varrho - 1.0,
            ..NetworkConfig::default()
        }
    }

    fn fig3(n_fj: u32, rho_db: f64) -> NetworkConfig {
        NetworkConfig {
            n_bs: 256,
            n_fj,
            ..NetworkConfig::default()
        }
        .with_rho_db(rho_db)
    }

    #[test]
    fn i11_values() {
        assert_relative_eq!(i11(1.0), -0.577_215_664_9, max_relative = 1e-10);
        assert!(i11(EULER_GAMMA.exp()).abs() < 1e-15);
        let q =
            quad::integrate_to_inf(|x| x.ln() * (-x / 100.0).exp() / 100.0, 0.0, 1e-12).unwrap();
        assert!((i11(100.0) - q).abs() < 1e-6);
        assert_relative_eq!(i11(100.0), 4.027_95, max_relative = 1e-5);
    }

    #[test]
    fn i12_i13_match_quadrature_on_grid() {
        for nb in [2, 8, 64] {
            for nf in [1, 2, 4, 16] {
                for v in [1.01, 1.0625, 1.5, 3.0] {
                    let c = cfg(nb, nf, v);
                    let (a, qa) = (i12(&c).unwrap(), i12_quadrature(&c).unwrap());
                    let (b, qb) = (i13(&c).unwrap(), i13_quadrature(&c).unwrap());
                    assert!((a - qa).abs() < 1e-6, "I12 ({nb},{nf},{v}): {a} vs {qa}");
                    assert!((b - qb).abs() < 1e-6, "I13 ({nb},{nf},{v}): {b} vs {qb}");
                }
            }
        }
    }

    #[test]
    fn signs() {
        for (nb, nf, v) in [(2, 1, 3.0), (8, 4, 1.5), (64, 16, 1.01)] {
            let c = cfg(nb, nf, v);
            assert!(i12(&c).unwrap() < 0.0);
            assert!(i13(&c).unwrap() > 0.0);
        }
    }

    #[test]
    fn small_ratio_limits() {
        let c = NetworkConfig {
            n_bs: 256,
            n_fj: 2,
            mu_br: 100.0,
            mu_fr: 1.0,
            ..Default::default()
        };
        let lim = 2.0 * 0.01 / 255.0;
        assert_relative_eq!(i12(&c).unwrap(), -lim, max_relative = 0.02);
        assert_relative_eq!(i13(&c).unwrap(), 2.0 * lim, max_relative = 0.02);
    }

    #[test]
    fn assembled_line_is_exact() {
        for nf in [4, 8, 16] {
            for db in [20.0, 37.3, 60.0] {
                let c = fig3(nf, db);
                let line = slope_offset(&c).unwrap();
                let raw = essr_asymptotic_raw(&c).unwrap();
                assert!((raw - line.essr_at(c.rho)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn doubling_rho_adds_one_bit() {
        let a = essr_asymptotic_raw(&fig3(4, 30.0)).unwrap();
        let c = fig3(4, 30.0);
        let b = essr_asymptotic_raw(&NetworkConfig {
            rho: 2.0 * c.rho,
            ..c
        })
        .unwrap();
        assert!((b - a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jammer_free_limit() {
        let c = NetworkConfig {
            n_fj: 0,
            ..fig3(4, 30.0)
        };
        let expect = (2.0 * i11(c.mean_mr()) - 2.0 * LN_2) / (2.0 * LN_2);
        assert_relative_eq!(
            essr_asymptotic_raw(&c).unwrap(),
            expect,
            max_relative = 1e-15
        );
        let off = slope_offset(&c).unwrap().offset;
        assert_relative_eq!(off, EULER_GAMMA / LN_2 + 1.0, max_relative = 1e-15);
        assert_relative_eq!(off, 1.8327, max_relative = 1e-4);
        // a vanishing jammer approaches the same offset continuously
        let faint = slope_offset(&NetworkConfig {
            mu_fr: 1e-12,
            ..fig3(4, 30.0)
        })
        .unwrap()
        .offset;
        assert_relative_eq!(faint, off, max_relative = 1e-9);
    }

    #[test]
    fn close_to_closed_form_at_high_snr() {
        for nf in [4, 8, 16] {
            let c = fig3(nf, 45.0);
            let a = essr_asymptotic(&c).unwrap().value;
            let e = essr_closed(&c, &KernelBackend::Exact).unwrap().value;
            assert!((a - e).abs() <= 0.1, "nf={nf}: {a} vs {e}");
        }
    }

    #[test]
    fn offsets_order_with_jammer_size() {
        let l: Vec<f64> = [4, 8, 16]
            .iter()
            .map(|&n| slope_offset(&fig3(n, 30.0)).unwrap().offset)
            .collect();
        assert!(l[2] > l[1] && l[1] > l[0]);
    }

    #[test]
    fn simplified_offset_monotone() {
        let base = NetworkConfig {
            n_bs: 64,
            n_fj: 2,
            ..Default::default()
        };
        let by_fj: Vec<f64> = (1..6)
            .map(|nf| power_offset_simplified(&NetworkConfig { n_fj: nf, ..base }).unwrap())
            .collect();
        assert!(by_fj.windows(2).all(|w| w[1] > w[0]));
        let by_bs: Vec<f64> = [2, 4, 16, 64, 256]
            .iter()
            .map(|&nb| power_offset_simplified(&NetworkConfig { n_bs: nb, ..base }).unwrap())
            .collect();
        assert!(by_bs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn simplified_offset_tracks_exact() {
        let c = NetworkConfig {
            n_bs: 256,
            n_fj: 1,
            ..Default::default()
        };
        let exact = slope_offset(&c).unwrap().offset;
        let simple = power_offset_simplified(&c).unwrap();
        assert!((simple / exact - 1.0).abs() < 0.05, "{simple} vs {exact}");
        // the unhalved coefficient lands further away
        let doubled = simple + 3.0 * 4.0 / (2.0 * 255.0 * LN_2);
        assert!((doubled - exact).abs() > (simple - exact).abs());
    }

    #[test]
    fn simplified_offset_needs_two_bs() {
        let c = NetworkConfig {
            n_bs: 1,
            ..Default::default()
        };
        assert_eq!(power_offset_simplified(&c), Err(Error::OffsetNeedsTwoBs));
    }
}
