//! Sweep specification, execution and CSV output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use secrecy_sim_core::asymptotic::essr_asymptotic;
use secrecy_sim_core::essr::EssrMethod;
use secrecy_sim_core::{
    essr_closed, essr_montecarlo, gains_from_geometry, regime_check, ClampConvention, EssrEstimate,
    KernelBackend, McOptions, NetworkConfig, NodePositions, RegimeThresholds, Strategy,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    SnrDb,
    NumFjAntennas,
    FjDistance,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::SnrDb => "snr-db",
            SweepKind::NumFjAntennas => "n-fj",
            SweepKind::FjDistance => "fj-distance",
        }
    }
}

impl std::str::FromStr for SweepKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "snr-db" | "snr" | "rho-db" => SweepKind::SnrDb,
            "n-fj" | "num-fj-antennas" | "nfj" => SweepKind::NumFjAntennas,
            "fj-distance" | "distance" => SweepKind::FjDistance,
            _ => bail!("unknown sweep kind '{s}' (snr-db, n-fj, fj-distance)"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub values: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub methods: Vec<EssrMethod>,
    pub trials: u64,
    pub seed: u64,
    pub lsma_sinr: bool,
    pub convention: ClampConvention,
    /// Fan points and trials out to the worker pool. Output is identical
    /// either way.
    pub parallel: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            kind: SweepKind::SnrDb,
            values: Vec::new(),
            strategies: vec![Strategy::OpaNumeric],
            methods: vec![EssrMethod::MonteCarlo],
            trials: 100_000,
            seed: 1,
            lsma_sinr: false,
            convention: ClampConvention::default(),
            parallel: true,
        }
    }
}

/// Inclusive `start, start+step, …, stop`, snapped to 1e-9 so decimal
/// steps print cleanly.
pub fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    ensure!(
        step > 0.0 && step.is_finite(),
        "sweep step must be positive"
    );
    ensure!(stop >= start, "sweep stop must not precede start");
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    ensure!(n < 1_000_000, "sweep has too many points");
    Ok((0..=n)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

/// Parses `kind:start:stop:step`.
pub fn parse_sweep_arg(s: &str) -> Result<(SweepKind, Vec<f64>)> {
    let parts: Vec<&str> = s.split(':').collect();
    ensure!(parts.len() == 4, "expected kind:start:stop:step, got '{s}'");
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .with_context(|| format!("bad number '{x}'"))
    };
    Ok((
        parts[0].parse()?,
        range(num(parts[1])?, num(parts[2])?, num(parts[3])?)?,
    ))
}

impl SweepSpec {
    /// The network at one sweep point.
    pub fn point_config(&self, base: &NetworkConfig, value: f64) -> Result<NetworkConfig> {
        let cfg = match self.kind {
            SweepKind::SnrDb => base.with_rho_db(value),
            SweepKind::NumFjAntennas => {
                ensure!(
                    value >= 0.0 && value.fract() == 0.0 && value <= 4096.0,
                    "n-fj sweep values must be whole numbers, got {value}"
                );
                NetworkConfig {
                    n_fj: value as u32,
                    ..*base
                }
            }
            SweepKind::FjDistance => {
                ensure!(value > 0.0, "fj distance must be positive, got {value}");
                let g = gains_from_geometry(&NodePositions::with_fj_distance(value), base.alpha)?;
                base.with_gains(g)
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self, base: &NetworkConfig) -> Result<()> {
        ensure!(!self.values.is_empty(), "sweep has no values");
        ensure!(
            self.values.windows(2).all(|w| w[1] > w[0]),
            "sweep values must be strictly increasing"
        );
        ensure!(!self.strategies.is_empty(), "no strategies selected");
        ensure!(!self.methods.is_empty(), "no methods selected");
        ensure!(
            !self.methods.contains(&EssrMethod::Quadrature),
            "quadrature is an oracle, not a sweep method"
        );
        let mc = self.methods.contains(&EssrMethod::MonteCarlo);
        if mc {
            ensure!(
                self.trials >= secrecy_sim_core::essr::MIN_TRIALS,
                "at least {} trials required",
                secrecy_sim_core::essr::MIN_TRIALS
            );
        }
        let analytic = self
            .methods
            .iter()
            .any(|m| matches!(m, EssrMethod::ClosedForm | EssrMethod::Asymptotic));
        for &v in &self.values {
            let cfg = self.point_config(base, v)?;
            if analytic {
                ensure!(
                    cfg.has_jammer(),
                    "closed-form methods need n_fj >= 1 (point {v})"
                );
            }
            if mc && !cfg.has_jammer() && cfg.epsilon_relay == 0.0 {
                ensure!(
                    self.strategies.iter().all(|&s| s == Strategy::WoFjOpa),
                    "n_fj = 0 with epsilon_relay = 0 leaves the relay SINR singular (point {v})"
                );
            }
        }
        Ok(())
    }
}

/// One CSV record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_kind: String,
    pub sweep_value: f64,
    pub strategy: String,
    pub method: String,
    pub essr_bits: f64,
    pub ci_halfwidth: f64,
    pub trials: u64,
    pub seed: u64,
    pub n_bs: u32,
    pub n_fj: u32,
    pub regime_flags: String,
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub path: PathBuf,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy)]
enum Job {
    Mc(Strategy),
    Closed,
    Asym,
}

fn jobs(spec: &SweepSpec) -> Vec<Job> {
    let mut out = Vec::new();
    if spec.methods.contains(&EssrMethod::MonteCarlo) {
        out.extend(spec.strategies.iter().map(|&s| Job::Mc(s)));
    }
    if spec.methods.contains(&EssrMethod::ClosedForm) {
        out.push(Job::Closed);
    }
    if spec.methods.contains(&EssrMethod::Asymptotic) {
        out.push(Job::Asym);
    }
    out
}

fn run_job(spec: &SweepSpec, cfg: &NetworkConfig, value: f64, job: Job) -> Result<SweepRow> {
    let (strategy, est): (Strategy, EssrEstimate) = match job {
        Job::Mc(s) => {
            let opts = McOptions {
                trials: spec.trials,
                seed: spec.seed,
                lsma_sinr: spec.lsma_sinr,
                convention: spec.convention,
                parallel: spec.parallel,
                ..McOptions::default()
            };
            (s, essr_montecarlo(cfg, s, &opts)?)
        }
        Job::Closed => (Strategy::OpaLsma, essr_closed(cfg, &KernelBackend::Exact)?),
        Job::Asym => (Strategy::OpaLsma, essr_asymptotic(cfg)?),
    };
    Ok(SweepRow {
        sweep_kind: spec.kind.name().to_string(),
        sweep_value: value,
        strategy: strategy.name().to_string(),
        method: est.method.name().to_string(),
        essr_bits: est.value,
        ci_halfwidth: est.ci_halfwidth,
        trials: est.trials,
        seed: spec.seed,
        n_bs: cfg.n_bs,
        n_fj: cfg.n_fj,
        regime_flags: regime_check(cfg, RegimeThresholds::default()).flags_string(),
    })
}

fn compute_rows(spec: &SweepSpec, base: &NetworkConfig) -> Result<Vec<SweepRow>> {
    spec.validate(base)?;
    let js = jobs(spec);
    let tasks: Vec<(f64, Job)> = spec
        .values
        .iter()
        .flat_map(|&v| js.iter().map(move |&j| (v, j)))
        .collect();
    let one = |&(v, j): &(f64, Job)| -> Result<SweepRow> {
        let cfg = spec.point_config(base, v)?;
        run_job(spec, &cfg, v, j).with_context(|| format!("sweep point {v}"))
    };
    if spec.parallel {
        tasks.par_iter().map(one).collect()
    } else {
        tasks.iter().map(one).collect()
    }
}

fn fmt_cfg(c: &NetworkConfig) -> String {
    format!(
        "n_bs={} n_fj={} mu_br={} mu_mr={} mu_fr={} rho_db={} alpha={} epsilon_relay={} epsilon_users={}",
        c.n_bs,
        c.n_fj,
        c.mu_br,
        c.mu_mr,
        c.mu_fr,
        c.rho_db(),
        c.alpha,
        c.epsilon_relay,
        c.epsilon_users
    )
}

fn metadata(runs: &[(NetworkConfig, SweepSpec)], notes: &[String]) -> String {
    let mut m = String::from("# secrecy-sim sweep\n");
    for (cfg, spec) in runs {
        let _ = writeln!(
            m,
            "# run kind={} points={} trials={} seed={} lsma_sinr={} convention={} | {}",
            spec.kind.name(),
            spec.values.len(),
            spec.trials,
            spec.seed,
            spec.lsma_sinr,
            spec.convention.name(),
            fmt_cfg(cfg)
        );
    }
    m.push_str("# wofj-opa switches the jammer off and uses epsilon_relay=1\n");
    m.push_str("# closed-form and asymptotic rows assume opa-lsma with large-array SINRs\n");
    for n in notes {
        let _ = writeln!(m, "# {n}");
    }
    m
}

/// Runs several sweeps into one CSV, rows in run order then sweep order.
pub fn run_sweeps(
    runs: &[(NetworkConfig, SweepSpec)],
    out: &Path,
    notes: &[String],
) -> Result<SweepSummary> {
    let mut rows = Vec::new();
    for (cfg, spec) in runs {
        rows.extend(compute_rows(spec, cfg)?);
    }
    let mut buf = metadata(runs, notes).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    std::fs::write(out, &buf).with_context(|| format!("writing {}", out.display()))?;
    Ok(SweepSummary {
        path: out.to_path_buf(),
        rows,
    })
}

pub fn run_sweep(spec: &SweepSpec, cfg: &NetworkConfig, out: &Path) -> Result<SweepSummary> {
    run_sweeps(&[(*cfg, spec.clone())], out, &[])
}

/// Reads rows back, skipping `#` metadata.
pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    rdr.deserialize().map(|r| Ok(r?)).collect()
}

/// First sweep value where `strategy`'s curve reaches `level` bits,
/// linearly interpolated; `None` if it never does.
pub fn crossing(rows: &[SweepRow], strategy: &str, method: &str, level: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.strategy == strategy && r.method == method)
        .map(|r| (r.sweep_value, r.essr_bits))
        .collect();
    pts.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        (y0 < level && y1 >= level).then(|| x0 + (level - y0) * (x1 - x0) / (y1 - y0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_is_inclusive_and_clean() {
        assert_eq!(range(0.0, 1.0, 0.1).unwrap().len(), 11);
        assert_eq!(range(0.1, 1.0, 0.1).unwrap()[4], 0.5);
        assert_eq!(range(5.0, 5.0, 1.0).unwrap(), vec![5.0]);
        assert!(range(1.0, 0.0, 1.0).is_err());
        assert!(range(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sweep_arg_parses() {
        let (k, v) = parse_sweep_arg("fj-distance:0.1:0.3:0.1").unwrap();
        assert_eq!(k, SweepKind::FjDistance);
        assert_eq!(v, vec![0.1, 0.2, 0.3]);
        assert!(parse_sweep_arg("snr-db:0:10").is_err());
        assert!(parse_sweep_arg("volume:0:10:1").is_err());
    }

    #[test]
    fn spec_validation() {
        let base = NetworkConfig::default();
        let ok = SweepSpec {
            values: vec![0.0, 10.0],
            ..SweepSpec::default()
        };
        assert!(ok.validate(&base).is_ok());
        assert!(SweepSpec {
            strategies: vec![],
            ..ok.clone()
        }
        .validate(&base)
        .is_err());
        assert!(SweepSpec {
            methods: vec![],
            ..ok.clone()
        }
        .validate(&base)
        .is_err());
        assert!(SweepSpec {
            values: vec![],
            ..ok.clone()
        }
        .validate(&base)
        .is_err());
        assert!(SweepSpec {
            values: vec![1.0, 1.0],
            ..ok.clone()
        }
        .validate(&base)
        .is_err());
        let closed_no_jam = SweepSpec {
            kind: SweepKind::NumFjAntennas,
            values: vec![0.0, 1.0],
            methods: vec![EssrMethod::ClosedForm],
            ..ok.clone()
        };
        assert!(closed_no_jam.validate(&base).is_err());
        let half = SweepSpec {
            kind: SweepKind::NumFjAntennas,
            values: vec![1.5],
            ..ok
        };
        assert!(half.validate(&base).is_err());
    }

    #[test]
    fn distance_points_recompute_gains() {
        let spec = SweepSpec {
            kind: SweepKind::FjDistance,
            ..SweepSpec::default()
        };
        let c = spec.point_config(&NetworkConfig::default(), 0.25).unwrap();
        assert!((c.mu_fr - 16.0).abs() < 1e-9);
        assert!((c.mu_br - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_interpolates() {
        let row = |x: f64, y: f64| SweepRow {
            sweep_kind: "snr-db".into(),
            sweep_value: x,
            strategy: "epa".into(),
            method: "monte-carlo".into(),
            essr_bits: y,
            ci_halfwidth: 0.0,
            trials: 0,
            seed: 0,
            n_bs: 1,
            n_fj: 1,
            regime_flags: String::new(),
        };
        let rows = vec![row(0.0, 1.0), row(10.0, 4.0), row(20.0, 6.0)];
        assert_eq!(crossing(&rows, "epa", "monte-carlo", 5.0), Some(15.0));
        assert_eq!(crossing(&rows, "epa", "monte-carlo", 7.0), None);
    }
}
