use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use secrecy_sim::config::{parse_convention, parse_list, FileConfig};
use secrecy_sim::presets::{self, Preset};
use secrecy_sim::sweep::{parse_sweep_arg, run_sweeps, SweepSpec};
use secrecy_sim::validate::{validate, ValidateOptions};
use secrecy_sim_core::essr::EssrMethod;
use secrecy_sim_core::Strategy;

/// Ergodic secrecy rate sweeps for two-way untrusted relaying with a friendly jammer.
#[derive(Parser)]
#[command(name = "secrecy-sim", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a sweep described by a config file and/or flags.
    Sweep(SweepArgs),
    /// Run the oracle-equivalence suite and write a JSON report.
    Validate(ValidateArgs),
    /// Reproduce one of the figure datasets.
    Preset(PresetArgs),
}

#[derive(Args)]
struct Common {
    /// Output path.
    #[arg(long)]
    out: PathBuf,
    /// Monte Carlo trials per point.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// TOML file with [network] and [sweep] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated, e.g. opa-numeric,epa,wofj-opa
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<String>>,
    /// Comma-separated subset of monte-carlo,closed-form,asymptotic
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// kind:start:stop:step with kind one of snr-db, n-fj, fj-distance
    #[arg(long)]
    sweep: Option<String>,
    /// Large-array SINRs in Monte Carlo.
    #[arg(long)]
    lsma_sinr: bool,
    /// average-then-clamp (default) or clamp-then-average
    #[arg(long)]
    convention: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Perturb a dilogarithm series coefficient to exercise the checks.
    #[arg(long)]
    tamper_dilog: bool,
}

#[derive(Args)]
struct PresetArgs {
    /// fig2, fig3 or fig4
    name: String,
    #[command(flatten)]
    common: Common,
}

fn init_pool() -> Result<()> {
    if let Ok(v) = std::env::var("SECRECY_SIM_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("SECRECY_SIM_THREADS={v}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let file = match &a.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let cfg = file.network()?;
    let mut spec = file.sweep_over(SweepSpec::default())?;
    if let Some(s) = &a.sweep {
        (spec.kind, spec.values) = parse_sweep_arg(s)?;
    }
    if let Some(v) = &a.strategies {
        spec.strategies = parse_list::<Strategy>(v)?;
    }
    if let Some(v) = &a.methods {
        spec.methods = parse_list::<EssrMethod>(v)?;
    }
    if let Some(v) = &a.convention {
        spec.convention = parse_convention(v)?;
    }
    spec.lsma_sinr |= a.lsma_sinr;
    if let Some(t) = a.common.trials {
        spec.trials = t;
    }
    if let Some(s) = a.common.seed {
        spec.seed = s;
    }
    let summary = run_sweeps(&[(cfg, spec)], &a.common.out, &[])?;
    eprintln!(
        "wrote {} rows to {}",
        summary.rows.len(),
        summary.path.display()
    );
    Ok(())
}

fn preset(a: PresetArgs) -> Result<()> {
    let p: Preset = a.name.parse()?;
    let runs = presets::runs(
        p,
        a.common.trials.unwrap_or(100_000),
        a.common.seed.unwrap_or(1),
    );
    let note = format!("preset {}", a.name);
    let summary = run_sweeps(&runs, &a.common.out, &[note])?;
    eprintln!(
        "wrote {} rows to {}",
        summary.rows.len(),
        summary.path.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_pool() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let res = match cli.cmd {
        Cmd::Sweep(a) => sweep(a),
        Cmd::Preset(a) => preset(a),
        Cmd::Validate(a) => {
            let d = ValidateOptions::default();
            let opts = ValidateOptions {
                tamper_dilog: a.tamper_dilog,
                trials: a.common.trials.unwrap_or(d.trials),
                seed: a.common.seed.unwrap_or(d.seed),
                ..d
            };
            match validate(&a.common.out, &opts) {
                Ok(r) => {
                    for c in &r.checks {
                        let tag = match (c.passed, c.informational) {
                            (true, _) => "pass",
                            (false, true) => "info",
                            (false, false) => "FAIL",
                        };
                        eprintln!("{tag:>4}  {:<26} {}", c.name, c.detail);
                    }
                    return if r.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    };
                }
                Err(e) => Err(e),
            }
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
