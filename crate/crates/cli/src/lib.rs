//! Sweep runner, figure presets and the validation suite behind the
//! `secrecy-sim` binary.

pub mod config;
pub mod presets;
pub mod sweep;
pub mod validate;

pub use config::FileConfig;
pub use sweep::{run_sweep, run_sweeps, SweepKind, SweepRow, SweepSpec, SweepSummary};
