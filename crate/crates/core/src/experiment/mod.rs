//! JSON-configured experiments: validation, runs, sweeps and replay.

mod config;
mod replay;
mod run;
mod sweep;

pub use config::{
    Diagnostic, Doubling, ExperimentConfig, PairSpec, Spacing, SweepSpec, TimeRange, TimeSpec, Tolerances,
    CONFIG_VERSION,
};
pub use replay::{replay, ReplayEntry};
pub use run::{exit_code_for, run, ReportBundle, Verdict};
pub use sweep::{threshold_sweep, PhaseRow};
