//! End-to-end experiments: synthetic scenes, degradation simulation,
//! restoration runs and parameter sweeps.

mod run;
mod spec;
mod sweep;
mod synth;

pub use run::{degrade, initial_image, run_experiment, run_on, Degraded, ExperimentOutcome};
pub use spec::{ExperimentSpec, InitSpec, InputSpec, KernelSpec, Task};
pub use sweep::{
    mean_std, summarize, sweep, sweep_csv, with_value, SweepParam, SweepRow, SweepSummary, SWEEP_CSV_HEADER,
};
pub use synth::{synthetic, uniform_image, SYNTH_NAMES};
