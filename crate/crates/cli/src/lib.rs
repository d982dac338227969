//! Batch front end: scenario files, sweeps, CSV output and figure presets.

pub mod config;
pub mod decoy_report;
pub mod error;
pub mod presets;
pub mod sweep;

pub use config::{parse, Axis, Method, Scenario};
pub use error::{CliError, Result};
pub use presets::{preset, presets, Preset, DEVICE_PRESETS};
pub use sweep::{run_sweep, SweepResult, SweepRow};
