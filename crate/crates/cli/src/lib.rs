//! Configuration-driven sweeps over pulse length and HBT histogram analysis,
//! built on `multiphoton-core`.

pub mod config;
pub mod hbt;
pub mod sweep;

pub use config::{ConfigError, GridSpec, OutputFormat, SweepConfig, SweepOverrides};
pub use hbt::{
    analyze, run_hbt, write_histogram, HbtFileError, HbtOptions, HistogramFile, ReportDisplay,
    Window,
};
pub use sweep::{run_sweep, SweepError, SweepRow, SweepTable};
