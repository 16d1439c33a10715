//! Config-driven Monte Carlo runner: composes graphs, propagation,
//! estimators and scoring into per-trial rows, persists them as CSV and
//! ships named presets for the standard sweeps.

mod config;
mod csv_io;
mod presets;
mod run;

pub use config::{EstimatorKind, ExperimentConfig, Spreading};
pub use csv_io::{read_csv, write_csv, write_csv_to, HEADER};
pub use presets::{find_preset, run_configs, run_preset, Preset, PresetOutput, PRESETS};
pub use run::{black_hole_t_base, build_world, run_blackhole, run_experiment, run_trial, TrialRow, TrialWorld};

pub use crate::topology::io::{load_graph, serialize_graph};
