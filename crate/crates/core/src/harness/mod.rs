//! Experiment configuration, the cycle loop, and CSV/SVG output.

mod config;
mod plot;
mod presets;
mod record;
mod run;

pub use config::{ExperimentConfig, InfoMode, OrderSchedule, ReadPolicy, WritePolicy};
pub use plot::{emit_plot, render_svg, PlotKind};
pub use presets::{preset, PRESET_NAMES};
pub use record::{
    emit_csv, parse_csv, read_csv, sig9, write_csv, EpochRecord, Lifetime, RunSummary, CSV_COLUMNS,
};
pub use run::{run_experiment, EpochDiagnostics, RunResult};
