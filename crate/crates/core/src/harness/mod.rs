//! Experiment runner: configuration, presets, runs with on-disk output,
//! convergence studies and figure data.

mod config;
mod convergence;
mod expr;
mod figures;
mod output;
mod presets;
mod run;
mod sim;

pub use config::{
    parse_config, CoefficientSpec, Coefficients, GridConfig, IcExpression, IcSpec, ModelKind, Nonlinearity,
    OutputConfig, RunConfig,
};
pub use convergence::{convergence_study, ConvergenceRow, ConvergenceTable, EXACT_TOL};
pub use expr::ScalarExpr;
pub use figures::emit_figures_data;
pub use output::{read_checkpoint, SCHEMA_VERSION};
pub use presets::{preset, PRESET_NAMES};
pub use run::{resume, run, run_from, RunStatus, RunSummary};
pub use sim::{integrate, Checkpoint, Integration, SimState, Simulation, StepResult};
