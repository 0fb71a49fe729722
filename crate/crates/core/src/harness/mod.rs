//! Experiment engine: energy tables, convergence fits, σ sweeps, norm-drift
//! series and CSV output.

mod config;
mod experiments;
mod fit;
mod report;

pub use config::{ExperimentConfig, RawConfig, SystemSpec};
pub use experiments::{
    instance, run_convergence, run_energy_table, run_norm_drift, run_sigma_sweep, run_trajectory, REFERENCE_REFINEMENT,
};
pub use fit::{fit_slope, SlopeFit, MIN_R_SQUARED};
pub use report::{
    emit_csv, ConvergenceReport, EnergyCell, EnergyTable, ExperimentReport, NormDriftSeries, TrajectoryReport,
};
