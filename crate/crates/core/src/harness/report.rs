use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::fit::SlopeFit;
use crate::error::{Error, Result};
use crate::integrators::Trajectory;

/// One (scheme, Δt) cell of an energy table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyCell {
    pub scheme: String,
    pub dt: f64,
    /// `max_n |H(M_n) − H(M_0)|` per ensemble member; `None` where the run failed.
    pub run_errors: Vec<Option<f64>>,
    /// First failure message, if any run failed.
    pub failure: Option<String>,
}

impl EnergyCell {
    /// Ensemble mean, or `None` for a failed cell.
    pub fn mean(&self) -> Option<f64> {
        if self.failure.is_some() || self.run_errors.is_empty() {
            return None;
        }
        let sum: f64 = self.run_errors.iter().map(|e| e.unwrap_or(f64::NAN)).sum();
        Some(sum / self.run_errors.len() as f64)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyTable {
    pub schemes: Vec<String>,
    pub dts: Vec<f64>,
    /// Scheme-major: cell `(s, d)` sits at `s * dts.len() + d`.
    pub cells: Vec<EnergyCell>,
}

impl EnergyTable {
    pub fn cell(&self, scheme: usize, dt: usize) -> &EnergyCell {
        &self.cells[scheme * self.dts.len() + dt]
    }

    pub fn mean(&self, scheme: usize, dt: usize) -> Option<f64> {
        self.cell(scheme, dt).mean()
    }
}

/// Final-state errors of one scheme against a fine reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub scheme: String,
    /// The constant σ of a sweep point.
    pub sigma: Option<f64>,
    pub dts: Vec<f64>,
    /// Largest geodesic angle between computed and reference spins; NaN where the run failed.
    pub errors: Vec<f64>,
    pub fit: Option<SlopeFit>,
    pub reference_dt: f64,
}

/// `max_j |‖M_j‖ − 1|` over a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormDriftSeries {
    pub scheme: String,
    pub dt: f64,
    pub times: Vec<f64>,
    pub norm_deviation: Vec<f64>,
    /// Largest deviation over every step, not just the recorded ones.
    pub max_deviation: f64,
    /// `max_j ‖M_j‖` at the final time.
    pub terminal_max_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub scheme: String,
    pub trajectory: Trajectory,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExperimentReport {
    EnergyTable(EnergyTable),
    Convergence(Vec<ConvergenceReport>),
    SigmaSweep(Vec<ConvergenceReport>),
    NormDrift(Vec<NormDriftSeries>),
    Trajectory(TrajectoryReport),
}

/// Full double precision, 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

struct Table {
    name: &'static str,
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

fn write_table(dir: &Path, t: &Table) -> Result<PathBuf> {
    let path = dir.join(t.name);
    let csv_err = |source| Error::Csv { path: path.clone(), source };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(t.header).map_err(csv_err)?;
    for r in &t.rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.clone(), source })?;
    Ok(path)
}

fn fit_rows(reports: &[ConvergenceReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            let f = r.fit.as_ref();
            vec![
                r.scheme.clone(),
                opt(r.sigma),
                opt(f.map(|f| f.slope)),
                opt(f.map(|f| f.r_squared)),
                f.map(|f| f.monotone.to_string()).unwrap_or_default(),
                f.is_none_or(|f| f.flagged()).to_string(),
                r.dts.len().to_string(),
                num(r.reference_dt),
            ]
        })
        .collect()
}

fn error_rows(reports: &[ConvergenceReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .flat_map(|r| {
            r.dts.iter().zip(&r.errors).map(move |(&dt, &e)| vec![r.scheme.clone(), opt(r.sigma), num(dt), num(e)])
        })
        .collect()
}

const FIT_HEADER: &[&str] =
    &["scheme", "sigma", "slope", "r_squared", "monotone", "flagged", "samples", "reference_dt"];
const ERROR_HEADER: &[&str] = &["scheme", "sigma", "dt", "error"];

fn tables(report: &ExperimentReport) -> Vec<Table> {
    match report {
        ExperimentReport::EnergyTable(t) => vec![
            Table {
                name: "energy_table.csv",
                header: &["scheme", "dt", "mean_max_energy_error", "runs", "failed_runs", "status"],
                rows: t
                    .cells
                    .iter()
                    .map(|c| {
                        let failed = c.run_errors.iter().filter(|e| e.is_none()).count();
                        vec![
                            c.scheme.clone(),
                            num(c.dt),
                            opt(c.mean()),
                            c.run_errors.len().to_string(),
                            failed.to_string(),
                            c.failure.clone().map_or_else(|| "ok".to_string(), |f| format!("failed: {f}")),
                        ]
                    })
                    .collect(),
            },
            Table {
                name: "energy_runs.csv",
                header: &["scheme", "dt", "run", "max_energy_error"],
                rows: t
                    .cells
                    .iter()
                    .flat_map(|c| {
                        c.run_errors
                            .iter()
                            .enumerate()
                            .map(move |(i, e)| vec![c.scheme.clone(), num(c.dt), i.to_string(), opt(*e)])
                    })
                    .collect(),
            },
        ],
        ExperimentReport::Convergence(r) => vec![
            Table { name: "convergence.csv", header: ERROR_HEADER, rows: error_rows(r) },
            Table { name: "convergence_fit.csv", header: FIT_HEADER, rows: fit_rows(r) },
        ],
        ExperimentReport::SigmaSweep(r) => vec![
            Table { name: "sigma_sweep.csv", header: FIT_HEADER, rows: fit_rows(r) },
            Table { name: "sigma_sweep_errors.csv", header: ERROR_HEADER, rows: error_rows(r) },
        ],
        ExperimentReport::NormDrift(series) => vec![
            Table {
                name: "norm_drift.csv",
                header: &["scheme", "dt", "t", "norm_dev"],
                rows: series
                    .iter()
                    .flat_map(|s| {
                        s.times
                            .iter()
                            .zip(&s.norm_deviation)
                            .map(move |(&t, &d)| vec![s.scheme.clone(), num(s.dt), num(t), num(d)])
                    })
                    .collect(),
            },
            Table {
                name: "norm_drift_summary.csv",
                header: &["scheme", "dt", "max_norm_dev", "terminal_max_norm"],
                rows: series
                    .iter()
                    .map(|s| vec![s.scheme.clone(), num(s.dt), num(s.max_deviation), num(s.terminal_max_norm)])
                    .collect(),
            },
        ],
        ExperimentReport::Trajectory(r) => {
            let tr = &r.trajectory;
            let stride_steps = |k: usize| (tr.times[k] / tr.dt).round() as usize;
            let mut rows = Vec::new();
            for (k, (t, state)) in tr.times.iter().zip(&tr.states).enumerate() {
                let energy = tr.energy.as_ref().and_then(|e| e.get(stride_steps(k)).copied());
                for (j, p) in state.points().iter().enumerate() {
                    rows.push(vec![
                        num(*t),
                        j.to_string(),
                        num(p.x),
                        num(p.y),
                        num(p.z),
                        num((p.norm() - 1.0).abs()),
                        opt(energy),
                    ]);
                }
            }
            vec![Table { name: "trajectory.csv", header: &["t", "site", "x", "y", "z", "norm_dev", "energy"], rows }]
        }
    }
}

/// Writes one CSV file per table or series of `report` into `dir`, creating
/// it if needed, and returns the paths in write order.
pub fn emit_csv(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    tables(report).iter().map(|t| write_table(dir, t)).collect()
}
