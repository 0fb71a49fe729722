use rayon::prelude::*;

use super::config::{ExperimentConfig, SystemSpec};
use super::fit::fit_slope;
use super::report::{ConvergenceReport, EnergyCell, EnergyTable, NormDriftSeries, TrajectoryReport};
use crate::error::{Error, Result};
use crate::integrators::{integrate_final, integrate_with, RecordOptions, Scheme, SchemeConfig};
use crate::llg::{equilibrium_distance, Llg};
use crate::rigid_body::{ensemble_rng, random_instance_from, separatrix_instance, RigidBody};
use crate::sphere::{SigmaPolicy, SphereField, System};

/// Reference runs use this many times the smallest step.
pub const REFERENCE_REFINEMENT: f64 = 100.0;

/// Builds ensemble member `member`: its system and initial state.
pub fn instance(spec: &SystemSpec, seed: u64, member: u64) -> Result<(Box<dyn System + Send>, SphereField)> {
    match spec {
        SystemSpec::RigidBody { kind, separatrix } => {
            let mut rng = ensemble_rng(seed, member);
            let (inertia, m) =
                if *separatrix { separatrix_instance(&mut rng) } else { random_instance_from(*kind, &mut rng) };
            Ok((Box::new(RigidBody::new(inertia)), SphereField::single(m)?))
        }
        SystemSpec::Llg { params, sites, spacing, profile } => {
            let field = SphereField::new(profile.member_points(*sites, member), *spacing)?;
            Ok((Box::new(Llg::new(*params, *sites, *spacing)?), field))
        }
    }
}

fn final_only() -> RecordOptions {
    RecordOptions { stride: usize::MAX, energy: false }
}

/// Mean over the ensemble of the maximum energy error, per (scheme, Δt).
/// A run that fails marks its cell failed; the rest of the table is still filled.
pub fn run_energy_table(config: &ExperimentConfig) -> Result<EnergyTable> {
    config.validate()?;
    if !matches!(config.system, SystemSpec::RigidBody { .. }) {
        return Err(Error::config("energy tables are defined for the rigid body"));
    }
    let (ns, nd, ne) = (config.schemes.len(), config.dts.len(), config.ensemble);
    let runs: Vec<Result<f64, String>> = (0..ns * nd * ne)
        .into_par_iter()
        .map(|k| {
            let (s, d, i) = (k / (nd * ne), (k / ne) % nd, k % ne);
            let (sys, m0) = instance(&config.system, config.seed, i as u64).map_err(|e| e.to_string())?;
            let record = RecordOptions { stride: usize::MAX, energy: true };
            let tr = integrate_with(&m0, config.t_final, config.dts[d], &config.schemes[s], sys.as_ref(), &record)
                .map_err(|e| e.to_string())?;
            tr.max_energy_error().ok_or_else(|| "system has no energy".to_string())
        })
        .collect();
    let mut cells = Vec::with_capacity(ns * nd);
    for (k, chunk) in runs.chunks(ne).enumerate() {
        let (s, d) = (k / nd, k % nd);
        cells.push(EnergyCell {
            scheme: config.schemes[s].label(),
            dt: config.dts[d],
            run_errors: chunk.iter().map(|r| r.as_ref().ok().copied()).collect(),
            failure: chunk.iter().find_map(|r| r.as_ref().err().cloned()),
        });
    }
    Ok(EnergyTable {
        schemes: config.schemes.iter().map(SchemeConfig::label).collect(),
        dts: config.dts.clone(),
        cells,
    })
}

fn reference_config() -> SchemeConfig {
    SchemeConfig::new(Scheme::Rkmk4)
}

/// Final-state error of every (scheme, Δt) against RKMK4 at `Δt_min / 100`,
/// fitted per scheme. Uses ensemble member 0.
pub fn run_convergence(config: &ExperimentConfig) -> Result<Vec<ConvergenceReport>> {
    config.validate()?;
    if config.dts.len() < 3 {
        return Err(Error::config("convergence fits need at least three time steps"));
    }
    let runs: Vec<(SchemeConfig, Option<f64>)> = config.schemes.iter().map(|s| (*s, None)).collect();
    convergence_runs(config, &runs)
}

/// Convergence fits at each constant σ in `config.sigmas`, for every scheme.
/// Only heun and rkmk4 take part.
pub fn run_sigma_sweep(config: &ExperimentConfig) -> Result<Vec<ConvergenceReport>> {
    config.validate()?;
    if config.dts.len() < 3 {
        return Err(Error::config("convergence fits need at least three time steps"));
    }
    if config.sigmas.is_empty() {
        return Err(Error::config("sigma list is empty"));
    }
    if let Some(s) = config.schemes.iter().find(|s| !matches!(s.scheme, Scheme::Heun | Scheme::Rkmk4)) {
        return Err(Error::config(format!("sigma sweeps take heun or rkmk4, not {}", s.scheme)));
    }
    let mut runs = Vec::new();
    for s in &config.schemes {
        for &sigma in &config.sigmas {
            let c = s.with_sigma(SigmaPolicy::Constant(sigma));
            c.validate()?;
            runs.push((c, Some(sigma)));
        }
    }
    convergence_runs(config, &runs)
}

fn convergence_runs(config: &ExperimentConfig, runs: &[(SchemeConfig, Option<f64>)]) -> Result<Vec<ConvergenceReport>> {
    let (sys, m0) = instance(&config.system, config.seed, 0)?;
    let sys: &dyn System = sys.as_ref();
    let dt_min = *config.dts.last().expect("validated non-empty");
    let reference_dt = dt_min / REFERENCE_REFINEMENT;
    let reference = integrate_final(&m0, config.t_final, reference_dt, &reference_config(), sys)?;
    let nd = config.dts.len();
    let errors: Vec<f64> = (0..runs.len() * nd)
        .into_par_iter()
        .map(|k| {
            let (c, dt) = (&runs[k / nd].0, config.dts[k % nd]);
            integrate_final(&m0, config.t_final, dt, c, sys)
                .and_then(|m| equilibrium_distance(m.points(), reference.points()))
                .unwrap_or(f64::NAN)
        })
        .collect();
    Ok(runs
        .iter()
        .zip(errors.chunks(nd))
        .map(|((c, sigma), e)| ConvergenceReport {
            scheme: c.label(),
            sigma: *sigma,
            dts: config.dts.clone(),
            errors: e.to_vec(),
            fit: fit_slope(&config.dts, e),
            reference_dt,
        })
        .collect())
}

/// Per-step norm deviation for every (scheme, Δt), sampled every `stride` steps.
pub fn run_norm_drift(config: &ExperimentConfig) -> Result<Vec<NormDriftSeries>> {
    config.validate()?;
    let (sys, m0) = instance(&config.system, config.seed, 0)?;
    let sys: &dyn System = sys.as_ref();
    let pairs: Vec<(usize, usize)> =
        (0..config.schemes.len()).flat_map(|s| (0..config.dts.len()).map(move |d| (s, d))).collect();
    pairs
        .par_iter()
        .map(|&(s, d)| {
            let dt = config.dts[d];
            let tr = integrate_with(&m0, config.t_final, dt, &config.schemes[s], sys, &final_only())?;
            let mut times = Vec::new();
            let mut norm_deviation = Vec::new();
            for (n, &dev) in tr.norm_deviation.iter().enumerate() {
                if n % config.stride == 0 || n == tr.steps {
                    times.push(n as f64 * dt);
                    norm_deviation.push(dev);
                }
            }
            Ok(NormDriftSeries {
                scheme: config.schemes[s].label(),
                dt,
                times,
                norm_deviation,
                max_deviation: tr.max_norm_deviation(),
                terminal_max_norm: tr.last().points().iter().map(|p| p.norm()).fold(0.0, f64::max),
            })
        })
        .collect()
}

/// One recorded run: the first scheme at the first Δt, ensemble member 0.
pub fn run_trajectory(config: &ExperimentConfig) -> Result<TrajectoryReport> {
    config.validate()?;
    let (sys, m0) = instance(&config.system, config.seed, 0)?;
    let scheme = config.schemes[0];
    let record = RecordOptions { stride: config.stride, energy: true };
    let trajectory = integrate_with(&m0, config.t_final, config.dts[0], &scheme, sys.as_ref(), &record)?;
    Ok(TrajectoryReport { scheme: scheme.label(), trajectory })
}
