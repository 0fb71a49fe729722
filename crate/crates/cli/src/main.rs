use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use geomint::harness::{
    emit_csv, run_convergence, run_energy_table, run_norm_drift, run_sigma_sweep, run_trajectory, ConvergenceReport,
    ExperimentReport, RawConfig,
};
use geomint::Error;

/// Geometric integrators on spheres: rigid-body and spin-chain experiments.
#[derive(Parser)]
#[command(name = "geomint", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free rigid body experiments.
    #[command(subcommand)]
    RigidBody(RigidBodyCommand),
    /// Spin-chain runs.
    #[command(subcommand)]
    Llg(LlgCommand),
    /// Final-state convergence orders against a fine RKMK4 reference.
    Convergence(Shared),
    /// Convergence orders over a list of constant sigma values.
    SigmaSweep(Shared),
    /// Per-step norm deviation, geometric and classical side by side.
    NormDrift(Shared),
}

#[derive(Subcommand)]
enum RigidBodyCommand {
    /// Ensemble-mean maximum energy error per scheme and time step.
    Table(Shared),
    /// Energy errors from initial conditions on separatrices.
    Separatrix(Shared),
}

#[derive(Subcommand)]
enum LlgCommand {
    /// One recorded trajectory of the chain.
    Run(Shared),
}

#[derive(Args, Default)]
struct Shared {
    /// Flat TOML config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated time steps, largest first.
    #[arg(long, value_delimiter = ',')]
    dt: Option<Vec<f64>>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Scheme name, e.g. euler_fwd, heun, rkmk4, sy4, classical_rk4.
    #[arg(long)]
    scheme: Option<String>,
    /// default or orthogonal.
    #[arg(long)]
    generator: Option<String>,
    /// zero, const:<c>, curvature[:forward|:centered|:analytic] or error-minimizing.
    #[arg(long)]
    sigma: Option<String>,
    /// cay or exp.
    #[arg(long)]
    exp: Option<String>,
    /// none or dcor.
    #[arg(long)]
    correction: Option<String>,
    #[arg(long)]
    ensemble: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep every n-th step in recorded series.
    #[arg(long)]
    stride: Option<usize>,
    /// Comma-separated constant sigma values for sweeps.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    sigmas: Option<Vec<f64>>,
    /// triaxial or axisymmetric.
    #[arg(long)]
    body: Option<String>,
}

impl Shared {
    fn raw(&self, system: Option<&str>) -> Result<RawConfig, Error> {
        let base = match &self.config {
            Some(p) => RawConfig::load(p)?,
            None => RawConfig::default(),
        };
        let base = match system {
            Some(s) if base.system.is_none() => RawConfig { system: Some(s.to_string()), ..base },
            _ => base,
        };
        Ok(base.merge(RawConfig {
            dt: self.dt.clone(),
            t_final: self.t_final,
            scheme: self.scheme.clone(),
            generator: self.generator.clone(),
            sigma: self.sigma.clone(),
            exp: self.exp.clone(),
            correction: self.correction.clone(),
            ensemble: self.ensemble,
            seed: self.seed,
            out: self.out.clone(),
            stride: self.stride,
            sigmas: self.sigmas.clone(),
            body: self.body.clone(),
            ..RawConfig::default()
        }))
    }
}

fn sci(x: Option<f64>) -> String {
    x.map_or_else(|| "failed".to_string(), |v| format!("{v:.3e}"))
}

fn print_fits(reports: &[ConvergenceReport]) {
    println!("{:<44} {:>8} {:>8} {:>8}  note", "scheme", "sigma", "slope", "R^2");
    for r in reports {
        let (slope, r2, note) = match &r.fit {
            Some(f) => {
                (format!("{:.3}", f.slope), format!("{:.4}", f.r_squared), if f.flagged() { "flagged" } else { "" })
            }
            None => ("-".into(), "-".into(), "no fit"),
        };
        let sigma = r.sigma.map_or_else(|| "-".to_string(), |s| format!("{s}"));
        println!("{:<44} {:>8} {:>8} {:>8}  {note}", r.scheme, sigma, slope, r2);
    }
}

fn print_summary(report: &ExperimentReport) {
    match report {
        ExperimentReport::EnergyTable(t) => {
            print!("{:<44}", "scheme \\ dt");
            for dt in &t.dts {
                print!(" {:>10}", dt);
            }
            println!();
            for (s, name) in t.schemes.iter().enumerate() {
                print!("{name:<44}");
                for d in 0..t.dts.len() {
                    print!(" {:>10}", sci(t.mean(s, d)));
                }
                println!();
            }
        }
        ExperimentReport::Convergence(r) | ExperimentReport::SigmaSweep(r) => print_fits(r),
        ExperimentReport::NormDrift(series) => {
            println!("{:<44} {:>10} {:>12} {:>20}", "scheme", "dt", "max |m|-1", "terminal max |m|");
            for s in series {
                println!("{:<44} {:>10} {:>12.3e} {:>20.12}", s.scheme, s.dt, s.max_deviation, s.terminal_max_norm);
            }
        }
        ExperimentReport::Trajectory(r) => {
            let t = &r.trajectory;
            println!("{}: {} steps of {}, max |m|-1 = {:.3e}", r.scheme, t.steps, t.dt, t.max_norm_deviation());
            if let Some(e) = t.max_energy_error() {
                println!("max energy change {e:.6e}");
            }
        }
    }
}

fn failed_cells(report: &ExperimentReport) -> bool {
    match report {
        ExperimentReport::EnergyTable(t) => t.cells.iter().any(|c| c.failure.is_some()),
        ExperimentReport::Convergence(r) | ExperimentReport::SigmaSweep(r) => {
            r.iter().any(|c| c.errors.iter().any(|e| e.is_nan()))
        }
        _ => false,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let (name, raw) = match &cli.command {
        Command::RigidBody(RigidBodyCommand::Table(a)) => ("table", a.raw(Some("rigid_body"))?),
        Command::RigidBody(RigidBodyCommand::Separatrix(a)) => {
            let mut raw = a.raw(Some("rigid_body"))?;
            raw.separatrix = Some(true);
            if raw.t_final.is_none() {
                raw.t_final = Some(500.0);
            }
            ("separatrix", raw)
        }
        Command::Llg(LlgCommand::Run(a)) => ("llg_run", a.raw(Some("llg"))?),
        Command::Convergence(a) => ("convergence", a.raw(None)?),
        Command::SigmaSweep(a) => ("sigma_sweep", a.raw(None)?),
        Command::NormDrift(a) => ("norm_drift", a.raw(None)?),
    };
    let config = raw.resolve(name)?;
    let start = Instant::now();
    let report = match name {
        "table" | "separatrix" => ExperimentReport::EnergyTable(run_energy_table(&config)?),
        "llg_run" => ExperimentReport::Trajectory(run_trajectory(&config)?),
        "convergence" => ExperimentReport::Convergence(run_convergence(&config)?),
        "sigma_sweep" => ExperimentReport::SigmaSweep(run_sigma_sweep(&config)?),
        _ => ExperimentReport::NormDrift(run_norm_drift(&config)?),
    };
    eprintln!("wall time {:.2} s", start.elapsed().as_secs_f64());
    print_summary(&report);
    if let Some(dir) = &config.out {
        for p in emit_csv(&report, dir)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(!failed_cells(&report))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some runs failed; see the status column of the output");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() {
                3
            } else if e.is_numerical() {
                2
            } else {
                1
            })
        }
    }
}
