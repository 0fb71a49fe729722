use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{Correction, ImplicitOptions, Scheme, SchemeConfig};
use crate::llg::{InitialProfile, LlgParams};
use crate::rigid_body::BodyKind;
use crate::so3::{ExpChoice, Vec3};
use crate::sphere::{GeneratorVariant, SigmaPolicy};

/// Which system an experiment integrates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SystemSpec {
    /// Random bodies and initial conditions. With `separatrix`, initial
    /// conditions are placed on a separatrix of a random triaxial body.
    RigidBody {
        kind: BodyKind,
        separatrix: bool,
    },
    Llg {
        params: LlgParams,
        sites: usize,
        spacing: f64,
        profile: InitialProfile,
    },
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub schemes: Vec<SchemeConfig>,
    /// Step sizes, strictly decreasing.
    pub dts: Vec<f64>,
    pub t_final: f64,
    pub ensemble: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub stride: usize,
    /// Constant σ values for sweeps.
    pub sigmas: Vec<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dts.is_empty() {
            return Err(Error::config("dt list is empty"));
        }
        if let Some(d) = self.dts.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(Error::config(format!("time steps must be positive and finite, got {d}")));
        }
        if self.dts.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("dt list must be sorted in strictly descending order"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::config(format!("t_final must be positive and finite, got {}", self.t_final)));
        }
        if self.ensemble == 0 {
            return Err(Error::config("ensemble size must be at least 1"));
        }
        if self.stride == 0 {
            return Err(Error::config("record stride must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("no schemes given"));
        }
        for s in &self.schemes {
            s.validate().map_err(|e| Error::config(format!("{}: {e}", s.label())))?;
        }
        match &self.system {
            SystemSpec::RigidBody { kind, separatrix } => {
                if *separatrix && *kind != BodyKind::Triaxial {
                    return Err(Error::config("separatrix runs need triaxial bodies"));
                }
            }
            SystemSpec::Llg { params, sites, spacing, .. } => {
                params.validate()?;
                if *sites < 2 {
                    return Err(Error::TooFewSites { min: 2, found: *sites });
                }
                if !(*spacing > 0.0 && spacing.is_finite()) {
                    return Err(Error::config(format!("lattice spacing must be positive, got {spacing}")));
                }
            }
        }
        Ok(())
    }
}

/// The flat key-value file format. Every key is optional; unset keys take
/// the defaults in [`RawConfig::resolve`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    /// Subcommand the file is meant for; checked when given.
    pub experiment: Option<String>,
    /// `rigid_body` or `llg`.
    pub system: Option<String>,
    pub body: Option<String>,
    pub separatrix: Option<bool>,

    /// Entries like `"heun generator=orthogonal sigma=const:10"`.
    pub schemes: Option<Vec<String>>,
    pub scheme: Option<String>,
    pub generator: Option<String>,
    pub sigma: Option<String>,
    pub exp: Option<String>,
    pub correction: Option<String>,
    pub implicit_tolerance: Option<f64>,
    pub implicit_max_iters: Option<usize>,
    pub implicit_relaxation: Option<f64>,

    pub dt: Option<Vec<f64>>,
    pub t_final: Option<f64>,
    pub ensemble: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub stride: Option<usize>,
    pub sigmas: Option<Vec<f64>>,

    pub sites: Option<usize>,
    pub spacing: Option<f64>,
    pub exchange: Option<f64>,
    pub mu0: Option<f64>,
    pub anisotropy: Option<f64>,
    pub easy_axis: Option<[f64; 3]>,
    pub h_app: Option<[f64; 3]>,
    pub lambda: Option<f64>,
    pub precession: Option<bool>,
    pub tilt: Option<f64>,
    pub amplitude: Option<f64>,
    pub twist: Option<f64>,
    pub init_seed: Option<u64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

fn parse<T: std::str::FromStr<Err = String>>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|e| Error::config(format!("{key}: {e}")))
}

fn parse_scheme_entry(entry: &str) -> Result<SchemeConfig> {
    let mut tokens = entry.split_whitespace();
    let name = tokens.next().ok_or_else(|| Error::config("empty scheme entry"))?;
    let mut cfg = SchemeConfig::new(parse::<Scheme>("scheme", name)?);
    for t in tokens {
        let (k, v) = t.split_once('=').ok_or_else(|| Error::config(format!("scheme option `{t}` is not key=value")))?;
        match k {
            "generator" => cfg.generator = parse(k, v)?,
            "sigma" => cfg.sigma = parse(k, v)?,
            "exp" => cfg.exp = parse(k, v)?,
            "correction" => cfg.correction = parse(k, v)?,
            _ => return Err(Error::config(format!("unknown scheme option `{k}`"))),
        }
    }
    Ok(cfg)
}

impl RawConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    /// Keys set in `other` replace those in `self`. Setting `scheme` drops
    /// an inherited `schemes` list.
    pub fn merge(mut self, other: RawConfig) -> RawConfig {
        if other.scheme.is_some() {
            self.schemes = None;
        }
        overlay!(
            self,
            other,
            experiment,
            system,
            body,
            separatrix,
            schemes,
            scheme,
            generator,
            sigma,
            exp,
            correction,
            implicit_tolerance,
            implicit_max_iters,
            implicit_relaxation,
            dt,
            t_final,
            ensemble,
            seed,
            out,
            stride,
            sigmas,
            sites,
            spacing,
            exchange,
            mu0,
            anisotropy,
            easy_axis,
            h_app,
            lambda,
            precession,
            tilt,
            amplitude,
            twist,
            init_seed,
        );
        self
    }

    /// Fills defaults and checks the result. `experiment` is the subcommand
    /// being run; a file written for another one is rejected.
    pub fn resolve(&self, experiment: &str) -> Result<ExperimentConfig> {
        if let Some(e) = &self.experiment {
            if e.replace('-', "_") != experiment.replace('-', "_") {
                return Err(Error::config(format!("config is for `{e}`, not `{experiment}`")));
            }
        }
        let system_name = self.system.as_deref().unwrap_or("rigid_body").replace('-', "_");
        let system = match system_name.as_str() {
            "rigid_body" => SystemSpec::RigidBody {
                kind: parse("body", self.body.as_deref().unwrap_or("triaxial"))?,
                separatrix: self.separatrix.unwrap_or(experiment.replace('-', "_") == "separatrix"),
            },
            "llg" => {
                let d = LlgParams::default();
                let v = |a: Option<[f64; 3]>, dflt: Vec3| a.map(Vec3::from).unwrap_or(dflt);
                let params = LlgParams {
                    exchange: self.exchange.unwrap_or(d.exchange),
                    mu0: self.mu0.unwrap_or(d.mu0),
                    anisotropy: self.anisotropy.unwrap_or(d.anisotropy),
                    easy_axis: v(self.easy_axis, d.easy_axis),
                    h_app: v(self.h_app, d.h_app),
                    lambda: self.lambda.unwrap_or(d.lambda),
                    precession: self.precession.unwrap_or(d.precession),
                };
                let sites = self.sites.unwrap_or(100);
                let p = InitialProfile::default();
                SystemSpec::Llg {
                    params,
                    sites,
                    spacing: self.spacing.unwrap_or(1.0 / (sites.max(2) - 1) as f64),
                    profile: InitialProfile {
                        tilt: self.tilt.unwrap_or(p.tilt),
                        amplitude: self.amplitude.unwrap_or(p.amplitude),
                        twist: self.twist.unwrap_or(p.twist),
                        seed: self.init_seed.unwrap_or(p.seed),
                    },
                }
            }
            other => return Err(Error::config(format!("unknown system `{other}` (expected rigid_body or llg)"))),
        };

        let entries: Vec<String> = match (&self.scheme, &self.schemes) {
            (Some(s), _) => vec![s.clone()],
            (None, Some(list)) => list.clone(),
            (None, None) => vec!["euler_fwd".to_string()],
        };
        let implicit = ImplicitOptions {
            tolerance: self.implicit_tolerance.unwrap_or(ImplicitOptions::default().tolerance),
            max_iters: self.implicit_max_iters.unwrap_or(ImplicitOptions::default().max_iters),
            relaxation: self.implicit_relaxation.unwrap_or(ImplicitOptions::default().relaxation),
        };
        let mut schemes = Vec::with_capacity(entries.len());
        for e in &entries {
            let mut c = parse_scheme_entry(e)?;
            if let Some(v) = &self.generator {
                c.generator = parse::<GeneratorVariant>("generator", v)?;
            }
            if let Some(v) = &self.sigma {
                c.sigma = parse::<SigmaPolicy>("sigma", v)?;
            }
            if let Some(v) = &self.exp {
                c.exp = parse::<ExpChoice>("exp", v)?;
            }
            if let Some(v) = &self.correction {
                c.correction = parse::<Correction>("correction", v)?;
            }
            c.implicit = implicit;
            schemes.push(c);
        }

        let config = ExperimentConfig {
            system,
            schemes,
            dts: self.dt.clone().unwrap_or_else(|| vec![0.1]),
            t_final: self.t_final.unwrap_or(100.0),
            ensemble: self.ensemble.unwrap_or(1),
            seed: self.seed.unwrap_or(0),
            out: self.out.clone(),
            stride: self.stride.unwrap_or(1),
            sigmas: self.sigmas.clone().unwrap_or_else(|| vec![0.0]),
        };
        config.validate()?;
        Ok(config)
    }
}
