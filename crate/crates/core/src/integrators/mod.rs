//! One-step methods on (S²)ᴺ and a fixed-step driver.
//!
//! Geometric schemes build an algebra element `F` per site and update with
//! `M ← Exp(F)·M`, so unit norms hold by construction. The classical schemes
//! step in ambient ℝ³ᴺ and are kept as baselines.

mod classical;
mod geometric;

use serde::{Deserialize, Serialize};

pub use classical::{step_classical, ClassicalScheme};
pub use geometric::{step_euler_fwd, step_euler_impl, step_heun, step_rkmk4, step_sy4, ImplicitOptions};

use crate::error::{Error, Result};
use crate::so3::{ExpChoice, Vec3};
use crate::sphere::{max_norm_deviation, GeneratorEvaluator, GeneratorVariant, SigmaPolicy, SphereField, System};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    EulerFwd,
    EulerImpl,
    Heun,
    Rkmk4,
    Sy4,
    ClassicalEuler,
    ClassicalHeun,
    ClassicalRk4,
}

impl Scheme {
    pub const ALL: [Scheme; 8] = [
        Scheme::EulerFwd,
        Scheme::EulerImpl,
        Scheme::Heun,
        Scheme::Rkmk4,
        Scheme::Sy4,
        Scheme::ClassicalEuler,
        Scheme::ClassicalHeun,
        Scheme::ClassicalRk4,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::EulerFwd => "euler_fwd",
            Scheme::EulerImpl => "euler_impl",
            Scheme::Heun => "heun",
            Scheme::Rkmk4 => "rkmk4",
            Scheme::Sy4 => "sy4",
            Scheme::ClassicalEuler => "classical_euler",
            Scheme::ClassicalHeun => "classical_heun",
            Scheme::ClassicalRk4 => "classical_rk4",
        }
    }

    pub fn is_geometric(&self) -> bool {
        self.classical().is_none()
    }

    pub fn classical(&self) -> Option<ClassicalScheme> {
        match self {
            Scheme::ClassicalEuler => Some(ClassicalScheme::Euler),
            Scheme::ClassicalHeun => Some(ClassicalScheme::Heun),
            Scheme::ClassicalRk4 => Some(ClassicalScheme::Rk4),
            _ => None,
        }
    }

    /// Nominal order of accuracy.
    pub fn order(&self) -> u32 {
        match self {
            Scheme::EulerFwd | Scheme::EulerImpl | Scheme::ClassicalEuler => 1,
            Scheme::Heun | Scheme::ClassicalHeun => 2,
            Scheme::Rkmk4 | Scheme::Sy4 | Scheme::ClassicalRk4 => 4,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('-', "_");
        Scheme::ALL.into_iter().find(|k| k.name() == norm).ok_or_else(|| {
            let names: Vec<_> = Scheme::ALL.iter().map(|k| k.name()).collect();
            format!("unknown scheme `{s}` (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    #[default]
    None,
    /// Heun with the default generator plus the system's energy correction.
    Dcor,
}

impl std::str::FromStr for Correction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Correction::None),
            "dcor" => Ok(Correction::Dcor),
            other => Err(format!("unknown correction `{other}` (expected none or dcor)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub generator: GeneratorVariant,
    pub sigma: SigmaPolicy,
    pub exp: ExpChoice,
    pub correction: Correction,
    #[serde(default)]
    pub implicit: ImplicitOptions,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme) -> Self {
        SchemeConfig { scheme, ..Default::default() }
    }

    pub fn with_generator(mut self, generator: GeneratorVariant) -> Self {
        self.generator = generator;
        self
    }

    pub fn with_sigma(mut self, sigma: SigmaPolicy) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_exp(mut self, exp: ExpChoice) -> Self {
        self.exp = exp;
        self
    }

    pub fn with_correction(mut self, correction: Correction) -> Self {
        self.correction = correction;
        self
    }

    /// Short label such as `heun/default/zero/cay/dcor`.
    pub fn label(&self) -> String {
        let sigma = match self.sigma {
            SigmaPolicy::Zero => "zero".to_string(),
            SigmaPolicy::Constant(c) => format!("const:{c}"),
            SigmaPolicy::Curvature(s) => format!("curvature:{s:?}").to_lowercase(),
            SigmaPolicy::ErrorMinimizing => "error_minimizing".to_string(),
        };
        let generator = match self.generator {
            GeneratorVariant::Default => "default",
            GeneratorVariant::Orthogonal => "orthogonal",
        };
        let exp = match self.exp {
            ExpChoice::Cay => "cay",
            ExpChoice::Exp => "exp",
        };
        let mut s = format!("{}/{generator}/{sigma}/{exp}", self.scheme);
        if self.correction == Correction::Dcor {
            s.push_str("/dcor");
        }
        s
    }

    /// Checks that the combination is one the schemes define.
    pub fn validate(&self) -> Result<()> {
        let state_independent = self.sigma.is_state_independent();
        if let SigmaPolicy::Constant(c) = self.sigma {
            if !c.is_finite() {
                return Err(Error::config("constant sigma must be finite"));
            }
        }
        if self.correction == Correction::Dcor {
            if self.scheme != Scheme::Heun {
                return Err(Error::config("the dcor correction applies to the heun scheme only"));
            }
            if self.generator != GeneratorVariant::Default {
                return Err(Error::config("the dcor correction is defined for the default generator only"));
            }
            if self.sigma != SigmaPolicy::Zero {
                return Err(Error::config("the dcor correction replaces sigma; use sigma = zero"));
            }
        }
        if self.scheme == Scheme::EulerImpl {
            let o = &self.implicit;
            if !(o.tolerance > 0.0 && o.max_iters > 0 && o.relaxation > 0.0 && o.relaxation <= 1.0) {
                return Err(Error::config("implicit solver needs tolerance > 0, max_iters >= 1, relaxation in (0, 1]"));
            }
        }
        match self.scheme {
            Scheme::EulerImpl | Scheme::Heun | Scheme::Rkmk4 if !state_independent => {
                Err(Error::config(format!("{} supports only zero or constant sigma", self.scheme)))
            }
            Scheme::Rkmk4 | Scheme::Sy4 if self.exp != ExpChoice::Cay => {
                Err(Error::config(format!("{} is built on the Cayley transform; use exp = cay", self.scheme)))
            }
            Scheme::Sy4 if self.sigma != SigmaPolicy::Zero => Err(Error::config("sy4 takes no sigma")),
            _ => Ok(()),
        }
    }
}

/// What [`integrate_with`] keeps besides the per-step norm deviation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordOptions {
    /// Keep every `stride`-th state; the final state is always kept.
    pub stride: usize,
    /// Record the system energy at every step, when the system has one.
    pub energy: bool,
}

impl Default for RecordOptions {
    fn default() -> Self {
        RecordOptions { stride: 1, energy: true }
    }
}

/// The result of a fixed-step run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub steps: usize,
    /// Times of the kept states.
    pub times: Vec<f64>,
    /// Kept states; classical schemes store off-sphere points unchecked.
    pub states: Vec<SphereField>,
    /// `max_j |‖M_j‖ − 1|` after every step, index 0 being the initial state.
    pub norm_deviation: Vec<f64>,
    /// Energy after every step, index 0 being the initial state.
    pub energy: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn initial(&self) -> &SphereField {
        &self.states[0]
    }

    pub fn last(&self) -> &SphereField {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn max_norm_deviation(&self) -> f64 {
        self.norm_deviation.iter().copied().fold(0.0, f64::max)
    }

    /// `max_n |E(M_n) − E(M_0)|`.
    pub fn max_energy_error(&self) -> Option<f64> {
        let e = self.energy.as_ref()?;
        let e0 = *e.first()?;
        Some(e.iter().map(|&x| (x - e0).abs()).fold(0.0, f64::max))
    }
}

/// Number of fixed steps of size `dt` that fit in `t_final`. A relative
/// slack absorbs the rounding in quotients like 0.3/0.1.
pub fn step_count(t_final: f64, dt: f64) -> usize {
    let r = t_final / dt;
    (r + 1e-9 * r.max(1.0)).floor() as usize
}

struct Stepper<'a> {
    config: SchemeConfig,
    system: &'a dyn System,
    gen: GeneratorEvaluator<'a>,
}

impl<'a> Stepper<'a> {
    fn new(config: &SchemeConfig, system: &'a dyn System) -> Result<Self> {
        config.validate()?;
        Ok(Stepper { config: *config, system, gen: GeneratorEvaluator::new(system, config.generator, config.sigma) })
    }

    fn step(&self, m: &SphereField, dt: f64) -> Result<SphereField> {
        let c = &self.config;
        match c.scheme {
            Scheme::EulerFwd => step_euler_fwd(m, dt, &self.gen, c.exp),
            Scheme::EulerImpl => step_euler_impl(m, dt, &self.gen, c.exp, &c.implicit),
            Scheme::Heun => step_heun(m, dt, &self.gen, c.exp, c.correction),
            Scheme::Rkmk4 => step_rkmk4(m, dt, &self.gen),
            Scheme::Sy4 => step_sy4(m, dt, self.system, c.generator),
            Scheme::ClassicalEuler | Scheme::ClassicalHeun | Scheme::ClassicalRk4 => {
                let scheme = c.scheme.classical().expect("classical scheme");
                let rhs = |p: &[Vec3]| self.system.generator(p).tangent(p);
                Ok(SphereField::from_points_unchecked(step_classical(m.points(), dt, scheme, rhs), m.spacing()))
            }
        }
    }
}

/// Advances one step with the configured scheme.
pub fn step(m: &SphereField, dt: f64, config: &SchemeConfig, system: &dyn System) -> Result<SphereField> {
    check_inputs(m, dt, system)?;
    Stepper::new(config, system)?.step(m, dt)
}

fn check_inputs(m: &SphereField, dt: f64, system: &dyn System) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config(format!("time step must be positive and finite, got {dt}")));
    }
    if m.len() != system.sites() {
        return Err(Error::LengthMismatch { expected: system.sites(), found: m.len() });
    }
    Ok(())
}

/// Marches `m0` with fixed steps over `[0, t_final]`, keeping every state.
pub fn integrate(
    m0: &SphereField,
    t_final: f64,
    dt: f64,
    config: &SchemeConfig,
    system: &dyn System,
) -> Result<Trajectory> {
    integrate_with(m0, t_final, dt, config, system, &RecordOptions::default())
}

/// As [`integrate`], with control over what is recorded.
pub fn integrate_with(
    m0: &SphereField,
    t_final: f64,
    dt: f64,
    config: &SchemeConfig,
    system: &dyn System,
    record: &RecordOptions,
) -> Result<Trajectory> {
    check_inputs(m0, dt, system)?;
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::config(format!("final time must be non-negative and finite, got {t_final}")));
    }
    if record.stride == 0 {
        return Err(Error::config("record stride must be at least 1"));
    }
    let stepper = Stepper::new(config, system)?;
    let steps = step_count(t_final, dt);
    let energy_of = |m: &SphereField| {
        if record.energy {
            system.energy(m.points())
        } else {
            None
        }
    };

    let mut energy = energy_of(m0).map(|e| {
        let mut v = Vec::with_capacity(steps + 1);
        v.push(e);
        v
    });
    let mut norm_deviation = Vec::with_capacity(steps + 1);
    norm_deviation.push(m0.max_norm_deviation());
    let mut times = vec![0.0];
    let mut states = vec![m0.clone()];

    let mut m = m0.clone();
    for n in 1..=steps {
        m = stepper.step(&m, dt).map_err(|e| Error::Step { step: n, source: Box::new(e) })?;
        norm_deviation.push(max_norm_deviation(m.points()));
        if let (Some(v), Some(e)) = (energy.as_mut(), energy_of(&m)) {
            v.push(e);
        }
        if n % record.stride == 0 || n == steps {
            times.push(n as f64 * dt);
            states.push(m.clone());
        }
    }
    Ok(Trajectory { dt, steps, times, states, norm_deviation, energy })
}

/// Final state only, without per-step bookkeeping.
pub fn integrate_final(
    m0: &SphereField,
    t_final: f64,
    dt: f64,
    config: &SchemeConfig,
    system: &dyn System,
) -> Result<SphereField> {
    check_inputs(m0, dt, system)?;
    let stepper = Stepper::new(config, system)?;
    let mut m = m0.clone();
    for n in 1..=step_count(t_final, dt) {
        m = stepper.step(&m, dt).map_err(|e| Error::Step { step: n, source: Box::new(e) })?;
    }
    Ok(m)
}
