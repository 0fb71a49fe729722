//! One-dimensional Landau–Lifshitz–Gilbert spin chain.
//!
//! `∂μ/∂t = −μ × H_eff − λ μ × (μ × H_eff)`, written as `A(μ) × μ` with
//! `A = H_eff − λ H_eff × μ`, or `A = λ μ × H_eff` without precession. The
//! chain sits in an infinite slab normal to `ê_x`, which reduces the
//! demagnetizing field to `−μ₁ ê_x`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rigid_body::ensemble_rng;
use crate::so3::Vec3;
use crate::sphere::{GeneratorField, SphereField, System};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlgParams {
    /// Exchange coefficient `A`.
    pub exchange: f64,
    pub mu0: f64,
    /// Uniaxial anisotropy constant `K`.
    pub anisotropy: f64,
    pub easy_axis: Vec3,
    pub h_app: Vec3,
    /// Damping λ ≥ 0.
    pub lambda: f64,
    /// Keep the precession term; `false` gives the overdamped equation.
    pub precession: bool,
}

impl Default for LlgParams {
    fn default() -> Self {
        LlgParams {
            exchange: 1.0,
            mu0: 1.0,
            anisotropy: 1.0,
            easy_axis: Vec3::X,
            h_app: Vec3::new(5.0, 0.0, 0.0),
            lambda: 0.05,
            precession: true,
        }
    }
}

impl LlgParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.exchange, self.mu0, self.anisotropy, self.lambda].iter().all(|x| x.is_finite())
            && self.easy_axis.is_finite()
            && self.h_app.is_finite();
        if !finite {
            return Err(Error::config("LLG parameters must be finite"));
        }
        if (self.easy_axis.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!("easy axis must be a unit vector, got {:?}", self.easy_axis)));
        }
        if self.lambda < 0.0 {
            return Err(Error::config(format!("damping must be non-negative, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// N ≥ 2 unit spins on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinChain {
    field: SphereField,
}

impl SpinChain {
    /// Spins on `[0, 1]` with spacing `1/(N − 1)`.
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::TooFewSites { min: 2, found: n });
        }
        Self::with_spacing(points, 1.0 / (n - 1) as f64)
    }

    pub fn with_spacing(points: Vec<Vec3>, spacing: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewSites { min: 2, found: points.len() });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::config(format!("grid spacing must be positive, got {spacing}")));
        }
        Ok(SpinChain { field: SphereField::new(points, spacing)? })
    }

    pub fn from_field(field: SphereField) -> Result<Self> {
        Self::with_spacing(field.points().to_vec(), field.spacing())
    }

    pub fn field(&self) -> &SphereField {
        &self.field
    }

    pub fn into_field(self) -> SphereField {
        self.field
    }

    pub fn points(&self) -> &[Vec3] {
        self.field.points()
    }

    pub fn spacing(&self) -> f64 {
        self.field.spacing()
    }

    pub fn len(&self) -> usize {
        self.field.len()
    }

    pub fn is_empty(&self) -> bool {
        self.field.is_empty()
    }
}

/// `coeff · Δ_h μ` with mirror ghosts `μ₋₁ = μ₀`, `μ_N = μ_{N−1}`.
pub fn exchange_field(m: &[Vec3], coeff: f64, spacing: f64) -> GeneratorField {
    let n = m.len();
    let s = coeff / (spacing * spacing);
    GeneratorField::new(
        (0..n)
            .map(|j| {
                let left = m[j.saturating_sub(1)];
                let right = m[(j + 1).min(n - 1)];
                (left + right - m[j] * 2.0) * s
            })
            .collect(),
    )
}

/// Demagnetizing field of the slab, `−μ₁ ê_x` at every site.
pub fn demag_field_1d(m: &[Vec3]) -> GeneratorField {
    GeneratorField::new(m.iter().map(|p| Vec3::new(-p.x, 0.0, 0.0)).collect())
}

/// `K ⟨μ_j, e⟩ e`.
pub fn anisotropy_field(m: &[Vec3], k: f64, e: Vec3) -> GeneratorField {
    GeneratorField::new(m.iter().map(|&p| e * (k * p.dot(e))).collect())
}

/// `H_eff = A Δμ + μ₀(−∇φ + H_app) + K (μ·e) e`.
pub fn h_eff(m: &[Vec3], params: &LlgParams, spacing: f64) -> GeneratorField {
    let n = m.len();
    let s = params.exchange / (spacing * spacing);
    let e = params.easy_axis;
    GeneratorField::new(
        (0..n)
            .map(|j| {
                let p = m[j];
                let left = m[j.saturating_sub(1)];
                let right = m[(j + 1).min(n - 1)];
                let exchange = (left + right - p * 2.0) * s;
                let demag = Vec3::new(-p.x, 0.0, 0.0);
                exchange + (demag + params.h_app) * params.mu0 + e * (params.anisotropy * p.dot(e))
            })
            .collect(),
    )
}

/// Generator of the LLG flow for a given effective field.
pub fn generator_from_field(m: &[Vec3], h: &GeneratorField, params: &LlgParams) -> GeneratorField {
    GeneratorField::new(
        m.iter()
            .zip(&h.vectors)
            .map(|(&p, &h)| if params.precession { h - h.cross(p) * params.lambda } else { p.cross(h) * params.lambda })
            .collect(),
    )
}

/// `A(μ)` with `A × μ` equal to the LLG right-hand side.
pub fn llg_generator(m: &[Vec3], params: &LlgParams, spacing: f64) -> GeneratorField {
    generator_from_field(m, &h_eff(m, params, spacing), params)
}

/// Discrete free energy whose negative variational derivative is `H_eff`:
/// `Σ_j h [ (A/2)‖Dμ‖² − μ₀⟨μ, H_app⟩ + (μ₀/2) μ₁² − (K/2)⟨μ, e⟩² ]`, with
/// the exchange sum over the N − 1 links. A monitoring diagnostic only.
pub fn free_energy(m: &[Vec3], params: &LlgParams, spacing: f64) -> f64 {
    let h = spacing;
    let exchange: f64 = m.windows(2).map(|w| 0.5 * params.exchange * ((w[1] - w[0]) / h).norm_squared()).sum();
    let local: f64 = m
        .iter()
        .map(|&p| {
            -params.mu0 * p.dot(params.h_app) + 0.5 * params.mu0 * p.x * p.x
                - 0.5 * params.anisotropy * p.dot(params.easy_axis).powi(2)
        })
        .sum();
    h * (exchange + local)
}

/// Largest angle between corresponding spins.
pub fn equilibrium_distance(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), found: b.len() });
    }
    Ok(a.iter().zip(b).map(|(&p, &q)| p.angle_to(q)).fold(0.0, f64::max))
}

/// Smooth tilted initial profile. The polar angle from `ê_x` is
/// `tilt + amplitude · sin(π x + φ₁)` and the azimuth about `ê_x` is
/// `twist · π x + φ₂`, with `x ∈ [0, 1]` and phases drawn from `seed`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialProfile {
    pub tilt: f64,
    pub amplitude: f64,
    pub twist: f64,
    pub seed: u64,
}

impl Default for InitialProfile {
    fn default() -> Self {
        InitialProfile { tilt: 1.2, amplitude: 0.3, twist: 1.0, seed: 0 }
    }
}

impl InitialProfile {
    pub fn points(&self, n: usize) -> Vec<Vec3> {
        self.member_points(n, 0)
    }

    /// Profile for ensemble member `member`; phases come from that member's stream.
    pub fn member_points(&self, n: usize, member: u64) -> Vec<Vec3> {
        let mut rng = ensemble_rng(self.seed, member);
        let phase1 = rng.gen_range(0.0..std::f64::consts::TAU);
        let phase2 = rng.gen_range(0.0..std::f64::consts::TAU);
        let pi = std::f64::consts::PI;
        (0..n)
            .map(|j| {
                let x = if n > 1 { j as f64 / (n - 1) as f64 } else { 0.0 };
                let theta = self.tilt + self.amplitude * (pi * x + phase1).sin();
                let phi = self.twist * pi * x + phase2;
                let (st, ct) = theta.sin_cos();
                let v = Vec3::new(ct, st * phi.cos(), st * phi.sin());
                // sin/cos round to within an ulp of the unit sphere.
                v.normalized().unwrap_or(Vec3::X)
            })
            .collect()
    }

    pub fn chain(&self, n: usize, spacing: f64) -> Result<SpinChain> {
        SpinChain::with_spacing(self.points(n), spacing)
    }
}

/// The spin chain as a [`System`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Llg {
    pub params: LlgParams,
    pub sites: usize,
    pub spacing: f64,
}

impl Llg {
    pub fn new(params: LlgParams, sites: usize, spacing: f64) -> Result<Self> {
        params.validate()?;
        if sites < 2 {
            return Err(Error::TooFewSites { min: 2, found: sites });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::config(format!("grid spacing must be positive, got {spacing}")));
        }
        Ok(Llg { params, sites, spacing })
    }

    /// A system matching the chain's size and spacing.
    pub fn for_chain(params: LlgParams, chain: &SpinChain) -> Result<Self> {
        Llg::new(params, chain.len(), chain.spacing())
    }

    pub fn h_eff(&self, m: &[Vec3]) -> GeneratorField {
        h_eff(m, &self.params, self.spacing)
    }
}

impl System for Llg {
    fn sites(&self) -> usize {
        self.sites
    }

    fn generator(&self, m: &[Vec3]) -> GeneratorField {
        llg_generator(m, &self.params, self.spacing)
    }

    fn energy(&self, m: &[Vec3]) -> Option<f64> {
        Some(free_energy(m, &self.params, self.spacing))
    }
}
