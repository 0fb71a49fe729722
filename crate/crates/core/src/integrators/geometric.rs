use serde::{Deserialize, Serialize};

use super::Correction;
use crate::error::{Error, Result};
use crate::so3::{dcay_inv_apply, AlgebraElement, ExpChoice, Vec3};
use crate::sphere::{
    rotate_points, rotate_points_scaled, GeneratorEvaluator, GeneratorField, GeneratorVariant, SphereField, System,
};

/// Fixed-point iteration settings for the implicit Euler step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicitOptions {
    /// Max-norm residual target, relative to `max(1, ‖A(M)‖_∞)`.
    pub tolerance: f64,
    pub max_iters: usize,
    /// Damping `r` in `ξ ← (1 − r) ξ + r A(Exp(Δt ξ) M)`.
    pub relaxation: f64,
}

impl Default for ImplicitOptions {
    fn default() -> Self {
        ImplicitOptions { tolerance: 1e-12, max_iters: 100, relaxation: 1.0 }
    }
}

fn check(m: &SphereField, dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else if m.is_empty() {
        Err(Error::TooFewSites { min: 1, found: 0 })
    } else {
        Err(Error::config(format!("time step must be positive and finite, got {dt}")))
    }
}

fn advance(m: &SphereField, f: &GeneratorField, dt: f64, exp: ExpChoice) -> SphereField {
    SphereField::from_points_unchecked(rotate_points_scaled(m.points(), f, dt, exp), m.spacing())
}

/// Geometric forward Euler: `M ← Exp(Δt (A + σM)) M`, with σ from the
/// evaluator's policy at the base point.
pub fn step_euler_fwd(m: &SphereField, dt: f64, gen: &GeneratorEvaluator<'_>, exp: ExpChoice) -> Result<SphereField> {
    check(m, dt)?;
    let f = gen.euler_generator(m, dt)?;
    Ok(advance(m, &f, dt, exp))
}

/// Geometric implicit Euler. Solves `ξ = A(Exp(Δt ξ) M)` by fixed-point
/// iteration from `ξ₀ = A(M)`, then steps with `ξ + σM` (constant σ only).
pub fn step_euler_impl(
    m: &SphereField,
    dt: f64,
    gen: &GeneratorEvaluator<'_>,
    exp: ExpChoice,
    opts: &ImplicitOptions,
) -> Result<SphereField> {
    check(m, dt)?;
    let sigma = gen.sigma.constant().ok_or_else(|| Error::config("euler_impl supports only zero or constant sigma"))?;
    let pts = m.points();
    let mut xi = gen.generator(pts);
    let scale = xi.max_abs().max(1.0);
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iters {
        let image = gen.generator(&rotate_points_scaled(pts, &xi, dt, exp));
        residual = image.vectors.iter().zip(&xi.vectors).map(|(&a, &b)| (a - b).max_abs()).fold(0.0, f64::max);
        if !residual.is_finite() {
            break;
        }
        if residual <= opts.tolerance * scale {
            // One more evaluation would move ξ by at most the residual, so
            // the current iterate already satisfies the target.
            let f = crate::sphere::constant_shift_points(&xi, sigma, pts);
            return Ok(advance(m, &f, dt, exp));
        }
        xi = xi.scaled(1.0 - opts.relaxation).axpy(opts.relaxation, &image);
    }
    Err(Error::ImplicitSolve { iterations: opts.max_iters, residual })
}

/// Geometric Heun: `F = ½(ω(M) + ω(Exp(Δt ω(M)) M))` with `ω = A + σM`.
/// With [`Correction::Dcor`] the system's `σ_def` adds `Δt² σ_def(M) M` to
/// `F`, i.e. `Δt³ σ_def M` to the algebra element.
pub fn step_heun(
    m: &SphereField,
    dt: f64,
    gen: &GeneratorEvaluator<'_>,
    exp: ExpChoice,
    correction: Correction,
) -> Result<SphereField> {
    check(m, dt)?;
    let pts = m.points();
    let w0 = gen.shifted(pts)?;
    let w1 = gen.shifted(&rotate_points_scaled(pts, &w0, dt, exp))?;
    let mut f = w0.axpy(1.0, &w1).scaled(0.5);
    if correction == Correction::Dcor {
        if gen.variant != GeneratorVariant::Default {
            return Err(Error::config("the dcor correction is defined for the default generator only"));
        }
        let sigma = gen.system.heun_sigma_def(pts).ok_or(Error::MissingCapability("a Heun energy correction"))?;
        for ((v, &s), &p) in f.vectors.iter_mut().zip(&sigma).zip(pts) {
            *v += p * (dt * dt * s);
        }
    }
    Ok(advance(m, &f, dt, exp))
}

/// Runge–Kutta–Munthe-Kaas of order four on `f' = dcay_f⁻¹(A + σM)` with the
/// Cayley transform (constant σ only).
pub fn step_rkmk4(m: &SphereField, dt: f64, gen: &GeneratorEvaluator<'_>) -> Result<SphereField> {
    check(m, dt)?;
    let f = rkmk4_increment(m.points(), dt, gen)?;
    Ok(SphereField::from_points_unchecked(rotate_points(m.points(), &f, ExpChoice::Cay), m.spacing()))
}

fn rkmk4_increment(pts: &[Vec3], dt: f64, gen: &GeneratorEvaluator<'_>) -> Result<GeneratorField> {
    let stage = |f: &GeneratorField, scale: f64| -> Result<GeneratorField> {
        let k = gen.shifted(&rotate_points_scaled(pts, f, scale, ExpChoice::Cay))?.scaled(dt);
        Ok(GeneratorField::new(
            f.vectors.iter().zip(&k.vectors).map(|(&fi, &ki)| dcay_inv_apply(AlgebraElement(fi * scale), ki)).collect(),
        ))
    };
    let f1 = gen.shifted(pts)?.scaled(dt);
    let f2 = stage(&f1, 0.5)?;
    let f3 = stage(&f2, 0.5)?;
    let f4 = stage(&f3, 1.0)?;
    Ok(GeneratorField::new(
        (0..pts.len()).map(|j| (f1.vectors[j] + (f2.vectors[j] + f3.vectors[j]) * 2.0 + f4.vectors[j]) / 6.0).collect(),
    ))
}

/// Fourth-order series method built from the time derivatives of the
/// generator along the exact flow, with the Cayley transform.
pub fn step_sy4(m: &SphereField, dt: f64, system: &dyn System, variant: GeneratorVariant) -> Result<SphereField> {
    check(m, dt)?;
    let pts = m.points();
    let d = system
        .flow_derivatives(pts, variant, 3)
        .ok_or(Error::MissingCapability("generator time derivatives along the flow"))?;
    let (h, h2, h3, h4) = (dt, dt * dt, dt.powi(3), dt.powi(4));
    let f: Vec<Vec3> = (0..pts.len())
        .map(|j| {
            let (a, a1, a2, a3) = (d[0].vectors[j], d[1].vectors[j], d[2].vectors[j], d[3].vectors[j]);
            let taylor = a * h + a1 * (h2 / 2.0) + a2 * (h3 / 6.0) + a3 * (h4 / 24.0);
            let aa = a.norm_squared();
            match variant {
                GeneratorVariant::Default => {
                    taylor
                        + (a * aa + a1.cross(a)) * (h3 / 12.0)
                        + (a1 * aa + a2.cross(a) + a * (2.0 * a1.dot(a))) * (h4 / 24.0)
                }
                GeneratorVariant::Orthogonal => {
                    let p = pts[j];
                    taylor + (a * aa + p * a2.dot(p)) * (h3 / 12.0) + a * (a1.dot(a) * h4 / 8.0)
                }
            }
        })
        .collect();
    Ok(SphereField::from_points_unchecked(rotate_points(pts, &GeneratorField::new(f), ExpChoice::Cay), m.spacing()))
}
