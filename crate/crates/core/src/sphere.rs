//! State on (S²)ᴺ and the generator/isotropy machinery.
//!
//! A tangent vector field on the sphere is written `X(m) = A(m) × m`. The
//! generator `A` is only determined up to a multiple of `m` (the isotropy
//! algebra of `m`), and that freedom is what the σ policies below choose.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3::{AlgebraElement, ExpChoice, Vec3};

/// Tolerance on `|‖m‖ − 1|` accepted by [`SphereField::new`].
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Sites with `‖X‖ < EQUILIBRIUM_RTOL · max(1, ‖A‖)` count as equilibria.
pub const EQUILIBRIUM_RTOL: f64 = 1e-10;

/// N points on the unit sphere, plus the grid spacing of the underlying
/// discretization (unused by systems without a spatial grid).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereField {
    points: Vec<Vec3>,
    spacing: f64,
}

impl SphereField {
    /// Builds a field, checking that every point is a unit vector.
    pub fn new(points: Vec<Vec3>, spacing: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooFewSites { min: 1, found: 0 });
        }
        for (site, p) in points.iter().enumerate() {
            let deviation = (p.norm() - 1.0).abs();
            if !(deviation <= UNIT_TOLERANCE) {
                return Err(Error::NotUnit { site, deviation });
            }
        }
        Ok(SphereField { points, spacing })
    }

    /// Normalizes each point. Intended for building initial conditions only.
    pub fn from_directions(directions: Vec<Vec3>, spacing: f64) -> Result<Self> {
        let points = directions
            .into_iter()
            .enumerate()
            .map(|(site, d)| d.normalized().ok_or(Error::NotUnit { site, deviation: 1.0 }))
            .collect::<Result<Vec<_>>>()?;
        SphereField::new(points, spacing)
    }

    /// Wraps points without checking norms. Used for the unconstrained
    /// classical baselines, whose states drift off the sphere.
    pub fn from_points_unchecked(points: Vec<Vec3>, spacing: f64) -> Self {
        SphereField { points, spacing }
    }

    pub fn single(m: Vec3) -> Result<Self> {
        SphereField::new(vec![m], 0.0)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `max_j |‖M_j‖ − 1|`.
    pub fn max_norm_deviation(&self) -> f64 {
        max_norm_deviation(&self.points)
    }

    fn with_points(&self, points: Vec<Vec3>) -> Self {
        SphereField { points, spacing: self.spacing }
    }
}

/// `max_j |‖p_j‖ − 1|`.
pub fn max_norm_deviation(points: &[Vec3]) -> f64 {
    points.iter().map(|p| (p.norm() - 1.0).abs()).fold(0.0, f64::max)
}

/// One algebra element per site.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GeneratorField {
    pub vectors: Vec<Vec3>,
}

impl GeneratorField {
    pub fn new(vectors: Vec<Vec3>) -> Self {
        GeneratorField { vectors }
    }

    pub fn zeros(n: usize) -> Self {
        GeneratorField { vectors: vec![Vec3::ZERO; n] }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn scaled(&self, s: f64) -> GeneratorField {
        GeneratorField::new(self.vectors.iter().map(|&v| v * s).collect())
    }

    /// `self + s · other`.
    pub fn axpy(&self, s: f64, other: &GeneratorField) -> GeneratorField {
        debug_assert_eq!(self.len(), other.len());
        GeneratorField::new(self.vectors.iter().zip(&other.vectors).map(|(&a, &b)| a + b * s).collect())
    }

    /// Largest absolute component over all sites.
    pub fn max_abs(&self) -> f64 {
        self.vectors.iter().map(|v| v.max_abs()).fold(0.0, f64::max)
    }

    /// The vector field `A_j × M_j` this generator induces.
    pub fn tangent(&self, m: &[Vec3]) -> Vec<Vec3> {
        self.vectors.iter().zip(m).map(|(&a, &p)| a.cross(p)).collect()
    }
}

/// Which generator of a vector field a scheme is built on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorVariant {
    /// Whatever the system provides as its natural generator.
    #[default]
    Default,
    /// The unique generator orthogonal to each point.
    Orthogonal,
}

impl std::str::FromStr for GeneratorVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" | "def" => Ok(GeneratorVariant::Default),
            "orthogonal" | "orth" => Ok(GeneratorVariant::Orthogonal),
            other => Err(format!("unknown generator `{other}` (expected default or orthogonal)")),
        }
    }
}

/// How the curvature-matching σ is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureStencil {
    /// Closed form supplied by the system (rigid body).
    Analytic,
    /// One-sided difference of the orthogonal generator along one step.
    #[default]
    Forward,
    /// Centered difference, one step forward and one back.
    Centered,
}

/// Choice of the isotropy coefficient σ in `ω(M) = A(M) + σ(M) M`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaPolicy {
    #[default]
    Zero,
    Constant(f64),
    /// σ = k_g ‖X‖ added to the orthogonal generator (circle of matching
    /// geodesic curvature).
    Curvature(CurvatureStencil),
    /// σ that cancels the tangential O(Δt²) local error of forward Euler,
    /// added to the selected generator.
    ErrorMinimizing,
}

impl SigmaPolicy {
    pub fn is_state_independent(&self) -> bool {
        matches!(self, SigmaPolicy::Zero | SigmaPolicy::Constant(_))
    }

    /// The constant value for `Zero`/`Constant`, `None` otherwise.
    pub fn constant(&self) -> Option<f64> {
        match *self {
            SigmaPolicy::Zero => Some(0.0),
            SigmaPolicy::Constant(c) => Some(c),
            _ => None,
        }
    }
}

impl std::str::FromStr for SigmaPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" | "0" => Ok(SigmaPolicy::Zero),
            "curvature" | "curvature:forward" => Ok(SigmaPolicy::Curvature(CurvatureStencil::Forward)),
            "curvature:centered" => Ok(SigmaPolicy::Curvature(CurvatureStencil::Centered)),
            "curvature:analytic" | "cor" => Ok(SigmaPolicy::Curvature(CurvatureStencil::Analytic)),
            "error-minimizing" | "error_minimizing" | "optimal" => Ok(SigmaPolicy::ErrorMinimizing),
            other => match other.strip_prefix("const:") {
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|c| c.is_finite())
                    .map(SigmaPolicy::Constant)
                    .ok_or_else(|| format!("bad constant sigma `{v}`")),
                None => Err(format!(
                    "unknown sigma `{other}` (expected zero, const:<c>, curvature[:forward|:centered|:analytic], error-minimizing)"
                )),
            },
        }
    }
}

/// An ODE `Ṁ = A(M) × M` on (S²)ᴺ, described by its default generator and
/// whatever extra structure the system can supply.
pub trait System: Sync {
    /// Number of sites.
    fn sites(&self) -> usize;

    /// The default generator `A(M)`. Must also accept points that are not
    /// exactly unit (classical baselines evaluate it off the sphere).
    fn generator(&self, m: &[Vec3]) -> GeneratorField;

    /// A conserved or dissipated scalar to monitor, if the system has one.
    fn energy(&self, _m: &[Vec3]) -> Option<f64> {
        None
    }

    /// `A^{(j)}(M) = ∂ʲ/∂tʲ A(𝓕_t(M))|_{t=0}` for `j = 0..=order`.
    fn flow_derivatives(&self, _m: &[Vec3], _variant: GeneratorVariant, _order: usize) -> Option<Vec<GeneratorField>> {
        None
    }

    /// Per-site isotropy correction for the corrected Heun scheme.
    fn heun_sigma_def(&self, _m: &[Vec3]) -> Option<Vec<f64>> {
        None
    }

    /// Closed-form curvature σ (relative to the orthogonal generator).
    fn curvature_sigma(&self, _m: &[Vec3]) -> Option<Vec<f64>> {
        None
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}

/// `A_o = A − (M·A) M` sitewise.
pub fn project_orthogonal(a: &GeneratorField, m: &SphereField) -> Result<GeneratorField> {
    check_len(m.len(), a.len())?;
    Ok(project_orthogonal_points(a, m.points()))
}

pub(crate) fn project_orthogonal_points(a: &GeneratorField, m: &[Vec3]) -> GeneratorField {
    GeneratorField::new(a.vectors.iter().zip(m).map(|(&a, &p)| a - p * a.dot(p)).collect())
}

/// `ω = A + σ M` sitewise.
pub fn isotropy_shift(a: &GeneratorField, sigma: &[f64], m: &SphereField) -> Result<GeneratorField> {
    check_len(m.len(), a.len())?;
    check_len(m.len(), sigma.len())?;
    Ok(isotropy_shift_points(a, sigma, m.points()))
}

pub(crate) fn isotropy_shift_points(a: &GeneratorField, sigma: &[f64], m: &[Vec3]) -> GeneratorField {
    GeneratorField::new(a.vectors.iter().zip(sigma).zip(m).map(|((&a, &s), &p)| a + p * s).collect())
}

pub(crate) fn constant_shift_points(a: &GeneratorField, sigma: f64, m: &[Vec3]) -> GeneratorField {
    if sigma == 0.0 {
        return a.clone();
    }
    GeneratorField::new(a.vectors.iter().zip(m).map(|(&a, &p)| a + p * sigma).collect())
}

/// `M_{n+1} = Exp(F) · M`, one rotation per site.
///
/// `f` is the full algebra element (already multiplied by the step).
pub fn apply_update(m: &SphereField, f: &GeneratorField, exp_choice: ExpChoice) -> Result<SphereField> {
    check_len(m.len(), f.len())?;
    Ok(m.with_points(rotate_points(m.points(), f, exp_choice)))
}

pub(crate) fn rotate_points(m: &[Vec3], f: &GeneratorField, exp_choice: ExpChoice) -> Vec<Vec3> {
    m.iter().zip(&f.vectors).map(|(&p, &xi)| AlgebraElement(xi).exp_choice_apply(exp_choice, p)).collect()
}

pub(crate) fn rotate_points_scaled(m: &[Vec3], f: &GeneratorField, scale: f64, exp_choice: ExpChoice) -> Vec<Vec3> {
    m.iter().zip(&f.vectors).map(|(&p, &xi)| AlgebraElement(xi * scale).exp_choice_apply(exp_choice, p)).collect()
}

/// A system together with the generator variant and σ policy a scheme uses.
#[derive(Clone, Copy)]
pub struct GeneratorEvaluator<'a> {
    pub system: &'a dyn System,
    pub variant: GeneratorVariant,
    pub sigma: SigmaPolicy,
}

impl<'a> GeneratorEvaluator<'a> {
    pub fn new(system: &'a dyn System, variant: GeneratorVariant, sigma: SigmaPolicy) -> Self {
        GeneratorEvaluator { system, variant, sigma }
    }

    /// The selected generator, without any σ shift.
    pub fn generator(&self, m: &[Vec3]) -> GeneratorField {
        let a = self.system.generator(m);
        match self.variant {
            GeneratorVariant::Default => a,
            GeneratorVariant::Orthogonal => project_orthogonal_points(&a, m),
        }
    }

    pub fn orthogonal(&self, m: &[Vec3]) -> GeneratorField {
        project_orthogonal_points(&self.system.generator(m), m)
    }

    /// `ω(M) = A(M) + σ M` for the state-independent policies (used at every
    /// stage of multi-stage schemes).
    pub fn shifted(&self, m: &[Vec3]) -> Result<GeneratorField> {
        let c = self
            .sigma
            .constant()
            .ok_or_else(|| Error::config("multi-stage schemes support only zero or constant sigma"))?;
        Ok(constant_shift_points(&self.generator(m), c, m))
    }

    /// The Euler infinitesimal update `A + σ M` at the base point `m`, with σ
    /// evaluated from the policy there.
    pub fn euler_generator(&self, m: &SphereField, dt: f64) -> Result<GeneratorField> {
        let pts = m.points();
        Ok(match self.sigma {
            SigmaPolicy::Zero => self.generator(pts),
            SigmaPolicy::Constant(c) => constant_shift_points(&self.generator(pts), c, pts),
            SigmaPolicy::Curvature(stencil) => {
                let sigma = match stencil {
                    CurvatureStencil::Analytic => self
                        .system
                        .curvature_sigma(pts)
                        .ok_or(Error::MissingCapability("a closed-form curvature sigma"))?,
                    CurvatureStencil::Forward | CurvatureStencil::Centered => {
                        curvature_sigma_fd(self.system, pts, dt, stencil)
                    }
                };
                isotropy_shift_points(&self.orthogonal(pts), &sigma, pts)
            }
            SigmaPolicy::ErrorMinimizing => {
                let sigma = error_minimizing_sigma(self, m, dt);
                isotropy_shift_points(&self.generator(pts), &sigma, pts)
            }
        })
    }
}

/// σ = k_g ‖X‖ per site, with the geodesic curvature estimated from
/// `k_g = −⟨ω̇, ω × m⟩ / ‖ω‖³`, `ω = A_o`, and `ω̇` a forward difference along
/// one Cayley step of length `dt`. Equilibria (X = 0) get σ = 0.
///
/// The returned σ is relative to the orthogonal generator: the corrected
/// Euler update is `A_o + σ M`.
pub fn geodesic_curvature_sigma(gen: &GeneratorEvaluator<'_>, m: &SphereField, dt: f64) -> Vec<f64> {
    curvature_sigma_fd(gen.system, m.points(), dt, CurvatureStencil::Forward)
}

/// As [`geodesic_curvature_sigma`], with a selectable stencil.
pub fn geodesic_curvature_sigma_with(
    gen: &GeneratorEvaluator<'_>,
    m: &SphereField,
    dt: f64,
    stencil: CurvatureStencil,
) -> Result<Vec<f64>> {
    match stencil {
        CurvatureStencil::Analytic => {
            gen.system.curvature_sigma(m.points()).ok_or(Error::MissingCapability("a closed-form curvature sigma"))
        }
        s => Ok(curvature_sigma_fd(gen.system, m.points(), dt, s)),
    }
}

fn curvature_sigma_fd(system: &dyn System, m: &[Vec3], dt: f64, stencil: CurvatureStencil) -> Vec<f64> {
    let a = system.generator(m);
    let omega = project_orthogonal_points(&a, m);
    let orth_at = |pts: &[Vec3]| project_orthogonal_points(&system.generator(pts), pts);
    let plus = orth_at(&rotate_points_scaled(m, &omega, dt, ExpChoice::Cay));
    let omega_dot: Vec<Vec3> = match stencil {
        CurvatureStencil::Centered => {
            let minus = orth_at(&rotate_points_scaled(m, &omega, -dt, ExpChoice::Cay));
            plus.vectors.iter().zip(&minus.vectors).map(|(&p, &q)| (p - q) / (2.0 * dt)).collect()
        }
        _ => plus.vectors.iter().zip(&omega.vectors).map(|(&p, &w)| (p - w) / dt).collect(),
    };
    omega
        .vectors
        .iter()
        .zip(&omega_dot)
        .zip(a.vectors.iter().zip(m))
        .map(|((&w, &wd), (&a, &p))| {
            // ‖X‖ = ‖ω × m‖ = ‖ω‖ since ω ⊥ m.
            let speed2 = w.norm_squared();
            if speed2.sqrt() < EQUILIBRIUM_RTOL * a.norm().max(1.0) {
                0.0
            } else {
                -wd.dot(w.cross(p)) / speed2
            }
        })
        .collect()
}

/// Isotropy coefficient, relative to the evaluator's selected generator `A`,
/// that removes the tangential O(Δt²) term of the forward-Euler local error:
/// `σ = −⟨ΔA, A × M⟩ / ‖A_o‖²` with `ΔA = (A(M⁺) − A(M)) / Δt`.
pub fn error_minimizing_sigma(gen: &GeneratorEvaluator<'_>, m: &SphereField, dt: f64) -> Vec<f64> {
    let pts = m.points();
    let a = gen.generator(pts);
    let plus = gen.generator(&rotate_points_scaled(pts, &a, dt, ExpChoice::Cay));
    a.vectors
        .iter()
        .zip(&plus.vectors)
        .zip(pts)
        .map(|((&a, &ap), &p)| {
            let ao = a - p * a.dot(p);
            let speed2 = ao.norm_squared();
            if speed2.sqrt() < EQUILIBRIUM_RTOL * a.norm().max(1.0) {
                0.0
            } else {
                let da = (ap - a) / dt;
                -da.dot(a.cross(p)) / speed2
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(v: Vec3) -> Vec3 {
        v.normalized().unwrap()
    }

    fn field(points: Vec<Vec3>) -> SphereField {
        SphereField::new(points, 1.0).unwrap()
    }

    fn unit_vec() -> impl Strategy<Value = Vec3> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z)| unit(Vec3::new(x, y, z)))
    }

    fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
        (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    #[test]
    fn rejects_non_unit_and_empty() {
        assert!(matches!(SphereField::new(vec![], 1.0), Err(Error::TooFewSites { .. })));
        assert!(matches!(
            SphereField::new(vec![Vec3::X, Vec3::new(1.0, 1.0, 0.0)], 1.0),
            Err(Error::NotUnit { site: 1, .. })
        ));
    }

    #[test]
    fn projection_examples() {
        let m = field(vec![Vec3::X, Vec3::Y, Vec3::Z]);
        let a =
            GeneratorField::new(vec![Vec3::new(2.0, 3.0, 4.0), Vec3::new(0.0, -5.0, 0.0), Vec3::new(1.0, 0.0, 0.0)]);
        let ao = project_orthogonal(&a, &m).unwrap();
        assert_eq!(ao.vectors[0], Vec3::new(0.0, 3.0, 4.0));
        assert_eq!(ao.vectors[1], Vec3::ZERO);
        assert_eq!(ao.vectors[2], Vec3::new(1.0, 0.0, 0.0));
        assert!(matches!(
            project_orthogonal(&GeneratorField::zeros(2), &m),
            Err(Error::LengthMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn shift_examples() {
        let m = field(vec![Vec3::Z]);
        let a = GeneratorField::new(vec![Vec3::X]);
        assert_eq!(isotropy_shift(&a, &[10.0], &m).unwrap().vectors[0], Vec3::new(1.0, 0.0, 10.0));
        assert_eq!(isotropy_shift(&a, &[0.0], &m).unwrap(), a);
        assert!(isotropy_shift(&a, &[1.0, 2.0], &m).is_err());
    }

    #[test]
    fn update_examples() {
        let m = field(vec![Vec3::Y]);
        assert_eq!(apply_update(&m, &GeneratorField::zeros(1), ExpChoice::Cay).unwrap(), m);
        let f = GeneratorField::new(vec![Vec3::new(2.0, 0.0, 0.0)]);
        let out = apply_update(&m, &f, ExpChoice::Cay).unwrap();
        assert!((out.points()[0] - Vec3::Z).max_abs() < 1e-16);
    }

    #[test]
    fn repeated_updates_stay_on_sphere() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut m = field((0..8).map(|i| unit(Vec3::new(1.0, i as f64, 0.5))).collect());
        for _ in 0..2000 {
            let f = GeneratorField::new(
                (0..8)
                    .map(|_| {
                        Vec3::new(
                            rng.gen_range(-100.0..100.0),
                            rng.gen_range(-100.0..100.0),
                            rng.gen_range(-100.0..100.0),
                        )
                    })
                    .collect(),
            );
            m = apply_update(&m, &f, ExpChoice::Cay).unwrap();
            assert!(m.max_norm_deviation() <= 1e-13);
        }
    }

    proptest! {
        #[test]
        fn projection_is_orthogonal_and_idempotent(p in unit_vec(), a in vec3(10.0)) {
            let m = field(vec![p]);
            let g = GeneratorField::new(vec![a]);
            let ao = project_orthogonal(&g, &m).unwrap();
            prop_assert!(ao.vectors[0].dot(p).abs() <= 1e-14 * a.norm().max(1.0));
            let twice = project_orthogonal(&ao, &m).unwrap();
            prop_assert!((twice.vectors[0] - ao.vectors[0]).max_abs() <= 1e-14 * a.norm().max(1.0));
            prop_assert!((ao.vectors[0].cross(p) - a.cross(p)).max_abs() <= 1e-14 * a.norm().max(1.0));
        }

        #[test]
        fn shift_leaves_vector_field_unchanged(p in unit_vec(), a in vec3(10.0), s in -50.0f64..50.0) {
            let m = field(vec![p]);
            let g = GeneratorField::new(vec![a]);
            let w = isotropy_shift(&g, &[s], &m).unwrap();
            prop_assert!((w.vectors[0].cross(p) - a.cross(p)).max_abs() <= 1e-14 * (a.norm() + s.abs()).max(1.0));
        }

        #[test]
        fn update_preserves_norm(p in unit_vec(), f in vec3(100.0), use_exp in any::<bool>()) {
            let m = field(vec![p]);
            let choice = if use_exp { ExpChoice::Exp } else { ExpChoice::Cay };
            let out = apply_update(&m, &GeneratorField::new(vec![f]), choice).unwrap();
            prop_assert!(out.max_norm_deviation() <= 1e-14);
        }
    }

    #[test]
    fn parse_sigma() {
        assert_eq!("zero".parse::<SigmaPolicy>().unwrap(), SigmaPolicy::Zero);
        assert_eq!("const:10".parse::<SigmaPolicy>().unwrap(), SigmaPolicy::Constant(10.0));
        assert_eq!("const:-2.5".parse::<SigmaPolicy>().unwrap(), SigmaPolicy::Constant(-2.5));
        assert_eq!("curvature".parse::<SigmaPolicy>().unwrap(), SigmaPolicy::Curvature(CurvatureStencil::Forward));
        assert!("const:nan".parse::<SigmaPolicy>().is_err());
        assert!("bogus".parse::<SigmaPolicy>().is_err());
    }
}
