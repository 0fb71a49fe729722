//! The free rigid body reduced to the unit sphere of body angular momenta.
//!
//! Generators follow the crate-wide convention `ṁ = A(m) × m`. With the
//! default generator `A = 𝕀⁻¹m` that is the reversed-time Euler flow
//! `ṁ = −m × 𝕀⁻¹m`; orbits, energy levels and error magnitudes are those of
//! the forward flow under `m ↦ −m`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3::Vec3;
use crate::sphere::{GeneratorField, GeneratorVariant, System, EQUILIBRIUM_RTOL};

/// Lower bound of `⟨J^d, u⟩` below which the Heun correction is switched off.
pub const SIGMA_DEF_DENOMINATOR_MIN: f64 = 1e-14;

/// Minimum pairwise gap between moments of a random triaxial body.
pub const TRIAXIAL_MIN_GAP: f64 = 0.1;

pub const MOMENT_RANGE: (f64, f64) = (0.5, 5.0);

/// Principal moments of inertia; the body frame is the principal frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InertiaTensor {
    moments: [f64; 3],
}

impl InertiaTensor {
    pub fn new(i1: f64, i2: f64, i3: f64) -> Result<Self> {
        let moments = [i1, i2, i3];
        if moments.iter().any(|&i| !(i.is_finite() && i > 0.0)) {
            return Err(Error::config(format!("moments of inertia must be positive and finite, got {moments:?}")));
        }
        Ok(InertiaTensor { moments })
    }

    pub fn moments(&self) -> [f64; 3] {
        self.moments
    }

    /// `𝕀⁻¹v`.
    pub fn inv_apply(&self, v: Vec3) -> Vec3 {
        Vec3::new(v.x / self.moments[0], v.y / self.moments[1], v.z / self.moments[2])
    }

    /// `𝕀v`.
    pub fn apply(&self, v: Vec3) -> Vec3 {
        Vec3::new(v.x * self.moments[0], v.y * self.moments[1], v.z * self.moments[2])
    }

    pub fn is_triaxial(&self) -> bool {
        let [a, b, c] = self.moments;
        a != b && b != c && a != c
    }

    pub fn is_axisymmetric(&self) -> bool {
        let [a, b, c] = self.moments;
        let equal = [a == b, b == c, a == c].iter().filter(|&&e| e).count();
        equal == 1
    }

    /// Index of the intermediate moment (triaxial bodies).
    fn sorted_axes(&self) -> [usize; 3] {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&p, &q| self.moments[p].total_cmp(&self.moments[q]));
        idx
    }
}

/// `X(m) = m × 𝕀⁻¹m`.
pub fn vector_field(m: Vec3, inertia: &InertiaTensor) -> Vec3 {
    m.cross(inertia.inv_apply(m))
}

/// `H(m) = ½⟨m, 𝕀⁻¹m⟩`.
pub fn energy(m: Vec3, inertia: &InertiaTensor) -> f64 {
    0.5 * m.dot(inertia.inv_apply(m))
}

/// `𝕀⁻¹m`, or its orthogonal part `𝕀⁻¹m − 2H(m) m`.
pub fn generator(m: Vec3, inertia: &InertiaTensor, variant: GeneratorVariant) -> Vec3 {
    let a = inertia.inv_apply(m);
    match variant {
        GeneratorVariant::Default => a,
        GeneratorVariant::Orthogonal => a - m * m.dot(a),
    }
}

fn is_equilibrium(x: Vec3, a: Vec3) -> bool {
    x.norm() < EQUILIBRIUM_RTOL * a.norm().max(1.0)
}

/// The Euler generator whose discrete orbits match the osculating circle:
/// `𝕀⁻¹m − (⟨X, 𝕀⁻¹X⟩ / ‖X‖²) m`. Equilibria get `𝕀⁻¹m`.
pub fn euler_cor(m: Vec3, inertia: &InertiaTensor) -> Vec3 {
    let a = inertia.inv_apply(m);
    let x = m.cross(a);
    if is_equilibrium(x, a) {
        return a;
    }
    a - m * (x.dot(inertia.inv_apply(x)) / x.norm_squared())
}

/// Same generator as [`euler_cor`], written as `𝕀⁻¹m − (τ(u)/τ(𝕀u)) m` with
/// `τ(x) = x₁ + x₂ + x₃` and `u_i = (I_j − I_k)² I_i (m_j m_k)²` over cyclic
/// `(i, j, k)`.
pub fn euler_cor_cyclic(m: Vec3, inertia: &InertiaTensor) -> Vec3 {
    let a = inertia.inv_apply(m);
    let i = inertia.moments();
    let c = m.to_array();
    let mut tau_u = 0.0;
    let mut tau_iu = 0.0;
    for n in 0..3 {
        let (j, k) = ((n + 1) % 3, (n + 2) % 3);
        let u = (i[j] - i[k]).powi(2) * i[n] * (c[j] * c[k]).powi(2);
        tau_u += u;
        tau_iu += i[n] * u;
    }
    if is_equilibrium(m.cross(a), a) {
        return a;
    }
    a - m * (tau_u / tau_iu)
}

/// Curvature σ relative to the orthogonal generator:
/// `euler_cor(m) = generator(m, Orthogonal) + σ m`. Zero at equilibria.
pub fn curvature_sigma(m: Vec3, inertia: &InertiaTensor) -> f64 {
    let a = inertia.inv_apply(m);
    let x = m.cross(a);
    if is_equilibrium(x, a) {
        return 0.0;
    }
    m.dot(a) - x.dot(inertia.inv_apply(x)) / x.norm_squared()
}

/// Isotropy coefficient that raises the energy accuracy of the Heun scheme
/// with the default generator by one order. Enters the step as
/// `Δt³ σ_def(m) m` added to the algebra element.
pub fn heun_sigma_def(m: Vec3, inertia: &InertiaTensor) -> f64 {
    let i = inertia.moments();
    let c = m.to_array();
    let prod = i[0] * i[1] * i[2];
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..3 {
        let (k, l) = ((j + 1) % 3, (j + 2) % 3);
        let u = (c[k] * c[l]).powi(2);
        let gap2 = (i[k] - i[l]).powi(2);
        num += -i[j] * (i[k] + i[l]) * gap2 * u;
        den += 4.0 * prod * i[j] * i[j] * gap2 * u;
    }
    if den.abs() < SIGMA_DEF_DENOMINATOR_MIN {
        0.0
    } else {
        num / den
    }
}

/// `A⁽ʲ⁾(m) = dʲ/dtʲ A(m(t))|₀` for `j = 0..=order`, `order ≤ 3`, along the
/// flow `ṁ = 𝕀⁻¹m × m`.
pub fn flow_derivatives(
    m: Vec3,
    inertia: &InertiaTensor,
    variant: GeneratorVariant,
    order: usize,
) -> Result<Vec<Vec3>> {
    if order > 3 {
        return Err(Error::config(format!("flow derivatives are available up to order 3, requested {order}")));
    }
    // Time derivatives of m, then of A = 𝕀⁻¹m by linearity.
    let mut ms = vec![m];
    let mut a = vec![inertia.inv_apply(m)];
    for j in 1..=order {
        // m⁽ʲ⁾ = Σ_{i<j} C(j−1, i) A⁽ⁱ⁾ × m⁽ʲ⁻¹⁻ⁱ⁾
        let mut next = Vec3::ZERO;
        let mut binom = 1.0;
        for i in 0..j {
            next += a[i].cross(ms[j - 1 - i]) * binom;
            binom = binom * (j - 1 - i) as f64 / (i + 1) as f64;
        }
        ms.push(next);
        a.push(inertia.inv_apply(next));
    }
    Ok(match variant {
        GeneratorVariant::Default => a,
        GeneratorVariant::Orthogonal => {
            // H is constant along the flow, so A_o⁽ʲ⁾ = A⁽ʲ⁾ − 2H m⁽ʲ⁾.
            let two_h = m.dot(a[0]);
            a.iter().zip(&ms).map(|(&aj, &mj)| aj - mj * two_h).collect()
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    Triaxial,
    Axisymmetric,
}

impl std::str::FromStr for BodyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "triaxial" => Ok(BodyKind::Triaxial),
            "axisymmetric" => Ok(BodyKind::Axisymmetric),
            other => Err(format!("unknown body kind `{other}` (expected triaxial or axisymmetric)")),
        }
    }
}

/// The generator for ensemble member `index` under `master_seed`.
pub fn ensemble_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn random_inertia<R: Rng>(kind: BodyKind, rng: &mut R) -> InertiaTensor {
    let (lo, hi) = MOMENT_RANGE;
    loop {
        let (a, b, c) = (rng.gen_range(lo..=hi), rng.gen_range(lo..=hi), rng.gen_range(lo..=hi));
        let moments = match kind {
            BodyKind::Triaxial => [a, b, c],
            BodyKind::Axisymmetric => [a, a, b],
        };
        let [x, y, z] = moments;
        let ok = match kind {
            BodyKind::Triaxial => {
                (x - y).abs() >= TRIAXIAL_MIN_GAP
                    && (y - z).abs() >= TRIAXIAL_MIN_GAP
                    && (x - z).abs() >= TRIAXIAL_MIN_GAP
            }
            BodyKind::Axisymmetric => (x - z).abs() >= TRIAXIAL_MIN_GAP,
        };
        if ok {
            return InertiaTensor { moments };
        }
    }
}

fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    let p: [f64; 3] = UnitSphere.sample(rng);
    // Sampled points are unit up to a few ulps; renormalize once so the
    // initial condition itself is exact.
    Vec3::from(p).normalized().unwrap_or(Vec3::Z)
}

/// A random body and initial condition drawn from `rng`: moments uniform on
/// [`MOMENT_RANGE`], initial condition uniform on the sphere.
pub fn random_instance_from<R: Rng>(kind: BodyKind, rng: &mut R) -> (InertiaTensor, Vec3) {
    let inertia = random_inertia(kind, rng);
    (inertia, random_unit(rng))
}

pub fn random_instance(kind: BodyKind, seed: u64) -> (InertiaTensor, Vec3) {
    random_instance_from(kind, &mut ensemble_rng(seed, 0))
}

/// A random point on a separatrix of a triaxial body.
///
/// The level set `H = 1/(2 I_mid)` on the unit sphere is the pair of great
/// circles `m_max = ±r m_min` with `r² = (1/I_min − 1/I_mid)/(1/I_mid − 1/I_max)`,
/// so points are placed on one of them directly. The angle from the
/// intermediate axis is kept at least 0.1 away from the equilibria.
pub fn separatrix_point<R: Rng>(inertia: &InertiaTensor, rng: &mut R) -> Result<Vec3> {
    if !inertia.is_triaxial() {
        return Err(Error::config("separatrix initial conditions need a triaxial body"));
    }
    let [lo, mid, hi] = inertia.sorted_axes();
    let i = inertia.moments();
    let r = ((1.0 / i[lo] - 1.0 / i[mid]) / (1.0 / i[mid] - 1.0 / i[hi])).sqrt();
    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let mut d = [0.0; 3];
    d[lo] = 1.0;
    d[hi] = sign * r;
    let d = Vec3::from(d) / (1.0 + r * r).sqrt();
    let mut e = [0.0; 3];
    e[mid] = 1.0;
    let e = Vec3::from(e);
    let phi =
        rng.gen_range(0.1..(std::f64::consts::PI - 0.1)) + if rng.gen::<bool>() { std::f64::consts::PI } else { 0.0 };
    Ok(e * phi.cos() + d * phi.sin())
}

/// A random triaxial body with a random separatrix initial condition.
pub fn separatrix_instance<R: Rng>(rng: &mut R) -> (InertiaTensor, Vec3) {
    let inertia = random_inertia(BodyKind::Triaxial, rng);
    let m = separatrix_point(&inertia, rng).expect("random triaxial body");
    (inertia, m)
}

/// The rigid body as a one-site [`System`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidBody {
    pub inertia: InertiaTensor,
}

impl RigidBody {
    pub fn new(inertia: InertiaTensor) -> Self {
        RigidBody { inertia }
    }
}

impl System for RigidBody {
    fn sites(&self) -> usize {
        1
    }

    fn generator(&self, m: &[Vec3]) -> GeneratorField {
        GeneratorField::new(m.iter().map(|&p| self.inertia.inv_apply(p)).collect())
    }

    fn energy(&self, m: &[Vec3]) -> Option<f64> {
        Some(m.iter().map(|&p| energy(p, &self.inertia)).sum())
    }

    fn flow_derivatives(&self, m: &[Vec3], variant: GeneratorVariant, order: usize) -> Option<Vec<GeneratorField>> {
        let per_site =
            m.iter().map(|&p| flow_derivatives(p, &self.inertia, variant, order)).collect::<Result<Vec<_>>>().ok()?;
        Some((0..=order).map(|j| GeneratorField::new(per_site.iter().map(|d| d[j]).collect())).collect())
    }

    fn heun_sigma_def(&self, m: &[Vec3]) -> Option<Vec<f64>> {
        Some(m.iter().map(|&p| heun_sigma_def(p, &self.inertia)).collect())
    }

    fn curvature_sigma(&self, m: &[Vec3]) -> Option<Vec<f64>> {
        Some(m.iter().map(|&p| curvature_sigma(p, &self.inertia)).collect())
    }
}
