//! Maps between the Lie algebra so(3) ≅ ℝ³ and rotations of ℝ³.
//!
//! Everything here acts on vectors directly. Rotation matrices are never
//! formed: `cay(ξ)x` and `exp(ξ)x` are evaluated from cross products, which is
//! all the sphere integrators need.

use std::ops::{Add, AddAssign, Div, Index, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A vector in ℝ³.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Largest absolute component.
    #[inline]
    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    /// Unit vector in the same direction. Returns `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self / n)
    }

    /// Componentwise product.
    #[inline]
    pub fn hadamard(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x * other.x, self.y * other.y, self.z * other.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Angle between two nonzero vectors, in `[0, π]`.
    ///
    /// Uses `atan2(|a×b|, a·b)`, which stays accurate for nearly parallel and
    /// nearly antiparallel inputs where `acos` loses digits.
    pub fn angle_to(self, other: Vec3) -> f64 {
        self.cross(other).norm().atan2(self.dot(other))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        self.x -= o.x;
        self.y -= o.y;
        self.z -= o.z;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl MulAssign<f64> for Vec3 {
    #[inline]
    fn mul_assign(&mut self, s: f64) {
        self.x *= s;
        self.y *= s;
        self.z *= s;
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl std::iter::Sum for Vec3 {
    fn sum<I: Iterator<Item = Vec3>>(iter: I) -> Vec3 {
        iter.fold(Vec3::ZERO, Add::add)
    }
}

/// Cross product `a × b`.
#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    a.cross(b)
}

/// Below this algebra norm `exp_apply` switches to its Taylor branch.
pub const EXP_SERIES_THRESHOLD: f64 = 1e-4;

/// An element of so(3), stored as the vector ξ with `skew(ξ)x = ξ × x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlgebraElement(pub Vec3);

impl AlgebraElement {
    pub const ZERO: AlgebraElement = AlgebraElement(Vec3::ZERO);

    #[inline]
    pub fn vec(self) -> Vec3 {
        self.0
    }

    /// `skew(ξ) x = ξ × x`.
    #[inline]
    pub fn skew_apply(self, x: Vec3) -> Vec3 {
        self.0.cross(x)
    }

    /// Cayley transform `cay(ξ) = (I + skew(ξ/2))(I − skew(ξ/2))⁻¹` applied to `x`.
    #[inline]
    pub fn cay_apply(self, x: Vec3) -> Vec3 {
        let xi = self.0;
        let half = xi * 0.5;
        let scale = 1.0 / (1.0 + half.norm_squared());
        let xi_x = xi.cross(x);
        let xi_xi_x = xi.cross(xi_x);
        x + (xi_x + xi_xi_x * 0.5) * scale
    }

    /// Rotation of `x` about `ξ/‖ξ‖` by the angle `‖ξ‖` (Rodrigues formula).
    pub fn exp_apply(self, x: Vec3) -> Vec3 {
        let xi = self.0;
        let theta2 = xi.norm_squared();
        let theta = theta2.sqrt();
        let (a, b) = if theta < EXP_SERIES_THRESHOLD {
            // sin θ/θ and (1 − cos θ)/θ² to O(θ⁶); the next terms are below 1e-25.
            (1.0 - theta2 / 6.0 * (1.0 - theta2 / 20.0), 0.5 - theta2 / 24.0 * (1.0 - theta2 / 30.0))
        } else {
            (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
        };
        let xi_x = xi.cross(x);
        x + xi_x * a + xi.cross(xi_x) * b
    }

    /// Right-trivialized tangent map of the Cayley transform at `self`:
    /// `dcay_f(v) = (v + ½ f×v) / (1 + ‖f/2‖²)`.
    #[inline]
    pub fn dcay_apply(self, v: Vec3) -> Vec3 {
        let f = self.0;
        let scale = 1.0 / (1.0 + 0.25 * f.norm_squared());
        (v + f.cross(v) * 0.5) * scale
    }

    /// Inverse of [`dcay_apply`](Self::dcay_apply):
    /// `dcay_f⁻¹(v) = v − ½ f×v + ¼ f (f·v)`.
    #[inline]
    pub fn dcay_inv_apply(self, v: Vec3) -> Vec3 {
        let f = self.0;
        v - f.cross(v) * 0.5 + f * (0.25 * f.dot(v))
    }

    /// Applies the chosen algorithmic exponential to `x`.
    #[inline]
    pub fn exp_choice_apply(self, choice: ExpChoice, x: Vec3) -> Vec3 {
        match choice {
            ExpChoice::Cay => self.cay_apply(x),
            ExpChoice::Exp => self.exp_apply(x),
        }
    }
}

impl From<Vec3> for AlgebraElement {
    fn from(v: Vec3) -> Self {
        AlgebraElement(v)
    }
}

/// Which algorithmic exponential maps algebra elements to rotations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpChoice {
    /// Cayley transform; rational, no trigonometric calls.
    #[default]
    Cay,
    /// The true matrix exponential of SO(3).
    Exp,
}

impl std::str::FromStr for ExpChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cay" => Ok(ExpChoice::Cay),
            "exp" => Ok(ExpChoice::Exp),
            other => Err(format!("unknown exponential `{other}` (expected cay or exp)")),
        }
    }
}

/// `cay(ξ) x`.
#[inline]
pub fn cay_apply(xi: AlgebraElement, x: Vec3) -> Vec3 {
    xi.cay_apply(x)
}

/// `exp(ξ) x`.
#[inline]
pub fn exp_apply(xi: AlgebraElement, x: Vec3) -> Vec3 {
    xi.exp_apply(x)
}

/// `dcay_f(v)`.
#[inline]
pub fn dcay_apply(f: AlgebraElement, v: Vec3) -> Vec3 {
    f.dcay_apply(v)
}

/// `dcay_f⁻¹(v)`.
#[inline]
pub fn dcay_inv_apply(f: AlgebraElement, v: Vec3) -> Vec3 {
    f.dcay_inv_apply(v)
}
