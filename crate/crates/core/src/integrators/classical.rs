use serde::{Deserialize, Serialize};

use crate::so3::Vec3;

/// Unconstrained Runge–Kutta baselines in ambient ℝ³ᴺ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalScheme {
    Euler,
    Heun,
    Rk4,
}

fn axpy(x: &[Vec3], s: f64, k: &[Vec3]) -> Vec<Vec3> {
    x.iter().zip(k).map(|(&a, &b)| a + b * s).collect()
}

/// One explicit step of `ṁ = rhs(m)` with no projection back to the sphere.
pub fn step_classical<F>(m: &[Vec3], dt: f64, scheme: ClassicalScheme, rhs: F) -> Vec<Vec3>
where
    F: Fn(&[Vec3]) -> Vec<Vec3>,
{
    let k1 = rhs(m);
    match scheme {
        ClassicalScheme::Euler => axpy(m, dt, &k1),
        ClassicalScheme::Heun => {
            let k2 = rhs(&axpy(m, dt, &k1));
            m.iter().zip(k1.iter().zip(&k2)).map(|(&p, (&a, &b))| p + (a + b) * (0.5 * dt)).collect()
        }
        ClassicalScheme::Rk4 => {
            let k2 = rhs(&axpy(m, 0.5 * dt, &k1));
            let k3 = rhs(&axpy(m, 0.5 * dt, &k2));
            let k4 = rhs(&axpy(m, dt, &k3));
            (0..m.len()).map(|j| m[j] + (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (dt / 6.0)).collect()
        }
    }
}
