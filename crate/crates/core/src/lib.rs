//! Lie-group one-step integrators for ODEs on products of unit spheres.

pub mod error;
pub mod harness;
pub mod integrators;
pub mod llg;
pub mod rigid_body;
pub mod so3;
pub mod sphere;

pub use error::{Error, Result};
pub use so3::{AlgebraElement, ExpChoice, Vec3};
pub use sphere::{GeneratorField, GeneratorVariant, SigmaPolicy, SphereField, System};
