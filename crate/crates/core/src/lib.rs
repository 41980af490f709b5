//! Quasi-shadowing and quasi-stability for dynamically coherent skew
//! products over hyperbolic toral automorphisms.
//!
//! The crate builds δ-pseudo-orbits of a map `f(p, z) = (A p, z + ω + φ(p))`
//! on `T³`, traces them by sequences that follow true orbits up to a motion
//! along the center (fiber) circle at every step, and samples the resulting
//! semiconjugacy `π ∘ g = τ ∘ f ∘ π` for perturbed maps `g`.

pub mod error;
pub mod formats;
pub mod model;
pub mod oracle;

pub mod orbit;
pub mod shadow;
pub mod stability;

pub mod torus;

pub use error::{Error, Result};
pub use model::{BaseMatrix, LeafClass, SkewModel};
pub use orbit::{PerturbedMap, PseudoOrbit};
pub use shadow::{ShadowingParams, ShadowingTrace};
pub use torus::TorusPoint;
