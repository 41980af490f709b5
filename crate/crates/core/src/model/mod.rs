//! Dynamically coherent partially hyperbolic models on `T³` with exact
//! foliation oracles.

mod base;
mod constants;
mod file;
mod iterate;
mod leaves;
mod skew;

pub use base::{eigen_frame, BaseMatrix, EigenFrame};
pub use constants::{
    SystemRates, TransversalityConstants, ALPHA_FRACTION, DELTA0, DELTA1, L0_SAFETY,
};
pub use file::ModelFile;
pub use iterate::IteratedSystem;
pub use leaves::{LeafClass, Plaque, COMMON_LEAF_TOL, LIFT_LIMIT, LINE_TOL};
pub use skew::{FourierMode, SkewModel, DEFAULT_SERIES_TOL};
