use thiserror::Error;

use crate::model::LeafClass;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model construction failed: {0}")]
    Model(String),

    #[error("point is off the {class} leaf (residual {residual:e})")]
    LeafMembership { class: LeafClass, residual: f64 },

    #[error("unsupported leaf pair ({0}, {1})")]
    UnsupportedPair(LeafClass, LeafClass),

    #[error("base displacement {0:e} exceeds the lift-unambiguity bound 0.25")]
    LiftAmbiguity(f64),

    #[error("intersection point lies {distance:e} from its inputs, beyond L0*radius = {bound:e}")]
    OutsideRadius { distance: f64, bound: f64 },

    /// A construction parameter or one of the validity radii is violated.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("pseudo-orbit {direction} defect {defect:e} exceeds the admissible {bound:e}")]
    DefectTooLarge {
        direction: &'static str,
        defect: f64,
        bound: f64,
    },

    #[error("construction failed at index {index}: {source}")]
    Construction {
        index: i64,
        #[source]
        source: Box<Error>,
    },

    #[error("window exhausted at n = {last_n} before convergence (last Cauchy gap {gap:e})")]
    InsufficientWindow { last_n: usize, gap: f64 },

    #[error("inversion did not converge (residual {0:e})")]
    Inversion(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at(self, index: i64) -> Error {
        match self {
            e @ Error::Construction { .. } => e,
            e => Error::Construction {
                index,
                source: Box::new(e),
            },
        }
    }
}
