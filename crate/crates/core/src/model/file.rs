//! TOML description of a skew model.
//!
//! ```toml
//! matrix = [[2, 1], [1, 1]]
//! omega = 0.05
//! series_tol = 1e-12          # optional
//!
//! [[modes]]
//! freq = [1, 0]
//! sin_amp = 0.02
//! cos_amp = 0.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::base::BaseMatrix;
use super::skew::{FourierMode, SkewModel, DEFAULT_SERIES_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub matrix: [[i64; 2]; 2],
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub modes: Vec<FourierMode>,
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
}

fn default_series_tol() -> f64 {
    DEFAULT_SERIES_TOL
}

impl ModelFile {
    pub fn from_model(m: &SkewModel) -> Self {
        ModelFile {
            matrix: m.base().entries(),
            omega: m.omega(),
            modes: m.modes().to_vec(),
            series_tol: m.series_tol(),
        }
    }

    pub fn build(&self) -> Result<SkewModel> {
        let base = BaseMatrix::new(self.matrix)?;
        SkewModel::new(base, self.omega, self.modes.clone(), self.series_tol)
    }
}

impl SkewModel {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let file: ModelFile = toml::from_str(s).map_err(|e| Error::Model(e.to_string()))?;
        file.build()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&ModelFile::from_model(self)).expect("model file serializes")
    }

    /// A built-in name (`linear`, `default`) or a path to a TOML model file.
    pub fn resolve(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(SkewModel::linear(BaseMatrix::cat())),
            "default" => Ok(SkewModel::default_skew()),
            path => {
                let path = Path::new(path);
                if !path.exists() {
                    return Err(Error::InvalidInput(format!(
                        "model {} is neither a built-in name nor an existing file",
                        path.display()
                    )));
                }
                SkewModel::from_toml_str(&std::fs::read_to_string(path)?)
            }
        }
    }
}
