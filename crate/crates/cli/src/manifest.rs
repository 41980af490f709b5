//! Run manifests: every resolved input of a command, enough to rerun it.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use quasishadow::model::ModelFile;
use quasishadow::ShadowingParams;

/// Command parameters. Unset fields are omitted from the manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[i64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

/// Derived constants, recorded for inspection; ignored on replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub l0: f64,
    pub delta: f64,
    pub delta_two_sided: f64,
    pub delta_k: f64,
    pub alpha: f64,
    pub r1: f64,
    pub r2: f64,
    pub k: u32,
    pub lambda_k: f64,
    pub limit_tol: f64,
}

impl From<&ShadowingParams> for Derived {
    fn from(p: &ShadowingParams) -> Self {
        Derived {
            l0: p.l0,
            delta: p.delta,
            delta_two_sided: p.delta_two_sided,
            delta_k: p.delta_k,
            alpha: p.alpha,
            r1: p.r1,
            r2: p.r2,
            k: p.k,
            lambda_k: p.lambda_k,
            limit_tol: p.limit_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub model_label: String,
    pub params: Params,
    pub inputs: Inputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived: Option<Derived>,
    pub model: ModelFile,
}

impl Manifest {
    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.toml")
    }

    pub fn write(&self, out: &Path) -> Result<()> {
        let path = out.join(Self::file_name(&self.command));
        let text = toml::to_string(self).context("serializing manifest")?;
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}
