//! `RunConfig` as JSON: the `--config` file format and the config echo in
//! every report.

use std::path::Path;

use qlens_core::checks::RunConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every field is optional; missing fields keep their current value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub q: Option<f64>,
    pub l: Option<u32>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "W")]
    pub w: Option<usize>,
    pub tol: Option<f64>,
    pub margin: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Overwrites the fields of `cfg` that are set here.
    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$( if let Some(v) = self.$f { cfg.$f = v; } )*};
        }
        set!(q, l, n, w, tol, margin, seed, samples);
    }
}

/// The config echo included in reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub q: f64,
    pub l: u32,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "W")]
    pub w: usize,
    pub tol: f64,
    pub margin: usize,
    pub seed: u64,
    pub samples: usize,
}

impl From<&RunConfig> for ConfigEcho {
    fn from(c: &RunConfig) -> Self {
        ConfigEcho { q: c.q, l: c.l, n: c.n, w: c.w, tol: c.tol, margin: c.margin, seed: c.seed, samples: c.samples }
    }
}
