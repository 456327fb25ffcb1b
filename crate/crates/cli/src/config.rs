use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Predict,
    Simulate,
    Compare,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    Product,
    Alesker,
    Haar2,
    CroftonProduct,
    Af,
    Hodge,
    Constants,
}

impl Identity {
    pub fn name(self) -> &'static str {
        match self {
            Identity::Product => "product",
            Identity::Alesker => "alesker",
            Identity::Haar2 => "haar2",
            Identity::CroftonProduct => "crofton-product",
            Identity::Af => "af",
            Identity::Hodge => "hodge",
            Identity::Constants => "constants",
        }
    }
}

/// Numerical parameters; unset fields fall back to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub bandwidth: Option<usize>,
    pub circle_nodes: Option<usize>,
    pub sphere_z: Option<usize>,
    pub sphere_phi: Option<usize>,
    pub grid_1d: Option<usize>,
    pub grid_torus: Option<usize>,
    pub grid_sphere: Option<[usize; 2]>,
}

/// Inputs of the `verify` mode.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub identity: Option<Identity>,
    pub bodies: Option<String>,
    pub region: Option<String>,
    /// Rows are orthonormal basis vectors of the subspace D.
    pub subspace: Option<String>,
    pub tangent_dims: Option<String>,
    pub edges: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// A run described in TOML; command-line flags override its fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    pub manifold: Option<String>,
    #[serde(default)]
    pub spaces: Vec<String>,
    /// Spaces used for the Monte Carlo side of `compare` (defaults to `spaces`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub estimate_spaces: Vec<String>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid run configuration")
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing run configuration")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
mode = "verify"
manifold = "s2"
spaces = ["eig 6", "eig 6"]

[params]
samples = 1000000
seed = 7
tol = 0.02
grid_sphere = [192, 384]

[verify]
identity = "crofton-product"
tangent_dims = "2, 2"
edges = "1 0 0 0; 0 0 0 1"

[output]
report = "out/report.json"
"#;

    #[test]
    fn round_trip() {
        let a = RunConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(a.mode, Mode::Verify);
        assert_eq!(a.verify.identity, Some(Identity::CroftonProduct));
        let b = RunConfig::from_toml(&a.to_toml().unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("mode = \"predict\"\nmanifolds = \"s2\"").is_err());
        assert!(RunConfig::from_toml("mode = \"sing\"").is_err());
    }
}
