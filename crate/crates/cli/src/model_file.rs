//! Residual model files (TOML).
//!
//! Either the two-state shorthand
//!
//! ```toml
//! a00 = 0.01
//! a11 = 0.03
//! b00 = 0.99
//! b11 = 0.98
//! ```
//!
//! or full matrices, with `pi` optional (stationary distribution if absent):
//!
//! ```toml
//! a = [[0.9, 0.1], [0.2, 0.8]]
//! b = [[0.95, 0.05], [0.1, 0.9]]
//! pi = [0.5, 0.5]
//! ```

use std::path::Path;

use dac_core::experiments::ModelSpec;
use dac_core::HmmModel;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ModelFile {
    Shorthand {
        a00: f64,
        a11: f64,
        b00: f64,
        b11: f64,
    },
    Full {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        pi: Option<Vec<f64>>,
    },
}

pub fn parse_model(text: &str) -> anyhow::Result<HmmModel> {
    let file: ModelFile = toml::from_str(text)
        .map_err(|e| anyhow::anyhow!("expected {{a00, a11, b00, b11}} or {{a, b, pi?}}: {e}"))?;
    Ok(match file {
        ModelFile::Shorthand { a00, a11, b00, b11 } => ModelSpec { id: 0, a00, a11, b00, b11 }.hmm()?,
        ModelFile::Full { a, b, pi } => HmmModel::new(a, b, pi)?,
    })
}

pub fn read_model(path: &Path) -> anyhow::Result<HmmModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    parse_model(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}
