//! Checkpoint serialization for trained potentials.
//!
//! A checkpoint couples the mixture parameters with the reference-process
//! parameters they were trained against, plus training provenance. The
//! format is JSON with shortest-round-trip decimal floats, so reloading a
//! checkpoint reproduces every finite double exactly.

use std::path::Path;

use crate::error::{Error, Result};
use crate::ou::OUParams;
use crate::potential::PotentialModel;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainMeta {
    pub steps: u64,
    pub seed: u64,
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub eps: f64,
    pub b: f64,
    pub m: Vec<f64>,
    #[serde(rename = "T")]
    pub t_horizon: f64,
    pub weights_logits: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub log_diag: Vec<Vec<f64>>,
    pub train_meta: TrainMeta,
}

impl Checkpoint {
    pub fn from_parts(model: &PotentialModel, ou: &OUParams, train_meta: TrainMeta) -> Self {
        let chunk = |flat: &[f64]| -> Vec<Vec<f64>> {
            flat.chunks_exact(model.d()).map(|c| c.to_vec()).collect()
        };
        Self {
            format_version: FORMAT_VERSION,
            d: model.d(),
            k: model.k(),
            eps: model.eps(),
            b: ou.b,
            m: ou.m.clone(),
            t_horizon: ou.horizon,
            weights_logits: model.weights_logits().to_vec(),
            means: chunk(model.means()),
            log_diag: chunk(model.log_diag()),
            train_meta,
        }
    }

    /// Rebuild the model and its reference process.
    pub fn into_parts(&self) -> Result<(PotentialModel, OUParams)> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.means.len() != self.k
            || self.log_diag.len() != self.k
            || self.weights_logits.len() != self.k
            || self
                .means
                .iter()
                .chain(self.log_diag.iter())
                .any(|row| row.len() != self.d)
        {
            return Err(Error::Checkpoint(
                "parameter shapes do not match K and d".into(),
            ));
        }
        let model = PotentialModel::new(
            self.d,
            self.eps,
            self.weights_logits.clone(),
            self.means.concat(),
            self.log_diag.concat(),
        )?;
        let ou = OUParams::new(self.b, self.m.clone(), self.eps, self.t_horizon)?;
        Ok((model, ou))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json =
            serde_json::to_string_pretty(self).map_err(|e| Error::Checkpoint(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(e.to_string()))
    }
}
