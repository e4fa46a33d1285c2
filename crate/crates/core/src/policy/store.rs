//! Trained weights on disk, one `[[policy]]` table per level.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PolicyWeights;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainedPolicy {
    pub level_id: u32,
    pub weights: Vec<f64>,
    pub temperature: f64,
    pub training_seed: u64,
}

impl TrainedPolicy {
    pub fn new(level_id: u32, weights: &PolicyWeights, training_seed: u64) -> Self {
        TrainedPolicy {
            level_id,
            weights: weights.weights().to_vec(),
            temperature: weights.temperature(),
            training_seed,
        }
    }

    pub fn to_weights(&self) -> Result<PolicyWeights> {
        PolicyWeights::from_slice(&self.weights, self.temperature)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyStore {
    #[serde(rename = "policy", default)]
    pub policies: Vec<TrainedPolicy>,
}

impl PolicyStore {
    pub fn weights_for(&self, level_id: u32) -> Result<PolicyWeights> {
        self.policies
            .iter()
            .find(|p| p.level_id == level_id)
            .ok_or(Error::MissingWeights(level_id))?
            .to_weights()
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let store: PolicyStore =
            toml::from_str(text).map_err(|e| Error::schema(origin, e.message().to_string()))?;
        for p in &store.policies {
            p.to_weights().map_err(|e| Error::schema(origin, e.to_string()))?;
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("policy store serializes")
    }

    pub fn save(&self, path: &Path, header: Option<&str>) -> Result<()> {
        let mut text = header.map(|h| format!("# {h}\n")).unwrap_or_default();
        text.push_str(&self.to_toml());
        fs::write(path, text)?;
        Ok(())
    }
}
