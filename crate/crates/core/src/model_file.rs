//! JSON persistence for trained models. Floats serialize with serde_json's
//! shortest round-trip representation, so save -> load -> save is
//! byte-stable and log-likelihoods survive persistence exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::ActionAlphabet;
use crate::error::{Error, Result};
use crate::hmm::HmmModel;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub alphabet: Vec<String>,
    pub m: usize,
    pub prior: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
    pub emission: Vec<Vec<f64>>,
    /// Free-form metadata: seed, training config, corpus digest.
    pub provenance: Value,
}

impl ModelFile {
    pub fn from_model(model: &HmmModel, provenance: Value) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            alphabet: model.alphabet().symbols().to_vec(),
            m: model.num_states(),
            prior: model.prior().to_vec(),
            transition: model.transition().to_vec(),
            emission: model.emission().to_vec(),
            provenance,
        }
    }

    /// Reconstruct the model, re-validating every invariant.
    pub fn to_model(&self) -> Result<HmmModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model file format version {}",
                self.format_version
            )));
        }
        if self.m != self.prior.len() {
            return Err(Error::InvalidArgument(format!(
                "declared M = {} but prior has {} entries",
                self.m,
                self.prior.len()
            )));
        }
        let alphabet = ActionAlphabet::new(self.alphabet.clone())?;
        HmmModel::new(
            alphabet,
            self.prior.clone(),
            self.transition.clone(),
            self.emission.clone(),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let file: ModelFile = serde_json::from_str(&text)?;
        // Reject files whose arrays violate model invariants up front.
        file.to_model()?;
        Ok(file)
    }
}
