use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{Classifier, ClassifierConfig, ModelError, ModelParameters};

pub const CHECKPOINT_FORMAT: &str = "lingtransfer-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StoredTensor {
    shape: Vec<usize>,
    /// base64 of little-endian f64 bytes
    data: String,
}

/// Serialized model: config plus every tensor keyed by component path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config: ClassifierConfig,
    tensors: BTreeMap<String, StoredTensor>,
}

impl Checkpoint {
    pub fn from_model(model: &Classifier) -> Self {
        let tensors = model
            .params
            .tensors()
            .into_iter()
            .map(|t| {
                let bytes: Vec<u8> = t.data.iter().flat_map(|x| x.to_le_bytes()).collect();
                (
                    t.path,
                    StoredTensor {
                        shape: t.shape,
                        data: STANDARD.encode(bytes),
                    },
                )
            })
            .collect();
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            config: model.config.clone(),
            tensors,
        }
    }

    pub fn into_model(mut self) -> Result<Classifier, ModelError> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(ModelError::Checkpoint(format!("unknown format {:?}", self.format)));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(ModelError::Checkpoint(format!("unsupported version {}", self.version)));
        }
        self.config.validate()?;
        let mut params = ModelParameters::zeros(&self.config);
        for t in params.tensors_mut() {
            let stored = self
                .tensors
                .remove(&t.path)
                .ok_or_else(|| ModelError::Checkpoint(format!("missing tensor {}", t.path)))?;
            if stored.shape != t.shape {
                return Err(ModelError::Checkpoint(format!(
                    "tensor {}: shape {:?}, expected {:?}",
                    t.path, stored.shape, t.shape
                )));
            }
            let bytes = STANDARD
                .decode(stored.data.as_bytes())
                .map_err(|e| ModelError::Checkpoint(format!("tensor {}: {e}", t.path)))?;
            if bytes.len() != t.data.len() * 8 {
                return Err(ModelError::Checkpoint(format!("tensor {}: wrong byte length", t.path)));
            }
            for (x, chunk) in t.data.iter_mut().zip(bytes.chunks_exact(8)) {
                *x = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
            }
        }
        if let Some(extra) = self.tensors.keys().next() {
            return Err(ModelError::Checkpoint(format!("unexpected tensor {extra}")));
        }
        Ok(Classifier {
            config: self.config,
            params,
        })
    }
}

pub fn save_checkpoint(path: &Path, model: &Classifier) -> Result<(), ModelError> {
    fs::write(path, serde_json::to_vec(&Checkpoint::from_model(model))?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Classifier, ModelError> {
    let ck: Checkpoint = serde_json::from_slice(&fs::read(path)?)?;
    ck.into_model()
}
