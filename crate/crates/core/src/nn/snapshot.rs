//! Model snapshot files.
//!
//! A snapshot is a JSON object:
//!
//! ```text
//! {
//!   "format": "ordcollab-mlp",
//!   "version": 1,
//!   "scalar": "f32",
//!   "layer_dims": [7, 500, 500, 500, 5],
//!   "dropout_rates": [0.1, 0.2, 0.2, 0.3],
//!   "activations": ["relu", "relu", "relu", "softmax"],
//!   "layers": [{"weights": [...], "bias": [...]}, ...],
//!   "train_config": {...} | null
//! }
//! ```
//!
//! `weights` of layer `i` is the `(layer_dims[i], layer_dims[i+1])` matrix in
//! row-major order (one row per input unit). Values are written as the
//! shortest decimal that parses back to the same f64; f32 models widen
//! losslessly, so snapshots round-trip bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::mlp::{Dense, Mlp, Real};
use super::train::TrainConfig;
use crate::error::{Error, Result};

pub const SNAPSHOT_FORMAT: &str = "ordcollab-mlp";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub format: String,
    pub version: u32,
    pub scalar: String,
    pub layer_dims: Vec<usize>,
    pub dropout_rates: Vec<f64>,
    pub activations: Vec<String>,
    pub layers: Vec<LayerData>,
    pub train_config: Option<TrainConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerData {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Snapshot {
    pub fn from_model<T: Real>(model: &Mlp<T>, train_config: Option<&TrainConfig>) -> Snapshot {
        let arch = model.architecture();
        let n = model.layers().len();
        let activations = (0..n)
            .map(|i| if i + 1 < n { "relu" } else { "softmax" }.to_string())
            .collect();
        let widen = |v: &T| v.to_f64().expect("finite weight");
        Snapshot {
            format: SNAPSHOT_FORMAT.into(),
            version: SNAPSHOT_VERSION,
            scalar: T::NAME.into(),
            layer_dims: arch.layer_dims,
            dropout_rates: arch.dropout_rates,
            activations,
            layers: model
                .layers()
                .iter()
                .map(|l| LayerData {
                    weights: l.weights.iter().map(widen).collect(),
                    bias: l.bias.iter().map(widen).collect(),
                })
                .collect(),
            train_config: train_config.cloned(),
        }
    }

    pub fn to_model<T: Real>(&self) -> Result<Mlp<T>> {
        if self.format != SNAPSHOT_FORMAT || self.version != SNAPSHOT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported snapshot {} v{}",
                self.format, self.version
            )));
        }
        if self.scalar != T::NAME {
            return Err(Error::InvalidConfig(format!(
                "snapshot holds {} weights, expected {}",
                self.scalar,
                T::NAME
            )));
        }
        if self.layers.len() + 1 != self.layer_dims.len() {
            return Err(Error::InvalidConfig(
                "layer_dims does not match the number of layers".into(),
            ));
        }
        let layers = self
            .layers
            .iter()
            .zip(self.layer_dims.windows(2))
            .map(|(l, dims)| {
                let weights = Array2::from_shape_vec((dims[0], dims[1]), l.weights.iter().map(|&v| T::of(v)).collect())
                    .map_err(|_| Error::DimensionMismatch {
                        expected: dims[0] * dims[1],
                        found: l.weights.len(),
                    })?;
                if l.bias.len() != dims[1] {
                    return Err(Error::DimensionMismatch {
                        expected: dims[1],
                        found: l.bias.len(),
                    });
                }
                Ok(Dense {
                    weights,
                    bias: Array1::from_iter(l.bias.iter().map(|&v| T::of(v))),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Mlp::from_layers(layers, self.dropout_rates.clone())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, self)?;
        w.flush()
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Snapshot> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }
}
