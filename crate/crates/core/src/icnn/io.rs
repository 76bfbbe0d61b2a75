use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Activation, Branch, DenseLayer, IcnnModel, InputAffine, OutputAffine};
use crate::error::{io_err, Error, Result};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LayerFile {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema_version: u32,
    architecture: Vec<usize>,
    activation: Activation,
    sign: i64,
    input_affine: InputAffine,
    output_affine: OutputAffine,
    layers: Vec<LayerFile>,
}

impl IcnnModel {
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            architecture: self.architecture.clone(),
            activation: self.activation,
            sign: self.branch.sign() as i64,
            input_affine: self.input_affine.clone(),
            output_affine: self.output_affine,
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    w: l.weights.rows().into_iter().map(|r| r.to_vec()).collect(),
                    b: l.bias.to_vec(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    /// Parses a model file. `origin` is used only for error messages.
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
        if file.schema_version != MODEL_SCHEMA_VERSION {
            return Err(parse_err(
                0,
                format!("unsupported schema_version {}", file.schema_version),
            ));
        }
        let branch = Branch::from_sign(file.sign).ok_or_else(|| {
            parse_err(
                0,
                format!("field 'sign' must be 1 or -1, got {}", file.sign),
            )
        })?;
        let mut layers = Vec::with_capacity(file.layers.len());
        for (l, lf) in file.layers.into_iter().enumerate() {
            let rows = lf.w.len();
            let cols = lf.w.first().map_or(0, Vec::len);
            if lf.w.iter().any(|r| r.len() != cols) {
                return Err(parse_err(0, format!("field 'layers[{l}].w' is ragged")));
            }
            let weights =
                Array2::from_shape_vec((rows, cols), lf.w.into_iter().flatten().collect())
                    .map_err(|e| parse_err(0, format!("field 'layers[{l}].w': {e}")))?;
            layers.push(DenseLayer {
                weights,
                bias: Array1::from(lf.b),
            });
        }
        let model = IcnnModel {
            architecture: file.architecture,
            layers,
            activation: file.activation,
            branch,
            input_affine: file.input_affine,
            output_affine: file.output_affine,
        };
        model.validate().map_err(|e| parse_err(0, e.to_string()))?;
        Ok(model)
    }
}

pub fn save_model(model: &IcnnModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model.to_json()).map_err(io_err(path))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<IcnnModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    IcnnModel::from_json(&text, path)
}
