//! Shear-rate / viscosity samples and their CSV form.
//!
//! The file has the header `shear_rate,viscosity` and one decimal sample per row.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub shear_rate: f64,
    pub viscosity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RheologyDataset {
    pub name: String,
    pub samples: Vec<Sample>,
}

impl RheologyDataset {
    pub fn new(name: impl Into<String>, samples: Vec<Sample>) -> Result<Self> {
        let ds = Self {
            name: name.into(),
            samples,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn from_pairs(
        name: impl Into<String>,
        pairs: impl IntoIterator<Item = (f64, f64)>,
    ) -> Result<Self> {
        Self::new(
            name,
            pairs
                .into_iter()
                .map(|(shear_rate, viscosity)| Sample {
                    shear_rate,
                    viscosity,
                })
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "dataset '{}' needs at least 2 samples",
                self.name
            )));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if !(s.shear_rate.is_finite() && s.shear_rate >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "sample {i}: shear rate must be finite and >= 0"
                )));
            }
            if !(s.viscosity.is_finite() && s.viscosity > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "sample {i}: viscosity must be finite and > 0"
                )));
            }
        }
        Ok(())
    }

    pub fn as_points(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        self.samples
            .iter()
            .map(|s| (vec![s.shear_rate], s.viscosity))
            .unzip()
    }

    pub fn max_shear_rate(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.shear_rate)
            .fold(0.0, f64::max)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("dataset")
            .to_string();
        Self::parse_csv(&text, name, path)
    }

    /// Parses CSV text; `origin` only labels errors.
    pub fn parse_csv(text: &str, name: String, origin: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        if headers.len() != 2 || &headers[0] != "shear_rate" || &headers[1] != "viscosity" {
            return Err(parse_err(
                1,
                format!(
                    "expected header 'shear_rate,viscosity', found '{}'",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
        let mut samples = Vec::new();
        for record in reader.deserialize::<Sample>() {
            let sample = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                parse_err(line, e.to_string())
            })?;
            samples.push(sample);
        }
        let ds = Self { name, samples };
        ds.validate().map_err(|e| parse_err(0, e.to_string()))?;
        Ok(ds)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &self.samples {
            w.serialize(s).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(io_err(path))
    }
}
