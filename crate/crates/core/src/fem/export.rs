//! Structured export of discrete solutions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::space::FeSpace;
use crate::error::{io_err, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesSolution {
    pub degree: usize,
    pub cells_per_side: usize,
    pub h: f64,
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub velocity_nodes: Vec<[f64; 2]>,
    pub pressure_nodes: Vec<[f64; 2]>,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
    pub p: Vec<f64>,
    /// Multiplier of the zero-mean pressure constraint.
    pub mu: f64,
}

impl StokesSolution {
    pub fn from_vector(space: &FeSpace, x: &[f64]) -> Result<Self> {
        if x.len() != space.n_unknowns() {
            return Err(Error::DimensionMismatch {
                expected: space.n_unknowns(),
                got: x.len(),
            });
        }
        let nv = space.velocity.n_dofs;
        let np = space.pressure.n_dofs;
        Ok(Self {
            degree: space.degree,
            cells_per_side: space.mesh.m,
            h: space.mesh.h,
            n_vertices: space.mesh.vertices.len(),
            n_triangles: space.mesh.n_triangles(),
            velocity_nodes: space.velocity.coords.clone(),
            pressure_nodes: space.pressure.coords.clone(),
            ux: x[..nv].to_vec(),
            uy: x[nv..2 * nv].to_vec(),
            p: x[2 * nv..2 * nv + np].to_vec(),
            mu: x[2 * nv + np],
        })
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * self.ux.len() + self.p.len() + 1);
        x.extend(&self.ux);
        x.extend(&self.uy);
        x.extend(&self.p);
        x.push(self.mu);
        x
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).expect("solution serializes");
        std::fs::write(path, text).map_err(io_err(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}
