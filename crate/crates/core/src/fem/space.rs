//! Continuous Taylor–Hood spaces: vector `P_j` velocity and scalar `P_{j−1}`
//! pressure.
//!
//! Unknowns are laid out as `[u_x | u_y | p | μ]`, where `μ` is the
//! multiplier of the zero-mean pressure constraint.

use std::collections::HashMap;

use super::basis::LagrangeBasis;
use super::mesh::Mesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub degree: usize,
    pub n_dofs: usize,
    /// Global dof of local node `i` of element `t` at `t * per_element + i`.
    pub element_dofs: Vec<usize>,
    pub per_element: usize,
    pub coords: Vec<[f64; 2]>,
    pub on_boundary: Vec<bool>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, basis: &LagrangeBasis) -> Self {
        let edges = mesh.boundary_edges();
        let mut index: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        let mut element_dofs = Vec::with_capacity(mesh.n_triangles() * basis.len());
        let mut coords = Vec::new();
        let mut on_boundary = Vec::new();
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let map = mesh.element_map(t);
            for (i, alpha) in basis.nodes.iter().enumerate() {
                let mut key: Vec<(usize, usize)> = (0..3)
                    .filter(|&k| alpha[k] > 0)
                    .map(|k| (tri[k], alpha[k]))
                    .collect();
                key.sort_unstable();
                let next = coords.len();
                let dof = *index.entry(key.clone()).or_insert(next);
                if dof == next {
                    coords.push(map.point(basis.node_point(i)));
                    on_boundary.push(match key.as_slice() {
                        [(v, _)] => mesh.boundary_vertices[*v],
                        [(a, _), (b, _)] => edges.contains(&(*a.min(b), *a.max(b))),
                        _ => false,
                    });
                }
                element_dofs.push(dof);
            }
        }
        Self {
            degree: basis.degree,
            n_dofs: coords.len(),
            element_dofs,
            per_element: basis.len(),
            coords,
            on_boundary,
        }
    }

    pub fn element(&self, t: usize) -> &[usize] {
        &self.element_dofs[t * self.per_element..(t + 1) * self.per_element]
    }
}

#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: Mesh,
    /// Velocity degree `j`.
    pub degree: usize,
    pub velocity_basis: LagrangeBasis,
    pub pressure_basis: LagrangeBasis,
    pub velocity: DofMap,
    pub pressure: DofMap,
}

impl FeSpace {
    pub fn new(mesh: Mesh, degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidInput(format!(
                "Taylor–Hood needs velocity degree >= 2, got {degree}"
            )));
        }
        let velocity_basis = LagrangeBasis::new(degree);
        let pressure_basis = LagrangeBasis::new(degree - 1);
        let velocity = DofMap::new(&mesh, &velocity_basis);
        let pressure = DofMap::new(&mesh, &pressure_basis);
        Ok(Self {
            mesh,
            degree,
            velocity_basis,
            pressure_basis,
            velocity,
            pressure,
        })
    }

    pub fn n_unknowns(&self) -> usize {
        2 * self.velocity.n_dofs + self.pressure.n_dofs + 1
    }

    pub fn ux(&self, dof: usize) -> usize {
        dof
    }

    pub fn uy(&self, dof: usize) -> usize {
        self.velocity.n_dofs + dof
    }

    pub fn p(&self, dof: usize) -> usize {
        2 * self.velocity.n_dofs + dof
    }

    pub fn multiplier(&self) -> usize {
        self.n_unknowns() - 1
    }

    /// Global unknowns of element `t`: x-velocity dofs, y-velocity dofs,
    /// then pressure dofs.
    pub fn element_unknowns(&self, t: usize, out: &mut Vec<usize>) {
        out.clear();
        let v = self.velocity.element(t);
        out.extend(v.iter().map(|&d| self.ux(d)));
        out.extend(v.iter().map(|&d| self.uy(d)));
        out.extend(self.pressure.element(t).iter().map(|&d| self.p(d)));
    }
}
