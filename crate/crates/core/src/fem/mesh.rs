//! Structured triangulations of the square `(−0.5, 0.5)²`.

use std::collections::HashSet;

use crate::error::{Error, Result};

pub const DOMAIN_MIN: f64 = -0.5;
pub const DOMAIN_MAX: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    /// Cells per side.
    pub m: usize,
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_vertices: Vec<bool>,
    /// Largest element diameter.
    pub h: f64,
}

/// Affine map `x = x0 + J (ξ, η)` of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMap {
    pub x0: [f64; 2],
    pub jac: [[f64; 2]; 2],
    /// `J^{-T}`, mapping reference gradients to physical ones.
    pub inv_t: [[f64; 2]; 2],
    pub det: f64,
}

impl ElementMap {
    pub fn new(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Self {
        let jac = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv_t = [
            [jac[1][1] / det, -jac[1][0] / det],
            [-jac[0][1] / det, jac[0][0] / det],
        ];
        Self {
            x0: a,
            jac,
            inv_t,
            det,
        }
    }

    pub fn point(&self, r: [f64; 2]) -> [f64; 2] {
        [
            self.x0[0] + self.jac[0][0] * r[0] + self.jac[0][1] * r[1],
            self.x0[1] + self.jac[1][0] * r[0] + self.jac[1][1] * r[1],
        ]
    }

    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }
}

/// Uniform `m × m` grid of squares, each split along the diagonal from its
/// lower-left to its upper-right corner.
pub fn build_mesh(m: usize) -> Result<Mesh> {
    if m == 0 {
        return Err(Error::InvalidInput(
            "a mesh needs at least one cell per side".into(),
        ));
    }
    let np = m + 1;
    let step = (DOMAIN_MAX - DOMAIN_MIN) / m as f64;
    let mut vertices = Vec::with_capacity(np * np);
    let mut boundary_vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            vertices.push([DOMAIN_MIN + i as f64 * step, DOMAIN_MIN + j as f64 * step]);
            boundary_vertices.push(i == 0 || j == 0 || i == m || j == m);
        }
    }
    let id = |i: usize, j: usize| j * np + i;
    let mut triangles = Vec::with_capacity(2 * m * m);
    for j in 0..m {
        for i in 0..m {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Ok(Mesh {
        m,
        vertices,
        triangles,
        boundary_vertices,
        h: std::f64::consts::SQRT_2 / m as f64,
    })
}

impl Mesh {
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn element_map(&self, t: usize) -> ElementMap {
        let [a, b, c] = self.triangles[t];
        ElementMap::new(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// Signed area of triangle `t`.
    pub fn area(&self, t: usize) -> f64 {
        0.5 * self.element_map(t).det
    }

    /// Edges with a single adjacent triangle, as sorted vertex pairs.
    pub fn boundary_edges(&self) -> HashSet<(usize, usize)> {
        let mut once = HashSet::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let e = (a.min(b), a.max(b));
                if !once.remove(&e) {
                    once.insert(e);
                }
            }
        }
        once
    }

    /// Triangle containing `p` and the reference coordinates of `p` in it.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 2])> {
        let tol = 1e-12;
        if p.iter()
            .any(|&x| !(DOMAIN_MIN - tol..=DOMAIN_MAX + tol).contains(&x))
        {
            return None;
        }
        let m = self.m as f64;
        let cell = |x: f64| (((x - DOMAIN_MIN) * m).floor().max(0.0) as usize).min(self.m - 1);
        let (i, j) = (cell(p[0]), cell(p[1]));
        let a = (p[0] - DOMAIN_MIN) * m - i as f64;
        let b = (p[1] - DOMAIN_MIN) * m - j as f64;
        let base = 2 * (j * self.m + i);
        if a >= b {
            Some((base, [a - b, b]))
        } else {
            Some((base + 1, [a, b - a]))
        }
    }
}
