//! Residual and exact Jacobian of the discrete generalized-Newtonian Stokes
//! system with Dirichlet velocity data and a zero-mean pressure multiplier.
//!
//! Velocity rows hold `⟨τ(ε(u_h)), ε(w)⟩ − ⟨p_h, ∇·w⟩ − ℓ(w)` with the load
//! `ℓ(w) = ⟨τ_f(ε(ū)), ε(w)⟩ − ⟨p̄, ∇·w⟩` evaluated from the exact fields at
//! the quadrature points, so `(ū, p̄)` solves the continuous problem with
//! forcing law `τ_f`. Pressure rows hold `⟨∇·u_h, q⟩ + μ⟨1, q⟩`, the last
//! row `∫ p_h`, and boundary velocity rows `u_i − ū(x_i)`.

use super::basis::Tabulation;
use super::manufactured::ManufacturedCase;
use super::quadrature::{triangle_rule, TriangleRule};
use super::space::FeSpace;
use crate::rheology::{SymTensor2, ViscosityModel};

/// Quadrature degree used for assembly with velocity degree `j`.
pub fn assembly_degree(j: usize) -> usize {
    2 * j + 1
}

pub struct StokesProblem<'a> {
    pub space: &'a FeSpace,
    pub model: &'a ViscosityModel,
    rule: TriangleRule,
    tab_u: Tabulation,
    tab_p: Tabulation,
    load: Vec<f64>,
    /// Prescribed value of each Dirichlet unknown.
    dirichlet: Vec<Option<f64>>,
}

/// Per-element contributions in the local layout `[u_x | u_y | p]`.
struct Local {
    res: Vec<f64>,
    jac: Vec<f64>,
    /// `∫ ψ_k` for each local pressure basis function.
    mass: Vec<f64>,
}

impl<'a> StokesProblem<'a> {
    /// `model` defines the operator; `forcing` the law used to build the load
    /// from the exact fields of `case`.
    pub fn new(
        space: &'a FeSpace,
        model: &'a ViscosityModel,
        forcing: &ViscosityModel,
        case: &ManufacturedCase,
    ) -> Self {
        let rule = triangle_rule(assembly_degree(space.degree));
        let tab_u = Tabulation::new(&space.velocity_basis, &rule);
        let tab_p = Tabulation::new(&space.pressure_basis, &rule);
        let mut dirichlet = vec![None; space.n_unknowns()];
        for (d, &pt) in space.velocity.coords.iter().enumerate() {
            if space.velocity.on_boundary[d] {
                let u = (case.velocity)(pt);
                dirichlet[space.ux(d)] = Some(u[0]);
                dirichlet[space.uy(d)] = Some(u[1]);
            }
        }
        let mut problem = Self {
            space,
            model,
            rule,
            tab_u,
            tab_p,
            load: Vec::new(),
            dirichlet,
        };
        problem.load = problem.assemble_load(forcing, case);
        problem
    }

    pub fn n_unknowns(&self) -> usize {
        self.space.n_unknowns()
    }

    pub fn is_dirichlet(&self, i: usize) -> bool {
        self.dirichlet[i].is_some()
    }

    /// Overwrites boundary velocity unknowns with their prescribed values.
    pub fn apply_dirichlet(&self, x: &mut [f64]) {
        for (xi, d) in x.iter_mut().zip(&self.dirichlet) {
            if let Some(v) = d {
                *xi = *v;
            }
        }
    }

    fn assemble_load(&self, forcing: &ViscosityModel, case: &ManufacturedCase) -> Vec<f64> {
        let space = self.space;
        let nb = self.tab_u.n_basis;
        let mut load = vec![0.0; space.n_unknowns()];
        let mut gu = vec![[0.0; 2]; nb];
        for t in 0..space.mesh.n_triangles() {
            let map = space.mesh.element_map(t);
            let vdofs = space.velocity.element(t);
            for (q, (rp, w)) in self.rule.points.iter().zip(&self.rule.weights).enumerate() {
                let wq = w * map.det.abs();
                let pt = map.point(*rp);
                let eps = SymTensor2::strain_rate((case.velocity_grad)(pt));
                let tau = forcing.stress(&eps).tau;
                let p = (case.pressure)(pt);
                for (g, rg) in gu.iter_mut().zip(self.tab_u.grads_at(q)) {
                    *g = map.grad(*rg);
                }
                for i in 0..nb {
                    let g = gu[i];
                    load[space.ux(vdofs[i])] += wq * (tau.xx * g[0] + tau.xy * g[1] - p * g[0]);
                    load[space.uy(vdofs[i])] += wq * (tau.xy * g[0] + tau.yy * g[1] - p * g[1]);
                }
            }
        }
        load
    }

    fn local(&self, t: usize, x: &[f64], unknowns: &[usize], with_jac: bool) -> Local {
        let nb = self.tab_u.n_basis;
        let npb = self.tab_p.n_basis;
        let nl = 2 * nb + npb;
        let mut out = Local {
            res: vec![0.0; nl],
            jac: if with_jac {
                vec![0.0; nl * nl]
            } else {
                Vec::new()
            },
            mass: vec![0.0; npb],
        };
        let map = self.space.mesh.element_map(t);
        let xl: Vec<f64> = unknowns.iter().map(|&i| x[i]).collect();
        let mut gu = vec![[0.0; 2]; nb];
        let mut tests = vec![SymTensor2::ZERO; 2 * nb];
        let mut proj = vec![0.0; 2 * nb];
        for (q, w) in self.rule.weights.iter().enumerate() {
            let wq = w * map.det.abs();
            for (g, rg) in gu.iter_mut().zip(self.tab_u.grads_at(q)) {
                *g = map.grad(*rg);
            }
            let psi = self.tab_p.values_at(q);
            let mut grad = [[0.0; 2]; 2];
            for i in 0..nb {
                for k in 0..2 {
                    grad[0][k] += xl[i] * gu[i][k];
                    grad[1][k] += xl[nb + i] * gu[i][k];
                }
            }
            let p: f64 = (0..npb).map(|k| xl[2 * nb + k] * psi[k]).sum();
            let eps = SymTensor2::strain_rate(grad);
            let div = grad[0][0] + grad[1][1];
            let se = self.model.stress(&eps);
            for i in 0..nb {
                let g = gu[i];
                tests[i] = SymTensor2::new(g[0], 0.5 * g[1], 0.0);
                tests[nb + i] = SymTensor2::new(0.0, 0.5 * g[0], g[1]);
            }
            for a in 0..2 * nb {
                let g = gu[a % nb][a / nb];
                out.res[a] += wq * (se.tau.ddot(&tests[a]) - p * g);
                proj[a] = eps.ddot(&tests[a]);
            }
            for k in 0..npb {
                out.res[2 * nb + k] += wq * psi[k] * div;
                out.mass[k] += wq * psi[k];
            }
            if with_jac {
                for a in 0..2 * nb {
                    let row = &mut out.jac[a * nl..(a + 1) * nl];
                    for b in 0..2 * nb {
                        row[b] += wq * (se.a * tests[a].ddot(&tests[b]) + se.b * proj[a] * proj[b]);
                    }
                    let g = gu[a % nb][a / nb];
                    for k in 0..npb {
                        row[2 * nb + k] -= wq * psi[k] * g;
                    }
                }
                for k in 0..npb {
                    let row = &mut out.jac[(2 * nb + k) * nl..(2 * nb + k + 1) * nl];
                    for b in 0..2 * nb {
                        row[b] += wq * psi[k] * gu[b % nb][b / nb];
                    }
                }
            }
        }
        out
    }

    /// Full residual vector at `x`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let space = self.space;
        let mu_idx = space.multiplier();
        let mu = x[mu_idx];
        let mut r: Vec<f64> = self.load.iter().map(|l| -l).collect();
        let mut unknowns = Vec::new();
        for t in 0..space.mesh.n_triangles() {
            space.element_unknowns(t, &mut unknowns);
            let loc = self.local(t, x, &unknowns, false);
            for (&i, v) in unknowns.iter().zip(&loc.res) {
                r[i] += v;
            }
            let np0 = unknowns.len() - loc.mass.len();
            for (k, m) in loc.mass.iter().enumerate() {
                let pi = unknowns[np0 + k];
                r[pi] += mu * m;
                r[mu_idx] += x[pi] * m;
            }
        }
        for (i, d) in self.dirichlet.iter().enumerate() {
            if let Some(v) = d {
                r[i] = x[i] - v;
            }
        }
        r
    }

    /// Sparsity pattern as `(row, col)` pairs, in the order produced by
    /// [`Self::jacobian_values`]. Repeated pairs are summed.
    pub fn pattern(&self) -> Vec<(usize, usize)> {
        self.walk(None).0
    }

    /// Jacobian entries at `x`, aligned with [`Self::pattern`].
    pub fn jacobian_values(&self, x: &[f64]) -> Vec<f64> {
        self.walk(Some(x)).1
    }

    fn walk(&self, x: Option<&[f64]>) -> (Vec<(usize, usize)>, Vec<f64>) {
        let space = self.space;
        let mu_idx = space.multiplier();
        let mut pattern = Vec::new();
        let mut values = Vec::new();
        let mut unknowns = Vec::new();
        let zeros;
        let xs = match x {
            Some(x) => x,
            None => {
                zeros = vec![0.0; space.n_unknowns()];
                &zeros
            }
        };
        let want_values = x.is_some();
        for t in 0..space.mesh.n_triangles() {
            space.element_unknowns(t, &mut unknowns);
            let nl = unknowns.len();
            let loc = if want_values {
                Some(self.local(t, xs, &unknowns, true))
            } else {
                None
            };
            for (a, &row) in unknowns.iter().enumerate() {
                if self.is_dirichlet(row) {
                    continue;
                }
                for (b, &col) in unknowns.iter().enumerate() {
                    match &loc {
                        Some(l) => values.push(l.jac[a * nl + b]),
                        None => pattern.push((row, col)),
                    }
                }
            }
            let np0 = nl - space.pressure_basis.len();
            for k in 0..space.pressure_basis.len() {
                let pi = unknowns[np0 + k];
                match &loc {
                    Some(l) => values.extend([l.mass[k], l.mass[k]]),
                    None => pattern.extend([(pi, mu_idx), (mu_idx, pi)]),
                }
            }
        }
        for (i, d) in self.dirichlet.iter().enumerate() {
            if d.is_some() {
                match x {
                    Some(_) => values.push(1.0),
                    None => pattern.push((i, i)),
                }
            }
        }
        (pattern, values)
    }

    /// Jacobian applied to `v`, assembled densely by rows of the pattern.
    pub fn jacobian_matvec(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_unknowns()];
        for ((r, c), a) in self.pattern().into_iter().zip(self.jacobian_values(x)) {
            out[r] += a * v[c];
        }
        out
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
